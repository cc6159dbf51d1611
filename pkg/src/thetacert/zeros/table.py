"""Tables of zeta-zero ordinates and their text / packed file formats.

Each ordinate is stored as a closed interval with endpoints at scale 2**-128
(``lo_raw / 2**128`` .. ``hi_raw / 2**128``), so tables much more accurate
than double precision survive a round trip.

Text format (ASCII, LF): optional ``#``-prefixed header lines of the form
``# key=value`` followed by one decimal ordinate per line.  Without an
``abs_accuracy`` header each value is taken to be correct to one unit in its
last printed digit.

Packed format: the line ``ZEROS-PACKED v1`` followed by 18-byte little-endian
records ``(frac: u64, int: u64, e: u16)``; the ordinate lies within 2**-e of
the 64.64 fixed-point midpoint ``int + frac / 2**64``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from ..interval.extended import ExtendedReal
from ..interval.interval import Interval, dyadic_to_float

SCALE = 128
_ONE = 1 << SCALE
PACKED_MAGIC = b"ZEROS-PACKED v1\n"
_RECORD = struct.Struct("<QQH")
# the first zero is near 14.1347; nothing below this height can be an ordinate
FIRST_ZERO_FLOOR = 14


class ZeroTableError(ValueError):
    """Malformed or inconsistent zero table; carries the line or index."""

    def __init__(self, message: str, line: int | None = None, index: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if index is not None:
            where.append(f"index {index}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.index = index


class ZeroMismatchError(ZeroTableError):
    pass


@dataclass(frozen=True)
class TableMeta:
    count: int
    max_gamma: float
    source: str
    abs_accuracy: float
    complete_to: float | None = None


def _frac_to_raw(x: Fraction, up: bool) -> int:
    q, r = divmod(x.numerator * _ONE, x.denominator)
    return q + 1 if (up and r) else q


def _raw_to_decimal(raw: int, digits: int) -> str:
    """Nearest decimal with ``digits`` places to raw / 2**128."""
    scaled = raw * 10**digits
    q, r = divmod(scaled, _ONE)
    if 2 * r >= _ONE:
        q += 1
    s = str(q).rjust(digits + 1, "0")
    return f"{s[:-digits]}.{s[-digits:]}" if digits else s


class ZeroTable:
    """Strictly increasing positive zero ordinates with certified enclosures."""

    def __init__(self, lo_raw, hi_raw, source: str = "memory", abs_accuracy: float | None = None,
                 complete_to: float | None = None):
        self.lo_raw = list(lo_raw)
        self.hi_raw = list(hi_raw)
        if len(self.lo_raw) != len(self.hi_raw):
            raise ZeroTableError("endpoint lists differ in length")
        widest = 0
        prev_hi = None
        for i, (lo, hi) in enumerate(zip(self.lo_raw, self.hi_raw)):
            if lo > hi:
                raise ZeroTableError("interval with lo > hi", index=i)
            if lo <= 0:
                raise ZeroTableError("nonpositive ordinate", index=i)
            if prev_hi is not None and not prev_hi < lo:
                raise ZeroTableError("ordinates not strictly increasing", index=i)
            prev_hi = hi
            widest = max(widest, hi - lo)
        width = dyadic_to_float(widest, -SCALE, True)
        if abs_accuracy is None:
            abs_accuracy = width
        elif width > abs_accuracy:
            raise ZeroTableError(f"interval width {width:.3g} exceeds abs_accuracy {abs_accuracy:.3g}")
        max_gamma = dyadic_to_float(self.hi_raw[-1], -SCALE, True) if self.hi_raw else 0.0
        self.meta = TableMeta(len(self.lo_raw), max_gamma, source, abs_accuracy, complete_to)
        self._gammas: list[Interval] | None = None

    # -- construction helpers ------------------------------------------------
    @classmethod
    def from_balls(cls, mids, rads, scale: int, **kw) -> ZeroTable:
        """From midpoint / radius integers at an arbitrary binary scale."""
        sh = SCALE - scale
        if sh >= 0:
            lo = [(m - r) << sh for m, r in zip(mids, rads)]
            hi = [(m + r) << sh for m, r in zip(mids, rads)]
        else:
            lo = [(m - r) >> -sh for m, r in zip(mids, rads)]
            hi = [-((-(m + r)) >> -sh) for m, r in zip(mids, rads)]
        return cls(lo, hi, **kw)

    @classmethod
    def from_values(cls, values, radius="1e-15", **kw) -> ZeroTable:
        r = Fraction(radius)
        lo = [_frac_to_raw(Fraction(v) - r, False) for v in values]
        hi = [_frac_to_raw(Fraction(v) + r, True) for v in values]
        return cls(lo, hi, **kw)

    # -- views ----------------------------------------------------------------
    def __len__(self) -> int:
        return len(self.lo_raw)

    @property
    def gammas(self) -> list[Interval]:
        if self._gammas is None:
            self._gammas = [
                Interval(dyadic_to_float(lo, -SCALE, False), dyadic_to_float(hi, -SCALE, True))
                for lo, hi in zip(self.lo_raw, self.hi_raw)
            ]
        return self._gammas

    def extended(self, i: int) -> ExtendedReal:
        """Ordinate i as a 64.128 ball."""
        lo, hi = self.lo_raw[i], self.hi_raw[i]
        mid = (lo + hi) >> 1
        return ExtendedReal(mid, max(hi - mid, mid - lo))

    def covers(self, T: float) -> bool:
        """True when every ordinate in (0, T] is known to be in the table."""
        if T < FIRST_ZERO_FLOOR:
            return True
        if self.meta.complete_to is not None:
            return T <= self.meta.complete_to
        return T <= self.meta.max_gamma

    def up_to(self, T) -> ZeroTable:
        """Sub-table of ordinates <= T (entries straddling T are an error)."""
        bound = _frac_to_raw(Fraction(T), False)
        n = 0
        while n < len(self) and self.hi_raw[n] <= bound:
            n += 1
        if n < len(self) and self.lo_raw[n] <= bound:
            raise ZeroTableError(f"ordinate enclosure straddles the cutoff {T}", index=n)
        ct = self.meta.complete_to
        return ZeroTable(self.lo_raw[:n], self.hi_raw[:n], self.meta.source, self.meta.abs_accuracy,
                         min(float(T), ct) if ct is not None else None)

    def gap_screen(self, max_gap: float = 10.0) -> list[int]:
        """Indices i where gamma[i+1] - gamma[i] falls outside (0, max_gap)."""
        lim = int(max_gap * _ONE)
        return [i for i in range(len(self) - 1) if self.hi_raw[i + 1] - self.lo_raw[i] >= lim]

    def __eq__(self, other) -> bool:
        return isinstance(other, ZeroTable) and self.lo_raw == other.lo_raw and self.hi_raw == other.hi_raw

    def __repr__(self) -> str:
        return f"ZeroTable(count={self.meta.count}, max_gamma={self.meta.max_gamma:.6g}, source={self.meta.source!r})"


# -- text format ------------------------------------------------------------------


def _parse_header(line: str, headers: dict, lineno: int) -> None:
    body = line[1:].strip()
    if "=" in body:
        k, v = body.split("=", 1)
        headers[k.strip()] = (v.strip(), lineno)


def load_text(path) -> ZeroTable:
    path = Path(path)
    headers: dict[str, tuple[str, int]] = {}
    values: list[tuple[Fraction, Fraction, int]] = []
    with open(path, "r", encoding="ascii", errors="strict") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                _parse_header(s, headers, lineno)
                continue
            try:
                d = Decimal(s)
                if not d.is_finite():
                    raise ValueError
            except Exception:
                raise ZeroTableError(f"cannot parse ordinate {s!r}", line=lineno) from None
            exp = d.as_tuple().exponent
            unit = Fraction(1, 10 ** (-exp)) if exp < 0 else Fraction(10**exp)
            values.append((Fraction(s), unit, lineno))
    rad = None
    abs_acc = None
    if "abs_accuracy" in headers:
        v, ln = headers["abs_accuracy"]
        try:
            abs_acc = Fraction(v)
        except ValueError:
            raise ZeroTableError(f"bad abs_accuracy {v!r}", line=ln) from None
        rad = abs_acc / 2
    lo, hi = [], []
    for i, (v, unit, ln) in enumerate(values):
        if v <= 0:
            raise ZeroTableError("nonpositive ordinate", line=ln, index=i)
        r = rad if rad is not None else unit
        lo.append(_frac_to_raw(v - r, False))
        hi.append(_frac_to_raw(v + r, True))
        if i and not hi[i - 1] < lo[i]:
            kind = "duplicate" if values[i - 1][0] == v else "unsorted or overlapping"
            raise ZeroTableError(f"{kind} ordinate", line=ln, index=i)
    complete_to = float(headers["complete_to"][0]) if "complete_to" in headers else None
    source = headers.get("source", (str(path), 0))[0]
    acc = None
    if abs_acc is not None:
        acc = dyadic_to_float(_frac_to_raw(abs_acc, True) + 2, -SCALE, True)
    return ZeroTable(lo, hi, source=source, abs_accuracy=acc, complete_to=complete_to)


def save_text(table: ZeroTable, path, min_digits: int = 20) -> None:
    """Write midpoints with enough digits that rounding stays below the radius."""
    rad = max((h - l + 1) >> 1 for l, h in zip(table.lo_raw, table.hi_raw)) if len(table) else 1
    # decimals so that 10^-d <= rad / 8
    d = 0
    while Fraction(1, 10**d) > Fraction(rad, 8 * _ONE):
        d += 1
    top = table.hi_raw[-1] if len(table) else _ONE
    int_digits = len(str(top >> SCALE))
    d = max(d, min_digits - int_digits)
    # each printed value is within rad + 10^-d / 2 of every point of its interval
    acc = 2 * (Fraction(rad, _ONE) + Fraction(1, 2 * 10**d))
    acc_str = _fraction_up(acc)
    lines = ["# zeros v1", f"# source={table.meta.source}", f"# count={len(table)}", f"# abs_accuracy={acc_str}"]
    if table.meta.complete_to is not None:
        lines.append(f"# complete_to={table.meta.complete_to!r}")
    for lo, hi in zip(table.lo_raw, table.hi_raw):
        lines.append(_raw_to_decimal((lo + hi) >> 1, d))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _fraction_up(x: Fraction, sig: int = 4) -> str:
    """Decimal string >= x with a few significant digits."""
    e = math.floor(math.log10(x.numerator) - math.log10(x.denominator))
    scale = Fraction(10) ** (e - sig + 1)
    m = math.ceil(x / scale)
    return f"{m}e{e - sig + 1}"


# -- packed format ------------------------------------------------------------------


def save_packed(table: ZeroTable, path) -> None:
    out = bytearray(PACKED_MAGIC)
    for lo, hi in zip(table.lo_raw, table.hi_raw):
        mid = (lo + hi) >> 1
        m64 = mid >> 64  # 64.64 midpoint, truncation error < 2^-64
        need = Fraction(max(hi - (m64 << 64), (m64 << 64) - lo) + (1 << 64), _ONE)
        e = 0
        while e < 0xFFFF and Fraction(1, 1 << (e + 1)) >= need:
            e += 1
        if m64 >> 128:
            raise ZeroTableError("ordinate too large for the packed format")
        out += _RECORD.pack(m64 & 0xFFFFFFFFFFFFFFFF, m64 >> 64, e)
    meta_path = Path(path)
    meta_path.write_bytes(bytes(out))


def load_packed(path) -> ZeroTable:
    data = Path(path).read_bytes()
    if not data.startswith(PACKED_MAGIC):
        raise ZeroTableError("missing packed-table header", line=1)
    body = data[len(PACKED_MAGIC):]
    if len(body) % _RECORD.size:
        raise ZeroTableError("truncated packed record", index=len(body) // _RECORD.size)
    lo, hi = [], []
    for i, (frac, whole, e) in enumerate(_RECORD.iter_unpack(body)):
        mid = ((whole << 64) | frac) << 64
        r = 1 << (SCALE - e) if e <= SCALE else 1
        lo.append(mid - r)
        hi.append(mid + r)
        if lo[-1] <= 0:
            raise ZeroTableError("nonpositive ordinate", index=i)
        if i and not hi[i - 1] < lo[i]:
            raise ZeroTableError("unsorted or overlapping ordinate", index=i)
    return ZeroTable(lo, hi, source=str(path))


def load_zeros(path, format: str = "auto") -> ZeroTable:
    """Load a table in ``text`` or ``packed`` format (``auto`` sniffs the header)."""
    path = Path(path)
    if format == "auto":
        with open(path, "rb") as fh:
            head = fh.read(len(PACKED_MAGIC))
        format = "packed" if head == PACKED_MAGIC else "text"
    if format == "text":
        return load_text(path)
    if format == "packed":
        return load_packed(path)
    raise ValueError(f"unknown zero-table format {format!r}")


def save_zeros(table: ZeroTable, path, format: str = "text") -> None:
    if format == "text":
        save_text(table, path)
    elif format == "packed":
        save_packed(table, path)
    else:
        raise ValueError(f"unknown zero-table format {format!r}")


# -- comparison ---------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    compared: int
    max_disagreement: float
    worst_index: int | None

    def summary(self) -> str:
        return f"compared {self.compared} ordinates, max midpoint disagreement {self.max_disagreement:.3e}"


def validate_against(table: ZeroTable, reference: ZeroTable) -> ValidationReport:
    """Compare the overlapping leading entries; disjoint pairs raise."""
    n = min(len(table), len(reference))
    worst = 0
    worst_i = None
    for i in range(n):
        a_lo, a_hi = table.lo_raw[i], table.hi_raw[i]
        b_lo, b_hi = reference.lo_raw[i], reference.hi_raw[i]
        if a_hi < b_lo or b_hi < a_lo:
            raise ZeroMismatchError("ordinate enclosures are disjoint", index=i)
        d = abs((a_lo + a_hi) - (b_lo + b_hi)) >> 1
        if worst_i is None or d > worst:
            worst, worst_i = d, i
    return ValidationReport(n, dyadic_to_float(worst, -SCALE, True), worst_i if n else None)
