"""Segment tilings, the append-only binary ledger, resume, aggregation and reports."""

from __future__ import annotations

import csv
import enum
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..interval import Interval, sqrt
from .primes import find_preceding_prime, is_prime
from .segment import RECORD_SIZE, Segment, SegmentError, SegmentResult, sieve_segment

log = logging.getLogger(__name__)

LEDGER_MAGIC = "theta-ledger v1"
PI_MAGIC = "# pi-checkpoints v1"


class LedgerError(ValueError):
    pass


class CheckpointMismatch(LedgerError):
    def __init__(self, message: str, boundary: int):
        super().__init__(message)
        self.boundary = boundary


def parse_int(text) -> int:
    """Integer from '1e9', '10000000' or '10**7'."""
    s = str(text).strip().replace("_", "")
    if "**" in s or "^" in s:
        b, e = s.replace("**", "^").split("^")
        return int(b) ** int(e)
    v = Fraction(s)
    if v.denominator != 1:
        raise ValueError(f"{text!r} is not an integer")
    return int(v)


# -- tilings ------------------------------------------------------------------------------


@dataclass(frozen=True)
class Tiling:
    """Contiguous segments of [0, bound) given as (count, width) groups."""

    groups: tuple[tuple[int, int], ...]
    bound: int
    spec: str

    @classmethod
    def parse(cls, spec: str, bound=None) -> Tiling:
        """'uniform:W' (needs bound) or explicit groups like '10000x1e13,390x1e14'."""
        spec = spec.strip()
        if spec.startswith("uniform:"):
            if bound is None:
                raise ValueError("a uniform tiling needs a bound")
            B = parse_int(bound)
            W = parse_int(spec.split(":", 1)[1])
            if W <= 0 or B <= 0:
                raise ValueError("bound and width must be positive")
            n = -(-B // W)
            return cls(((n, W),), B, f"uniform:{W}")
        groups = []
        for part in spec.split(","):
            c, w = part.lower().split("x")
            groups.append((parse_int(c), parse_int(w)))
        if any(c <= 0 or w <= 0 for c, w in groups):
            raise ValueError("segment counts and widths must be positive")
        total = sum(c * w for c, w in groups)
        B = total if bound is None else parse_int(bound)
        if B > total:
            raise ValueError(f"tiling covers [0, {total}) but the bound is {B}")
        canon = ",".join(f"{c}x{w}" for c, w in groups)
        return cls(tuple(groups), B, canon)

    def __len__(self) -> int:
        n = 0
        x = 0
        for c, w in self.groups:
            if x + c * w >= self.bound:
                return n + -(-(self.bound - x) // w)
            n += c
            x += c * w
        return n

    def segment(self, i: int) -> Segment:
        if not (0 <= i < len(self)):
            raise IndexError(i)
        x = 0
        k = i
        for c, w in self.groups:
            if k < c:
                lo = x + k * w
                return Segment(lo, min(lo + w, self.bound), i)
            k -= c
            x += c * w
        raise IndexError(i)

    def header(self) -> str:
        return f"{LEDGER_MAGIC} bound={self.bound} tiling={self.spec}\n"

    def dry_run(self) -> dict:
        """Checks a tiling can be processed without overflow; no sieving."""
        from .segment import MEMORY_BUDGET, base_prime_memory
        n = len(self)
        last = self.segment(n - 1)
        widest = max(w for _, w in self.groups)
        problems = []
        if self.bound >= 1 << 64:
            problems.append("bound exceeds the 64-bit ledger fields")
        if widest >= 1 << 53:
            problems.append("segment width exceeds 2^53")
        if base_prime_memory(self.bound) > MEMORY_BUDGET:
            problems.append("base primes exceed the memory budget")
        if last.x_hi != self.bound:
            problems.append("tiling does not end at the bound")
        return {"segments": n, "bound": self.bound, "widest": widest,
                "ledger_bytes": len(self.header()) + n * RECORD_SIZE,
                "base_prime_bytes": base_prime_memory(self.bound), "problems": problems}


# -- ledger file ----------------------------------------------------------------------------


@dataclass
class GlobalLedger:
    tiling: Tiling
    results: dict[int, SegmentResult] = field(default_factory=dict)
    path: str | None = None
    discarded: list[int] = field(default_factory=list)

    @property
    def pending(self) -> list[int]:
        return [i for i in range(len(self.tiling)) if i not in self.results]

    def ordered(self) -> list[SegmentResult]:
        return [self.results[i] for i in sorted(self.results)]

    def cumulative(self) -> list[tuple[int, Interval, int]]:
        """(boundary x, theta(x) enclosure, primes below x) after each contiguous segment."""
        out = []
        theta = Interval(0.0)
        count = 0
        for i in range(len(self.tiling)):
            r = self.results.get(i)
            if r is None:
                break
            theta = theta + r.theta_sum
            count += r.prime_count
            out.append((r.x_hi, theta, count))
        return out


def _read_header(fh) -> Tiling:
    line = fh.readline()
    text = line.decode("ascii", "replace")
    if not text.startswith(LEDGER_MAGIC + " ") or not text.endswith("\n"):
        raise LedgerError("not a theta ledger (bad header)")
    fields = dict(kv.split("=", 1) for kv in text.split()[2:])
    return Tiling.parse(fields["tiling"], fields["bound"])


def resume(path, tiling: Tiling | None = None) -> GlobalLedger:
    """Load a ledger; records failing their checksum are dropped and re-queued."""
    with open(path, "rb") as fh:
        found = _read_header(fh)
        body = fh.read()
    if tiling is not None and (tiling.spec, tiling.bound) != (found.spec, found.bound):
        raise LedgerError(f"ledger tiling {found.spec} bound {found.bound} differs from the request")
    ledger = GlobalLedger(found, path=str(path))
    n = len(found)
    for k in range(len(body) // RECORD_SIZE):
        raw = body[k * RECORD_SIZE:(k + 1) * RECORD_SIZE]
        try:
            r = SegmentResult.from_bytes(raw)
        except SegmentError:
            log.warning("record %d failed its checksum; re-queued", k)
            ledger.discarded.append(k)
            continue
        if not (0 <= r.index < n):
            log.warning("record %d has index %d outside the tiling; dropped", k, r.index)
            ledger.discarded.append(k)
            continue
        seg = found.segment(r.index)
        if (seg.x_lo, seg.x_hi) != (r.x_lo, r.x_hi):
            log.warning("record %d does not match segment %d; dropped", k, r.index)
            ledger.discarded.append(k)
            continue
        ledger.results.setdefault(r.index, r)
    if len(body) % RECORD_SIZE:
        log.warning("ledger ends with a partial record; ignored")
    return ledger


def _compute(i_and_tiling):
    i, spec, bound = i_and_tiling
    seg = Tiling.parse(spec, bound).segment(i)
    pp = find_preceding_prime(seg.x_lo)
    return sieve_segment(seg, pp, check_preceding=False)


def _rewrite_prefix(ledger: GlobalLedger) -> int:
    """Rewrite the file as header + the contiguous run of records from 0; returns its length."""
    k = 0
    while k in ledger.results:
        k += 1
    tmp = ledger.path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(ledger.tiling.header().encode("ascii"))
        for i in range(k):
            fh.write(ledger.results[i].to_bytes())
    os.replace(tmp, ledger.path)
    return k


def run(path, tiling: Tiling, workers: int = 1, limit: int | None = None) -> GlobalLedger:
    """Sieve every pending segment and append records in index order.

    Records are written strictly in index order, so an interrupted run that is
    resumed ends with the same bytes as an uninterrupted one.  ``limit`` stops
    after that many new segments (used to exercise resumption).
    """
    path = str(path)
    if os.path.exists(path):
        ledger = resume(path, tiling)
    else:
        ledger = GlobalLedger(tiling, path=path)
    next_out = _rewrite_prefix(ledger)
    todo = ledger.pending
    if limit is not None:
        todo = todo[:limit]
    args = [(i, tiling.spec, tiling.bound) for i in todo]
    with open(path, "ab") as fh:
        def emit(r: SegmentResult):
            nonlocal next_out
            ledger.results[r.index] = r
            while next_out in ledger.results:
                fh.write(ledger.results[next_out].to_bytes())
                next_out += 1
            fh.flush()

        if workers > 1 and len(args) > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                for r in ex.map(_compute, args):
                    emit(r)
        else:
            for a in args:
                emit(_compute(a))
    return ledger


# -- verdicts ---------------------------------------------------------------------------------


class Verdict(enum.Enum):
    VERIFIED_BELOW = "verified_below"
    CROSSOVER_FOUND = "crossover_found"
    INCOMPLETE = "incomplete"


@dataclass(frozen=True)
class AggregateReport:
    verdict: Verdict
    verified_to: int
    theta: Interval
    prime_count: int
    failing_segment: int | None = None
    pending: tuple[int, ...] = ()
    min_margin: float = math.inf

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "verified_to": self.verified_to,
                "theta_lo": self.theta.lo, "theta_hi": self.theta.hi,
                "prime_count": self.prime_count, "failing_segment": self.failing_segment,
                "pending": len(self.pending), "min_margin": self.min_margin}


def aggregate(ledger: GlobalLedger) -> AggregateReport:
    """Check the safety condition segment by segment.

    With a the last prime before a segment (1 when there is none) and Theta the
    enclosure of theta(a), the deficit a - Theta plus the segment's Delta_min
    must be positive; the deficit at the segment's last prime must be too.
    Together these give theta(x) < x for every x in the segment.
    """
    n = len(ledger.tiling)
    pending = tuple(ledger.pending)
    theta = Interval(0.0)
    count = 0
    anchor = 1
    x = 0
    margin = math.inf
    if n == 0 or not ledger.results:
        return AggregateReport(Verdict.INCOMPLETE, 0, theta, 0, None, pending)
    for i in range(n):
        r = ledger.results.get(i)
        if r is None:
            return AggregateReport(Verdict.INCOMPLETE, x, theta, count, None, pending, margin)
        if r.x_lo != x:
            raise LedgerError(f"segment {i} starts at {r.x_lo}, expected {x}")
        deficit = Interval(anchor) - theta
        start_ok = (deficit + r.delta_min).lo
        after = theta + r.theta_sum
        end_ok = (Interval(r.last_prime) - after).lo if r.prime_count else start_ok
        m = min(start_ok, end_ok)
        if not (m > 0):
            return AggregateReport(Verdict.CROSSOVER_FOUND, x, theta, count, i, pending, margin)
        margin = min(margin, m)
        theta = after
        count += r.prime_count
        if r.prime_count:
            anchor = r.last_prime
        x = r.x_hi
    return AggregateReport(Verdict.VERIFIED_BELOW, x, theta, count, None, (), margin)


# -- pi(x) checkpoints -------------------------------------------------------------------------


def write_pi_checkpoints(path, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(PI_MAGIC + "\n")
        fh.write("x,pi\n")
        for x, p in rows:
            fh.write(f"{int(x)},{int(p)}\n")


def read_pi_checkpoints(path) -> list[tuple[int, int]]:
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != PI_MAGIC:
            raise LedgerError("not a pi checkpoint file (bad header)")
        reader = csv.DictReader(fh)
        return [(parse_int(r["x"]), parse_int(r["pi"])) for r in reader]


@dataclass(frozen=True)
class CrosscheckReport:
    checked: int
    boundaries: tuple[int, ...]


def checkpoint_crosscheck(ledger: GlobalLedger, pi_table) -> CrosscheckReport:
    """Compare cumulative prime counts against pi(x) at segment boundaries."""
    rows = read_pi_checkpoints(pi_table) if isinstance(pi_table, (str, os.PathLike)) else list(pi_table)
    counts = {x: c for x, _, c in ledger.cumulative()}
    seen = []
    for x, pi in rows:
        if x not in counts:
            raise CheckpointMismatch(f"{x} is not a completed segment boundary", x)
        # the ledger counts primes below the boundary; pi(x) includes x itself
        expect = pi - (1 if is_prime(x) else 0)
        if counts[x] != expect:
            raise CheckpointMismatch(
                f"prime count below {x} is {counts[x]} but the checkpoint says {expect}", x)
        seen.append(x)
    return CrosscheckReport(len(seen), tuple(seen))


# -- walk --------------------------------------------------------------------------------------


WALK_HEADER = "x,value_mid,value_width,value_lo,value_hi"


def emit_walk(ledger: GlobalLedger) -> list[tuple[int, Interval]]:
    """(x, (x - theta(x)) / sqrt(x)) at each segment boundary."""
    if ledger.pending:
        raise LedgerError("the ledger is incomplete")
    out = []
    for x, theta, _ in ledger.cumulative():
        xi = Interval(x)
        out.append((x, (xi - theta) / sqrt(xi)))
    return out


def write_walk_csv(rows, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(WALK_HEADER + "\n")
        for x, v in rows:
            fh.write(f"{x},{v.mid!r},{v.width!r},{v.lo!r},{v.hi!r}\n")


def walk_summary(rows) -> dict:
    mids = np.array([v.mid for _, v in rows])
    return {"rows": len(rows), "min": float(mids.min()), "max": float(mids.max()),
            "mean": float(mids.mean())}
