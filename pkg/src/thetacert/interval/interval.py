"""Closed real intervals with double endpoints and outward rounding.

Basic arithmetic uses the hardware's round-to-nearest result together with an
error-free transformation (TwoSum / Dekker's TwoProduct) to decide which way
the rounding went, so exact results stay exact and inexact ones are widened by
a single ulp on the side that needs it.  Transcendental functions go through
the integer fixed-point kernels in :mod:`._fixed` and are then converted to
doubles with directed rounding.

No global FPU state is touched, so intervals can be used freely from several
threads.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from . import _fixed

INF = math.inf
_nextafter = math.nextafter
_isfinite = math.isfinite

# precision (bits) used for transcendental endpoint evaluation
_PREC = 80
_SPLIT = 134217729.0  # 2**27 + 1
_SAFE_HI = 2.0 ** 995
_SAFE_LO = 2.0 ** -960


class IntervalError(ArithmeticError):
    """Raised on a domain violation (division by zero, log of nonpositive...)."""


def _down(x: float) -> float:
    return _nextafter(x, -INF)


def _up(x: float) -> float:
    return _nextafter(x, INF)


def _add_dn(a: float, b: float) -> float:
    s = a + b
    if not _isfinite(s):
        return s if s == -INF or not (_isfinite(a) and _isfinite(b)) else 1.7976931348623157e308
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s if err >= 0 else _down(s)


def _add_up(a: float, b: float) -> float:
    s = a + b
    if not _isfinite(s):
        return s if s == INF or not (_isfinite(a) and _isfinite(b)) else -1.7976931348623157e308
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s if err <= 0 else _up(s)


def _two_prod_err(a: float, b: float, p: float) -> float | None:
    """Exact error ``a*b - p``; None when the magnitudes make Dekker unsafe."""
    aa = abs(a)
    ab = abs(b)
    ap = abs(p)
    if aa > _SAFE_HI or ab > _SAFE_HI or ap > _SAFE_HI or (p != 0.0 and ap < _SAFE_LO):
        return None
    if p == 0.0:
        return None if (a != 0.0 and b != 0.0) else 0.0
    c = _SPLIT * a
    ah = c - (c - a)
    al = a - ah
    c = _SPLIT * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _mul_dn(a: float, b: float) -> float:
    p = a * b
    if not _isfinite(p):
        if _isfinite(a) and _isfinite(b) and p == INF:
            return 1.7976931348623157e308
        return p
    e = _two_prod_err(a, b, p)
    if e is None:
        return _down(p)
    return p if e >= 0 else _down(p)


def _mul_up(a: float, b: float) -> float:
    p = a * b
    if not _isfinite(p):
        if _isfinite(a) and _isfinite(b) and p == -INF:
            return -1.7976931348623157e308
        return p
    e = _two_prod_err(a, b, p)
    if e is None:
        return _up(p)
    return p if e <= 0 else _up(p)


def _div_sign(a: float, b: float, q: float) -> int | None:
    """Sign of ``a/b - q`` or None if it cannot be decided cheaply."""
    e = _two_prod_err(q, b, q * b)
    if e is None or not _isfinite(a):
        return None
    p = q * b
    d = a - p  # exact by Sterbenz since q is the rounded quotient
    if d > e:
        r = 1
    elif d < e:
        r = -1
    else:
        return 0
    return r if b > 0 else -r


def _div_dn(a: float, b: float) -> float:
    q = a / b
    if not _isfinite(q):
        return q if q == -INF else 1.7976931348623157e308
    if q == 0.0 and a != 0.0:
        return _down(q)
    s = _div_sign(a, b, q)
    if s is None:
        return _down(q)
    return q if s >= 0 else _down(q)


def _div_up(a: float, b: float) -> float:
    q = a / b
    if not _isfinite(q):
        return q if q == INF else -1.7976931348623157e308
    if q == 0.0 and a != 0.0:
        return _up(q)
    s = _div_sign(a, b, q)
    if s is None:
        return _up(q)
    return q if s <= 0 else _up(q)


def _sqrt_dn(a: float) -> float:
    s = math.sqrt(a)
    if a == 0.0 or a == INF:
        return s
    e = _two_prod_err(s, s, s * s)
    if e is None:
        return _down(s)
    d = a - s * s
    return s if d >= e else _down(s)


def _sqrt_up(a: float) -> float:
    s = math.sqrt(a)
    if a == 0.0 or a == INF:
        return s
    e = _two_prod_err(s, s, s * s)
    if e is None:
        return _up(s)
    d = a - s * s
    return s if d <= e else _up(s)


# -- exact rational <-> float with directed rounding ---------------------------


def dyadic_to_float(m: int, e: int, up: bool) -> float:
    """Round ``m * 2**e`` to a double, toward +inf if ``up`` else toward -inf."""
    if m == 0:
        return 0.0
    try:
        f = float(m << e) if e >= 0 else m / (1 << -e)
    except OverflowError:
        if (m > 0) == up:
            return INF if m > 0 else -INF
        return 1.7976931348623157e308 if m > 0 else -1.7976931348623157e308
    if not _isfinite(f):
        return f
    fn, fd = f.as_integer_ratio()
    # compare fn/fd with m*2**e exactly; fd is a power of two
    sh = fd.bit_length() - 1
    lhs = fn
    rhs = m
    k = e + sh
    if k >= 0:
        rhs = m << k
    else:
        lhs = fn << -k
    if up and lhs < rhs:
        return _up(f)
    if not up and lhs > rhs:
        return _down(f)
    return f


def fraction_to_float(x: Fraction, up: bool) -> float:
    f = float(x)
    if not _isfinite(f):
        return f
    fx = Fraction(f)
    if up and fx < x:
        return _up(f)
    if not up and fx > x:
        return _down(f)
    return f


def _as_dyadic(x: float) -> tuple[int, int]:
    """Exact ``(num, shift)`` with x == num * 2**-shift."""
    n, d = x.as_integer_ratio()
    return n, d.bit_length() - 1


def _to_fixed_floor(x: float, p: int) -> tuple[int, bool]:
    n, s = _as_dyadic(x)
    if s <= p:
        return n << (p - s), True
    v = n >> (s - p)
    return v, (v << (s - p)) == n


# -- endpoint transcendental kernels -------------------------------------------


def _exp_bounds(x: float) -> tuple[float, float]:
    if x == 0.0:
        return 1.0, 1.0
    if x > 710.0:
        return (INF, INF) if x == INF else (1.7976931348623157e308, INF)
    if x < -746.0:
        return (0.0, 0.0) if x == -INF else (0.0, 5e-324)
    p = _PREC
    xi, exact = _to_fixed_floor(x, p)
    if exact:
        M, e = _fixed.exp_fixed(xi, p)
        return dyadic_to_float(M - _fixed.ERR, e, False), dyadic_to_float(M + _fixed.ERR, e, True)
    # |x| below 2**-p: x lies in [xi, xi + 1] units
    M0, e0 = _fixed.exp_fixed(xi, p)
    M1, e1 = _fixed.exp_fixed(xi + 1, p)
    return dyadic_to_float(M0 - _fixed.ERR, e0, False), dyadic_to_float(M1 + _fixed.ERR, e1, True)


def _log_bounds(x: float) -> tuple[float, float]:
    if x == 1.0:
        return 0.0, 0.0
    if x == INF:
        return 1.7976931348623157e308, INF
    n, s = _as_dyadic(x)
    p = _PREC
    # keep relative precision near x = 1 where log(x) is small
    if 0.5 < x < 2.0:
        d = abs(x - 1.0)
        p += max(0, -math.frexp(d)[1]) + 4
    v = _fixed.log_fixed(n, s, p)
    return dyadic_to_float(v - _fixed.ERR, -p, False), dyadic_to_float(v + _fixed.ERR, -p, True)


def _sincos_point(x: float) -> tuple[int, int, int]:
    """(sin, cos, p): fixed-point values of sin/cos at the exact double x."""
    n, s = _as_dyadic(x)
    p = _PREC
    if x != 0.0 and abs(x) < 1.0:
        p += -math.frexp(x)[1] + 4
    sh = p - s
    xi = n << sh if sh >= 0 else n >> -sh
    if sh < 0 and (xi << -sh) != n:
        p += -sh
        xi = n
    sn, cs = _fixed.sincos_fixed(xi, p)
    return sn, cs, p


def _fx_bounds(v: int, p: int) -> tuple[float, float]:
    return dyadic_to_float(v - _fixed.ERR, -p, False), dyadic_to_float(v + _fixed.ERR, -p, True)


class Interval:
    """A closed interval ``[lo, hi]`` of reals with double endpoints.

    Construct from one or two numbers; ints, Fractions and decimal strings are
    enclosed exactly (rounded outward when not representable), so
    ``Interval("0.1")`` really contains one tenth.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        if hi is None:
            if isinstance(lo, Interval):
                lo, hi = lo.lo, lo.hi
            else:
                lo, hi = _enclose(lo)
        else:
            lo = _enclose(lo)[0] if not isinstance(lo, float) else lo
            hi = _enclose(hi)[1] if not isinstance(hi, float) else hi
        if not lo <= hi:
            raise IntervalError(f"invalid interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    @classmethod
    def _raw(cls, lo: float, hi: float) -> Interval:
        obj = object.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    # -- basic queries ----------------------------------------------------
    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __iter__(self):
        yield self.lo
        yield self.hi

    @property
    def mid(self) -> float:
        if self.lo == -self.hi:
            return 0.0
        m = 0.5 * self.lo + 0.5 * self.hi
        return m if _isfinite(m) else self.lo

    @property
    def width(self) -> float:
        return _sub_up_scalar(self.hi, self.lo)

    @property
    def rad(self) -> float:
        m = self.mid
        return max(_sub_up_scalar(self.hi, m), _sub_up_scalar(m, self.lo))

    @property
    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x) -> bool:
        """Exact membership test; x may be a float, int, Fraction or mpmath mpf."""
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        if isinstance(x, (float, int)):
            return self.lo <= x <= self.hi
        if isinstance(x, Rational):
            return Fraction(self.lo) <= x <= Fraction(self.hi)
        return self.lo <= x <= self.hi  # e.g. mpmath values compare exactly

    __contains__ = contains

    def intersects(self, other: Interval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: Interval) -> Interval:
        return Interval._raw(min(self.lo, other.lo), max(self.hi, other.hi))

    def is_point(self) -> bool:
        return self.lo == self.hi

    # -- arithmetic -------------------------------------------------------
    def __neg__(self) -> Interval:
        return Interval._raw(-self.hi, -self.lo)

    def __pos__(self) -> Interval:
        return self

    def __add__(self, other) -> Interval:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval._raw(_add_dn(self.lo, o.lo), _add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> Interval:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Interval._raw(_add_dn(self.lo, -o.hi), _add_up(self.hi, -o.lo))

    def __rsub__(self, other) -> Interval:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other) -> Interval:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return _mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Interval:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return _div(self, o)

    def __rtruediv__(self, other) -> Interval:
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return _div(o, self)

    def __pow__(self, n) -> Interval:
        return pow_real(self, n)

    def __abs__(self) -> Interval:
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval._raw(0.0, max(-self.lo, self.hi))

    def square(self) -> Interval:
        a = abs(self)
        return Interval._raw(_mul_dn(a.lo, a.lo), _mul_up(a.hi, a.hi))


def _sub_up_scalar(a: float, b: float) -> float:
    return _add_up(a, -b)


def _enclose(x) -> tuple[float, float]:
    if isinstance(x, float):
        if math.isnan(x):
            raise IntervalError("NaN is not an interval endpoint")
        return x, x
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        f = float(x)
        if f == x:
            return f, f
        fr = Fraction(x)
        return fraction_to_float(fr, False), fraction_to_float(fr, True)
    if isinstance(x, Interval):
        return x.lo, x.hi
    if isinstance(x, str):
        x = Fraction(x.strip())
    if isinstance(x, Rational):
        fr = Fraction(x)
        return fraction_to_float(fr, False), fraction_to_float(fr, True)
    # anything else convertible (mpmath, numpy scalars): go through Fraction
    try:
        fr = Fraction(x)
    except (TypeError, ValueError):
        fr = Fraction(str(x))
    return fraction_to_float(fr, False), fraction_to_float(fr, True)


def _coerce(x) -> Interval | None:
    if isinstance(x, Interval):
        return x
    if isinstance(x, float):
        return Interval._raw(x, x)
    if isinstance(x, (int, Fraction, str)):
        return Interval(x)
    try:
        return Interval(x)
    except (TypeError, ValueError):
        return None


def _mul(a: Interval, b: Interval) -> Interval:
    al, ah, bl, bh = a.lo, a.hi, b.lo, b.hi
    if al >= 0:
        if bl >= 0:
            return Interval._raw(_mul_dn(al, bl), _mul_up(ah, bh))
        if bh <= 0:
            return Interval._raw(_mul_dn(ah, bl), _mul_up(al, bh))
        return Interval._raw(_mul_dn(ah, bl), _mul_up(ah, bh))
    if ah <= 0:
        if bl >= 0:
            return Interval._raw(_mul_dn(al, bh), _mul_up(ah, bl))
        if bh <= 0:
            return Interval._raw(_mul_dn(ah, bh), _mul_up(al, bl))
        return Interval._raw(_mul_dn(al, bh), _mul_up(al, bl))
    if bl >= 0:
        return Interval._raw(_mul_dn(al, bh), _mul_up(ah, bh))
    if bh <= 0:
        return Interval._raw(_mul_dn(ah, bl), _mul_up(al, bl))
    lo = min(_mul_dn(al, bh), _mul_dn(ah, bl))
    hi = max(_mul_up(al, bl), _mul_up(ah, bh))
    return Interval._raw(lo, hi)


def _div(a: Interval, b: Interval) -> Interval:
    bl, bh = b.lo, b.hi
    if bl <= 0 <= bh:
        raise IntervalError("division by an interval containing zero")
    if bl < 0:
        return -_div(a, -b)
    al, ah = a.lo, a.hi
    if al >= 0:
        return Interval._raw(_div_dn(al, bh), _div_up(ah, bl))
    if ah <= 0:
        return Interval._raw(_div_dn(al, bl), _div_up(ah, bh))
    return Interval._raw(_div_dn(al, bl), _div_up(ah, bl))


# -- module-level operations ------------------------------------------------


def add(a, b) -> Interval:
    return _coerce(a) + b


def sub(a, b) -> Interval:
    return _coerce(a) - b


def mul(a, b) -> Interval:
    return _coerce(a) * b


def div(a, b) -> Interval:
    return _coerce(a) / b


def neg(a) -> Interval:
    return -_coerce(a)


def sqrt(x) -> Interval:
    x = _coerce(x)
    if x.lo < 0:
        raise IntervalError(f"sqrt of interval with negative part {x!r}")
    return Interval._raw(_sqrt_dn(x.lo), _sqrt_up(x.hi))


def exp(x) -> Interval:
    x = _coerce(x)
    lo = _exp_bounds(x.lo)[0]
    hi = _exp_bounds(x.hi)[1]
    return Interval._raw(lo, hi)


def exp_exact(q) -> Interval:
    """exp at an exact rational, much tighter than exp of its double enclosure."""
    q = Fraction(q)
    if q == 0:
        return Interval._raw(1.0, 1.0)
    if not -745 < q < 709:
        return exp(Interval(q))
    p = _PREC
    scaled = q * (1 << p)
    n = math.floor(scaled)
    M0, e0 = _fixed.exp_fixed(n, p)
    M1, e1 = (M0, e0) if n == scaled else _fixed.exp_fixed(n + 1, p)
    return Interval._raw(dyadic_to_float(M0 - _fixed.ERR, e0, False), dyadic_to_float(M1 + _fixed.ERR, e1, True))


def log(x) -> Interval:
    x = _coerce(x)
    if not x.lo > 0:
        raise IntervalError(f"log of interval with nonpositive part {x!r}")
    return Interval._raw(_log_bounds(x.lo)[0], _log_bounds(x.hi)[1])


def pow_real(x, y) -> Interval:
    """x**y. Integer exponents work for any x; otherwise x must be > 0."""
    x = _coerce(x)
    if isinstance(y, int) and not isinstance(y, bool):
        if y == 0:
            return Interval._raw(1.0, 1.0)
        if y < 0:
            return 1.0 / pow_real(x, -y)
        result = Interval._raw(1.0, 1.0)
        base = x
        n = y
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base.square()
        if y % 2 == 0 and result.lo < 0:
            result = Interval._raw(0.0, result.hi)
        return result
    y = _coerce(y)
    if x.lo == 0 and x.hi == 0 and y.lo > 0:
        return Interval._raw(0.0, 0.0)
    if not x.lo > 0:
        if x.lo == 0 and y.lo > 0:
            # x**y on [0, h] x [yl, yh] peaks at h**yl (h < 1) or h**yh
            top = exp(y * log(Interval._raw(x.hi, x.hi))).hi
            return Interval._raw(0.0, top)
        raise IntervalError(f"pow_real needs a positive base, got {x!r}")
    return exp(y * log(x))


def _trig(x: Interval, which: int) -> Interval:
    """which=0 -> sin, 1 -> cos."""
    if not (_isfinite(x.lo) and _isfinite(x.hi)):
        return Interval._raw(-1.0, 1.0)
    if x.hi - x.lo >= 6.3:
        return Interval._raw(-1.0, 1.0)
    vals = []
    for e in (x.lo, x.hi) if x.lo != x.hi else (x.lo,):
        sn, cs, p = _sincos_point(e)
        vals.append(_fx_bounds(sn if which == 0 else cs, p))
    lo = min(v[0] for v in vals)
    hi = max(v[1] for v in vals)
    if x.lo != x.hi:
        # extrema at multiples of pi/2 strictly inside (lo, hi]
        k0, c0 = _quadrant(x.lo)
        k1, c1 = _quadrant(x.hi)
        first = k0 if not c0 else k0 + 1
        last = k1 + (0 if c1 else 1)
        for j in range(first, last + 1):
            m = (j + which) % 4
            if m == 1:
                hi = 1.0
            elif m == 3:
                lo = -1.0
    return Interval._raw(max(lo, -1.0), min(hi, 1.0))


def _quadrant(x: float) -> tuple[int, bool]:
    n, s = _as_dyadic(x)
    p = max(_PREC, s)
    return _fixed.quadrant_fixed(n << (p - s), p)


def sin(x) -> Interval:
    return _trig(_coerce(x), 0)


def cos(x) -> Interval:
    return _trig(_coerce(x), 1)


def hull_of(values) -> Interval:
    it = iter(values)
    first = next(it)
    lo, hi = first.lo, first.hi
    for v in it:
        lo = min(lo, v.lo)
        hi = max(hi, v.hi)
    return Interval._raw(lo, hi)


def _const(m: int, p: int) -> Interval:
    return Interval._raw(dyadic_to_float(m - 1, -p, False), dyadic_to_float(m + 1, -p, True))


PI = _const(_fixed.pi_fixed(120), 120)
LN2 = _const(_fixed.ln2_fixed(120), 120)
# log(2 pi) = log(pi) + log(2)
_lp = _fixed.log_fixed(_fixed.pi_fixed(160), 160, 120) + _fixed.ln2_fixed(120)
LOG_2PI = Interval._raw(dyadic_to_float(_lp - 4, -120, False), dyadic_to_float(_lp + 4, -120, True))
del _lp
