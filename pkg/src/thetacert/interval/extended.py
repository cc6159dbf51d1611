"""64.128 fixed-point reals and the high-precision sin/cos of a product.

Products such as gamma * omega with gamma near 1e10 lose every fractional bit
in double precision, so their reduction modulo 2 pi is done here on integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _fixed
from .interval import Interval, IntervalError, dyadic_to_float

FRAC_BITS = 128
INT_BITS = 64
_ONE = 1 << FRAC_BITS
_LIMIT = 1 << (INT_BITS + FRAC_BITS)


class BudgetError(IntervalError):
    """A value does not fit the 64 integer bits of an ExtendedReal."""


@dataclass(frozen=True)
class ExtendedReal:
    """The real ball ``raw / 2**128 +- rad / 2**128``.

    ``rad`` is zero for exactly representable inputs and one unit for decimal
    strings that had to be rounded, so containment is never lost on entry.
    """

    raw: int
    rad: int = 0

    def __post_init__(self):
        if abs(self.raw) + self.rad >= _LIMIT:
            raise BudgetError("value exceeds the 64-bit integer budget")
        if self.rad < 0:
            raise ValueError("negative radius")

    @classmethod
    def from_value(cls, x) -> ExtendedReal:
        if isinstance(x, ExtendedReal):
            return x
        if isinstance(x, str):
            x = Fraction(x.strip())
        fr = Fraction(x)
        num = fr.numerator << FRAC_BITS
        q, r = divmod(num, fr.denominator)
        if r == 0:
            return cls(q, 0)
        # nearest of q, q+1 with one unit of radius
        if 2 * r >= fr.denominator:
            q += 1
        return cls(q, 1)

    def __float__(self) -> float:
        return self.raw / _ONE

    def to_interval(self) -> Interval:
        return Interval(
            dyadic_to_float(self.raw - self.rad, -FRAC_BITS, False),
            dyadic_to_float(self.raw + self.rad, -FRAC_BITS, True),
        )

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, _ONE)

    def __add__(self, other: ExtendedReal) -> ExtendedReal:
        return ExtendedReal(self.raw + other.raw, self.rad + other.rad)

    def __sub__(self, other: ExtendedReal) -> ExtendedReal:
        return ExtendedReal(self.raw - other.raw, self.rad + other.rad)

    def __neg__(self) -> ExtendedReal:
        return ExtendedReal(-self.raw, self.rad)

    def mul_exact(self, other: ExtendedReal) -> tuple[int, int]:
        """Product at scale 2**-256 as ``(value, radius)``, with no rounding."""
        a, ra = self.raw, self.rad
        b, rb = other.raw, other.rad
        rad = abs(a) * rb + abs(b) * ra + ra * rb
        return a * b, rad

    def __mul__(self, other: ExtendedReal) -> ExtendedReal:
        v, r = self.mul_exact(other)
        q = v >> FRAC_BITS
        return ExtendedReal(q, (r >> FRAC_BITS) + 2)


def _product(gamma, omega) -> tuple[int, int]:
    g = ExtendedReal.from_value(gamma)
    w = ExtendedReal.from_value(omega)
    if g.raw < 0 or w.raw < 0:
        raise ValueError("sin_reduced expects nonnegative gamma and omega")
    v, r = g.mul_exact(w)
    if v + r >= _LIMIT << FRAC_BITS:
        raise BudgetError("gamma * omega exceeds the 64-bit integer budget")
    return v, r


def sincos_ball(gamma, omega, bits: int = 96) -> tuple[tuple[int, int], tuple[int, int], int]:
    """sin and cos of gamma * omega as fixed-point balls at scale ``bits``.

    Returns ``((sin_mid, sin_rad), (cos_mid, cos_rad), bits)``: the exact value
    lies within ``rad / 2**bits`` of ``mid / 2**bits``.  With the default 96
    bits the radius is far below 1e-20 whenever the inputs are exact.
    """
    v, r = _product(gamma, omega)
    p = 2 * FRAC_BITS
    # reduce the scale-256 product down to the working precision
    sh = p - bits
    x = v >> sh
    sn, cs = _fixed.sincos_fixed(x, bits)
    # truncation of x (1 unit) plus input radius, Lipschitz constant 1
    rad = _fixed.ERR + 1 + ((r + (1 << sh) - 1) >> sh)
    return (sn, rad), (cs, rad), bits


def _ball_to_interval(mid: int, rad: int, bits: int) -> Interval:
    lo = dyadic_to_float(mid - rad, -bits, False)
    hi = dyadic_to_float(mid + rad, -bits, True)
    return Interval(max(lo, -1.0), min(hi, 1.0))


def sin_reduced(gamma, omega) -> tuple[Interval, Interval]:
    """Certified (sin, cos) of gamma * omega with the reduction done in 64.128.

    The double endpoints are within an ulp or two of the exact values even
    for gamma ~ 1e10 and omega ~ 1e3; use :func:`sincos_ball` when a narrower
    enclosure than double precision can express is needed.
    """
    (s, rs), (c, rc), bits = sincos_ball(gamma, omega)
    return _ball_to_interval(s, rs, bits), _ball_to_interval(c, rc, bits)
