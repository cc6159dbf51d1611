"""Certified tail mass of the Gaussian kernel sqrt(a/2pi) exp(-a y^2 / 2)."""

from __future__ import annotations

import math

from . import _fixed
from .interval import Interval, PI, dyadic_to_float, exp, sqrt

_P = 120
_SERIES_MAX = 6.0


def _erfc_fixed(z: float, up: bool) -> float:
    """erfc at the exact double z in [0, 6], rounded in the requested direction."""
    n, d = z.as_integer_ratio()
    s = d.bit_length() - 1
    if s <= _P:
        x = n << (_P - s)
        exact = True
    else:
        x = n >> (s - _P)
        exact = (x << (s - _P)) == n
    if not exact and not up:
        x += 1  # erfc decreases: a larger argument gives a lower bound
    v = (1 << _P) - _fixed.erf_series_fixed(x, _P)
    if up:
        return dyadic_to_float(v + _fixed.ERR, -_P, True)
    return dyadic_to_float(max(v - _fixed.ERR, 0), -_P, False)


def _erfc_asymptotic(z: float) -> Interval:
    # 2 e^{-z^2} / (sqrt(pi) (z + sqrt(z^2 + 2))) < erfc(z) <= e^{-z^2} / (z sqrt(pi))
    zi = Interval(z)
    g = exp(-zi.square())
    sp = sqrt(PI)
    lower = 2.0 * g / (sp * (zi + sqrt(zi.square() + 2.0)))
    upper = g / (zi * sp)
    return Interval(lower.lo, upper.hi)


def erfc_interval(z: Interval) -> Interval:
    """Enclosure of erfc over z (z.lo >= 0)."""
    if z.lo < 0:
        raise ValueError("erfc_interval expects z >= 0")
    if z.hi == math.inf:
        hi_part = 0.0
    elif z.hi <= _SERIES_MAX:
        hi_part = _erfc_fixed(z.hi, False)
    else:
        hi_part = _erfc_asymptotic(z.hi).lo
    if z.lo <= _SERIES_MAX:
        lo_part = _erfc_fixed(z.lo, True)
    else:
        lo_part = _erfc_asymptotic(z.lo).hi
    return Interval(hi_part, min(lo_part, 1.0) if z.lo > 0 else 1.0)


def erf_like_tail(a, alpha=1.0) -> Interval:
    """Mass of the unit Gaussian kernel with concentration alpha outside [-a, a].

    Equals erfc(a sqrt(alpha / 2)); returned as an enclosure that is
    nonincreasing in ``a``.
    """
    ai = Interval(a)
    if ai.lo < 0:
        raise ValueError("erf_like_tail expects a >= 0")
    if ai.hi == 0.0:
        return Interval(1.0, 1.0)
    z = ai * sqrt(Interval(alpha) / 2)
    if z.lo < 0:
        z = Interval(0.0, z.hi)
    return erfc_interval(z)
