"""Fixed-point arithmetic on Python integers with explicit error counts.

Every routine here takes exact integer inputs at a binary scale ``p`` (an int
``x`` stands for ``x / 2**p``) and returns an integer result plus a bound, in
units of ``2**-p``, on its distance from the exact real value.  Internally the
work is done with ``GUARD`` extra bits, the accumulated truncation count is kept
far below ``2**(GUARD - 1)``, so after the final shift every result is within
``ERR`` units of the truth.

These are the building blocks for the certified transcendental functions of
:mod:`thetacert.interval.interval` and for the high-precision zeta machinery.
"""

from __future__ import annotations

from functools import lru_cache
from math import isqrt

GUARD = 24
# Error bound (in output units) promised by every public routine below.
ERR = 2


def _atan_inv(k: int, q: int) -> int:
    """atan(1/k) * 2**q, error below 3 * (number of terms) + 3 units."""
    power = (1 << q) // k
    k2 = k * k
    total = 0
    n = 0
    while power:
        term = power // (2 * n + 1)
        total = total - term if n & 1 else total + term
        power //= k2
        n += 1
    return total


@lru_cache(maxsize=None)
def pi_fixed(p: int) -> int:
    """pi * 2**p to within 1 unit."""
    q = p + GUARD
    val = 16 * _atan_inv(5, q) - 4 * _atan_inv(239, q)
    return (val + (1 << (GUARD - 1))) >> GUARD


@lru_cache(maxsize=None)
def ln2_fixed(p: int) -> int:
    """log(2) * 2**p to within 1 unit."""
    q = p + GUARD
    total = 0
    k = 1
    while k <= q:
        total += (1 << (q - k)) // k
        k += 1
    return (total + (1 << (GUARD - 1))) >> GUARD


@lru_cache(maxsize=None)
def _sincos_table(q: int) -> dict[int, tuple[int, int]]:
    # sin/cos(j/32) for |j| <= 26 at scale q, each within 1 unit
    w = q + GUARD
    out = {}
    for j in range(-26, 27):
        a = j << (w - 5)
        a2 = (a * a) >> w
        s = a
        term = a
        n = 1
        while term:
            term = -((term * a2) >> w) // ((n + 1) * (n + 2))
            s += term
            n += 2
        c = 1 << w
        term = 1 << w
        n = 0
        while term:
            term = -((term * a2) >> w) // ((n + 1) * (n + 2))
            c += term
            n += 2
        half = 1 << (GUARD - 1)
        out[j] = ((s + half) >> GUARD, (c + half) >> GUARD)
    return out


def sincos_fixed(x: int, p: int) -> tuple[int, int]:
    """(sin, cos) of ``x / 2**p`` at scale ``p``, each within ERR units.

    ``x`` may be arbitrarily large; pi/2 is generated with enough bits that
    the reduction stays exact to the working precision.
    """
    q = p + GUARD
    X = x << GUARD
    extra = max(0, x.bit_length() - p) + 8
    q2 = q + extra
    hp = pi_fixed(q2 - 1)  # (pi/2) * 2**q2, within 1 unit
    X2 = X << extra
    k = (2 * X2 + hp) // (2 * hp)
    r = (X2 - k * hp) >> extra
    j = (r + (1 << (q - 6))) >> (q - 5)
    s = r - (j << (q - 5))
    ts, tc = _sincos_table(q)[j]
    s2 = (s * s) >> q
    sn = s
    term = s
    n = 1
    while term:
        term = -((term * s2) >> q) // ((n + 1) * (n + 2))
        sn += term
        n += 2
    cs = 1 << q
    term = 1 << q
    n = 0
    while term:
        term = -((term * s2) >> q) // ((n + 1) * (n + 2))
        cs += term
        n += 2
    S = (ts * cs + tc * sn) >> q
    C = (tc * cs - ts * sn) >> q
    quad = k & 3
    if quad == 1:
        S, C = C, -S
    elif quad == 2:
        S, C = -S, -C
    elif quad == 3:
        S, C = -C, S
    half = 1 << (GUARD - 1)
    return (S + half) >> GUARD, (C + half) >> GUARD


def quadrant_fixed(x: int, p: int) -> tuple[int, bool]:
    """floor(x / (pi/2)) for ``x / 2**p``, and whether it is certain.

    The flag is False when x lies so close to a multiple of pi/2 that the
    floor cannot be decided at this precision.
    """
    extra = max(0, x.bit_length() - p) + 40
    q2 = p + extra
    hp = pi_fixed(q2 - 1)
    X2 = x << extra
    k = X2 // hp
    r = X2 - k * hp
    slack = abs(k) + 2
    certain = slack < r < hp - slack
    return k, certain


def exp_fixed(x: int, p: int) -> tuple[int, int]:
    """exp(x / 2**p) as ``(M, e)`` with the value within ERR units of ``M * 2**e``.

    ``M`` carries about ``p`` significant bits regardless of the magnitude of
    the result, so tiny and huge exponentials keep their relative accuracy.
    """
    q = p + GUARD
    X = x << GUARD
    nbits = max(0, x.bit_length() - p) + 8
    q2 = q + nbits
    L = ln2_fixed(q2)
    X2 = X << nbits
    n = (2 * X2 + L) // (2 * L)
    r = (X2 - n * L) >> nbits
    # exp(r) = exp(r/16)**16; r/16 is the same integer at scale q + 4
    w = q + 4
    acc = 1 << w
    term = 1 << w
    k = 1
    while term:
        term = ((term * r) >> w) // k
        acc += term
        k += 1
    for _ in range(4):
        acc = (acc * acc) >> w
    M = acc >> 4
    return (M + (1 << (GUARD - 1))) >> GUARD, n - p


def exp_fixed_point(x: int, p: int) -> tuple[int, int]:
    """exp(x / 2**p) at fixed scale ``p``: returns ``(m, err)``."""
    M, e = exp_fixed(x, p)
    if e >= -p:
        sh = e + p
        return M << sh, ERR << sh
    sh = -(e + p)
    return M >> sh, 2


def log_fixed(num: int, shift: int, p: int) -> int:
    """log(num * 2**-shift) at scale ``p`` (num > 0), within ERR units."""
    if num <= 0:
        raise ValueError("log of nonpositive value")
    q = p + GUARD
    b = num.bit_length() - 1
    k = b - shift
    if q >= b:
        Y = num << (q - b)
    else:
        Y = num >> (b - q)
    one = 1 << q
    # move y from [1, 2) into [1/sqrt2, sqrt2)
    if Y * Y > (2 << (2 * q)):
        k += 1
        Y >>= 1
    z = ((Y - one) << q) // (Y + one)
    neg = z < 0
    z = -z if neg else z
    z2 = (z * z) >> q
    acc = z
    pw = z
    j = 1
    while pw:
        pw = (pw * z2) >> q
        acc += pw // (2 * j + 1)
        j += 1
    res = -2 * acc if neg else 2 * acc
    if k:
        kb = abs(k).bit_length() + 2
        res += (k * ln2_fixed(q + kb)) >> kb
    return (res + (1 << (GUARD - 1))) >> GUARD


def atan_fixed(x: int, p: int) -> int:
    """atan(x / 2**p) at scale ``p`` for 0 <= x <= 2**p, within ERR units."""
    if x < 0 or x > (1 << p):
        raise ValueError("atan_fixed expects an argument in [0, 1]")
    q = p + GUARD
    X = x << GUARD
    one = 1 << q
    for _ in range(2):
        t = isqrt((one << q) + X * X)
        X = (X << q) // (one + t)
    x2 = (X * X) >> q
    acc = X
    pw = X
    j = 1
    while pw:
        pw = (pw * x2) >> q
        t = pw // (2 * j + 1)
        acc = acc - t if j & 1 else acc + t
        j += 1
    return (4 * acc + (1 << (GUARD - 1))) >> GUARD


def sqrt_fixed(num: int, shift: int, p: int) -> int:
    """floor(sqrt(num * 2**-shift) * 2**p) up to 1 unit (num >= 0)."""
    e = 2 * p - shift
    if e >= 0:
        return isqrt(num << e)
    return isqrt(num >> (-e))


def erf_series_fixed(x: int, p: int) -> int:
    """erf(x / 2**p) at scale ``p`` for 0 <= x/2**p <= 8, within ERR units."""
    q = p + GUARD + 16
    X = x << (GUARD + 16)
    x2 = (X * X) >> q
    term = X
    acc = X
    n = 0
    while True:
        term = ((term * x2) << 1) // ((2 * n + 3) << q)
        if not term:
            break
        acc += term
        n += 1
    em, ee = exp_fixed(-x2, q)
    val = acc * em
    val = val >> (-ee) if ee < 0 else val << ee
    # times 2/sqrt(pi)
    sp = sqrt_fixed(pi_fixed(q + 8), q + 8, q)
    val = (val << (q + 1)) // sp
    return (val + (1 << (GUARD + 15))) >> (GUARD + 16)


def to_fixed(num: int, den: int, p: int) -> tuple[int, int]:
    """Rational ``num/den`` (den > 0) at scale p: (floor value, exact flag)."""
    v, rem = divmod(num << p, den) if p >= 0 else divmod(num, den << -p)
    return v, rem == 0
