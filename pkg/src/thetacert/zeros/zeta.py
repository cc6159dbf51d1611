"""Certified evaluation of zeta(s), theta(t) and Hardy's Z(t) in fixed point.

All quantities are Python integers at the binary scale ``WORK_BITS`` together
with an error bound counted in units of ``2**-WORK_BITS``.  Complex errors are
disk radii.  zeta is evaluated by Euler-Maclaurin summation with a rigorous
remainder bound, theta(t) by the Stirling series of log Gamma with the
sector-sharpened remainder, and the evaluation point is always an exact
dyadic rational so nothing is rounded on input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt

import numpy as np

from ..interval import _fixed
from ..interval.interval import Interval, dyadic_to_float

WORK_BITS = 96
_LOG_GUARD = 40
_THETA_GUARD = 32
_STIRLING_TERMS = 12
_MIN_STIRLING_MOD = 30


@dataclass(frozen=True)
class Ball:
    """Real fixed-point ball ``mid / 2**bits +- rad / 2**bits``."""

    mid: int
    rad: int
    bits: int = WORK_BITS

    def sign(self) -> int:
        """+1 or -1 when certain, 0 when the ball touches zero."""
        if self.mid > self.rad:
            return 1
        if self.mid < -self.rad:
            return -1
        return 0

    def to_interval(self) -> Interval:
        return Interval(
            dyadic_to_float(self.mid - self.rad, -self.bits, False),
            dyadic_to_float(self.mid + self.rad, -self.bits, True),
        )

    def __float__(self) -> float:
        return self.mid / (1 << self.bits)


@dataclass(frozen=True)
class ComplexBall:
    re: int
    im: int
    rad: int  # disk radius
    bits: int = WORK_BITS

    def real(self) -> Ball:
        return Ball(self.re, self.rad, self.bits)

    def imag(self) -> Ball:
        return Ball(self.im, self.rad, self.bits)

    def __complex__(self) -> complex:
        s = float(1 << self.bits)
        return complex(self.re / s, self.im / s)


# -- small exact helpers --------------------------------------------------------


_BERNOULLI: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Bernoulli number B_n (B_1 = -1/2)."""
    B = _BERNOULLI
    while len(B) <= n:
        m = len(B)
        s = Fraction(0)
        for k in range(m):
            s += comb(m + 1, k) * B[k]
        B.append(-s / (m + 1))
    return B[n]


@lru_cache(maxsize=None)
def _em_coeff(k: int) -> Fraction:
    """B_{2k} / (2k)!"""
    return bernoulli(2 * k) / math.factorial(2 * k)


@lru_cache(maxsize=None)
def _em_ratio(k: int) -> tuple[int, int, float]:
    """c_{k+1} / c_k as (numerator, denominator, |value|)."""
    r = _em_coeff(k + 1) / _em_coeff(k)
    return r.numerator, r.denominator, abs(float(r))


_spf_cache: list[np.ndarray] = []


def _spf(n: int) -> list[int]:
    """Smallest-prime-factor table covering 0..n-1."""
    if _spf_cache and len(_spf_cache[0]) >= n:
        return _spf_cache[1]
    size = max(n, 1024) * 2
    spf = np.zeros(size, dtype=np.int64)
    for p in range(2, isqrt(size - 1) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    idx = np.nonzero(spf == 0)[0]
    spf[idx] = idx
    _spf_cache[:] = [spf, spf.tolist()]
    return _spf_cache[1]


@lru_cache(maxsize=65536)
def _log_int(n: int, p: int) -> int:
    """log(n) at scale p, within ERR units."""
    return _fixed.log_fixed(n, 0, p)


def _cmul(ar, ai, ea, br, bi, eb, p):
    """Complex ball product at scale p; radii are disk radii in units."""
    re = (ar * br - ai * bi) >> p
    im = (ar * bi + ai * br) >> p
    ma = abs(ar) + abs(ai)
    mb = abs(br) + abs(bi)
    err = ((ma * eb + mb * ea + 2 * ea * eb) >> p) + 3
    return re, im, err


def _rat_fixed(num: int, den: int, p: int) -> int:
    return (num << p) // den


def to_dyadic(t, bits: int = WORK_BITS) -> int:
    """Nearest multiple of 2**-bits to t, as an integer at scale ``bits``."""
    fr = Fraction(t) if not isinstance(t, str) else Fraction(t.strip())
    return round(fr * (1 << bits))


# -- prime-power building blocks ---------------------------------------------


def _n_pow_minus_s(n: int, sig: int, T: int, p: int) -> tuple[int, int, int]:
    """n^{-s} as a complex ball with s = (sig + i T) / 2**p."""
    g = p + _LOG_GUARD
    L = _log_int(n, g)
    ph = (T * L) >> g
    sn, cs = _fixed.sincos_fixed(ph, p)
    if sig == 1 << (p - 1):
        a = isqrt((1 << (2 * p)) // n)
        err = 10
    else:
        a, ea = _fixed.exp_fixed_point(-((sig * L) >> g) - 1, p)
        err = 12 + ea
    return (a * cs) >> p, -((a * sn) >> p), err


def main_sum(sig: int, T: int, N: int, p: int = WORK_BITS) -> tuple[int, int, int]:
    """Sum_{n<N} n^{-s} via completely multiplicative assembly from primes."""
    if T >> p >= 1 << (_LOG_GUARD - 2):
        raise ValueError("height too large for the phase guard bits")
    spf = _spf(N + 1)
    one = 1 << p
    wr = [0] * N
    wi = [0] * N
    we = [0] * N
    if N > 1:
        wr[1] = one
    sr = one if N > 1 else 0
    si = 0
    se = 0
    for n in range(2, N):
        q = spf[n]
        if q == n:
            re, im, e = _n_pow_minus_s(n, sig, T, p)
        else:
            m = n // q
            ar = wr[q]
            ai = wi[q]
            br = wr[m]
            bi = wi[m]
            re = (ar * br - ai * bi) >> p
            im = (ar * bi + ai * br) >> p
            e = we[q] + we[m] + 3
        wr[n] = re
        wi[n] = im
        we[n] = e
        sr += re
        si += im
        se += e
    return sr, si, se


def _tail(sig: int, T: int, N: int, p: int, max_terms: int = 120):
    """Euler-Maclaurin correction factor and its remainder.

    Returns ``(qr, qi, qerr, rem)``: Q = sum_k B_2k/(2k)! s(s+1)...(s+2k-2) / N^(2k-1)
    at scale p with disk error ``qerr``, and ``rem`` a bound (in units) on the
    truncation remainder once multiplied by |N^{-s}| <= N^{-1/2}.
    The terms are generated by the ratio recurrence in fixed point with a
    running error count; every factor applied has modulus below one.
    """
    g = 32
    q = p + g
    one = 1 << p
    tf = T / one
    sf = sig / one
    # W_1 = s / (12 N)
    wr = (sig << q) // (12 * N * one)
    wi = (T << q) // (12 * N * one)
    ew = 2.0
    qr, qi, qe = wr, wi, ew
    k = 1
    while True:
        # W_{k+1} = W_k (s+2k-1)(s+2k) / N^2 * c_{k+1} / c_k
        for j in (2 * k - 1, 2 * k):
            u = sig + j * one
            wr, wi = (wr * u - wi * T) >> p, (wr * T + wi * u) >> p
            ew = ew * math.hypot(sf + j, tf) * (1 + 1e-12) + 3
        rn, rd, rf = _em_ratio(k)
        rd *= N * N
        wr = (wr * rn) // rd
        wi = (wi * rn) // rd
        ew = ew * rf / (N * N) * (1 + 1e-12) + 3
        k += 1
        mag = abs(wr) + abs(wi) + ew
        fac = math.hypot(sf + 2 * k - 1, tf) / (sf + 2 * k - 1) / math.sqrt(N)
        rem = mag * fac * (1 + 1e-9)
        if rem < 2.0 ** g or k > max_terms:
            break
        qr += wr
        qi += wi
        qe += ew
    rem_units = math.ceil(rem / 2.0**g) + 2
    qerr = math.ceil(qe / 2.0**g) + 2
    return qr >> g, qi >> g, qerr, rem_units


def em_cutoff(t: float) -> int:
    return int(t / (1.2 * math.pi)) + 30


def zeta_ball(sig: int, T: int, N: int | None = None, p: int = WORK_BITS) -> ComplexBall:
    """zeta(s) at s = (sig + iT) / 2**p, certified, for 1/2 <= sigma <= 4 and t > 0."""
    one = 1 << p
    if not (one >> 1) <= sig <= 4 * one:
        raise ValueError("sigma outside [1/2, 4]")
    if T <= 0:
        raise ValueError("t must be positive")
    t = T / one
    if N is None:
        N = em_cutoff(t)
    sr, si, se = main_sum(sig, T, N, p)
    # N^{-s}
    xr, xi, xe = _n_pow_minus_s(N, sig, T, p)
    # N^{1-s}/(s-1) = N * N^{-s} * (sig - 1 - iT) / ((sig-1)^2 + T^2)
    dr = sig - one
    den = dr * dr + T * T
    yr = _rat_fixed(dr * one, den, p)
    yi = -_rat_fixed(T * one, den, p)
    yr2, yi2, ye = _cmul(xr, xi, xe, yr, yi, 3, p)
    sr += N * yr2
    si += N * yi2
    se += N * ye
    # N^{-s} / 2
    sr += xr >> 1
    si += xi >> 1
    se += (xe >> 1) + 2
    # Bernoulli corrections
    qr, qi, qe, rem = _tail(sig, T, N, p)
    tr, ti, te = _cmul(xr, xi, xe, qr, qi, qe, p)
    sr += tr
    si += ti
    se += te + rem
    return ComplexBall(sr, si, se, p)


# -- theta(t) -----------------------------------------------------------------


def _arg_fixed(A: int, B: int, q: int) -> int:
    """arg(A + iB) at scale q for A > 0, B >= 0 (within ERR + 1 units)."""
    if B <= A:
        return _fixed.atan_fixed((B << q) // A, q)
    return (_fixed.pi_fixed(q) >> 1) - _fixed.atan_fixed((A << q) // B, q)


def theta_ball(T: int, p: int = WORK_BITS) -> Ball:
    """Riemann-Siegel theta at t = T / 2**p, certified."""
    if T <= 0:
        raise ValueError("t must be positive")
    q = p + _THETA_GUARD
    one_q = 1 << q
    t = Fraction(T, 1 << p)
    K = 0 if t / 2 >= _MIN_STIRLING_MOD else _MIN_STIRLING_MOD
    # w = a + i b, a = 1/4 + K, b = t/2; integers at scale p + 2
    s = p + 2
    A = (1 + 4 * K) << (s - 2)
    B = T << 1
    err = 0
    arg = _arg_fixed(A, B, q)
    err += _fixed.ERR + 2
    mod2 = A * A + B * B
    logmod = _fixed.log_fixed(mod2, 2 * s, q) >> 1  # log|w|
    err += 2
    # Im[(w - 1/2) log w - w] = (a - 1/2) arg + b log|w| - b
    a_m = Fraction(4 * K - 1, 4)
    val = (a_m.numerator * arg) // a_m.denominator
    err += int(abs(a_m) * (_fixed.ERR + 2)) + 2
    b = t / 2
    val += (b.numerator * logmod) // b.denominator
    err += int(b * 2) + 2
    val -= (b.numerator << q) // b.denominator
    err += 1
    # Stirling corrections: B_2j / (2j (2j-1)) Im w^{-(2j-1)}
    cr, ci = A, -B  # conj(w) at scale s
    pr, pi_ = cr, ci
    m = _STIRLING_TERMS
    for j in range(1, m + 1):
        n = 2 * j - 1
        if j > 1:
            for _ in range(2):
                pr, pi_ = pr * cr - pi_ * ci, pr * ci + pi_ * cr
        # w^{-n} = conj(w)^n / |w|^{2n}; conj(w)^n carries scale s*n, |w|^{2n} scale 2 s n
        coef = bernoulli(2 * j) / (2 * j * (2 * j - 1))
        num = coef.numerator * pi_ * (1 << (s * n))
        den = coef.denominator * mod2**n
        val += (num << q) // den
        err += 1
    # remainder |B_{2m+2}| / ((2m+2)(2m+1) |w|^{2m+1}) * 2^{m+1}
    wmod2 = Fraction(mod2, 1 << (2 * s))
    bigger = max(Fraction(A, 1 << s), Fraction(B, 1 << s))
    rem = abs(bernoulli(2 * m + 2)) / ((2 * m + 2) * (2 * m + 1)) * 2 ** (m + 1) / (wmod2**m * bigger)
    err += math.ceil(rem * one_q) + 1
    # shift back: subtract arg(1/4 + j + i t/2) for j < K
    for j in range(K):
        val -= _arg_fixed((1 + 4 * j) << (s - 2), B, q)
        err += _fixed.ERR + 2
    # - (t/2) log pi
    lp = _fixed.log_fixed(_fixed.pi_fixed(q + 8), q + 8, q)
    val -= (b.numerator * lp) // b.denominator
    err += int(b * 3) + 2
    g = _THETA_GUARD
    return Ball(val >> g, (err >> g) + 2, p)


def hardy_z_ball(T: int, p: int = WORK_BITS) -> Ball:
    """Z(t) = exp(i theta(t)) zeta(1/2 + it) at t = T / 2**p, certified."""
    th = theta_ball(T, p)
    z = zeta_ball(1 << (p - 1), T, None, p)
    sn, cs = _fixed.sincos_fixed(th.mid, p)
    e = 2 * (_fixed.ERR + th.rad)
    re, _im, err = _cmul(cs, sn, e, z.re, z.im, z.rad, p)
    return Ball(re, err, p)


def hardy_z(t) -> Interval:
    """Certified enclosure of Z(t) at the dyadic nearest to t."""
    return hardy_z_ball(to_dyadic(t)).to_interval()


def zero_count_ball(T: int, p: int = WORK_BITS) -> Ball:
    """theta(t)/pi + 1 as a ball (the smooth part of N(t))."""
    th = theta_ball(T, p)
    q = p + 8
    pi_q = _fixed.pi_fixed(q)
    mid = ((th.mid << q) // pi_q) + (1 << p)
    # |d(x/pi)| <= rad/pi + x * 2^-q / pi^2 ~ small
    rad = th.rad + abs(th.mid) // (1 << (q - 2)) // 8 + 2
    return Ball(mid, rad, p)


# -- float-precision helpers used only to locate zeros -----------------------------


def theta_float(t: np.ndarray) -> np.ndarray:
    from scipy.special import loggamma

    t = np.asarray(t, dtype=float)
    return loggamma(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)


def _zeta_em_float(sigma: float, t: np.ndarray) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    N = em_cutoff(float(t.max()))
    n = np.arange(1, N, dtype=float)
    s = sigma + 1j * t[:, None]
    logn = np.log(n)[None, :]
    total = np.exp(-s * logn).sum(axis=1)
    s1 = s[:, 0]
    Ns = np.exp(-s1 * math.log(N))
    total += N * Ns / (s1 - 1) + 0.5 * Ns
    poch = s1.copy()
    for k in range(1, 40):
        c = float(_em_coeff(k))
        term = c * poch * Ns / float(N) ** (2 * k - 1)
        total += term
        poch = poch * (s1 + 2 * k - 1) * (s1 + 2 * k)
        if np.max(np.abs(term)) < 1e-17:
            break
    return total


def zeta_float(sigma: float, t) -> np.ndarray:
    """zeta(sigma + it) in double precision by Euler-Maclaurin (moderate t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.shape, dtype=complex)
    # keep memory bounded: chunk rows so rows * N stays near 4e6
    N = em_cutoff(float(t.max()))
    rows = max(1, 4_000_000 // N)
    for i in range(0, len(t), rows):
        out[i : i + rows] = _zeta_em_float(sigma, t[i : i + rows])
    return out


def z_em_float(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return (np.exp(1j * theta_float(t)) * zeta_float(0.5, t)).real


@lru_cache(maxsize=1)
def _psi_cheb():
    # Chebyshev fit of Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) on [0, 1]
    from numpy.polynomial import chebyshev as C

    deg = 60
    x = np.cos(np.pi * (np.arange(400) + 0.5) / 400)
    p = 0.5 * (x + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.cos(2 * np.pi * (p * p - p - 1 / 16)) / np.cos(2 * np.pi * p)
    coef = C.chebfit(x, y, deg)
    derivs = [coef]
    for _ in range(6):
        derivs.append(C.chebder(derivs[-1]) * 2.0)  # d/dp = 2 d/dx
    return derivs


def z_rs_float(t) -> np.ndarray:
    """Riemann-Siegel Z(t) with the first three correction terms (t >= 200)."""
    from numpy.polynomial import chebyshev as C

    t = np.atleast_1d(np.asarray(t, dtype=float))
    d = _psi_cheb()
    tau = np.sqrt(t / (2 * np.pi))
    m = np.floor(tau).astype(np.int64)
    frac = tau - m
    x = 2 * frac - 1
    th = theta_float(t)
    M = int(m.max())
    out = np.zeros_like(t)
    n = np.arange(1, M + 1, dtype=float)
    logn = np.log(n)
    rows = max(1, 2_000_000 // M)
    for i in range(0, len(t), rows):
        sl = slice(i, i + rows)
        ts = t[sl][:, None]
        mask = n[None, :] <= m[sl][:, None]
        terms = np.cos(th[sl][:, None] - ts * logn[None, :]) / np.sqrt(n)[None, :]
        out[sl] = 2 * np.where(mask, terms, 0.0).sum(axis=1)
    c0 = C.chebval(x, d[0])
    c1 = -C.chebval(x, d[3]) / (96 * np.pi**2)
    c2 = C.chebval(x, d[2]) / (64 * np.pi**2) + C.chebval(x, d[6]) / (18432 * np.pi**4)
    u = 1.0 / tau
    sign = np.where(m % 2 == 1, 1.0, -1.0)
    out += sign * np.sqrt(u) * (c0 + c1 * u + c2 * u * u)
    return out


RS_THRESHOLD = 200.0


def z_float(t) -> np.ndarray:
    """Double-precision Z(t) for locating sign changes (not certified)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    lo = t < RS_THRESHOLD
    if lo.any():
        out[lo] = z_em_float(t[lo])
    if (~lo).any():
        out[~lo] = z_rs_float(t[~lo])
    return out
