"""Compute and certify the zeta zeros with ordinates up to a modest height.

Zeros are located on a double-precision grid of Z(t) and then isolated with
certified evaluations: every returned interval [a, b] has Z(a) and Z(b) of
provably opposite signs.  Completeness is certified by the zero-counting
function: at a height T_c >= t_max where Re zeta(sigma + i T_c) > 0 is proven
for 1/2 <= sigma <= 2, the argument of zeta(1/2 + i T_c) lies in
(-pi/2, pi/2), so N(T_c) is the integer nearest theta(T_c)/pi + 1.  If the
number of isolated sign changes in (0, T_c] equals N(T_c), every zero there
is simple and has been found.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .table import ZeroTable, ZeroTableError
from .zeta import (
    WORK_BITS,
    _em_coeff,
    em_cutoff,
    hardy_z_ball,
    theta_float,
    to_dyadic,
    z_em_float,
    z_float,
    zero_count_ball,
    zeta_ball,
    zeta_float,
)

log = logging.getLogger(__name__)

GRID_STEP = 0.1
FINE_STEP = 0.01
FINE_BELOW = 0.5
GRID_START = 1.0
EM_FLOAT_MAX = 1.0e4
T_MAX_LIMIT = 1.0e5
MIN_TARGET = 1e-30
_P = WORK_BITS
_ONE = 1 << _P


class CompletenessError(ZeroTableError):
    """The isolated zeros do not account for N(T) (names the region)."""


class AccuracyError(ZeroTableError):
    pass


# -- float location ---------------------------------------------------------------


def _grid(t_lo: float, t_hi: float, step: float) -> np.ndarray:
    n = int(math.floor((t_hi - t_lo) / step + 1e-9))
    g = t_lo + step * np.arange(n + 1)
    if g[-1] < t_hi:
        g = np.append(g, t_hi)
    return g


def locate_sign_changes(t_lo: float, t_hi: float, step: float = GRID_STEP,
                        fine: float = FINE_STEP) -> list[tuple[float, float]]:
    """Brackets (a, b) with a float sign change of Z, in ascending order."""
    g = _grid(t_lo, t_hi, step)
    z = z_float(g)
    ratio = max(1, int(round(step / fine)))
    ts: list[np.ndarray] = []
    zs: list[np.ndarray] = []
    near = np.minimum(np.abs(z[:-1]), np.abs(z[1:])) < FINE_BELOW
    idx = np.nonzero(near)[0]
    if len(idx):
        sub = (g[idx, None] + (g[idx + 1] - g[idx])[:, None] * (np.arange(1, ratio) / ratio)[None, :]).ravel()
        zsub = z_float(sub)
        ts = [g, sub]
        zs = [z, zsub]
    else:
        ts, zs = [g], [z]
    t_all = np.concatenate(ts)
    z_all = np.concatenate(zs)
    order = np.argsort(t_all, kind="stable")
    t_all = t_all[order]
    z_all = z_all[order]
    sgn = np.where(z_all >= 0, 1, -1)
    ch = np.nonzero(sgn[:-1] != sgn[1:])[0]
    return [(float(t_all[i]), float(t_all[i + 1])) for i in ch]


def _float_root(a: float, b: float) -> tuple[float, float]:
    """(root estimate, estimated accuracy) from double-precision Z."""
    if b <= EM_FLOAT_MAX:
        f = lambda t: float(z_em_float(t)[0])  # noqa: E731
        try:
            if f(a) * f(b) < 0:
                return brentq(f, a, b, xtol=1e-14, rtol=1e-15, maxiter=200), 1e-9 * max(1.0, b / 2000)
        except ValueError:
            pass
    f = lambda t: float(z_float(t)[0])  # noqa: E731
    try:
        return brentq(f, a, b, xtol=1e-12, maxiter=200), 1e-6
    except ValueError:
        return 0.5 * (a + b), 0.5 * (b - a)


# -- certified isolation ------------------------------------------------------------


def _signed_eval(T: int, lo: int, hi: int) -> tuple[int, int]:
    """Certified Z sign at T, nudging the point inside (lo, hi) if the ball touches 0."""
    span = max(1, (hi - lo) // 64)
    for k in range(8):
        b = hardy_z_ball(T)
        s = b.sign()
        if s:
            return T, b.mid
        T = T + span if T + span < hi else T - span
        span = max(1, span // 2)
    raise AccuracyError(f"cannot decide the sign of Z near t={T / _ONE:.17g}")


def certify_root(a: float, b: float, target: float) -> tuple[int, int]:
    """Certified bracket [lo, hi] (ints at scale 2**-96) with a sign change, hi - lo <= target."""
    A = to_dyadic(Fraction(a))
    B = to_dyadic(Fraction(b))
    tgt = max(2, int(target * _ONE))
    g, acc = _float_root(a, b)
    G = to_dyadic(Fraction(g))
    D = max(tgt // 2, to_dyadic(Fraction(acc)))
    # initial certified bracket around the float root, widening on failure
    while True:
        lo, hi = max(A, G - D), min(B, G + D)
        lo, zlo = _signed_eval(lo, A - 1, hi)
        hi, zhi = _signed_eval(hi, lo, B + 1)
        if (zlo > 0) != (zhi > 0):
            break
        if lo <= A and hi >= B:
            raise AccuracyError(f"no certified sign change in [{a}, {b}]")
        D *= 1000
    bisect = False
    for _ in range(400):
        w = hi - lo
        if w <= tgt:
            return lo, hi
        if bisect:
            x = lo + w // 2
            x, zx = _signed_eval(x, lo, hi)
            if (zx > 0) == (zlo > 0):
                lo, zlo = x, zx
            else:
                hi, zhi = x, zx
            bisect = False
            continue
        x = lo + (w * zlo) // (zlo - zhi)
        # probe half-width: enough to cover the secant error for smooth Z
        wf = w / _ONE
        h = max(int(0.45 * tgt), int(100.0 * wf * wf * _ONE), 1)
        p1 = min(max(x - h, lo + 1), hi - 1)
        p2 = min(max(x + h, p1 + 1), hi - 1)
        if p1 >= p2:
            return lo, hi
        p1, z1 = _signed_eval(p1, lo, p2)
        p2, z2 = _signed_eval(p2, p1, hi)
        pts = [(lo, zlo), (p1, z1), (p2, z2), (hi, zhi)]
        for (u, zu), (v, zv) in zip(pts, pts[1:]):
            if (zu > 0) != (zv > 0):
                lo, zlo, hi, zhi = u, zu, v, zv
                break
        if (p1, p2) != (lo, hi):
            bisect = True
    raise AccuracyError(f"isolation did not converge near t={g!r}")


def _certify_chunk(args):
    brackets, target = args
    return [certify_root(a, b, target) for a, b in brackets]


# -- completeness -----------------------------------------------------------------


def _deriv_bound(sig_lo: float, t: float, N: int) -> float:
    """Upper bound for |zeta'(sigma + it)| over sigma >= sig_lo (Euler-Maclaurin form)."""
    n = np.arange(2, N, dtype=float)
    main = float(np.sum(n ** (-sig_lo) * np.log(n)))
    s_abs = math.hypot(sig_lo - 1, t)
    lnN = math.log(N)
    pole = N ** (1 - sig_lo) * (lnN / s_abs + 1 / s_abs**2)
    half = 0.5 * lnN * N ** (-sig_lo)
    # Cauchy estimate of the correction terms on a disk of radius 1/4
    r = 0.25
    sig_c = sig_lo - r
    mod = math.hypot(sig_lo, t) + r
    lnN = math.log(N)
    tail = 0.0
    lpoch = math.log(mod)
    for k in range(1, 200):
        lc = math.log(abs(float(_em_coeff(k))))
        tail += math.exp(lc + lpoch - (sig_c + 2 * k - 1) * lnN)
        lpoch += math.log((mod + 2 * k - 1) * (mod + 2 * k))
        lnext = math.log(abs(float(_em_coeff(k + 1)))) + lpoch - (sig_c + 2 * k + 1) * lnN
        if lnext < -70:
            tail += math.exp(lnext) * (mod + 2 * k + 1) / (sig_c + 2 * k + 1)
            break
    return 1.01 * (main + pole + half + tail / r) + 1e-9


def real_part_positive(T: int, sigma_lo: Fraction = Fraction(1, 2), sigma_hi: Fraction = Fraction(2),
                       max_evals: int = 5000) -> bool:
    """Prove Re zeta(sigma + iT) > 0 for all sigma in [sigma_lo, sigma_hi]."""
    t = T / _ONE
    N = em_cutoff(t)
    stack = [(int(sigma_lo * _ONE), int(sigma_hi * _ONE))]
    evals = 0
    while stack:
        a, b = stack.pop()
        m = (a + b) >> 1
        z = zeta_ball(m, T, N)
        evals += 1
        low = (z.re - z.rad) / _ONE
        if low <= 0:
            return False
        D = _deriv_bound(a / _ONE, t, N)
        if low - D * (b - a) / (2 * _ONE) > 0:
            continue
        if evals > max_evals:
            return False
        stack.append((m, b))
        stack.append((a, m))
    return True


def zero_count(T: int) -> int | None:
    """N(T) when T is a proven good height, else None."""
    if not real_part_positive(T):
        return None
    x = zero_count_ball(T)
    half = _ONE >> 1
    n = (x.mid + half) >> _P
    centre = n << _P
    if x.mid - x.rad > centre - half and x.mid + x.rad < centre + half:
        return int(n)
    return None


def find_count_height(t_min: float, search: float = 6.0, step: float = 0.05) -> tuple[int, int]:
    """A height T >= t_min with certified N(T); returns (T as scale-96 int, N(T))."""
    cand = _grid(t_min, t_min + search, step)
    sig = np.linspace(0.5, 2.0, 16)
    worst = np.full(len(cand), np.inf)
    for s in sig:
        worst = np.minimum(worst, zeta_float(float(s), cand).real)
    order = np.argsort(-worst, kind="stable")
    for i in order[:12]:
        if worst[i] <= 0.05:
            break
        T = to_dyadic(Fraction(float(cand[i])))
        n = zero_count(T)
        if n is not None:
            return T, n
    raise CompletenessError(f"no height with a certified zero count found in [{t_min}, {t_min + search}]")


# -- driver ----------------------------------------------------------------------


def compute_zeros(t_max: float, target_accuracy: float = 1e-15, workers: int = 1,
                  grid_step: float = GRID_STEP, fine_step: float = FINE_STEP) -> ZeroTable:
    """Every zero ordinate in (0, t_max], each isolated to width <= target_accuracy."""
    t_max = float(t_max)
    if not (10.0 <= t_max <= T_MAX_LIMIT):
        raise ValueError(f"t_max must lie in [10, {T_MAX_LIMIT:g}]")
    if not (MIN_TARGET <= target_accuracy <= 0.01):
        raise ValueError("target_accuracy must lie in [1e-30, 1e-2]")
    Tc, n_expected = find_count_height(t_max)
    tc = Tc / _ONE
    brackets = []
    for attempt in range(3):
        brackets = locate_sign_changes(GRID_START, tc, grid_step, fine_step)
        if len(brackets) == n_expected:
            break
        log.warning("grid found %d sign changes below %.6f, expected %d; refining",
                    len(brackets), tc, n_expected)
        grid_step /= 4
        fine_step /= 4
    if len(brackets) != n_expected:
        raise CompletenessError(
            f"found {len(brackets)} sign changes of Z in (0, {tc:.6f}] but N = {n_expected}")
    # the last grid point is exactly Tc, so every bracket lies in (0, Tc]
    if workers > 1 and len(brackets) > 64:
        size = math.ceil(len(brackets) / (workers * 4))
        chunks = [(brackets[i:i + size], target_accuracy) for i in range(0, len(brackets), size)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_certify_chunk, chunks))
        iso = [b for part in parts for b in part]
    else:
        iso = _certify_chunk((brackets, target_accuracy))
    for i in range(1, len(iso)):
        if not iso[i - 1][1] < iso[i][0]:
            raise CompletenessError(f"isolating intervals {i - 1} and {i} overlap")
    cut = to_dyadic(Fraction(t_max))
    keep = []
    for lo, hi in iso:
        if hi <= cut:
            keep.append((lo, hi))
        elif lo <= cut:
            raise AccuracyError(f"a zero enclosure straddles t_max={t_max}")
    sh = 128 - _P
    return ZeroTable([lo << sh for lo, _ in keep], [hi << sh for _, hi in keep],
                     source=f"computed t_max={t_max!r} target={target_accuracy!r}",
                     abs_accuracy=target_accuracy, complete_to=t_max)


def theta_estimate(t: float) -> float:
    return float(theta_float(np.array([t]))[0])
