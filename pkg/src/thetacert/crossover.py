"""Certified lower bounds for the Gaussian-smoothed average of theta(x) - x.

The smoothed integral

    I(omega, eta) = int_{omega-eta}^{omega+eta} K(u - omega) e^{-u/2} (theta(e^u) - e^u) du

is bounded below by -1 minus a kernel-weighted sum over zeta zeros minus four
explicit error terms.  A positive bound proves theta(x) > x somewhere in
[e^{omega-eta}, e^{omega+eta}]; the window can then be narrowed by bounding
the kernel tails.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .interval import LOG_2PI, PI, Interval, exp, exp_exact, log, sqrt
from .interval import _fixed
from .interval.extended import ExtendedReal
from .interval.interval import dyadic_to_float
from .zeros.table import SCALE, ZeroTable

# working scale of the fixed-point zero sum
SUM_BITS = 96
CHUNK = 1 << 16
SHARPEN_MIN_GAP = 700
BOUND_MIN_GAP = 400
ETA0_SEARCH_STEPS = 40


class ParameterError(ValueError):
    """Raised when BoundParams violate the constraints; carries every violation."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class TableTooShortError(ValueError):
    """The zero table does not reach the requested cutoff."""


class PreconditionError(ValueError):
    pass


def parse_exact(value) -> Fraction:
    """Exact rational from int, Fraction, decimal string or forms like '933831/2^44'."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats are taken at their decimal repr so '727.951332655' stays itself
        return Fraction(repr(value))
    s = str(value).strip().replace(" ", "").replace("**", "^")

    def term(t: str) -> Fraction:
        if "^" in t:
            b, k = t.split("^", 1)
            return Fraction(b) ** int(k)
        return Fraction(t)

    out = Fraction(1)
    for i, part in enumerate(s.split("/")):
        factor = Fraction(1)
        for piece in part.split("*"):
            factor *= term(piece)
        out = factor if i == 0 else out / factor
    return out


def _fmt(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    # denominators built from 2s and 5s print as exact decimals
    a = b = 0
    while d % 2 == 0:
        d //= 2
        a += 1
    while d % 5 == 0:
        d //= 5
        b += 1
    if d == 1 and max(a, b) > 20 and b == 0:
        return f"{x.numerator}/2^{a}"
    if d == 1:
        m = max(a, b)
        n = abs(x.numerator) * 10**m // x.denominator
        sign = "-" if x < 0 else ""
        return f"{sign}{n // 10**m}.{n % 10**m:0{m}d}"
    return f"{x.numerator}/{x.denominator}"


# -- constants ------------------------------------------------------------------


@dataclass(frozen=True)
class EffectiveBounds:
    """Explicit prime-sum estimates as (threshold on log x, epsilon) rows.

    ``theta`` rows give |theta(x) - x| <= eps x for log x >= threshold, ``psi``
    rows the same for psi.  ``psi_theta_sqrt`` bounds psi - theta by c sqrt(x)
    for x > 1 and ``psi_theta_cube`` bounds psi - theta - theta(sqrt x) by
    c x^(1/3).
    """

    theta: tuple[tuple[int, Fraction], ...] = (
        (200, Fraction("1.5423e-9")),
        (700, Fraction("1.3082e-9")),
    )
    psi: tuple[tuple[int, Fraction], ...] = ((35, Fraction("7.5e-7")),)
    psi_theta_sqrt: Fraction = Fraction("1.427")
    psi_theta_cube: Fraction = Fraction(3)

    def __post_init__(self):
        for rows in (self.theta, self.psi):
            ths = [r[0] for r in rows]
            if ths != sorted(ths) or len(set(ths)) != len(ths):
                raise ValueError("thresholds must be strictly ascending")
            if any(r[1] <= 0 for r in rows):
                raise ValueError("epsilons must be positive")

    @staticmethod
    def _lookup(rows, log_x) -> Fraction:
        best = None
        for th, eps in rows:
            if log_x >= th:
                best = eps
        if best is None:
            raise ValueError(f"no row applies for log x = {log_x}")
        return best

    def theta_epsilon(self, log_x) -> Fraction:
        return self._lookup(self.theta, log_x)

    def psi_epsilon(self, log_x) -> Fraction:
        return self._lookup(self.psi, log_x)


BOUNDS = EffectiveBounds()


# -- parameters -------------------------------------------------------------------


@dataclass(frozen=True)
class BoundParams:
    A: Fraction
    T: Fraction
    alpha: Fraction
    eta: Fraction
    omega: Fraction

    def __post_init__(self):
        for name in ("A", "T", "alpha", "eta", "omega"):
            object.__setattr__(self, name, parse_exact(getattr(self, name)))

    def replace(self, **kw) -> BoundParams:
        vals = {k: getattr(self, k) for k in ("A", "T", "alpha", "eta", "omega")}
        vals.update(kw)
        return BoundParams(**vals)

    def describe(self) -> list[str]:
        return [f"{k} = {_fmt(getattr(self, k))}" for k in ("A", "T", "alpha", "eta", "omega")]


PAPER_PARAMS = BoundParams(
    A="3.0610046e10",
    T="6970346000",
    alpha="1153308722614227968",
    eta="933831/2^44",
    omega="727.951332655",
)


def validate(p: BoundParams) -> list[str]:
    """Every violated constraint, as readable strings (empty when valid)."""
    out = []
    for name in ("A", "T", "alpha", "eta", "omega"):
        if getattr(p, name) <= 0:
            out.append(f"{name} > 0")
    if out:
        return out
    if p.T > p.A:
        out.append("T <= A")
    if p.alpha < 4 * p.A / p.omega:
        out.append("alpha >= 4A/omega")
    if p.alpha > p.A * p.A:
        out.append("alpha <= A^2")
    if p.eta < 2 * p.A / p.alpha:
        out.append("eta >= 2A/alpha")
    if p.eta > p.omega / 2:
        out.append("eta <= omega/2")
    if p.omega - p.eta < BOUND_MIN_GAP:
        out.append(f"omega - eta >= {BOUND_MIN_GAP}")
    return out


def kernel(y, alpha) -> Interval:
    """K(y) = sqrt(alpha/(2 pi)) exp(-alpha y^2 / 2)."""
    if isinstance(alpha, Interval) or isinstance(y, Interval):
        a = alpha if isinstance(alpha, Interval) else Interval(parse_exact(alpha))
        if a.lo <= 0:
            raise ValueError("alpha must be positive")
        yi = y if isinstance(y, Interval) else Interval(parse_exact(y))
        return sqrt(a / (2 * PI)) * exp(-(a * yi.square()) / 2)
    a, yq = parse_exact(alpha), parse_exact(y)
    if a <= 0:
        raise ValueError("alpha must be positive")
    return sqrt(Interval(a) / (2 * PI)) * exp_exact(-a * yq * yq / 2)


# -- zero sum ------------------------------------------------------------------------


@dataclass
class _Prepared:
    g: list[int]
    a: list[int]
    b: list[int]
    werr: list[int]
    lip_u: float
    lip_v: float


def _prepare(zeros: ZeroTable, alpha: Fraction | None) -> _Prepared:
    """omega-independent parts of each term: weights at scale SUM_BITS."""
    Q = SUM_BITS
    g_all, a_all, b_all, e_all = [], [], [], []
    lip_u = lip_v = 0.0
    half_scale = 2 * SCALE
    for lo, hi in zip(zeros.lo_raw, zeros.hi_raw):
        D = (1 << (half_scale - 2)) + lo * lo  # (1/4 + gamma^2) * 2^256
        a0 = (1 << (half_scale + Q)) // D
        b0 = (lo << (SCALE + 1 + Q)) // D
        if alpha is None:
            m, err = 1 << Q, 0
        else:
            num = lo * lo * alpha.denominator << Q
            den = alpha.numerator << (half_scale + 1)
            m, err = _fixed.exp_fixed_point(-(num // den), Q)
            err += 1
        g_all.append(lo)
        a_all.append((a0 * m) >> Q)
        b_all.append((b0 * m) >> Q)
        e_all.append(err + 3)
        if hi != lo:
            gl = lo / (1 << SCALE) * (1 - 1e-15)
            gh = hi / (1 << SCALE) * (1 + 1e-15)
            r = (hi - lo) / (1 << SCALE) * (1 + 1e-15)
            w = 1 + 2 * gh
            lip_u += r * w / (gl * gl)
            v = 2 / (gl * gl) + 2 * w / gl**3
            if alpha is not None:
                v += w / (gl * float(alpha) * (1 - 1e-15))
            lip_v += r * v
    return _Prepared(g_all, a_all, b_all, e_all, lip_u * (1 + 1e-9), lip_v * (1 + 1e-9))


def _chunk_sum(g, a, b, werr, w_raw: int, w_rad: int) -> tuple[int, int]:
    """(sum, error) of the fixed-point terms at scale SUM_BITS."""
    Q = SUM_BITS
    sh = 2 * SCALE - Q
    sincos = _fixed.sincos_fixed
    base = _fixed.ERR + 2
    S = 0
    E = 0
    for gi, ai, bi, ei in zip(g, a, b, werr):
        sn, cs = sincos((gi * w_raw) >> sh, Q)
        S += (cs * ai + sn * bi) >> Q
        E += base + ((gi * w_rad) >> sh) + 2 * ei + 2
    return S, E


def _omega_ext(omega) -> ExtendedReal:
    w = ExtendedReal.from_value(parse_exact(omega))
    if w.raw < 0:
        raise ValueError("omega must be nonnegative")
    return w


def _finish(S: int, E: int, prep: _Prepared, w: ExtendedReal) -> Interval:
    Q = SUM_BITS
    if not prep.g:
        return Interval(0.0)
    omega_hi = (w.raw + w.rad) / (1 << SCALE) * (1 + 1e-15)
    lip = omega_hi * prep.lip_u + prep.lip_v
    E += math.ceil(lip * (1 + 1e-9) * (1 << Q)) + 1
    return Interval(dyadic_to_float(S - E, -Q, False), dyadic_to_float(S + E, -Q, True))


def _select(zeros: ZeroTable, T) -> ZeroTable:
    T = parse_exact(T)
    if T <= 0:
        raise ValueError("T must be positive")
    if not zeros.covers(float(T)):
        have = zeros.meta.complete_to if zeros.meta.complete_to is not None else zeros.meta.max_gamma
        raise TableTooShortError(f"zero table reaches {have:g} but the cutoff T is {float(T):g}")
    return zeros.up_to(T)


def _alpha_arg(alpha) -> Fraction | None:
    if alpha is None or (isinstance(alpha, float) and math.isinf(alpha)):
        return None
    a = parse_exact(alpha)
    if a <= 0:
        raise ValueError("alpha must be positive")
    return a


def _pool_chunk(args):
    return _chunk_sum(*args)


def zero_sum(zeros: ZeroTable, omega, alpha, T, workers: int = 1, chunk: int = CHUNK) -> Interval:
    """Certified sum over 0 < gamma <= T of (cos(g w) + 2 g sin(g w)) / (1/4 + g^2) * exp(-g^2/(2 alpha)).

    ``alpha=None`` or ``inf`` drops the Gaussian damping.  Terms are computed in
    fixed point at scale 2**-96 and accumulated as exact integers, so the
    result does not depend on chunking or worker count.
    """
    sub = _select(zeros, T)
    prep = _prepare(sub, _alpha_arg(alpha))
    w = _omega_ext(omega)
    n = len(prep.g)
    spans = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    args = [(prep.g[i:j], prep.a[i:j], prep.b[i:j], prep.werr[i:j], w.raw, w.rad) for i, j in spans]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_pool_chunk, args))
    else:
        parts = [_chunk_sum(*a) for a in args]
    S = sum(p[0] for p in parts)
    E = sum(p[1] for p in parts)
    return _finish(S, E, prep, w)


# -- error terms and the bound -------------------------------------------------------


def _I(x: Fraction) -> Interval:
    return Interval(x)


def error_terms(p: BoundParams, bounds: EffectiveBounds = BOUNDS) -> tuple[Interval, Interval, Interval, Interval]:
    """(R1, R2, R3, R4) as outward-rounded intervals.

    R4 is read as A log A exp(-A^2/(2 alpha) + (omega + eta)/2) (4 alpha^-1/2 + 15 eta).
    """
    bad = validate(p)
    if bad:
        raise ParameterError(bad)
    # exponents are exact rationals; exp_exact keeps them from being rounded first
    A, T, al, eta = (_I(p.A), _I(p.T), _I(p.alpha), _I(p.eta))
    r1 = _I(bounds.theta_epsilon(BOUND_MIN_GAP))
    gauss = _I(Fraction(8, 100)) * sqrt(al) * exp_exact(-p.alpha * p.eta**2 / 2)
    brace = (al / (PI * T.square())) * log(T / (2 * PI)) + 8 * log(T) / T + 4 * al / (T * T.square())
    r2 = gauss + exp_exact(-p.T**2 / (2 * p.alpha)) * brace
    gap = p.omega - p.eta
    r3 = exp_exact(-gap / 2) * LOG_2PI + 3 * exp_exact(-gap / 6)
    r4 = A * log(A) * exp_exact(-p.A**2 / (2 * p.alpha) + (p.omega + p.eta) / 2) * (4 / sqrt(al) + 15 * eta)
    return r1, r2, r3, r4


R4_FORMULA = "R4 = A*log(A)*exp(-A^2/(2*alpha) + (omega+eta)/2) * (4*alpha^(-1/2) + 15*eta)"


@dataclass(frozen=True)
class BoundBreakdown:
    params: BoundParams
    zero_sum: Interval
    r1: Interval
    r2: Interval
    r3: Interval
    r4: Interval
    lower_bound: Interval

    @property
    def error_total(self) -> Interval:
        return self.r1 + self.r2 + self.r3 + self.r4

    def report(self) -> str:
        lines = ["parameters:"] + ["  " + s for s in self.params.describe()]
        lines.append(f"zero sum        [{self.zero_sum.lo!r}, {self.zero_sum.hi!r}]")
        for name in ("r1", "r2", "r3", "r4"):
            iv = getattr(self, name)
            lines.append(f"{name:<15} [{iv.lo!r}, {iv.hi!r}]")
        lines.append(f"formula used    {R4_FORMULA}")
        lb = self.lower_bound
        lines.append(f"integral bound  [{lb.lo!r}, {lb.hi!r}]")
        return "\n".join(lines)


def combine(p: BoundParams, zs: Interval, bounds: EffectiveBounds = BOUNDS) -> BoundBreakdown:
    r1, r2, r3, r4 = error_terms(p, bounds)
    lb = -1 - zs - r1 - r2 - r3 - r4
    return BoundBreakdown(p, zs, r1, r2, r3, r4, lb)


def lower_bound(p: BoundParams, zeros: ZeroTable, workers: int = 1,
                bounds: EffectiveBounds = BOUNDS) -> BoundBreakdown:
    """Certified lower bound on I(omega, eta) from the zeros up to T."""
    bad = validate(p)
    if bad:
        raise ParameterError(bad)
    zs = zero_sum(zeros, p.omega, p.alpha, p.T, workers=workers)
    return combine(p, zs, bounds)


# -- window sharpening -----------------------------------------------------------------


@dataclass(frozen=True)
class CrossoverCertificate:
    omega: Fraction
    eta0: Fraction
    integral_lb: Interval
    x_lo: Fraction
    x_hi: Fraction
    pointwise_lb: Interval
    successive_count_log10: float
    tail: Interval
    source_lb: Interval
    params: BoundParams

    issued = True

    def report(self) -> str:
        eps = BOUNDS.theta_epsilon(SHARPEN_MIN_GAP)
        lines = [
            "crossover certificate",
            "parameters:",
            *("  " + s for s in self.params.describe()),
            f"  eta0 = {_fmt(self.eta0)}  (eta/eta0 = {float(self.params.eta / self.eta0):.6f})",
            f"tail constant   {float(eps)} (valid for log x >= {SHARPEN_MIN_GAP})",
            f"input bound     [{self.source_lb.lo!r}, {self.source_lb.hi!r}]",
            f"tail bound      [{self.tail.lo!r}, {self.tail.hi!r}]",
            f"sharpened bound [{self.integral_lb.lo!r}, {self.integral_lb.hi!r}]",
            f"window exponents [{float(self.x_lo):.12f}, {float(self.x_hi):.12f}]",
            f"pointwise bound [{self.pointwise_lb.lo!r}, {self.pointwise_lb.hi!r}]",
            f"theta(x) > x for more than 10^{self.successive_count_log10:.4f} successive integers",
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class NoCertificate:
    reason: str
    integral_lb: Interval | None = None
    eta0: Fraction | None = None

    issued = False

    def report(self) -> str:
        s = f"no certificate: {self.reason}"
        if self.integral_lb is not None:
            s += f"\nsharpened bound [{self.integral_lb.lo!r}, {self.integral_lb.hi!r}]"
        return s


def tail_bound(p: BoundParams, eta0: Fraction, bounds: EffectiveBounds = BOUNDS) -> Interval:
    """Bound on the kernel-tail integrals outside [omega - eta0, omega + eta0]."""
    eps = _I(bounds.theta_epsilon(SHARPEN_MIN_GAP))
    eta0 = parse_exact(eta0)
    return (eps * _I(p.eta - eta0) * kernel(eta0, p.alpha)
            * (exp_exact((p.omega + p.eta) / 2) + exp_exact((p.omega - eta0) / 2)))


def _sharpened(p: BoundParams, lb: Interval, eta0: Fraction, bounds) -> tuple[Interval, Interval]:
    tail = tail_bound(p, eta0, bounds)
    return lb - tail, tail


def _as_interval(breakdown) -> Interval:
    if isinstance(breakdown, BoundBreakdown):
        return breakdown.lower_bound
    if isinstance(breakdown, Interval):
        return breakdown
    return Interval(parse_exact(breakdown))


def smallest_eta0(p: BoundParams, lb: Interval, steps: int = ETA0_SEARCH_STEPS,
                  bounds: EffectiveBounds = BOUNDS) -> Fraction | None:
    """Smallest eta0 in (0, eta] (to 2^-steps relative) with a positive sharpened bound."""
    if _sharpened(p, lb, p.eta, bounds)[0].lo <= 0:
        return None
    lo, hi = Fraction(0), p.eta
    for _ in range(steps):
        mid = (lo + hi) / 2
        if _sharpened(p, lb, mid, bounds)[0].lo > 0:
            hi = mid
        else:
            lo = mid
    return hi


def sharpen(p: BoundParams, breakdown, eta0=None,
            bounds: EffectiveBounds = BOUNDS) -> CrossoverCertificate | NoCertificate:
    """Narrow the window to [omega - eta0, omega + eta0] and issue a certificate if still positive.

    ``breakdown`` may be a BoundBreakdown, an Interval or a number giving the
    lower bound on I(omega, eta).  Without ``eta0`` the smallest workable
    half-width is searched for.
    """
    if p.omega - p.eta <= SHARPEN_MIN_GAP:
        raise PreconditionError(
            f"sharpening needs omega - eta > {SHARPEN_MIN_GAP}: the tail constant "
            f"{float(bounds.theta_epsilon(SHARPEN_MIN_GAP))} is valid only for x >= e^{SHARPEN_MIN_GAP}")
    lb = _as_interval(breakdown)
    if eta0 is None:
        eta0 = smallest_eta0(p, lb, bounds=bounds)
        if eta0 is None:
            return NoCertificate("the unsharpened bound is not positive", lb)
    eta0 = parse_exact(eta0)
    if not (0 < eta0 <= p.eta):
        raise ValueError("eta0 must satisfy 0 < eta0 <= eta")
    new_lb, tail = _sharpened(p, lb, eta0, bounds)
    if new_lb.lo <= 0:
        return NoCertificate("sharpened bound is not positive", new_lb, eta0)
    low_u = p.omega - eta0
    pointwise = new_lb * exp_exact(low_u / 2)
    count = (log(Interval(pointwise.lo)) / log(Interval(10))).lo
    return CrossoverCertificate(p.omega, eta0, new_lb, low_u, p.omega + eta0, pointwise, count,
                                tail, lb, p)


# -- scans -------------------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    omega: Fraction
    zero_sum: Interval
    lb: Interval

    def csv(self) -> str:
        zs = self.zero_sum
        return f"{float(self.omega)!r},{zs.mid!r},{zs.width!r},{self.lb.lo!r},{self.lb.hi!r}"


SCAN_HEADER = "omega,sum_mid,sum_width,lb_lo,lb_hi"
DEFAULT_SCAN_STEP = Fraction("5e-6")

_SCAN_STATE: dict = {}


def _scan_init(prep: _Prepared):
    _SCAN_STATE["prep"] = prep


def _scan_point(omega: Fraction) -> tuple[int, int]:
    prep = _SCAN_STATE["prep"]
    w = _omega_ext(omega)
    return _chunk_sum(prep.g, prep.a, prep.b, prep.werr, w.raw, w.rad)


def scan_grid(omega_lo, omega_hi, step) -> list[Fraction]:
    lo, hi, h = parse_exact(omega_lo), parse_exact(omega_hi), parse_exact(step)
    if h <= 0:
        raise ValueError("step must be positive")
    if hi < lo:
        raise ValueError("omega_hi must not be below omega_lo")
    n = math.floor((hi - lo) / h)
    return [lo + k * h for k in range(n + 1)]


def scan(omega_lo, omega_hi, step, zeros: ZeroTable, alpha, T, workers: int = 1,
         error_total: Interval | None = None) -> list[ScanRow]:
    """Zero sum on the grid omega_lo + k*step <= omega_hi.

    The lb columns are -1 - sum, minus ``error_total`` when it is supplied.
    """
    grid = scan_grid(omega_lo, omega_hi, step)
    prep = _prepare(_select(zeros, T), _alpha_arg(alpha))
    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_scan_init, initargs=(prep,)) as ex:
            parts = list(ex.map(_scan_point, grid, chunksize=max(1, len(grid) // (4 * workers))))
    else:
        _scan_init(prep)
        parts = [_scan_point(w) for w in grid]
    rows = []
    for w, (S, E) in zip(grid, parts):
        zs = _finish(S, E, prep, _omega_ext(w))
        lb = -1 - zs
        if error_total is not None:
            lb = lb - error_total
        rows.append(ScanRow(w, zs, lb))
    return rows


def write_scan_csv(rows: list[ScanRow], path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(SCAN_HEADER + "\n")
        for r in rows:
            fh.write(r.csv() + "\n")
