"""Direct theta and psi, a truncated explicit formula, and checks of classical bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

import numpy as np

from .crossover import BOUNDS, parse_exact
from .interval import LOG_2PI, Interval, cos, exp, log, sin, sqrt
from .interval.interval import fraction_to_float
from .sieve.primes import primes_in
from .sieve.segment import U, certified_logs
from .zeros.table import ZeroTable

X_MAX = 10**10
_WINDOW = 10**7


class BoundViolation(AssertionError):
    """A classical inequality failed; this points at an arithmetic bug."""


@dataclass(frozen=True)
class ChebyshevSample:
    x: Fraction
    theta: Interval
    psi: Interval


def _floor_arg(x) -> tuple[Fraction, int]:
    v = parse_exact(x)
    if not (2 <= v <= X_MAX):
        raise ValueError(f"x must lie in [2, {X_MAX:.0e}]")
    return v, math.floor(v)


def _log_sum(n: int) -> tuple[float, float]:
    """(approximate sum of log p for p <= n, bound on its error)."""
    parts = []
    err = 0.0
    start = 0
    while start <= n:
        stop = min(n + 1, start + _WINDOW)
        ps = primes_in(start, stop)
        start = stop
        if ps.size:
            b = certified_logs(ps)
            parts.append(math.fsum(b.values))
            err += b.error_sum
    T = math.fsum(parts)
    return T, err + U * abs(T) * (len(parts) + 1)


def _enclose(T: float, err: float) -> Interval:
    e = Fraction(err) * (1 + Fraction(1, 1 << 20))
    return Interval(fraction_to_float(Fraction(T) - e, False), fraction_to_float(Fraction(T) + e, True))


def _theta_int(n: int) -> Interval:
    if n < 2:
        return Interval(0.0)
    return _enclose(*_log_sum(n))


def theta_direct(x) -> Interval:
    """Enclosure of theta(x), the sum of log p over primes p <= x."""
    _, n = _floor_arg(x)
    return _theta_int(n)


def _extra_powers(n: int) -> tuple[float, float]:
    """Sum over primes p <= sqrt(n) of (k_p - 1) log p, k_p the largest k with p^k <= n."""
    r = isqrt(n)
    ps = primes_in(0, r + 1)
    if not ps.size:
        return 0.0, 0.0
    mult = []
    for p in ps.tolist():
        k, q = 1, p
        while q * p <= n:
            q *= p
            k += 1
        mult.append(k - 1)
    b = certified_logs(ps)
    m = np.array(mult, dtype=np.float64)
    vals = b.values * m
    T = math.fsum(vals)
    # each product is exact to within one rounding; value errors scale with the multiplicity
    err = b.error_sum * float(m.max()) + U * float(np.sum(np.abs(vals))) + U * abs(T)
    return T, err


def psi_direct(x) -> Interval:
    """Enclosure of psi(x), the sum of log p over prime powers p^m <= x."""
    _, n = _floor_arg(x)
    T1, e1 = _log_sum(n)
    T2, e2 = _extra_powers(n)
    return _enclose(T1 + T2, e1 + e2 + U * abs(T1 + T2))


def sample(x) -> ChebyshevSample:
    v, n = _floor_arg(x)
    T1, e1 = _log_sum(n)
    T2, e2 = _extra_powers(n)
    return ChebyshevSample(v, _enclose(T1, e1), _enclose(T1 + T2, e1 + e2 + U * abs(T1 + T2)))


# -- explicit formula ------------------------------------------------------------------


def prime_power_base(n: int) -> int | None:
    """p when n = p^k for a prime p and k >= 1, else None."""
    if n < 2:
        return None
    for p in primes_in(0, isqrt(n) + 1).tolist():
        if n % p == 0:
            while n % p == 0:
                n //= p
            return p if n == 1 else None
    return n


@dataclass(frozen=True)
class ExplicitResult:
    value: Interval
    zeros_used: int
    # heuristic size of the omitted zeros' contribution, not a certified bound
    truncation_estimate: float | None

    def report(self) -> str:
        est = "n/a" if self.truncation_estimate is None else f"{self.truncation_estimate:.3g}"
        return (f"psi0 via {self.zeros_used} zeros: [{self.value.lo!r}, {self.value.hi!r}]"
                f"  truncation estimate (not certified): {est}")


def psi_explicit(x, zeros: ZeroTable) -> ExplicitResult:
    """x - sum over zeros of x^rho/rho - log 2 pi - log(1 - x^-2)/2, using every zero in the table.

    The zero sum is certified for the zeros supplied; the omitted tail is only
    estimated.  Prime powers are refused since psi0 differs from psi there.
    """
    v = parse_exact(x)
    if v < 2:
        raise ValueError("x must be at least 2")
    if v.denominator == 1 and prime_power_base(int(v)) is not None:
        raise ValueError(f"{v} is a prime power, where psi0 and psi differ")
    xi = Interval(v)
    L = log(xi)
    total = Interval(0.0)
    for g in zeros.gammas:
        a = g * L
        total = total + (cos(a) + 2 * g * sin(a)) / (Interval(Fraction(1, 4)) + g.square())
    main = xi - sqrt(xi) * total - LOG_2PI - log(1 - 1 / xi.square()) / 2
    n = len(zeros)
    est = None
    if n:
        T = zeros.gammas[-1].hi
        est = float(v) * math.log(float(v)) ** 2 / T
    return ExplicitResult(main, n, est)


# -- sign changes of psi(x) - x ------------------------------------------------------------


def _prime_powers(n: int) -> list[tuple[int, int]]:
    """(q, p) for every prime power q = p^k <= n, ascending in q."""
    out = []
    for p in primes_in(0, n + 1).tolist():
        q = p
        while q <= n:
            out.append((q, p))
            q *= p
    out.sort()
    return out


def count_sign_changes_psi(x_hi) -> int:
    """Sign changes of psi(x) - x on (0, x_hi] for the step function psi.

    Below 2 the difference is negative.  At a prime power it jumps up by
    log p, which is one change when it lands above zero from below; between
    jumps it falls with slope -1 and changes sign where psi(x) = x, counted
    when that point is below the next jump and at most x_hi.
    """
    v = parse_exact(x_hi)
    if v > 10**6:
        raise ValueError("x_hi must be at most 1e6")
    if v < 2:
        return 0
    n = math.floor(v)
    qs = _prime_powers(n)
    psi = Interval(0.0)
    negative = True
    changes = 0
    logs = {}
    for i, (q, p) in enumerate(qs):
        if p not in logs:
            logs[p] = log(Interval(p))
        psi = psi + logs[p]
        f = psi - q
        if f.lo <= 0 <= f.hi:
            raise ArithmeticError(f"cannot decide the sign of psi(x) - x at {q}")
        if negative and f.lo > 0:
            changes += 1
            negative = False
        if not negative:
            nxt = Interval(qs[i + 1][0]) if i + 1 < len(qs) else None
            # the falling line reaches zero at x = psi
            limit = Interval(v) if nxt is None else nxt
            if (psi - limit).hi < 0 and (psi - Interval(v)).hi <= 0:
                changes += 1
                negative = True
            elif (psi - limit).lo <= 0 and (psi - limit).hi >= 0:
                raise ArithmeticError(f"cannot order psi and the next jump after {q}")
    return changes


# -- classical inequalities ----------------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    x: Fraction
    theta: Interval
    psi: Interval
    sqrt_slack: float  # 1.427 sqrt(x) - (psi - theta), lower bound
    cube_slack: float  # 3 x^(1/3) - (psi - theta - theta(sqrt x)), lower bound
    theta_slack: float  # (1 + 7.5e-7) x - theta, lower bound


REPORT_COLUMNS = ("x", "theta_lo", "theta_hi", "psi_lo", "psi_hi", "sqrt_slack", "cube_slack", "theta_slack")


def check_effective_bounds(samples) -> list[BoundCheck]:
    """Check psi - theta <= 1.427 sqrt(x), psi - theta - theta(sqrt x) < 3 x^(1/3), theta(x) < (1 + 7.5e-7) x.

    Every inequality must hold with pessimistic endpoints; otherwise
    BoundViolation is raised.
    """
    eps = BOUNDS.psi[0][1]
    c_sqrt = Interval(BOUNDS.psi_theta_sqrt)
    c_cube = Interval(BOUNDS.psi_theta_cube)
    out = []
    for x in samples:
        s = sample(x)
        xi = Interval(s.x)
        th_half = _theta_int(isqrt(math.floor(s.x)))
        diff = s.psi - s.theta
        a = (c_sqrt * sqrt(xi) - diff).lo
        cube = exp(log(xi) / 3)
        b = (c_cube * cube - (diff - th_half)).lo
        c = ((1 + Interval(eps)) * xi - s.theta).lo
        if not (a >= 0 and b > 0 and c > 0):
            raise BoundViolation(f"classical bound fails at x = {float(s.x)}: slacks {a}, {b}, {c}")
        out.append(BoundCheck(s.x, s.theta, s.psi, a, b, c))
    return out


def bounds_report_text(rows: list[BoundCheck]) -> str:
    lines = ["{:>14} {:>24} {:>24} {:>14} {:>14} {:>14}".format(
        "x", "theta", "psi", "sqrt slack", "cube slack", "theta slack")]
    for r in rows:
        lines.append("{:>14} {:>24} {:>24} {:>14.6g} {:>14.6g} {:>14.6g}".format(
            f"{float(r.x):.6g}", f"{r.theta.mid:.15g}", f"{r.psi.mid:.15g}",
            r.sqrt_slack, r.cube_slack, r.theta_slack))
    return "\n".join(lines)


def bounds_report_csv(rows: list[BoundCheck]) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for r in rows:
        lines.append(",".join([str(r.x), repr(r.theta.lo), repr(r.theta.hi), repr(r.psi.lo),
                               repr(r.psi.hi), repr(r.sqrt_slack), repr(r.cube_slack),
                               repr(r.theta_slack)]))
    return "\n".join(lines) + "\n"
