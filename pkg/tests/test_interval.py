from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetacert.interval import (
    LOG_2PI,
    PI,
    BudgetError,
    ExtendedReal,
    Interval,
    IntervalError,
    add,
    cos,
    div,
    erf_like_tail,
    exp,
    log,
    mul,
    neg,
    pow_real,
    sin,
    sin_reduced,
    sincos_ball,
    sqrt,
    sub,
)

mpmath.mp.prec = 200

finite = st.floats(min_value=-1e12, max_value=1e12, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-12, max_value=1e12, allow_nan=False, allow_infinity=False)


def ulp(x: float) -> float:
    return math.ulp(x)


# -- examples -------------------------------------------------------------------------


def test_add_exact_endpoints():
    r = add(Interval(1, 2), Interval(3, 4))
    assert (r.lo, r.hi) == (4.0, 6.0)


def test_exp_zero_contains_one_within_two_ulp():
    r = exp(Interval(0.0))
    assert r.contains(1)
    assert r.width <= 2 * ulp(1.0)


def test_log_exp_round_trip():
    r = log(exp(Interval(1.0)))
    assert r.contains(1)
    assert r.width < 1e-14


def test_constants_are_tight():
    assert PI.contains(mpmath.pi) and PI.width <= 2 * ulp(math.pi)
    assert LOG_2PI.contains(mpmath.log(2 * mpmath.pi)) and LOG_2PI.width <= 2 * ulp(1.8)


@pytest.mark.parametrize("fn,arg", [
    (lambda: div(Interval(1), Interval(-1, 1)), "div"),
    (lambda: log(Interval(-1, 2)), "log"),
    (lambda: log(Interval(0.0)), "log0"),
    (lambda: sqrt(Interval(-2, -1)), "sqrt"),
])
def test_domain_errors_are_explicit(fn, arg):
    with pytest.raises(IntervalError):
        fn()


def test_interval_rejects_reversed_and_nan():
    with pytest.raises(IntervalError):
        Interval(2, 1)
    with pytest.raises(IntervalError):
        Interval(float("nan"))


def test_exact_construction_from_decimal():
    x = Interval("0.1")
    assert x.contains(Fraction(1, 10))
    assert x.lo < x.hi


# -- argument reduction --------------------------------------------------------------


def _oracle_sincos(gamma, omega):
    with mpmath.workprec(400):
        g, w = Fraction(gamma), Fraction(omega)
        a = mpmath.mpf(g.numerator) / g.denominator * mpmath.mpf(w.numerator) / w.denominator
        return mpmath.sin(a), mpmath.cos(a)


def test_sin_reduced_at_zero():
    s, c = sin_reduced(0, 728)
    assert s.contains(0) and c.contains(1)


@pytest.mark.parametrize("gamma,omega", [
    ("14.134725141734693790457251983562470270784257115699", "727.951332655"),
    (10**9, 400),
    ("6970345999.123456789", "727.951332655"),
])
def test_sincos_ball_matches_oracle_to_1e_20(gamma, omega):
    (sm, sr), (cm, cr), bits = sincos_ball(gamma, omega)
    s_true, c_true = _oracle_sincos(gamma, omega)
    scale = mpmath.mpf(2) ** -bits
    assert sr * scale <= 1e-20 and cr * scale <= 1e-20
    assert abs(sm * scale - s_true) <= sr * scale
    assert abs(cm * scale - c_true) <= cr * scale
    s, c = sin_reduced(gamma, omega)
    assert s.contains(s_true) and c.contains(c_true)
    # double endpoints cannot be narrower than the spacing of doubles near the value
    assert s.width <= 4 * ulp(1.0) and c.width <= 4 * ulp(1.0)


def test_naive_double_reduction_is_worse():
    # a gamma near 1e9 stored as a double is off by ~6e-8, times omega = 400
    g = "1000000000.123456789012345678"
    s_true, _ = _oracle_sincos(g, 400)
    naive = math.sin(float(g) * 400.0)
    s, _ = sin_reduced(g, 400)
    assert s.contains(s_true)
    assert abs(naive - float(s_true)) > 1e-6 > 1e6 * s.width


def test_budget_overflow_is_explicit():
    with pytest.raises(BudgetError):
        sincos_ball(2**40, 2**30)
    with pytest.raises(BudgetError):
        ExtendedReal.from_value(2**70)


def test_extended_real_exact_product():
    a = ExtendedReal.from_value("12345.678")
    b = ExtendedReal.from_value(3)
    v, r = a.mul_exact(b)
    assert Fraction(v, 1 << 256) - 3 * a.to_fraction() == 0 and b.rad == 0


# -- Gaussian tails --------------------------------------------------------------------


def test_erf_like_tail_examples():
    assert erf_like_tail(0).contains(1)
    assert erf_like_tail(40).hi < 1e-15
    ref = mpmath.erfc(1 / mpmath.sqrt(2))
    t = erf_like_tail(1, 1)
    assert t.contains(ref)
    assert abs(t.mid - float(ref)) < 1e-12


def test_erf_like_tail_matches_quadrature():
    a, alpha = 0.7, 3.0
    with mpmath.workprec(100):
        k = lambda y: mpmath.sqrt(alpha / (2 * mpmath.pi)) * mpmath.exp(-alpha * y * y / 2)
        q = 2 * mpmath.quad(k, [a, mpmath.inf])
    t = erf_like_tail(a, alpha)
    assert abs(t.mid - float(q)) < 1e-12


@given(st.floats(min_value=0, max_value=30), st.floats(min_value=0, max_value=5))
def test_erf_like_tail_monotone(a, d):
    assert erf_like_tail(a + d).hi <= erf_like_tail(a).hi + 1e-300
    assert erf_like_tail(a + d).lo <= erf_like_tail(a).hi


# -- properties -------------------------------------------------------------------------


def _mp(x):
    return mpmath.mpf(x)


@given(finite, finite, finite, finite)
def test_add_sub_mul_contain(a, b, c, d):
    x = Interval(min(a, b), max(a, b))
    y = Interval(min(c, d), max(c, d))
    for p in (x.lo, x.hi):
        for q in (y.lo, y.hi):
            assert add(x, y).contains(_mp(p) + _mp(q))
            assert sub(x, y).contains(_mp(p) - _mp(q))
            assert mul(x, y).contains(_mp(p) * _mp(q))


@given(finite, positive)
def test_div_contains(a, b):
    assert div(Interval(a), Interval(b)).contains(_mp(a) / _mp(b))
    assert div(Interval(a), Interval(-b)).contains(_mp(a) / -_mp(b))


@given(positive)
def test_sqrt_log_contain(a):
    assert sqrt(Interval(a)).contains(mpmath.sqrt(_mp(a)))
    assert log(Interval(a)).contains(mpmath.log(_mp(a)))


@given(st.floats(min_value=-700, max_value=700))
def test_exp_contains(a):
    assert exp(Interval(a)).contains(mpmath.exp(_mp(a)))


@given(positive, st.floats(min_value=-4, max_value=4))
def test_pow_real_contains(a, e):
    r = pow_real(Interval(a), e)
    if math.isfinite(r.hi):
        assert r.contains(_mp(a) ** _mp(e))


@given(st.floats(min_value=-1e6, max_value=1e6), st.floats(min_value=0, max_value=10))
def test_trig_contains_and_stays_in_range(a, w):
    x = Interval(a, a + w)
    for f, g in ((sin, mpmath.sin), (cos, mpmath.cos)):
        r = f(x)
        assert r.contains(g(_mp(x.lo))) and r.contains(g(_mp(x.hi)))
        assert -1 - 2 * ulp(1.0) <= r.lo and r.hi <= 1 + 2 * ulp(1.0)


@given(finite)
def test_neg_is_exact(a):
    r = neg(Interval(a))
    assert r.lo == r.hi == -a


@settings(max_examples=50)
@given(st.lists(finite, min_size=2, max_size=12))
def test_width_growth_bounded_by_per_op_rounding(xs):
    # summing k exact doubles: each step widens by at most one ulp at each end
    acc = Interval(xs[0])
    bound = 0.0
    for x in xs[1:]:
        acc = add(acc, Interval(x))
        bound += 2 * ulp(max(abs(acc.lo), abs(acc.hi)))
    assert acc.width <= bound
