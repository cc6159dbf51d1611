from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetacert.crossover import (
    BOUNDS,
    PAPER_PARAMS,
    SCAN_HEADER,
    BoundParams,
    CrossoverCertificate,
    NoCertificate,
    ParameterError,
    PreconditionError,
    TableTooShortError,
    error_terms,
    kernel,
    lower_bound,
    parse_exact,
    scan,
    sharpen,
    smallest_eta0,
    tail_bound,
    validate,
    write_scan_csv,
    zero_sum,
)
from thetacert.interval import Interval
from thetacert.zeros import ZeroTable

mpmath.mp.prec = 200

PAPER_LB = Fraction("0.0013360261")
DESK = BoundParams(A=10**4, T=10**4, alpha=10**7, eta="0.003", omega=500)


def _mp(x) -> mpmath.mpf:
    f = parse_exact(x)
    return mpmath.mpf(f.numerator) / f.denominator


# -- parameters --------------------------------------------------------------------------


def test_parse_exact_forms():
    assert parse_exact("933831/2^44") == Fraction(933831, 2**44)
    assert parse_exact("3*2^-2") == Fraction(3, 4)
    assert parse_exact(0.5) == Fraction(1, 2)
    assert parse_exact("1.5e3") == 1500


def test_paper_parameters_are_valid():
    assert validate(PAPER_PARAMS) == []


def test_violations_are_listed_together():
    bad = PAPER_PARAMS.replace(T=PAPER_PARAMS.A * 2, eta=Fraction(1, 10**20))
    v = validate(bad)
    assert "T <= A" in v and "eta >= 2A/alpha" in v


def test_small_gap_is_rejected():
    assert "omega - eta >= 400" in validate(DESK.replace(omega=300))


def test_nonpositive_is_rejected():
    assert validate(DESK.replace(alpha=0)) == ["alpha > 0"]


def test_lower_bound_refuses_invalid(zeros100):
    with pytest.raises(ParameterError) as e:
        lower_bound(DESK.replace(omega=300, T=50), zeros100)
    assert "omega - eta >= 400" in e.value.violations


# -- kernel -----------------------------------------------------------------------------


def test_kernel_at_zero_and_symmetry():
    k0 = kernel(0, 2)
    assert k0.contains(1 / mpmath.sqrt(mpmath.pi))
    assert kernel("0.3", 5) == kernel("-0.3", 5)


def test_kernel_integrates_to_one():
    alpha = 7
    with mpmath.workprec(100):
        f = lambda y: mpmath.sqrt(alpha / (2 * mpmath.pi)) * mpmath.exp(-alpha * y * y / 2)
        assert abs(mpmath.quad(f, [-mpmath.inf, mpmath.inf]) - 1) < 1e-25
    assert kernel(Fraction(1, 2), alpha).contains(f(mpmath.mpf(1) / 2))


# -- zero sum ----------------------------------------------------------------------------


def test_empty_table_sum_is_zero():
    z = zero_sum(ZeroTable([], []), 500, 10**6, 10)
    assert z.lo == 0 and z.hi == 0


def test_single_zero_at_omega_zero_matches_scalar():
    g = "14.134725141734693790457251983562470270784257115699"
    tab = ZeroTable.from_values([Fraction(g)], radius=Fraction(1, 10**30), complete_to=15)
    z = zero_sum(tab, 0, 10**30, 15)
    gm = mpmath.mpf(g)
    ref = 1 / (mpmath.mpf(1) / 4 + gm * gm) * mpmath.exp(-gm * gm / (2 * mpmath.mpf(10) ** 30))
    assert z.contains(ref)
    assert z.width < 1e-15


def _complex_form(gammas, omega, alpha):
    s = mpmath.mpf(0)
    w = _mp(omega)
    for g in gammas:
        rho = mpmath.mpc(mpmath.mpf(1) / 2, g)
        term = mpmath.exp(1j * g * w) / rho
        damp = mpmath.exp(-g * g / (2 * _mp(alpha))) if alpha is not None else 1
        s += (term + mpmath.conj(term)).real * damp
    return s


@settings(max_examples=30, deadline=None)
@given(st.lists(st.decimals(min_value=15, max_value=3000, places=12), min_size=1, max_size=8, unique=True),
       st.decimals(min_value=0, max_value=800, places=9),
       st.sampled_from([None, 10**4, 10**7]))
def test_real_form_equals_complex_form(gs, omega, alpha):
    vals = sorted(Fraction(g) for g in gs)
    if any(b - a < Fraction(1, 10**6) for a, b in zip(vals, vals[1:])):
        return
    tab = ZeroTable.from_values(vals, radius=Fraction(1, 10**30), complete_to=3001)
    z = zero_sum(tab, str(omega), alpha, 3001)
    ref = _complex_form([_mp(v) for v in vals], str(omega), alpha)
    assert z.contains(ref)
    assert abs(z.mid - float(ref)) <= 1e-15 * max(1, abs(float(ref))) + z.width


def test_contains_sum_over_true_zeros(zeros100):
    gammas = [mpmath.zetazero(i).imag for i in range(1, 30)]
    for omega in ("437.78249", "727.951332655"):
        z = zero_sum(zeros100, omega, 10**6, 100)
        assert z.contains(_complex_form(gammas, omega, 10**6))
        assert z.width < 1e-10


def test_cutoff_between_zeros_changes_nothing(zeros100):
    # zeros 10 and 11 sit near 49.77 and 52.97
    a = zero_sum(zeros100, "437.78", 10**6, 50)
    b = zero_sum(zeros100, "437.78", 10**6, 52)
    assert (a.lo, a.hi) == (b.lo, b.hi)


def test_chunks_and_workers_do_not_change_result(zeros100):
    ref = zero_sum(zeros100, "727.951332655", None, 100)
    for chunk, workers in ((1, 1), (7, 1), (7, 2)):
        z = zero_sum(zeros100, "727.951332655", None, 100, workers=workers, chunk=chunk)
        assert (z.lo, z.hi) == (ref.lo, ref.hi)


def test_table_too_short(zeros100):
    with pytest.raises(TableTooShortError):
        zero_sum(zeros100, 500, 10**6, 101)


def test_width_grows_with_table_radius(zeros100):
    coarse = ZeroTable.from_values([g.mid for g in zeros100.gammas], radius=Fraction(1, 10**10),
                                   complete_to=100)
    a = zero_sum(zeros100, 500, None, 100)
    b = zero_sum(coarse, 500, None, 100)
    assert b.width > 100 * a.width
    assert b.lo <= a.lo and a.hi <= b.hi


# -- error terms ------------------------------------------------------------------------


def test_paper_error_total_below_1_7e_minus_9():
    r = error_terms(PAPER_PARAMS)
    total = r[0] + r[1] + r[2] + r[3]
    assert total.hi < 1.7e-9
    assert r[0].contains(Fraction("1.5423e-9"))


def test_doubling_eta_moves_r2_down_and_r4_up():
    a = error_terms(DESK)
    b = error_terms(DESK.replace(eta=DESK.eta * 2))
    assert validate(DESK.replace(eta=DESK.eta * 2)) == []
    assert b[1].hi < a[1].lo
    assert b[3].lo > a[3].hi


def test_r3_at_gap_400_matches_scalar():
    p = BoundParams(A=10**4, T=10**4, alpha=10**7, eta="1/128", omega=Fraction(400) + Fraction(1, 128))
    assert validate(p) == []
    r3 = error_terms(p)[2]
    ref = mpmath.exp(-200) * mpmath.log(2 * mpmath.pi) + 3 * mpmath.exp(-mpmath.mpf(400) / 6)
    assert r3.contains(ref)
    assert abs(mpmath.mpf(r3.mid) - ref) <= 1e-15 * ref


def _r2_oracle(p):
    A, T, al, eta = (_mp(getattr(p, k)) for k in ("A", "T", "alpha", "eta"))
    return (mpmath.mpf("0.08") * mpmath.sqrt(al) * mpmath.exp(-al * eta**2 / 2)
            + mpmath.exp(-T**2 / (2 * al)) * (al / (mpmath.pi * T**2) * mpmath.log(T / (2 * mpmath.pi))
                                               + 8 * mpmath.log(T) / T + 4 * al / T**3))


def _r4_oracle(p):
    A, al, eta, om = (_mp(getattr(p, k)) for k in ("A", "alpha", "eta", "omega"))
    return A * mpmath.log(A) * mpmath.exp(-A**2 / (2 * al) + (om + eta) / 2) * (4 / mpmath.sqrt(al) + 15 * eta)


def test_r2_r4_match_scalar():
    for p in (DESK, PAPER_PARAMS):
        _, r2, _, r4 = error_terms(p)
        assert r2.contains(_r2_oracle(p))
        assert r4.contains(_r4_oracle(p))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=401, max_value=2000), st.integers(min_value=1, max_value=50),
       st.integers(min_value=1, max_value=20))
def test_error_terms_nonnegative_and_monotone(omega, dt, k):
    p = BoundParams(A=10**4, T=4000 + 100 * dt, alpha=10**7, eta="0.003", omega=omega)
    r = error_terms(p)
    assert all(x.lo >= 0 for x in r)
    further = error_terms(p.replace(omega=omega + k))
    assert further[2].hi < r[2].lo
    taller = error_terms(p.replace(T=p.T + 100))
    # only the e^{-T^2/2 alpha} part of R2 moves with T
    assert taller[1].hi <= r[1].hi


# -- lower bound ------------------------------------------------------------------------


def test_empty_table_gives_no_certificate():
    p = BoundParams(A=10**4, T=10, alpha=10**7, eta="0.003", omega=500)
    bd = lower_bound(p, ZeroTable([], []))
    assert bd.zero_sum.lo == bd.zero_sum.hi == 0
    assert bd.lower_bound.hi < 0
    assert bd.lower_bound.contains(-1 - bd.error_total.mid) or bd.lower_bound.hi < -1


def test_desk_bound_at_437_is_negative(zeros100):
    p = BoundParams(A=100, T=100, alpha=10**4, eta="0.02", omega="437.78249")
    assert validate(p) == []
    bd = lower_bound(p, zeros100)
    assert bd.lower_bound.lo < 0
    assert "R4" in bd.report() or "r4" in bd.report()


# -- sharpening -------------------------------------------------------------------------


def test_eta0_equal_eta_has_no_tail():
    lb = Interval(PAPER_LB)
    t = tail_bound(PAPER_PARAMS, PAPER_PARAMS.eta)
    assert t.lo == t.hi == 0
    c = sharpen(PAPER_PARAMS, lb, PAPER_PARAMS.eta)
    assert isinstance(c, CrossoverCertificate)
    assert (c.integral_lb.lo, c.integral_lb.hi) == (lb.lo, lb.hi)


def test_sharpen_needs_gap_700():
    with pytest.raises(PreconditionError, match="700"):
        sharpen(DESK, Interval(PAPER_LB))


def test_sharpen_rejects_bad_eta0():
    with pytest.raises(ValueError):
        sharpen(PAPER_PARAMS, Interval(PAPER_LB), PAPER_PARAMS.eta * 2)


def test_nonpositive_bound_gives_no_certificate():
    r = sharpen(PAPER_PARAMS, Interval(-1e-3))
    assert isinstance(r, NoCertificate) and not r.issued


def test_smallest_eta0_is_tight():
    lb = Interval(PAPER_LB)
    e0 = smallest_eta0(PAPER_PARAMS, lb)
    assert sharpen(PAPER_PARAMS, lb, e0).issued
    below = e0 * (1 - Fraction(1, 10**6))
    assert not sharpen(PAPER_PARAMS, lb, below).issued


def test_divisor_2_1444_certifies_152_orders():
    lb = Interval(PAPER_LB)
    c = sharpen(PAPER_PARAMS, lb, PAPER_PARAMS.eta / Fraction("2.1444"))
    assert c.issued
    assert c.successive_count_log10 > 152
    assert c.x_lo < PAPER_PARAMS.omega < c.x_hi
    rep = c.report()
    assert "1.3082e-09" in rep or "1.3082e-9" in rep


def _sharpened_oracle(p, lb, eta0):
    om, eta, al, e0 = _mp(p.omega), _mp(p.eta), _mp(p.alpha), _mp(eta0)
    k = mpmath.sqrt(al / (2 * mpmath.pi)) * mpmath.exp(-al * e0**2 / 2)
    tail = mpmath.mpf("1.3082e-9") * (eta - e0) * k * (mpmath.exp((om + eta) / 2) + mpmath.exp((om - e0) / 2))
    return _mp(lb) - tail


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=1.0, max_value=4.0))
def test_issued_certificates_are_sound(div):
    lb = Interval(PAPER_LB)
    eta0 = PAPER_PARAMS.eta / Fraction(div)
    c = sharpen(PAPER_PARAMS, lb, eta0)
    ref = _sharpened_oracle(PAPER_PARAMS, PAPER_LB, eta0)
    if c.issued:
        assert ref > 0
        assert c.integral_lb.contains(ref)
        pw = ref * mpmath.exp((_mp(PAPER_PARAMS.omega) - _mp(eta0)) / 2)
        assert c.successive_count_log10 <= float(mpmath.log10(pw))
    else:
        assert ref <= 0 or c.integral_lb.lo <= 0


# -- scan ----------------------------------------------------------------------------------


def test_single_point_scan(zeros100):
    rows = scan("437.78", "437.78", "1e-5", zeros100, None, 100)
    assert len(rows) == 1
    assert rows[0].omega == Fraction("437.78")
    direct = zero_sum(zeros100, "437.78", None, 100)
    assert (rows[0].zero_sum.lo, rows[0].zero_sum.hi) == (direct.lo, direct.hi)


def test_scan_output_independent_of_workers(tmp_path, zeros100):
    a = scan("437.78", "437.7801", "1e-5", zeros100, None, 100, workers=1)
    b = scan("437.78", "437.7801", "1e-5", zeros100, None, 100, workers=2)
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    write_scan_csv(a, pa)
    write_scan_csv(b, pb)
    assert pa.read_bytes() == pb.read_bytes()
    lines = pa.read_text().splitlines()
    assert lines[0] == SCAN_HEADER and len(lines) == 12


def test_scan_rejects_bad_step(zeros100):
    with pytest.raises(ValueError):
        scan(437, 438, 0, zeros100, None, 100)


def test_bounds_rows():
    assert BOUNDS.theta_epsilon(400) == Fraction("1.5423e-9")
    assert BOUNDS.theta_epsilon(700) == Fraction("1.3082e-9")
