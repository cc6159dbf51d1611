from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetacert.zeros import (
    ZeroMismatchError,
    ZeroTable,
    ZeroTableError,
    compute_zeros,
    hardy_z,
    load_zeros,
    save_zeros,
    theta_ball,
    validate_against,
    zeta_ball,
)
from thetacert.zeros.zeta import to_dyadic

mpmath.mp.prec = 200

FIRST = mpmath.mpf("14.134725141734693790457251983562470270784257115699")


# -- loading --------------------------------------------------------------------------


def test_load_two_zeros(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("14.134725141734693\n21.022039638771555\n")
    z = load_zeros(p)
    assert len(z) == 2
    assert z.gammas[0].contains(Fraction("14.134725141734693"))
    assert z.meta.max_gamma >= 21.022039638771555


def test_load_empty_file(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("")
    z = load_zeros(p)
    assert len(z) == 0 and z.gammas == []


def test_decreasing_pair_names_index_1(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("21.022039638771555\n14.134725141734693\n")
    with pytest.raises(ZeroTableError) as e:
        load_zeros(p)
    assert e.value.index == 1 and e.value.line == 2


@pytest.mark.parametrize("body,line", [
    ("14.1\n14.1\n", 2),
    ("14.1\n-3\n", 2),
    ("# source=x\n14.1\nabc\n", 3),
])
def test_bad_files_report_line(tmp_path, body, line):
    p = tmp_path / "bad.txt"
    p.write_text(body)
    with pytest.raises(ZeroTableError) as e:
        load_zeros(p)
    assert e.value.line == line


def test_headers_set_accuracy_and_completeness(tmp_path):
    p = tmp_path / "z.txt"
    p.write_text("# abs_accuracy=1e-12\n# complete_to=22\n14.134725141734693\n21.022039638771555\n")
    z = load_zeros(p)
    assert z.meta.complete_to == 22.0
    assert z.meta.abs_accuracy >= 1e-12
    assert z.covers(22) and not z.covers(23)


def test_table_invariants_enforced():
    with pytest.raises(ZeroTableError):
        ZeroTable([2, 1], [3, 2])
    with pytest.raises(ZeroTableError):
        ZeroTable([0], [1])


# -- computation ------------------------------------------------------------------------


def test_first_zero_only_below_15():
    z = compute_zeros(15)
    assert len(z) == 1
    assert z.gammas[0].contains(FIRST)
    assert z.hi_raw[0] - z.lo_raw[0] <= Fraction(1, 10**15) * (1 << 128)


def test_no_zero_below_14():
    assert len(compute_zeros(14)) == 0


def test_hundred_gives_29_matching_mpmath(zeros100):
    assert len(zeros100) == 29
    assert zeros100.meta.complete_to == 100
    for i, g in enumerate(zeros100.gammas):
        ref = mpmath.zetazero(i + 1).imag
        assert g.contains(ref), i


def test_count_matches_independent_counter():
    for t in (30.0, 60.0):
        assert len(compute_zeros(t)) == int(mpmath.nzeros(t))


def test_compute_is_bit_reproducible(zeros100):
    again = compute_zeros(100)
    assert again.lo_raw == zeros100.lo_raw and again.hi_raw == zeros100.hi_raw


def test_compute_guards():
    with pytest.raises(ValueError):
        compute_zeros(5)
    with pytest.raises(ValueError):
        compute_zeros(2e5)
    with pytest.raises(ValueError):
        compute_zeros(100, target_accuracy=1.0)


def test_target_accuracy_respected():
    z = compute_zeros(40, target_accuracy=1e-25)
    assert all(hi - lo <= Fraction(1, 10**25) * (1 << 128) for lo, hi in zip(z.lo_raw, z.hi_raw))
    assert z.gammas[0].contains(FIRST)


def test_gap_screen_clean(zeros100):
    assert zeros100.gap_screen() == []
    assert zeros100.gap_screen(max_gap=2.0) != []


# -- round trips and validation ------------------------------------------------------------


@pytest.mark.parametrize("fmt", ["text", "packed"])
def test_round_trip_keeps_enclosures(tmp_path, zeros100, fmt):
    p = tmp_path / f"z.{fmt}"
    save_zeros(zeros100, p, format=fmt)
    back = load_zeros(p)
    assert len(back) == 29
    for a, b in zip(zeros100.gammas, back.gammas):
        assert b.lo <= a.lo and a.hi <= b.hi
    validate_against(back, zeros100)


def test_text_file_has_twenty_digits(tmp_path, zeros100):
    p = tmp_path / "z.txt"
    save_zeros(zeros100, p)
    rows = [r for r in p.read_text().splitlines() if r and not r.startswith("#")]
    assert len(rows) == 29
    assert all(len(r.replace(".", "")) >= 20 for r in rows)


def test_validate_self_is_zero(zeros100):
    rep = validate_against(zeros100, zeros100)
    assert rep.compared == 29 and rep.max_disagreement == 0


def test_validate_against_loaded_text(tmp_path, zeros100):
    p = tmp_path / "ref.txt"
    p.write_text("".join(f"{mpmath.nstr(mpmath.zetazero(i).imag, 30)}\n" for i in range(1, 30)))
    rep = validate_against(zeros100, load_zeros(p))
    assert rep.compared == 29 and rep.max_disagreement < 1e-15


def test_perturbed_entry_is_a_mismatch(zeros100):
    lo = list(zeros100.lo_raw)
    hi = list(zeros100.hi_raw)
    d = (1 << 128) // 1000
    lo[5] += d
    hi[5] += d
    with pytest.raises(ZeroMismatchError) as e:
        validate_against(ZeroTable(lo, hi), zeros100)
    assert e.value.index == 5


def test_up_to_and_covers(zeros100):
    sub = zeros100.up_to(50)
    assert len(sub) == 10
    assert zeros100.covers(100) and not zeros100.covers(100.5)
    assert ZeroTable([], []).covers(10)


# -- certified zeta pieces against the oracle ------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.5, max_value=3.0), st.floats(min_value=1.0, max_value=400.0))
def test_zeta_ball_contains_oracle(sigma, t):
    sig, T = to_dyadic(sigma), to_dyadic(t)
    z = zeta_ball(sig, T)
    s = mpmath.mpc(mpmath.mpf(sig) / 2**96, mpmath.mpf(T) / 2**96)
    ref = mpmath.zeta(s)
    scale = mpmath.mpf(2) ** 96
    assert abs(mpmath.mpc(z.re, z.im) / scale - ref) <= z.rad / scale


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1.0, max_value=2000.0))
def test_theta_and_z_contain_oracle(t):
    T = to_dyadic(t)
    tt = mpmath.mpf(T) / 2**96
    th = theta_ball(T)
    assert th.to_interval().contains(mpmath.siegeltheta(tt))
    assert hardy_z(t).contains(mpmath.siegelz(tt))
