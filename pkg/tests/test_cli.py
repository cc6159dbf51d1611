from __future__ import annotations

import json
import subprocess
import sys

import pytest

from thetacert import cli
from thetacert.zeros import load_zeros


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    return code, json.loads(lines[-1]), out


@pytest.fixture(scope="module")
def table100(tmp_path_factory, zeros100):
    from thetacert.zeros import save_zeros
    p = tmp_path_factory.mktemp("cli") / "z100.txt"
    save_zeros(zeros100, p)
    return p


# -- zeros ----------------------------------------------------------------------------------


def test_zeros_compute_and_validate(tmp_path, capsys):
    out = tmp_path / "z.txt"
    code, js, _ = run_cli(capsys, "zeros", "compute", "--t-max", 100, "--out", out)
    assert code == 0 and js["count"] == 29
    assert len(load_zeros(out)) == 29
    code, js, _ = run_cli(capsys, "zeros", "validate", out)
    assert code == 0 and js["ok"]
    code, js, _ = run_cli(capsys, "zeros", "validate", out, "--reference", out)
    assert code == 0


def test_zeros_import_unsorted_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("21.022039638771555\n14.134725141734693\n")
    code, js, _ = run_cli(capsys, "zeros", "import", bad, "--out", tmp_path / "o.txt")
    assert code == 2 and "line 2" in js["error"]


def test_zeros_missing_file_is_exit_1(tmp_path, capsys):
    code, js, _ = run_cli(capsys, "zeros", "validate", tmp_path / "nope.txt")
    assert code == 1


def test_zero_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.ZEROS_ENV, str(tmp_path))
    code, js, _ = run_cli(capsys, "scan", "--omega", "437.78", "--t", 60)
    assert code == 0 and js["rows"] == 1
    assert (tmp_path / "zeros-60.txt").exists()
    # second run reads the cached table
    code, js2, _ = run_cli(capsys, "scan", "--omega", "437.78", "--t", 60)
    assert js2["min_sum"] == js["min_sum"]


# -- scan and certify -----------------------------------------------------------------------


def test_scan_writes_csv(tmp_path, capsys, table100):
    out = tmp_path / "s.csv"
    code, js, _ = run_cli(capsys, "scan", "--omega", "437.78:437.7801", "--step", "1e-5", "--t", 100,
                          "--zeros", table100, "--out", out)
    assert code == 0 and js["rows"] == 11
    lines = out.read_text().splitlines()
    assert lines[0] == "omega,sum_mid,sum_width,lb_lo,lb_hi" and len(lines) == 12


def test_scan_is_deterministic(tmp_path, capsys, table100):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    r1 = run_cli(capsys, "scan", "--omega", "437.78:437.78005", "--step", "1e-5", "--t", 100, "--zeros", table100,
                 "--out", a)
    r2 = run_cli(capsys, "scan", "--omega", "437.78:437.78005", "--step", "1e-5", "--t", 100, "--zeros", table100,
                 "--out", b, "--workers", 2)
    assert a.read_bytes() == b.read_bytes()
    assert r1[1]["min_sum"] == r2[1]["min_sum"]


def test_scan_short_table_is_exit_3(capsys, table100):
    code, js, _ = run_cli(capsys, "scan", "--omega", "437.78", "--t", 200, "--zeros", table100)
    assert code == 3


def test_certify_dry_run_paper_params(capsys):
    code, js, out = run_cli(capsys, "certify", "--dry-run")
    assert code == 0 and js["valid"] and js["error_total_hi"] < 1.7e-9


def test_certify_violation_lists_constraints(capsys):
    code, js, out = run_cli(capsys, "certify", "--T", "1e11", "--eta", "1e-20", "--dry-run")
    assert code == 2
    assert "T <= A" in out and "eta >= 2A/alpha" in out


def test_certify_paper_params_with_desk_table_is_exit_3(capsys, table100):
    code, js, _ = run_cli(capsys, "certify", "--zeros", table100)
    assert code == 3 and "too short" in js["error"]
    code, js, _ = run_cli(capsys, "certify")
    assert code == 3


def test_certify_with_supplied_integral_bound(tmp_path, capsys):
    rep = tmp_path / "cert.txt"
    code, js, out = run_cli(capsys, "certify", "--integral-lb", "0.0013360261", "--eta0", "933831/2^44/2.1444",
                            "--report", rep)
    assert code == 0 and js["certificate"] is True
    assert js["successive_count_log10"] > 152
    text = rep.read_text()
    assert "1.3082e-09" in text and "727.951332655" in text


def test_certify_paper_divisor_gives_no_certificate(capsys):
    code, js, _ = run_cli(capsys, "certify", "--integral-lb", "0.0013360261", "--eta0", "933831/2^44/4.2867")
    assert code == 5 and js["certificate"] is False


def test_certify_desk_run_is_not_a_certificate(capsys, table100):
    code, js, _ = run_cli(capsys, "certify", "--A", 100, "--T", 100, "--alpha", "1e4", "--eta", "0.02",
                          "--omega", "437.78249", "--zeros", table100)
    assert code == 5 and js["integral_lb_hi"] < 0


# -- config ---------------------------------------------------------------------------------------


def test_config_round_trip_and_flag_precedence(tmp_path, capsys, table100):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# desk scan\nomega = 437.78:437.78002\nstep=1e-5\nt=100\nzeros={table100}\n")
    code, first, _ = run_cli(capsys, "--config", cfg, "scan")
    assert code == 0 and first["rows"] == 3
    # flags win over the file
    code, js, _ = run_cli(capsys, "--config", cfg, "scan", "--step", "2e-5")
    assert js["rows"] == 2 and js["config"]["step"] == "2e-5"
    # the resolved config written out reproduces the run exactly
    saved = tmp_path / "saved.cfg"
    run_cli(capsys, "--config", cfg, "--save-config", saved, "scan")
    code, again, _ = run_cli(capsys, "--config", saved, "scan")
    assert again == first


def test_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("just words\n")
    code, js, _ = run_cli(capsys, "--config", cfg, "certify", "--dry-run")
    assert code == 2


# -- sieve ------------------------------------------------------------------------------------------


def test_sieve_resume_walk(tmp_path, capsys):
    full, part = tmp_path / "full.bin", tmp_path / "part.bin"
    code, js, _ = run_cli(capsys, "sieve", "--bound", "1e6", "--segment", "1e5", "--ledger", full)
    assert code == 0 and js["verdict"] == "verified_below" and js["prime_count"] == 78498
    code, js, _ = run_cli(capsys, "sieve", "--bound", "1e6", "--segment", "1e5", "--ledger", part, "--limit", 5)
    assert code == 5 and js["verdict"] == "incomplete"
    code, js, _ = run_cli(capsys, "sieve-resume", part)
    assert code == 0 and part.read_bytes() == full.read_bytes()
    out = tmp_path / "walk.csv"
    code, js, _ = run_cli(capsys, "walk", full, "--out", out)
    assert code == 0 and js["rows"] == 10
    assert out.read_text().startswith("x,value_mid")


def test_sieve_checkpoints(tmp_path, capsys):
    from thetacert.sieve import write_pi_checkpoints
    good, bad = tmp_path / "good.csv", tmp_path / "bad.csv"
    write_pi_checkpoints(good, [(10**5, 9592), (10**6, 78498)])
    write_pi_checkpoints(bad, [(10**5, 9593)])
    led = tmp_path / "l.bin"
    code, js, _ = run_cli(capsys, "sieve", "--bound", "1e6", "--segment", "1e5", "--ledger", led, "--pi-table", good)
    assert code == 0 and js["checkpoints"] == 2
    code, js, _ = run_cli(capsys, "sieve-resume", led, "--pi-table", bad)
    assert code == 2 and "100000" in js["error"]


def test_sieve_full_scale_dry_run(capsys):
    code, js, _ = run_cli(capsys, "sieve", "--tiling", "10000x1e13,390x1e14", "--dry-run")
    assert code == 0 and js["segments"] == 10390 and js["problems"] == []


def test_sieve_bad_tiling(capsys):
    code, js, _ = run_cli(capsys, "sieve", "--tiling", "3x10", "--bound", "100", "--dry-run")
    assert code == 2


def test_walk_on_incomplete_ledger(tmp_path, capsys):
    led = tmp_path / "l.bin"
    run_cli(capsys, "sieve", "--bound", "1e5", "--segment", "1e4", "--ledger", led, "--limit", 2)
    code, js, _ = run_cli(capsys, "walk", led)
    assert code == 5


def test_console_script_last_line_is_json(tmp_path):
    r = subprocess.run([sys.executable, "-m", "thetacert.cli", "certify", "--dry-run"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    js = json.loads(r.stdout.strip().splitlines()[-1])
    assert js["command"] == "certify" and js["config"]["omega"] == "727.951332655"
