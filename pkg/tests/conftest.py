from __future__ import annotations

import os

import pytest

from thetacert.zeros import compute_zeros, load_zeros, save_zeros

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(n: int, passed: bool, detail: str) -> None:
    _CRITERIA[n] = (passed, detail)
    print(f"criterion {n}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def zeros100():
    return compute_zeros(100)


@pytest.fixture(scope="session")
def zeros_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("zeros")


_Z5000: dict = {}


def zeros5000_table():
    """Zeros up to 5000, computed once per session (or read from THETA_TEST_ZEROS)."""
    if "z" not in _Z5000:
        cached = os.environ.get("THETA_TEST_ZEROS")
        if cached and os.path.exists(cached):
            _Z5000["z"] = load_zeros(cached)
        else:
            _Z5000["z"] = compute_zeros(5000, workers=os.cpu_count() or 1)
            if cached:
                save_zeros(_Z5000["z"], cached)
    return _Z5000["z"]


def set_zeros5000(z) -> None:
    _Z5000["z"] = z


@pytest.fixture(scope="session")
def zeros5000():
    return zeros5000_table()
