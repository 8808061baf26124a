import time

import numpy as np
import pytest

from esdkit import verify
from esdkit.cli import main


@pytest.fixture(scope="module")
def fast_report():
    t0 = time.perf_counter()
    rep = verify.run("fast")
    return rep, time.perf_counter() - t0


def test_fast_level_passes(fast_report):
    rep, seconds = fast_report
    assert rep.passed, rep.format()
    assert seconds < 60
    names = {c.name for c in rep.checks}
    for required in ("root_residuals", "block_norm", "total_norm", "oracle_equivalence",
                     "purity_symmetry", "swap_invariance"):
        assert required in names


def test_report_format(fast_report):
    rep, _ = fast_report
    lines = rep.format().splitlines()
    assert lines[0] == "esdkit verify --level fast"
    assert all(ln.startswith("PASS") for ln in lines[1:-1])
    assert lines[-1] == f"{len(rep.checks)}/{len(rep.checks)} checks passed"


def test_failed_check_flags():
    c = verify.Check("x", worst=2e-8, tol=1e-8)
    assert not c.passed and c.line().startswith("FAIL")
    assert not verify.Check("nan", worst=float("nan"), tol=1.0).passed
    rep = verify.VerifyReport("fast", [verify.Check("ok", 0.0, 1.0), c])
    assert not rep.passed and "1/2 checks passed" in rep.format()


def test_bad_level():
    with pytest.raises(ValueError):
        verify.run("slow")


def test_oracle_draws_deterministic():
    a = list(verify.oracle_draws(5))
    b = list(verify.oracle_draws(5))
    assert [(d[1], d[2], d[3]) for d in a] == [(d[1], d[2], d[3]) for d in b]
    assert all(0 <= d[2] <= 230 and 0 < d[3] <= 50 for d in a)


def test_cli_exit_codes(monkeypatch, capsys):
    failing = verify.VerifyReport("fast", [verify.Check("x", 1.0, 0.5)])
    monkeypatch.setattr(verify, "run", lambda level: failing)
    assert main(["verify"]) == 1
    passing = verify.VerifyReport("fast", [verify.Check("x", 0.0, 0.5)])
    monkeypatch.setattr(verify, "run", lambda level: passing)
    assert main(["verify", "--level", "full"]) == 0
    assert "PASS" in capsys.readouterr().out


@pytest.mark.slow
def test_full_level_passes():
    rep = verify.run("full")
    assert rep.passed, rep.format()
    (draws,) = [c for c in rep.checks if c.name == "oracle_equivalence"]
    assert draws.worst < 1e-7 and np.isfinite(draws.worst)
