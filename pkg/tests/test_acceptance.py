"""Acceptance gate: the eight criteria at their stated tolerances.

Each criterion prints one PASS/FAIL line; the lines are repeated in the
pytest terminal summary.
"""
import io

import pytest

from hausdorff_h1 import acceptance
from hausdorff_h1.harness import acceptance as harness_acceptance

from conftest import ACCEPTANCE_LINES

SEED = 0


@pytest.mark.parametrize("number", [c[0] for c in acceptance.CRITERIA])
def test_criterion(number):
    res = acceptance.run_criterion(number, SEED)
    line = res.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert res.passed, line


def test_halved_doubling_constant_is_detected():
    buf = io.StringIO()
    out = harness_acceptance(SEED, c_mu_scale=0.5, stream=buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(acceptance.CRITERIA) + 1
    assert out.exit_code == 1
    assert not out.results[0].passed
    assert "FAIL] criterion 1" in lines[0]


def test_summary_reports_runtime():
    res = acceptance.AcceptanceResult([acceptance.CriterionResult(1, "x", True, "ok", 0.5)], 0.5)
    assert res.exit_code == 0
    assert res.table().endswith("1/1 criteria passed in 0.5s")
    res.results.append(acceptance.CriterionResult(2, "y", False, "bad"))
    assert res.exit_code == 1
