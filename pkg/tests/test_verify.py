import dataclasses

import numpy as np
import pytest

from conftest import P_CONT_LAMBDA0
from movingsl.errors import LambdaIsEigenvalue
from movingsl.problem import ValidatedProblem
from movingsl.verify import (
    CheckResult,
    characteristic_discrepancy,
    jump_relation_residual,
    pick_regular_lambda,
    run_checks,
)


def test_check_result_threshold():
    assert CheckResult("a", 1e-10, 1e-9).passed
    assert not CheckResult("a", 1e-8, 1e-9).passed
    assert not CheckResult("a", float("nan"), 1e-9).passed


def test_pick_regular_lambda(p_cont):
    assert pick_regular_lambda(p_cont, 2.0) == 2.0
    moved = pick_regular_lambda(p_cont, P_CONT_LAMBDA0)
    assert moved == pytest.approx(P_CONT_LAMBDA0 + 0.137)


def test_run_checks_p0(p0):
    results = run_checks(p0, lambda_max=30.0)
    names = [r.name for r in results]
    assert names[-1] == "oracle_agreement" and len(set(names)) == len(names)
    assert all(r.passed for r in results), [(r.name, r.value) for r in results if not r.passed]


def test_run_checks_case_without_oracle(case_problem):
    results = run_checks(case_problem, skip_oracle=True, lambda_max=100.0)
    assert "oracle_agreement" not in {r.name for r in results}
    assert all(r.passed for r in results)


def test_wrong_jump_factor_is_caught(p0):
    # a problem that lies about D1 must fail the jump and characteristic checks
    liar = dataclasses.replace(p0, d1=p0.d1 * 1.01)
    rng = np.random.default_rng(0)
    assert jump_relation_residual(liar, 2.0, rng) > 1e-4
    assert characteristic_discrepancy(liar, [2.0, 7.5]) > 1e-4
    assert isinstance(liar, ValidatedProblem)


def test_no_regular_lambda_raises(p_cont, monkeypatch):
    import movingsl.hilbert as hilbert

    def always(*_a, **_k):
        raise LambdaIsEigenvalue("x")

    monkeypatch.setattr(hilbert, "LambdaContext", always)
    with pytest.raises(LambdaIsEigenvalue):
        pick_regular_lambda(p_cont)
