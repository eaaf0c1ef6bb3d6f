import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load_problem
from movingsl.asymptotics import (
    SEQUENCES,
    AsymptoticCase,
    AsymptoticPrediction,
    OrderOnly,
    asymptotic_eigenfunction,
    asymptotic_omega,
    asymptotic_phi,
    classify_case,
    match_to_sequences,
    predict_s,
    predictions_up_to,
    ratio_envelope,
    regular_s,
)
from movingsl.eigen import find_eigenvalues
from movingsl.errors import DegenerateLeadingCoefficient
from movingsl.fundamental import omega, phi
from movingsl.problem import LeftBC, PiecewisePotential, ProblemSpec, RightBC, TransmissionMatrix, validate

TL = TransmissionMatrix(1.0, 0.5, -0.2, 1.2)
TR = TransmissionMatrix(0.8, 0.3, 0.1, 1.5)


def make(beta, right, eps=math.pi / 4, tl=TL, tr=TR, q=None):
    return validate(ProblemSpec(0.0, math.pi, eps, LeftBC(*beta), RightBC(*right), tl, tr,
                                q or PiecewisePotential.zero()))


@pytest.mark.parametrize("beta, right, case_id", [
    ((1.0, 0.0), (0.0, 1.0, -1.0, 0.0), 3),   # [REFERENCE] beta2 = 0, alpha2p != 0
    ((0.0, 1.0), (1.0, 0.0, 0.0, 1.0), 2),    # [REFERENCE] beta2 != 0, alpha2p = 0
    ((1.0, 0.0), (1.0, 0.0, 0.0, 1.0), 4),
    ((1.0, 1.0), (1.0, 1.0, -1.0, 1.0), 1),
])
def test_classify_case(beta, right, case_id):
    c = classify_case(make(beta, right))
    assert c.case_id == case_id
    assert (c.beta2_nonzero, c.alpha2p_nonzero) == (beta[1] != 0, right[1] != 0)


def test_config_cases_classify_by_name(case_problem):
    name_id = {c: i for i, c in enumerate(("case1", "case2", "case3", "case4"), start=1)}
    ids = {name_id[f"case{i}"] for i in range(1, 5)}
    assert classify_case(case_problem).case_id in ids


@settings(max_examples=50, deadline=None)
@given(st.sampled_from([0.0, 1.0, -2.0]), st.sampled_from([0.0, 0.5, -1.0]))
def test_classification_is_a_partition(beta2, alpha2p):
    # alpha1p and alpha2 chosen so rho = alpha1p*alpha2 - alpha2p*alpha1 = 1 with alpha1 = 0
    p = make((1.0, beta2), (1.0, alpha2p, 0.0, 1.0))
    flags = [(AsymptoticCase(k).beta2_nonzero, AsymptoticCase(k).alpha2p_nonzero) for k in (1, 2, 3, 4)]
    assert flags.count((beta2 != 0, alpha2p != 0)) == 1
    assert flags[classify_case(p).case_id - 1] == (beta2 != 0, alpha2p != 0)


def test_predict_s_leading_terms():
    p = make((1.0, 1.0), (1.0, 1.0, -1.0, 1.0))   # theta - eps = pi/4, theta + eps = 3pi/4
    assert predict_s(p, AsymptoticCase(1), "prime", 3).s_pred == pytest.approx(8.0)
    assert predict_s(p, AsymptoticCase(3), "prime", 1).s_pred == pytest.approx(2.0)
    assert predict_s(p, AsymptoticCase(1), "triple_prime", 4).s_pred == pytest.approx(8.0)
    pred = predict_s(p, AsymptoticCase(2), "double_prime", 5)
    assert pred.lambda_pred == pytest.approx(pred.s_pred ** 2)
    with pytest.raises(ValueError):
        predict_s(p, AsymptoticCase(1), "prime", 0)


@pytest.mark.parametrize("case_id", [1, 2, 3, 4])
@pytest.mark.parametrize("sequence", SEQUENCES)
def test_predict_s_is_linear_in_n(case_id, sequence):
    p = load_problem("case1")
    s = [predict_s(p, AsymptoticCase(case_id), sequence, n).s_pred for n in range(1, 12)]
    assert np.allclose(np.diff(s), s[1] - s[0], rtol=1e-12)


def test_predictions_up_to_are_bounded_and_complete(case_problem):
    preds = predictions_up_to(case_problem, 50.0)
    assert all(0 <= p.s_pred <= 50.0 for p in preds)
    for seq, length in zip(SEQUENCES, case_problem.lengths):
        ns = sorted(p.n for p in preds if p.sequence == seq)
        # indices run contiguously from the first nonnegative member
        assert ns == list(range(ns[0], ns[-1] + 1))
        assert ns[0] == 1 or predict_s(case_problem, classify_case(case_problem), seq, ns[0] - 1).s_pred < 0
        assert predict_s(case_problem, classify_case(case_problem), seq, ns[-1] + 1).s_pred > 50.0


def test_asymptotic_omega_vanishes_at_factor_zeros(case_problem):
    c = classify_case(case_problem)
    l2 = case_problem.lengths[1]
    assert asymptotic_omega(case_problem, c, 7 * math.pi / l2) == pytest.approx(0.0, abs=1e-6)


def test_asymptotic_omega_case3_hand_arithmetic():
    p = make((1.0, 0.0), (0.0, 1.0, -1.0, 0.0))
    s = 5.0
    l1, l2, l3 = p.lengths
    # beta1 alpha2p mu2 eta2 s^4 cos(s L1) sin(s L2) sin(s L3) / (D1 D2)
    hand = 1.0 * 1.0 * 0.5 * 0.3 * s ** 4 * math.cos(s * l1) * math.sin(s * l2) * math.sin(s * l3) / (p.d1 * p.d2)
    assert asymptotic_omega(p, classify_case(p), s) == pytest.approx(hand, rel=1e-14)


def test_degenerate_leading_coefficient():
    # diagonal transmissions have mu2 = eta2 = 0
    p0_case3 = make((1.0, 0.0), (0.0, 1.0, -1.0, 0.0),
                    tl=TransmissionMatrix(2.0, 0.0, 0.0, 1.0), tr=TransmissionMatrix(1.0, 0.0, 0.0, 3.0))
    with pytest.raises(DegenerateLeadingCoefficient):
        asymptotic_omega(p0_case3, classify_case(p0_case3), 5.0)


def test_omega_ratio_tends_to_one(case_problem):
    c = classify_case(case_problem)
    s = regular_s(case_problem, 60.0)
    ratio = omega(case_problem, s * s, rtol=1e-11, atol=1e-13) / asymptotic_omega(case_problem, c, s)
    assert abs(ratio - 1) < 0.75


def test_ratio_envelope_is_bounded(case_problem):
    env = [ratio_envelope(case_problem, s0) for s0 in (20.0, 40.0, 80.0)]
    assert env[2] <= 1.25 * max(env[:2])


def test_asymptotic_phi_examples():
    p = make((1.0, 0.0), (1.0, 0.0, 0.0, 1.0))
    # beta2 = 0, first piece: -(beta1/s) sin(s (x - a))
    assert asymptotic_phi(p, 100.0, math.pi / 20) == pytest.approx(-0.1, rel=1e-14)
    q = make((1.0, 2.0), (1.0, 0.0, 0.0, 1.0))
    s = 10.0
    just_right = q.x_minus + 1e-13
    expected = -s * 0.5 * 2.0 * math.sin(s * q.lengths[0])
    assert asymptotic_phi(q, s * s, just_right) == pytest.approx(expected, rel=1e-9)
    with pytest.raises(ValueError):
        asymptotic_phi(q, s * s, q.x_minus)
    with pytest.raises(ValueError):
        asymptotic_phi(q, -1.0, 0.3)


@pytest.mark.parametrize("name", ["case1", "case3"])
def test_asymptotic_phi_error_decays_like_one_over_s(name):
    p = load_problem(name)
    svals = [regular_s(p, s0) for s0 in np.geomspace(20, 160, 8)]
    errs = np.zeros((len(svals), 3))
    for a, s in enumerate(svals):
        ph = phi(p, s * s, 1e-12)
        for j, (lo, hi) in enumerate(p.pieces):
            xs = np.linspace(lo, hi, 60)[1:-1]
            asym = asymptotic_phi(p, s * s, xs)
            errs[a, j] = np.max(np.abs(ph.sample(xs, j).u - asym)) / np.max(np.abs(asym))
    for j in range(3):
        slope = np.polyfit(np.log(svals), np.log(errs[:, j]), 1)[0]
        assert slope < -0.5


def test_asymptotic_eigenfunction_examples():
    c1 = make((1.0, 2.0), (1.0, 1.0, -1.0, 1.0))
    assert asymptotic_eigenfunction(c1, AsymptoticCase(1), "prime", 5, 0.0) == pytest.approx(2.0)
    marker = asymptotic_eigenfunction(c1, AsymptoticCase(1), "prime", 5, math.pi / 2)
    assert isinstance(marker, OrderOnly) and str(marker) == "O(1/n)"
    c3 = make((1.5, 0.0), (0.0, 1.0, -1.0, 0.0))
    n, l1 = 4, c3.lengths[0]
    value = asymptotic_eigenfunction(c3, AsymptoticCase(3), "prime", n, c3.x_minus)
    assert abs(value) == pytest.approx(1.5 * l1 / ((n - 0.5) * math.pi), rel=1e-12)
    assert asymptotic_eigenfunction(c3, AsymptoticCase(3), "triple_prime", n, 3.0) != 0


def _pairs(lams):
    from movingsl.eigen import Eigenpair
    import cmath

    return [Eigenpair(i, lam, cmath.sqrt(lam), None, float("nan"), 0.0) for i, lam in enumerate(lams)]


def test_matching_empty_predictions():
    tagged = match_to_sequences(_pairs([1.0, 4.0]), [], window=1.0)
    assert [e.sequence_tag for e in tagged] == ["unmatched", "unmatched"]


def test_matching_duplicate_predictions_are_injective():
    preds = [AsymptoticPrediction("prime", 2, 2.0), AsymptoticPrediction("triple_prime", 2, 2.0)]
    tagged = match_to_sequences(_pairs([4.0]), preds, window=0.5)
    assert tagged[0].sequence_tag == "prime"
    tagged = match_to_sequences(_pairs([3.9, 4.1]), preds, window=0.5)
    assert sorted(e.sequence_tag for e in tagged) == ["prime", "triple_prime"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.5, 100.0), min_size=1, max_size=12),
       st.lists(st.floats(0.5, 10.0), min_size=0, max_size=12))
def test_matching_uses_each_prediction_once(lams, spred):
    preds = [AsymptoticPrediction(SEQUENCES[i % 3], i + 1, s) for i, s in enumerate(spred)]
    tagged = match_to_sequences(_pairs(sorted(lams)), preds, window=0.3)
    used = [(e.sequence_tag, e.sequence_n) for e in tagged if e.sequence_tag != "unmatched"]
    assert len(used) == len(set(used))
    assert all(abs(e.s_err) <= 0.3 for e in tagged if e.sequence_tag != "unmatched")


def test_matching_on_case_spec(case_problem):
    p = case_problem
    pairs = find_eigenvalues(p, 2500.0, scan_step=1.0, eigenfunctions=False)
    tagged = match_to_sequences(pairs, predictions_up_to(p, 55.0), window=0.5 * math.pi / max(p.lengths))
    high = [e for e in tagged if e.s_real > 15.0]
    assert high and all(e.sequence_tag != "unmatched" for e in high)
    # O(1/n) remainders: s |s - s_pred| stays bounded
    assert max(e.s_real * abs(e.s_err) for e in high) < 15.0
