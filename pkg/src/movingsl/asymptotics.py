"""Large-``s`` behaviour: leading terms of ``phi``, of ``omega`` and of the eigenvalues.

Everything is keyed on the four cases fixed by whether ``beta2`` and
``alpha2p`` vanish.  With ``L1, L2, L3`` the piece lengths, the eigenvalues
split into three sequences that follow the zeros of the three trigonometric
factors of the leading term of ``omega``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .eigen import Eigenpair
from .errors import DegenerateLeadingCoefficient
from .problem import ValidatedProblem

__all__ = [
    "SEQUENCES",
    "AsymptoticCase",
    "AsymptoticPrediction",
    "OrderOnly",
    "classify_case",
    "predict_s",
    "predictions_up_to",
    "asymptotic_omega",
    "regular_s",
    "ratio_envelope",
    "asymptotic_phi",
    "asymptotic_eigenfunction",
    "match_to_sequences",
]

SEQUENCES = ("prime", "double_prime", "triple_prime")

# offsets subtracted from n in s = (n - offset) pi / L, per case and sequence
_OFFSETS = {
    1: (1.0, 1.0, 2.0),
    2: (1.0, 1.0, 0.5),
    3: (0.5, 1.0, 1.0),
    4: (0.5, 1.0, 0.5),
}

# pieces where only an order of magnitude is known for the eigenfunction
_ORDER_ONLY = {
    (True, "prime"): {1: "O(1/n)", 2: "O(1/n)"},
    (True, "double_prime"): {2: "O(1/n)"},
    (True, "triple_prime"): {},
    (False, "prime"): {1: "O(1/n)", 2: "O(1)"},
    (False, "double_prime"): {2: "O(1)"},
    (False, "triple_prime"): {},
}


@dataclass(frozen=True)
class AsymptoticCase:
    case_id: int

    @property
    def beta2_nonzero(self) -> bool:
        return self.case_id in (1, 2)

    @property
    def alpha2p_nonzero(self) -> bool:
        return self.case_id in (1, 3)


@dataclass(frozen=True)
class AsymptoticPrediction:
    sequence: str
    n: int
    s_pred: float

    @property
    def lambda_pred(self) -> float:
        return self.s_pred ** 2


@dataclass(frozen=True)
class OrderOnly:
    """Placeholder for a piece where only the size of the eigenfunction is known."""

    order: str

    def __str__(self) -> str:
        return self.order


def classify_case(problem: ValidatedProblem) -> AsymptoticCase:
    b2 = problem.left_bc.beta2 != 0
    a2 = problem.right_bc.alpha2p != 0
    return AsymptoticCase({(True, True): 1, (True, False): 2, (False, True): 3, (False, False): 4}[(b2, a2)])


def predict_s(problem: ValidatedProblem, case: AsymptoticCase, sequence: str, n: int) -> AsymptoticPrediction:
    """Leading term ``(n - offset) pi / L`` of the ``sequence`` member with index ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = SEQUENCES.index(sequence)
    s = (n - _OFFSETS[case.case_id][k]) * math.pi / problem.lengths[k]
    return AsymptoticPrediction(sequence, n, s)


def predictions_up_to(problem: ValidatedProblem, s_max: float,
                      case: AsymptoticCase | None = None) -> list[AsymptoticPrediction]:
    """All nonnegative predictions with ``s_pred <= s_max``, every sequence."""
    case = case or classify_case(problem)
    out = []
    for k, seq in enumerate(SEQUENCES):
        n_max = int(math.floor(s_max * problem.lengths[k] / math.pi + _OFFSETS[case.case_id][k]))
        for n in range(1, n_max + 1):
            p = predict_s(problem, case, seq, n)
            if 0 <= p.s_pred <= s_max:
                out.append(p)
    return out


def _leading_coefficient(problem: ValidatedProblem, case: AsymptoticCase) -> float:
    lb, rb = problem.left_bc, problem.right_bc
    left = lb.beta2 if case.beta2_nonzero else lb.beta1
    right = rb.alpha2p if case.alpha2p_nonzero else rb.alpha1p
    return left * right * problem.t_left.m12 * problem.t_right.m12


def asymptotic_omega(problem: ValidatedProblem, case: AsymptoticCase, s):
    """Leading term of ``omega(s**2)`` including the ``1/(D1 D2)`` prefactor."""
    c = _leading_coefficient(problem, case)
    if c == 0:
        raise DegenerateLeadingCoefficient(
            "the product of the case coefficients with mu2 and eta2 vanishes; the leading term is identically zero")
    s = np.asarray(s, dtype=float)
    l1, l2, l3 = problem.lengths
    f1 = np.sin(s * l1) if case.beta2_nonzero else np.cos(s * l1)
    f3 = np.sin(s * l3) if case.alpha2p_nonzero else np.cos(s * l3)
    power = 3 + case.beta2_nonzero + case.alpha2p_nonzero
    return c * s ** power * f1 * np.sin(s * l2) * f3 / (problem.d1 * problem.d2)


def regular_s(problem: ValidatedProblem, s0: float, floor: float = 0.3, step: float = 1e-3) -> float:
    """First ``s >= s0`` where every sine and cosine factor of the leading terms is at least ``floor``.

    Ratios against the leading terms are only meaningful away from their zeros.
    """
    l1, l2, l3 = problem.lengths
    s = float(s0)
    for _ in range(100000):
        f = np.abs([math.sin(s * l1), math.cos(s * l1), math.sin(s * l2), math.sin(s * l3), math.cos(s * l3)])
        if f.min() >= floor:
            return s
        s += step
    raise ValueError(f"no s above {s0} keeps every factor >= {floor}")


def ratio_envelope(problem: ValidatedProblem, s0: float, points: int = 80, floor: float = 0.3,
                   rtol: float = 1e-11) -> float:
    """``max s |omega(s**2) / omega_asym(s) - 1|`` over one oscillation window above ``s0``.

    The window ``[s0, s0 + 2 pi / min L]`` is sampled at ``points`` values and
    only those where every leading factor is at least ``floor`` are kept.  A
    bounded envelope as ``s0`` grows is the ``O(1/s)`` remainder law.
    """
    from .fundamental import omega

    case = classify_case(problem)
    l1, l2, l3 = problem.lengths
    s = np.linspace(s0, s0 + 2 * math.pi / min(problem.lengths), points)
    f = np.abs([np.sin(s * l1), np.cos(s * l1), np.sin(s * l2), np.sin(s * l3), np.cos(s * l3)]).min(axis=0)
    s = s[f >= floor]
    if s.size == 0:
        raise ValueError(f"no sample above s0={s0} keeps every factor >= {floor}")
    ratio = omega(problem, s * s, rtol=rtol, atol=rtol * 1e-2) / asymptotic_omega(problem, case, s)
    return float(np.max(s * np.abs(ratio - 1.0)))


def _trig(kind: str, arg, k: int):
    """``k``-th derivative (in ``x``, chain factor excluded) of cos or sin."""
    if kind == "cos":
        return np.cos(arg) if k == 0 else -np.sin(arg)
    return np.sin(arg) if k == 0 else np.cos(arg)


def _phi_leading(problem: ValidatedProblem, s: float, x, k: int, piece: int):
    p = problem
    beta1, beta2 = p.left_bc.beta1, p.left_bc.beta2
    mu2, eta2 = p.t_left.m12, p.t_right.m12
    l1, l2 = p.lengths[0], p.lengths[1]
    chain = s ** k
    if beta2 != 0:
        if piece == 0:
            return beta2 * _trig("cos", s * (x - p.a), k) * chain
        if piece == 1:
            return -s * mu2 * beta2 * math.sin(s * l1) * _trig("cos", s * (x - p.x_minus), k) * chain
        return (s * s * mu2 * eta2 * beta2 * math.sin(s * l1) * math.sin(s * l2)
                * _trig("cos", s * (x - p.x_plus), k) * chain)
    if piece == 0:
        return -(beta1 / s) * _trig("sin", s * (x - p.a), k) * chain
    if piece == 1:
        return -mu2 * beta1 * math.cos(s * l1) * _trig("cos", s * (x - p.x_minus), k) * chain
    return (s * mu2 * eta2 * beta1 * math.cos(s * l1) * math.sin(s * l2)
            * _trig("cos", s * (x - p.x_plus), k) * chain)


def asymptotic_phi(problem: ValidatedProblem, lam: float, x, k: int = 0):
    """Leading term of ``phi^(k)(x)`` for ``lam = s**2 > 0``; ``x`` must avoid the interfaces."""
    if k not in (0, 1):
        raise ValueError("derivative order must be 0 or 1")
    if not lam > 0:
        raise ValueError("asymptotic forms need lam > 0")
    s = math.sqrt(lam)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for j, xv in enumerate(xs):
        if xv in (problem.x_minus, problem.x_plus) or not problem.a <= xv <= problem.b:
            raise ValueError(f"x={xv} is not inside one of the open pieces")
        out[j] = _phi_leading(problem, s, xv, k, problem.piece_of(xv))
    return out[0] if np.ndim(x) == 0 else out


def asymptotic_eigenfunction(problem: ValidatedProblem, case: AsymptoticCase, sequence: str, n: int, x):
    """Leading eigenfunction term for one sequence member, or an :class:`OrderOnly` marker.

    The value is the leading term of ``phi`` evaluated at the predicted
    ``s``; pieces on which the eigenfunction is only known to be small (or
    bounded) return the marker.  Pieces are closed on the right, so an
    interface point is evaluated as the end of the piece to its left.
    """
    if not problem.a <= x <= problem.b:
        raise ValueError(f"x={x} outside [{problem.a}, {problem.b}]")
    piece = problem.piece_of(float(x))
    order = _ORDER_ONLY[(case.beta2_nonzero, sequence)].get(piece)
    if order is not None:
        return OrderOnly(order)
    s = predict_s(problem, case, sequence, n).s_pred
    if s <= 0:
        raise ValueError(f"predicted s={s} is not positive for n={n}")
    return float(_phi_leading(problem, s, float(x), 0, piece))


def match_to_sequences(eigenpairs: Sequence[Eigenpair], predictions: Iterable[AsymptoticPrediction],
                       window: float) -> list[Eigenpair]:
    """Tag each eigenpair with the nearest unused prediction within ``window`` (in ``s``).

    Candidate pairs are taken greedily by increasing ``|s - s_pred|``; ties go
    to the sequence listed first.  Every prediction and every eigenpair is used
    at most once; the rest are tagged ``unmatched``.
    """
    preds = list(predictions)
    cands = []
    for i, e in enumerate(eigenpairs):
        for j, p in enumerate(preds):
            r = abs(e.s_real - p.s_pred)
            if r <= window:
                cands.append((r, SEQUENCES.index(p.sequence), p.n, i, j))
    cands.sort()
    used_pair, used_pred = {}, set()
    for r, _, _, i, j in cands:
        if i in used_pair or j in used_pred:
            continue
        used_pair[i] = j
        used_pred.add(j)
    out = []
    for i, e in enumerate(eigenpairs):
        if i in used_pair:
            p = preds[used_pair[i]]
            out.append(e.matched(p.sequence, p.n, p.s_pred))
        else:
            out.append(e.tagged("unmatched"))
    return out
