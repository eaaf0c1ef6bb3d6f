"""Invariant checks shared by the ``verify`` subcommand and the test-suite.

Each check returns a scalar residual that is compared with a tolerance.  All
residuals are relative so that one threshold works across problem scales.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .eigen import eigenfunction_residuals, find_eigenvalues
from .errors import ClusterWarning, LambdaIsEigenvalue
from .fundamental import characteristic, chi, forward_solution, phi, wronskian
from .hilbert import (
    apply_A,
    element,
    h_norm,
    inner_product,
    random_domain_element,
    resolve,
    resolvent_residuals,
    sample,
)
from .ivp import integrate
from .problem import ValidatedProblem

__all__ = [
    "CheckResult",
    "wronskian_constancy",
    "jump_relation_residual",
    "rho_relation_residual",
    "characteristic_discrepancy",
    "symmetry_residual",
    "run_checks",
    "pick_regular_lambda",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


def pick_regular_lambda(problem: ValidatedProblem, lam: float = 2.0) -> float:
    """``lam`` itself, or the first of a few nearby values that is not an eigenvalue."""
    from .hilbert import LambdaContext

    for k in range(20):
        cand = lam + 0.137 * k
        try:
            LambdaContext(problem, cand)
            return cand
        except LambdaIsEigenvalue:
            continue
    raise LambdaIsEigenvalue("no regular lambda found near the requested value")


def wronskian_constancy(problem: ValidatedProblem, lam: float, n: int = 50) -> float:
    """Largest relative spread of ``W(phi, chi; x)`` over ``n`` points of each piece."""
    ph, ch = phi(problem, lam), chi(problem, lam)
    worst = 0.0
    for i, (lo, hi) in enumerate(problem.pieces):
        xs = np.linspace(lo, hi, n + 2)[1:-1]
        p, c = ph.sample(xs, i), ch.sample(xs, i)
        w = p.u * c.up - p.up * c.u
        scale = np.max(np.abs(p.u * c.up) + np.abs(p.up * c.u))
        worst = max(worst, float(np.ptp(w) / scale))
    return worst


def jump_relation_residual(problem: ValidatedProblem, lam: float, rng: np.random.Generator,
                           pairs: int = 5) -> float:
    """``W(+) = D W(-)`` at both interfaces for random pairs of threaded solutions."""
    worst = 0.0
    for _ in range(pairs):
        f = forward_solution(problem, lam, tuple(rng.normal(size=2)), 1e-12)
        g = forward_solution(problem, lam, tuple(rng.normal(size=2)), 1e-12)
        for x0, d in ((problem.x_minus, problem.d1), (problem.x_plus, problem.d2)):
            fm, gm = f(x0, "-"), g(x0, "-")
            w_minus = wronskian(f, g, x0, "-")
            w_plus = wronskian(f, g, x0, "+")
            scale = d * (abs(fm.u * gm.up) + abs(fm.up * gm.u))
            worst = max(worst, abs(w_plus - d * w_minus) / scale)
    return float(worst)


def rho_relation_residual(problem: ValidatedProblem, lam: float, rng: np.random.Generator,
                          pairs: int = 5) -> float:
    """``R(f)R'(g) - R'(f)R(g) = rho W(f, g; b)`` for random solutions on the last piece."""
    rb = problem.right_bc
    q3 = problem.potential[2]
    worst = 0.0
    for _ in range(pairs):
        f = integrate(q3, lam, problem.x_plus, problem.b, tuple(rng.normal(size=2)), 1e-12).end
        g = integrate(q3, lam, problem.x_plus, problem.b, tuple(rng.normal(size=2)), 1e-12).end
        lhs = rb.r(*f) * rb.r_prime(*g) - rb.r_prime(*f) * rb.r(*g)
        rhs = rb.rho * (f.u * g.up - f.up * g.u)
        scale = abs(rb.r(*f) * rb.r_prime(*g)) + abs(rb.r_prime(*f) * rb.r(*g))
        worst = max(worst, abs(lhs - rhs) / scale)
    return float(worst)


def characteristic_discrepancy(problem: ValidatedProblem, lams) -> float:
    """Worst mismatch among the piecewise Wronskians (after the jump factors) and ``omega``."""
    return float(max(characteristic(problem, float(lam), 1e-12).discrepancy(problem.d1, problem.d2)
                     for lam in np.atleast_1d(lams)))


def symmetry_residual(problem: ValidatedProblem, rng: np.random.Generator, pairs: int = 50,
                      n: int = 801) -> float:
    """Worst ``|<AF, G> - <F, AG>|`` relative to ``|AF||G| + |F||AG|`` over random pairs."""
    worst = 0.0
    for _ in range(pairs):
        fp = random_domain_element(problem, rng)
        gp = random_domain_element(problem, rng)
        F, G = element(problem, fp, n), element(problem, gp, n)
        AF, AG = apply_A(problem, fp, n=n), apply_A(problem, gp, n=n)
        lhs = inner_product(AF, G, problem) - inner_product(F, AG, problem)
        scale = (h_norm(AF, problem) * h_norm(G, problem) + h_norm(F, problem) * h_norm(AG, problem))
        worst = max(worst, abs(lhs) / scale)
    return float(worst)


def run_checks(problem: ValidatedProblem, skip_oracle: bool = False, lambda_max: float | None = None,
               seed: int = 20240521) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    lam = pick_regular_lambda(problem)
    out = [
        CheckResult("wronskian_constancy", wronskian_constancy(problem, lam), 1e-9),
        CheckResult("jump_relations", jump_relation_residual(problem, lam, rng), 1e-9),
        CheckResult("rho_relation", rho_relation_residual(problem, lam, rng), 1e-9),
        CheckResult("characteristic_identity",
                    characteristic_discrepancy(problem, rng.uniform(-5.0, 200.0, 8)), 1e-9),
        CheckResult("symmetry", symmetry_residual(problem, rng, pairs=10), 1e-7),
    ]
    F = sample(problem, np.sin, 0.3)
    U = resolve(problem, lam, F, 0.3)
    out.append(CheckResult("resolvent_residual", max(resolvent_residuals(problem, lam, U, F).values()), 1e-6))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClusterWarning)
        pairs = find_eigenvalues(problem, lambda_max)
    worst = max((max(eigenfunction_residuals(p, problem).values()) for p in pairs[:10]), default=0.0)
    out.append(CheckResult("eigenpair_residuals", worst, 1e-7))
    if not skip_oracle:
        from .fd_oracle import richardson_eigenvalues

        count = min(5, len(pairs))
        ref = richardson_eigenvalues(problem, 1000, count)
        mine = np.array([p.lambda_n for p in pairs[:count]])
        rel = np.abs(mine - ref) / (1e-3 * np.abs(ref) + 1e-6)
        out.append(CheckResult("oracle_agreement", float(np.max(rel)) if count else math.nan, 1.0))
    return out
