"""Problem definition: coefficients and geometry, plus the admissibility checks.

The boundary-value problem lives on ``[a, b]`` with two interior interfaces at
``theta - eps`` and ``theta + eps`` (``theta`` the midpoint).  Everything the
solvers need is collected in an immutable :class:`ValidatedProblem`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateLeftBC,
    DeterminantNotPositive,
    EpsilonOutOfRange,
    PotentialNonFinite,
    RhoNotPositive,
)

__all__ = [
    "TransmissionMatrix",
    "LeftBC",
    "RightBC",
    "PiecewisePotential",
    "ProblemSpec",
    "ValidatedProblem",
    "validate",
    "discontinuity_points",
    "potential_min",
    "coefficient_depth",
]


@dataclass(frozen=True)
class TransmissionMatrix:
    """Maps the left one-sided state ``(u, u')`` to the right one."""

    m11: float
    m12: float
    m21: float
    m22: float

    @classmethod
    def identity(cls) -> "TransmissionMatrix":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "TransmissionMatrix":
        (m11, m12), (m21, m22) = rows
        return cls(float(m11), float(m12), float(m21), float(m22))

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def apply(self, u, up):
        return self.m11 * u + self.m12 * up, self.m21 * u + self.m22 * up

    def apply_inverse(self, u, up):
        # exact inverse; keeps the forward map an identity on round trips
        d = self.det
        return (self.m22 * u - self.m12 * up) / d, (-self.m21 * u + self.m11 * up) / d


@dataclass(frozen=True)
class LeftBC:
    """``beta1 u(a) + beta2 u'(a) = 0``."""

    beta1: float
    beta2: float


@dataclass(frozen=True)
class RightBC:
    """``lam (alpha1p u(b) - alpha2p u'(b)) + (alpha1 u(b) - alpha2 u'(b)) = 0``."""

    alpha1p: float
    alpha2p: float
    alpha1: float
    alpha2: float

    @property
    def rho(self) -> float:
        return self.alpha1p * self.alpha2 - self.alpha2p * self.alpha1

    def r(self, u, up):
        return self.alpha1 * u - self.alpha2 * up

    def r_prime(self, u, up):
        return self.alpha1p * u - self.alpha2p * up


def _const(c: float) -> Callable:
    c = float(c)

    def q(x):
        return c if np.ndim(x) == 0 else np.full(np.shape(x), c)

    q.constant = c  # type: ignore[attr-defined]
    return q


def _poly(coeffs: Sequence[float]) -> Callable:
    # coefficients in increasing powers of x
    c = tuple(float(v) for v in coeffs)
    if len(c) <= 1:
        return _const(c[0] if c else 0.0)
    p = np.polynomial.Polynomial(c)

    def q(x):
        return p(x)

    return q


@dataclass(frozen=True)
class PiecewisePotential:
    """Three independent continuous pieces of ``q`` on ``I1, I2, I3``.

    Each piece is a vectorized callable of ``x`` and is evaluated on its own
    closed subinterval, so the one-sided interface limits are exact.
    """

    pieces: tuple[Callable, Callable, Callable]
    label: str = field(default="custom", compare=False)

    @classmethod
    def zero(cls) -> "PiecewisePotential":
        return cls.constant(0.0)

    @classmethod
    def constant(cls, c: float | Sequence[float]) -> "PiecewisePotential":
        cs = [float(c)] * 3 if np.ndim(c) == 0 else [float(v) for v in c]
        return cls(tuple(_const(v) for v in cs), label=f"constant {cs}")

    @classmethod
    def piecewise_poly(cls, coeffs: Sequence[Sequence[float]]) -> "PiecewisePotential":
        """Polynomials in ``x`` (increasing powers), one coefficient list per piece."""
        if len(coeffs) != 3:
            raise ValueError("piecewise_poly needs exactly three coefficient lists")
        return cls(tuple(_poly(c) for c in coeffs), label=f"piecewise_poly {list(map(list, coeffs))}")

    def shifted(self, c: float) -> "PiecewisePotential":
        def wrap(f):
            if hasattr(f, "constant"):
                return _const(f.constant + c)
            return lambda x: f(x) + c

        return PiecewisePotential(tuple(wrap(f) for f in self.pieces), label=f"{self.label} + {c}")

    def is_zero(self) -> bool:
        return all(getattr(f, "constant", None) == 0.0 for f in self.pieces)

    def __getitem__(self, i: int) -> Callable:
        return self.pieces[i]


@dataclass(frozen=True)
class ProblemSpec:
    a: float
    b: float
    epsilon: float
    left_bc: LeftBC
    right_bc: RightBC
    t_left: TransmissionMatrix = TransmissionMatrix.identity()
    t_right: TransmissionMatrix = TransmissionMatrix.identity()
    potential: PiecewisePotential = field(default_factory=PiecewisePotential.zero)

    def with_epsilon(self, epsilon: float) -> "ProblemSpec":
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class ValidatedProblem:
    """A :class:`ProblemSpec` that passed :func:`validate`, plus derived geometry."""

    spec: ProblemSpec
    theta: float
    x_minus: float
    x_plus: float
    d1: float
    d2: float
    rho: float

    # pass-through accessors keep the solver code short
    @property
    def a(self) -> float:
        return self.spec.a

    @property
    def b(self) -> float:
        return self.spec.b

    @property
    def epsilon(self) -> float:
        return self.spec.epsilon

    @property
    def left_bc(self) -> LeftBC:
        return self.spec.left_bc

    @property
    def right_bc(self) -> RightBC:
        return self.spec.right_bc

    @property
    def t_left(self) -> TransmissionMatrix:
        return self.spec.t_left

    @property
    def t_right(self) -> TransmissionMatrix:
        return self.spec.t_right

    @property
    def potential(self) -> PiecewisePotential:
        return self.spec.potential

    @property
    def breakpoints(self) -> tuple[float, float, float, float]:
        return (self.a, self.x_minus, self.x_plus, self.b)

    @property
    def pieces(self) -> tuple[tuple[float, float], ...]:
        bp = self.breakpoints
        return ((bp[0], bp[1]), (bp[1], bp[2]), (bp[2], bp[3]))

    @property
    def lengths(self) -> tuple[float, float, float]:
        return (self.x_minus - self.a, self.x_plus - self.x_minus, self.b - self.x_plus)

    @property
    def weights(self) -> tuple[float, float, float]:
        """Per-piece weights of the H inner product: 1, 1/D1, 1/(D1 D2)."""
        return (1.0, 1.0 / self.d1, 1.0 / (self.d1 * self.d2))

    def piece_of(self, x: float) -> int:
        """Index of the piece containing ``x`` (interfaces belong to the left piece)."""
        if x <= self.x_minus:
            return 0
        if x <= self.x_plus:
            return 1
        return 2

    def with_epsilon(self, epsilon: float) -> "ValidatedProblem":
        return validate(self.spec.with_epsilon(epsilon))


def _check_potential(spec: ProblemSpec, x_minus: float, x_plus: float) -> None:
    bounds = ((spec.a, x_minus), (x_minus, x_plus), (x_plus, spec.b))
    for i, ((lo, hi), q) in enumerate(zip(bounds, spec.potential.pieces)):
        xs = np.linspace(lo, hi, 17)
        try:
            vals = np.asarray(q(xs), dtype=float)
        except Exception as exc:  # noqa: BLE001 - any failure means unusable potential
            raise PotentialNonFinite(f"piece {i + 1} could not be evaluated: {exc}") from exc
        if vals.shape != xs.shape:
            vals = np.array([float(q(x)) for x in xs])
        if not np.all(np.isfinite(vals)):
            raise PotentialNonFinite(f"piece {i + 1} is not finite on [{lo}, {hi}]")


def validate(spec: ProblemSpec | ValidatedProblem) -> ValidatedProblem:
    """Check the admissibility conditions and derive the interface geometry."""
    if isinstance(spec, ValidatedProblem):
        spec = spec.spec
    values = [spec.a, spec.b, spec.epsilon, *vars(spec.left_bc).values(), *vars(spec.right_bc).values(),
              *vars(spec.t_left).values(), *vars(spec.t_right).values()]
    if not all(math.isfinite(v) for v in values):
        raise ValueError("all coefficients must be finite reals")
    if not spec.a < spec.b:
        raise EpsilonOutOfRange(f"need a < b, got a={spec.a}, b={spec.b}")
    if not 0.0 < spec.epsilon < (spec.b - spec.a) / 2:
        raise EpsilonOutOfRange(f"eps={spec.epsilon} outside (0, {(spec.b - spec.a) / 2})")
    if spec.left_bc.beta1 == 0.0 and spec.left_bc.beta2 == 0.0:
        raise DegenerateLeftBC("|beta1| + |beta2| must be nonzero")
    rho = spec.right_bc.rho
    if not rho > 0.0:
        raise RhoNotPositive(f"rho must be > 0, got {rho}")
    d1, d2 = spec.t_left.det, spec.t_right.det
    if not d1 > 0.0:
        raise DeterminantNotPositive(f"D1 = det(mu) must be > 0, got {d1}")
    if not d2 > 0.0:
        raise DeterminantNotPositive(f"D2 = det(eta) must be > 0, got {d2}")
    theta = (spec.a + spec.b) / 2
    x_minus, x_plus = theta - spec.epsilon, theta + spec.epsilon
    _check_potential(spec, x_minus, x_plus)
    return ValidatedProblem(spec, theta, x_minus, x_plus, d1, d2, rho)


def discontinuity_points(problem: ValidatedProblem) -> tuple[float, float]:
    return problem.x_minus, problem.x_plus


def potential_min(problem: ValidatedProblem, n: int = 33) -> float:
    """Smallest sampled value of ``q`` over the three pieces."""
    return min(float(np.min(np.broadcast_to(problem.potential[i](np.linspace(lo, hi, n)), (n,))))
               for i, (lo, hi) in enumerate(problem.pieces))


def coefficient_depth(problem: ValidatedProblem) -> float:
    """Largest ratio between two coefficients of one condition.

    For ``lam = -k**2`` the solutions behave like ``exp(k x)``, and a zero of
    the characteristic function needs a balance between two coefficients of a
    condition, which puts ``k`` near such a ratio.  Below ``-(4 k**2)`` there
    is therefore nothing left to find.
    """
    lb, rb = problem.left_bc, problem.right_bc
    pairs = [(lb.beta1, lb.beta2), (rb.alpha1p, rb.alpha2p), (rb.alpha1, rb.alpha2)]
    for t in (problem.t_left, problem.t_right):
        pairs += [(t.m21, t.m11), (t.m21, t.m22), (t.m11, t.m12), (t.m22, t.m12)]
    ratios = [abs(u / v) for u, v in pairs if v != 0]
    return max(ratios, default=0.0)
