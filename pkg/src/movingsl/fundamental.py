"""Left and right fundamental solutions and the characteristic function.

``phi`` starts from the left boundary condition and is pushed forward through
both transmission maps; ``chi`` starts from the eigenparameter-dependent
right condition and is pulled backward through the inverse maps.  Their
Wronskians on the three pieces are ``omega1``, ``omega2 = D1 omega1`` and
``omega3 = D1 D2 omega1``; the normalized value ``omega`` vanishes exactly at
the eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MismatchedLambda
from .ivp import DEFAULT_ATOL, DEFAULT_RTOL, SolutionPath, StateVector, integrate, integrate_many
from .problem import ValidatedProblem

__all__ = [
    "PiecewiseSolution",
    "CharacteristicValue",
    "phi",
    "chi",
    "forward_solution",
    "characteristic",
    "wronskian",
    "omega",
    "omega_scaled",
    "phi_initial",
    "chi_initial",
]

# growth budget (in e-folds) per integration chunk before the state is rescaled
_MAX_EFOLDS = 60.0


@dataclass(frozen=True)
class PiecewiseSolution:
    """A solution of the ODE on ``I1, I2, I3`` threaded through the interfaces.

    ``pieces[i]`` is the :class:`SolutionPath` on piece ``i``; for ``chi`` the
    paths run right-to-left.
    """

    problem: ValidatedProblem
    pieces: tuple[SolutionPath, SolutionPath, SolutionPath]
    tag: str
    lam: float | complex

    def _piece_state(self, i: int, x: float) -> StateVector:
        path = self.pieces[i]
        return path(x)

    @property
    def left_of_minus(self) -> StateVector:
        """State at ``x_minus -`` (end of piece 1)."""
        return self._piece_state(0, self.problem.x_minus)

    @property
    def right_of_minus(self) -> StateVector:
        return self._piece_state(1, self.problem.x_minus)

    @property
    def left_of_plus(self) -> StateVector:
        return self._piece_state(1, self.problem.x_plus)

    @property
    def right_of_plus(self) -> StateVector:
        return self._piece_state(2, self.problem.x_plus)

    @property
    def at_a(self) -> StateVector:
        return self._piece_state(0, self.problem.a)

    @property
    def at_b(self) -> StateVector:
        return self._piece_state(2, self.problem.b)

    def __call__(self, x, side: str | None = None) -> StateVector:
        """Evaluate ``(u, u')`` at scalar ``x``.

        At an interface the one-sided value must be requested with
        ``side='-'`` or ``side='+'``.
        """
        p = self.problem
        x = float(x)
        if x in (p.x_minus, p.x_plus):
            if side not in ("-", "+"):
                raise ValueError("x is an interface point; pass side='-' or side='+'")
            i = (0 if side == "-" else 1) if x == p.x_minus else (1 if side == "-" else 2)
            return self._piece_state(i, x)
        if not p.a <= x <= p.b:
            raise ValueError(f"x={x} outside [{p.a}, {p.b}]")
        return self._piece_state(p.piece_of(x), x)

    def sample(self, xs: np.ndarray, piece: int) -> StateVector:
        """Vectorized evaluation on one piece (endpoints give one-sided values)."""
        return self.pieces[piece](xs)

    def scaled(self, c: float) -> "PiecewiseSolution":
        def scale(path: SolutionPath) -> SolutionPath:
            dense = path._dense
            return SolutionPath(path.x, c * path.u, c * path.up, path.lam,
                                None if dense is None else (lambda x, d=dense: c * d(x)))

        return PiecewiseSolution(self.problem, tuple(scale(p) for p in self.pieces), self.tag, self.lam)


@dataclass(frozen=True)
class CharacteristicValue:
    omega1: complex | float
    omega2: complex | float
    omega3: complex | float
    omega: complex | float

    def discrepancy(self, d1: float, d2: float) -> float:
        """Largest pairwise relative mismatch among the normalized Wronskians."""
        vals = [self.omega1, self.omega2 / d1, self.omega3 / (d1 * d2), self.omega]
        scale = max(1.0, max(abs(v) for v in vals))
        return max(abs(u - v) for u in vals for v in vals) / scale


def phi_initial(problem: ValidatedProblem) -> tuple[float, float]:
    bc = problem.left_bc
    return bc.beta2, -bc.beta1


def chi_initial(problem: ValidatedProblem, lam):
    bc = problem.right_bc
    return bc.alpha2p * lam + bc.alpha2, bc.alpha1p * lam + bc.alpha1


def forward_solution(problem: ValidatedProblem, lam, init, tol: float = DEFAULT_RTOL,
                     tag: str = "forward") -> PiecewiseSolution:
    """Solution with state ``init`` at ``a``, carried forward through both interfaces."""
    q = problem.potential
    (a, xm), (_, xp), (_, b) = problem.pieces
    atol = tol / 100
    p1 = integrate(q[0], lam, a, xm, init, tol, atol)
    p2 = integrate(q[1], lam, xm, xp, problem.t_left.apply(*p1.end), tol, atol)
    p3 = integrate(q[2], lam, xp, b, problem.t_right.apply(*p2.end), tol, atol)
    return PiecewiseSolution(problem, (p1, p2, p3), tag, lam)


def phi(problem: ValidatedProblem, lam, tol: float = DEFAULT_RTOL) -> PiecewiseSolution:
    """Left solution: ``(beta2, -beta1)`` at ``a``, forward through ``t_left`` and ``t_right``."""
    return forward_solution(problem, lam, phi_initial(problem), tol, "phi")


def chi(problem: ValidatedProblem, lam, tol: float = DEFAULT_RTOL) -> PiecewiseSolution:
    """Right solution: built backward from ``b`` through the inverse transmission maps."""
    q = problem.potential
    (a, xm), (_, xp), (_, b) = problem.pieces
    atol = tol / 100
    p3 = integrate(q[2], lam, b, xp, chi_initial(problem, lam), tol, atol)
    p2 = integrate(q[1], lam, xp, xm, problem.t_right.apply_inverse(*p3.end), tol, atol)
    p1 = integrate(q[0], lam, xm, a, problem.t_left.apply_inverse(*p2.end), tol, atol)
    return PiecewiseSolution(problem, (p1, p2, p3), "chi", lam)


def wronskian(sol_a: PiecewiseSolution, sol_b: PiecewiseSolution, x: float,
              side: str | None = None):
    """``W(f, g; x) = f g' - f' g`` from dense output."""
    if sol_a.lam != sol_b.lam:
        raise MismatchedLambda(f"solutions built at lam={sol_a.lam} and lam={sol_b.lam}")
    f, fp = sol_a(x, side)
    g, gp = sol_b(x, side)
    return f * gp - fp * g


def _end_omega(problem: ValidatedProblem, lam, u_b, up_b):
    bc = problem.right_bc
    return ((lam * bc.alpha1p + bc.alpha1) * u_b - (lam * bc.alpha2p + bc.alpha2) * up_b) / (
        problem.d1 * problem.d2)


def characteristic(problem: ValidatedProblem, lam, tol: float = DEFAULT_RTOL) -> CharacteristicValue:
    """Wronskians at the piece midpoints and the end-evaluated ``omega``."""
    ph = phi(problem, lam, tol)
    ch = chi(problem, lam, tol)
    mids = [0.5 * (lo + hi) for lo, hi in problem.pieces]
    w1, w2, w3 = (wronskian(ph, ch, x) for x in mids)
    return CharacteristicValue(w1, w2, w3, _end_omega(problem, lam, *ph.at_b))


def _max_q(problem: ValidatedProblem, i: int) -> float:
    lo, hi = problem.pieces[i]
    vals = np.asarray(problem.potential[i](np.linspace(lo, hi, 33)), dtype=float)
    return float(np.max(vals)) if vals.ndim else float(vals)


def _advance(problem, i, lam, lo, hi, u, up, rtol, atol, logscale):
    """Integrate piece ``i`` from ``lo`` to ``hi``, rescaling when growth is large."""
    growth = np.sqrt(max(_max_q(problem, i) - float(np.min(np.real(lam))), 0.0)) * abs(hi - lo)
    n_chunks = max(1, int(np.ceil(growth / _MAX_EFOLDS)))
    edges = np.linspace(lo, hi, n_chunks + 1)
    for x0, x1 in zip(edges[:-1], edges[1:]):
        path = integrate_many(problem.potential[i], lam, x0, x1, u, up, rtol=rtol, atol=atol)
        u, up = path.end
        if n_chunks > 1:
            norm = np.maximum(np.abs(u), np.abs(up))
            norm = np.where(norm > 0, norm, 1.0)
            u, up = u / norm, up / norm
            logscale = logscale + np.log(norm)
    return u, up, logscale


def omega_scaled(problem: ValidatedProblem, lam, rtol: float = DEFAULT_RTOL,
                 atol: float = DEFAULT_ATOL):
    """``omega`` at many ``lam`` as ``(mantissa, log_scale)`` with ``omega = m * exp(s)``.

    Only ``phi`` is integrated.  The split form survives the exponential growth
    of the solutions for strongly negative ``lam``.
    """
    lam_arr = np.atleast_1d(np.asarray(lam))
    (a, xm), (_, xp), (_, b) = problem.pieces
    u0, up0 = phi_initial(problem)
    u = np.full(lam_arr.shape, u0, dtype=float)
    up = np.full(lam_arr.shape, up0, dtype=float)
    logscale = np.zeros(lam_arr.shape)
    u, up, logscale = _advance(problem, 0, lam_arr, a, xm, u, up, rtol, atol, logscale)
    u, up = problem.t_left.apply(u, up)
    u, up, logscale = _advance(problem, 1, lam_arr, xm, xp, u, up, rtol, atol, logscale)
    u, up = problem.t_right.apply(u, up)
    u, up, logscale = _advance(problem, 2, lam_arr, xp, b, u, up, rtol, atol, logscale)
    m = _end_omega(problem, lam_arr, u, up)
    if np.ndim(lam) == 0:
        return m[0], logscale[0]
    return m, logscale


def omega(problem: ValidatedProblem, lam, rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
          chunk: int = 256):
    """Characteristic function at scalar or array ``lam`` (real or complex).

    Array input is processed in magnitude-sorted chunks so that each batch
    shares a similar step size.
    """
    lam_arr = np.atleast_1d(np.asarray(lam))
    out = np.empty(lam_arr.shape, dtype=complex if np.iscomplexobj(lam_arr) else float)
    order = np.argsort(np.abs(lam_arr), kind="stable")
    for start in range(0, order.size, chunk):
        idx = order[start:start + chunk]
        m, s = omega_scaled(problem, lam_arr[idx], rtol, atol)
        with np.errstate(over="ignore"):
            out[idx] = m * np.exp(s)
    if np.ndim(lam) == 0:
        return out[0]
    return out
