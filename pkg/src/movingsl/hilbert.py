"""The space ``H = L2(a, b) + C``, the operator ``A`` and its resolvent.

Functions are carried as samples on three uniform per-piece grids that
include both endpoints, so interface values are one-sided by construction.
All piecewise integrals use composite Simpson on each piece separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicSpline

from .errors import LambdaIsEigenvalue, NotInDomain, PointOnInterface
from .fundamental import PiecewiseSolution, chi, omega, phi
from .ivp import StateVector
from .problem import RightBC, ValidatedProblem

__all__ = [
    "HVector",
    "GreenEvaluation",
    "piece_grids",
    "sample",
    "from_solution",
    "r_functionals",
    "inner_product",
    "h_norm",
    "apply_A",
    "element",
    "green_matrix",
    "random_domain_element",
    "LambdaContext",
    "green",
    "resolve",
    "resolvent_residuals",
]

DEFAULT_POINTS = 801

# one-sided 4th-order first derivative at the last node
_BACK5 = np.array([3.0, -16.0, 36.0, -48.0, 25.0]) / 12.0


@dataclass(frozen=True)
class HVector:
    """An element ``(f, f1)`` of ``H`` sampled piecewise.

    ``derivs`` optionally holds ``f'`` on the same grids; when present it is
    used for the boundary functionals instead of finite differences.
    """

    grids: tuple[np.ndarray, np.ndarray, np.ndarray]
    values: tuple[np.ndarray, np.ndarray, np.ndarray]
    scalar: complex | float = 0.0
    derivs: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def __post_init__(self):
        for g, v in zip(self.grids, self.values):
            if g.shape != v.shape or g.size < 5 or np.any(np.diff(g) <= 0):
                raise ValueError("each piece needs >= 5 strictly increasing grid points")
            if not np.all(np.isfinite(v)):
                raise ValueError("HVector samples must be finite")

    def __add__(self, other: "HVector") -> "HVector":
        d = None
        if self.derivs is not None and other.derivs is not None:
            d = tuple(x + y for x, y in zip(self.derivs, other.derivs))
        return HVector(self.grids, tuple(x + y for x, y in zip(self.values, other.values)),
                       self.scalar + other.scalar, d)

    def __mul__(self, c) -> "HVector":
        d = None if self.derivs is None else tuple(c * x for x in self.derivs)
        return HVector(self.grids, tuple(c * v for v in self.values), c * self.scalar, d)

    __rmul__ = __mul__

    def __sub__(self, other: "HVector") -> "HVector":
        return self + (-1.0) * other

    @property
    def end_state(self) -> StateVector:
        """``(f(b), f'(b))``; the derivative falls back to a 5-point one-sided stencil."""
        g, v = self.grids[2], self.values[2]
        if self.derivs is not None:
            return StateVector(v[-1], self.derivs[2][-1])
        h = g[-1] - g[-2]
        return StateVector(v[-1], float(_BACK5 @ v[-5:]) / h if not np.iscomplexobj(v) else (_BACK5 @ v[-5:]) / h)

    def sup_norm(self) -> float:
        return max(float(np.max(np.abs(v))) for v in self.values)


@dataclass(frozen=True)
class GreenEvaluation:
    x: float
    y: float
    value: complex | float
    lam: complex | float


def piece_grids(problem: ValidatedProblem, n: int = DEFAULT_POINTS) -> tuple[np.ndarray, ...]:
    return tuple(np.linspace(lo, hi, n) for lo, hi in problem.pieces)


def _as_pieces(f) -> tuple[Callable, Callable, Callable]:
    if callable(f):
        return (f, f, f)
    if len(f) != 3:
        raise ValueError("expected one callable or three per-piece callables")
    return tuple(f)


def sample(problem: ValidatedProblem, f, f1=0.0, n: int = DEFAULT_POINTS) -> HVector:
    """Sample ``f`` (one callable, or one per piece) on the standard grids."""
    grids = piece_grids(problem, n)
    vals = []
    for g, fi in zip(grids, _as_pieces(f)):
        v = np.asarray(fi(g))
        vals.append(np.broadcast_to(v, g.shape).astype(v.dtype if np.iscomplexobj(v) else float))
    return HVector(grids, tuple(vals), f1)


def from_solution(sol: PiecewiseSolution, n: int = DEFAULT_POINTS) -> HVector:
    """Sample a piecewise ODE solution as ``(u, R'(u))``."""
    grids = piece_grids(sol.problem, n)
    states = [sol.sample(g, i) for i, g in enumerate(grids)]
    u_b, up_b = states[2].u[-1], states[2].up[-1]
    return HVector(grids, tuple(s.u for s in states), sol.problem.right_bc.r_prime(u_b, up_b),
                   tuple(s.up for s in states))


def r_functionals(end, right_bc: RightBC):
    """``(R(f), R'(f))`` from an end state ``(f(b), f'(b))`` or an :class:`HVector`."""
    if isinstance(end, HVector):
        end = end.end_state
    u, up = end
    return right_bc.r(u, up), right_bc.r_prime(u, up)


def _common(F: HVector, G: HVector):
    if all(f.shape == g.shape and np.array_equal(f, g) for f, g in zip(F.grids, G.grids)):
        return F.grids, F.values, G.values
    grids, fv, gv = [], [], []
    for gf, gg, vf, vg in zip(F.grids, G.grids, F.values, G.values):
        if not (np.isclose(gf[0], gg[0]) and np.isclose(gf[-1], gg[-1])):
            raise ValueError("HVectors live on different pieces")
        n = 2 * max(gf.size, gg.size) - 1
        g = np.linspace(gf[0], gf[-1], n)
        grids.append(g)
        fv.append(CubicSpline(gf, vf)(g))
        gv.append(CubicSpline(gg, vg)(g))
    return grids, fv, gv


def inner_product(F: HVector, G: HVector, problem: ValidatedProblem):
    """Weighted inner product of ``H``: weights 1, 1/D1, 1/(D1 D2) and 1/(rho D1 D2)."""
    grids, fv, gv = _common(F, G)
    total = 0.0
    for w, g, f, gg in zip(problem.weights, grids, fv, gv):
        total = total + w * simpson(f * np.conj(gg), x=g)
    total = total + F.scalar * np.conj(G.scalar) / (problem.rho * problem.d1 * problem.d2)
    if not (np.iscomplexobj(total) and np.imag(total) != 0):
        total = float(np.real(total))
    return total


def h_norm(F: HVector, problem: ValidatedProblem) -> float:
    return float(np.sqrt(abs(inner_product(F, F, problem))))


def _domain_residuals(problem: ValidatedProblem, pieces) -> dict[str, float]:
    a, xm, xp = problem.a, problem.x_minus, problem.x_plus
    f1, f2, f3 = pieces
    lb = problem.left_bc
    res = {"B_a": lb.beta1 * f1(a, 0) + lb.beta2 * f1(a, 1)}
    u, up = problem.t_left.apply(f1(xm, 0), f1(xm, 1))
    res["T-eps"], res["T'-eps"] = f2(xm, 0) - u, f2(xm, 1) - up
    u, up = problem.t_right.apply(f2(xp, 0), f2(xp, 1))
    res["T+eps"], res["T'+eps"] = f3(xp, 0) - u, f3(xp, 1) - up
    return {k: float(abs(v)) for k, v in res.items()}


def apply_A(problem: ValidatedProblem, pieces: Sequence[Callable], f1=None,
            n: int = DEFAULT_POINTS, tol: float = 1e-8) -> HVector:
    """Apply ``A(f, R'(f)) = (-f'' + q f, -R(f))``.

    ``pieces`` are three callables ``f(x, k)`` returning the ``k``-th
    derivative (``k`` in 0, 1, 2) on the corresponding piece.  The element
    must satisfy the left boundary condition and all four transmission
    conditions; if ``f1`` is given it must equal ``R'(f)``.
    """
    pieces = tuple(pieces)
    scale = max(1.0, *(abs(p(x, k)) for p, (lo, hi) in zip(pieces, problem.pieces)
                       for x in (lo, hi) for k in (0, 1)))
    for name, r in _domain_residuals(problem, pieces).items():
        if r > tol * scale:
            raise NotInDomain(name, r)
    end = StateVector(pieces[2](problem.b, 0), pieces[2](problem.b, 1))
    R, Rp = r_functionals(end, problem.right_bc)
    if f1 is not None and abs(f1 - Rp) > tol * max(1.0, abs(Rp)):
        raise NotInDomain("f1 = R'(f)", abs(f1 - Rp))
    grids = piece_grids(problem, n)
    vals = tuple(-p(g, 2) + problem.potential[i](g) * p(g, 0)
                 for i, (p, g) in enumerate(zip(pieces, grids)))
    return HVector(grids, vals, -R)


def element(problem: ValidatedProblem, pieces: Sequence[Callable], n: int = DEFAULT_POINTS) -> HVector:
    """Sample ``(f, R'(f))`` for an element given by derivative-aware callables."""
    grids = piece_grids(problem, n)
    pieces = tuple(pieces)
    _, Rp = r_functionals(StateVector(pieces[2](problem.b, 0), pieces[2](problem.b, 1)), problem.right_bc)
    return HVector(grids, tuple(p(g, 0) for p, g in zip(pieces, grids)), Rp,
                   tuple(p(g, 1) for p, g in zip(pieces, grids)))


class _TrigPiece:
    """``sum_k c_k cos(k w (x - x0)) + s_k sin(k w (x - x0)) + c0 + c1 (x - x0)``."""

    def __init__(self, x0, w, cos_c, sin_c, c0=0.0, c1=0.0):
        self.x0, self.w = x0, w
        self.cos_c, self.sin_c = np.asarray(cos_c, float), np.asarray(sin_c, float)
        self.k = np.arange(1, len(cos_c) + 1)
        self.c0, self.c1 = c0, c1

    def trig(self, x, d):
        x = np.asarray(x, dtype=float)
        arg = np.multiply.outer(x - self.x0, self.k * self.w)
        kw = (self.k * self.w) ** d
        # d-th derivative of cos/sin is a quarter-turn phase shift
        c = np.cos(arg + d * np.pi / 2)
        s = np.sin(arg + d * np.pi / 2)
        return (c * kw) @ self.cos_c + (s * kw) @ self.sin_c

    def __call__(self, x, d=0):
        t = self.trig(x, d)
        if d == 0:
            return t + self.c0 + self.c1 * (np.asarray(x, dtype=float) - self.x0)
        if d == 1:
            return t + self.c1
        return t


def random_domain_element(problem: ValidatedProblem, rng: np.random.Generator,
                          n_terms: int = 3) -> tuple[_TrigPiece, _TrigPiece, _TrigPiece]:
    """Random smooth piecewise function satisfying the left BC and all transmission conditions.

    Each piece is a short trigonometric polynomial plus an affine correction;
    the affine coefficients are solved for so that the conditions hold exactly.
    """
    pieces = []
    for i, (lo, hi) in enumerate(problem.pieces):
        w = 2 * np.pi / (hi - lo)
        pieces.append(_TrigPiece(lo, w, rng.normal(size=n_terms), rng.normal(size=n_terms)))
    p1, p2, p3 = pieces
    a = problem.a
    b1, b2 = problem.left_bc.beta1, problem.left_bc.beta2
    if b2 != 0.0:
        p1.c0 = rng.normal()
        p1.c1 = -b1 * (p1.trig(a, 0) + p1.c0) / b2 - p1.trig(a, 1)
    else:
        p1.c0 = -p1.trig(a, 0)
        p1.c1 = rng.normal()
    for left, right, t, x0 in ((p1, p2, problem.t_left, problem.x_minus),
                               (p2, p3, problem.t_right, problem.x_plus)):
        v, dv = t.apply(left(x0, 0), left(x0, 1))
        right.c0 = v - right.trig(x0, 0)
        right.c1 = dv - right.trig(x0, 1)
    return p1, p2, p3


class LambdaContext:
    """``phi``, ``chi`` and ``omega`` at one spectral parameter, built once and reused."""

    def __init__(self, problem: ValidatedProblem, lam, tol: float = 1e-12):
        self.problem = problem
        self.lam = lam
        _guard_eigenvalue(problem, lam)
        self.phi = phi(problem, lam, tol)
        self.chi = chi(problem, lam, tol)
        u_b, up_b = self.phi.at_b
        bc = problem.right_bc
        self.omega = ((lam * bc.alpha1p + bc.alpha1) * u_b - (lam * bc.alpha2p + bc.alpha2) * up_b) / (
            problem.d1 * problem.d2)


def _guard_eigenvalue(problem: ValidatedProblem, lam) -> None:
    # |lam - lam_n| < 1e-6 max(1, |lam_n|) is rejected; a sign change of
    # omega across that window betrays a root inside it
    delta = 1e-6 * max(1.0, abs(lam))
    if np.iscomplexobj(lam) and np.imag(lam) != 0:
        if omega(problem, lam) == 0:
            raise LambdaIsEigenvalue(f"lam={lam} is an eigenvalue")
        return
    lam = float(np.real(lam))
    vals = omega(problem, np.array([lam - delta, lam, lam + delta]), rtol=1e-12, atol=1e-14)
    if vals[1] == 0 or np.sign(vals[0]) != np.sign(vals[2]):
        raise LambdaIsEigenvalue(f"lam={lam} lies within {delta:.1e} of an eigenvalue")


def green(problem: ValidatedProblem, lam, x: float, y: float, tol: float = 1e-12,
          context: LambdaContext | None = None) -> GreenEvaluation:
    """``G(x, y; lam) = phi(min(x, y)) chi(max(x, y)) / omega(lam)``."""
    for z in (x, y):
        if z in (problem.x_minus, problem.x_plus):
            raise PointOnInterface(f"{z} is an interface point")
    ctx = context if context is not None else LambdaContext(problem, lam, tol)
    lo, hi = min(x, y), max(x, y)
    value = ctx.phi(lo).u * ctx.chi(hi).u / ctx.omega
    return GreenEvaluation(x, y, value, lam)


def green_matrix(ctx: LambdaContext, xs: np.ndarray) -> np.ndarray:
    """Green's function on a tensor grid of non-interface points."""
    p = ctx.problem
    xs = np.asarray(xs, dtype=float)
    if np.any(np.isin(xs, [p.x_minus, p.x_plus])):
        raise PointOnInterface("grid contains an interface point")
    ph = np.empty(xs.shape, dtype=complex if np.iscomplexobj(ctx.omega) else float)
    ch = np.empty_like(ph)
    for i, (lo, hi) in enumerate(p.pieces):
        m = (xs >= lo) & (xs <= hi) if i == 0 else (xs > lo) & (xs <= hi)
        if np.any(m):
            ph[m] = ctx.phi.sample(xs[m], i).u
            ch[m] = ctx.chi.sample(xs[m], i).u
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    lower = np.where(X <= Y, ph[:, None], ph[None, :])
    upper = np.where(X <= Y, ch[None, :], ch[:, None])
    return lower * upper / ctx.omega


def resolve(problem: ValidatedProblem, lam, f, f1=0.0, n: int = DEFAULT_POINTS,
            tol: float = 1e-12, context: LambdaContext | None = None) -> HVector:
    """Solve ``(lam I - A) U = (f, f1)`` through the Green's function.

    ``f`` is one vectorized callable, three per-piece callables, or an
    :class:`HVector` whose grids are used directly.  The result carries
    ``u``, ``u'`` on the grids and ``R'(u)`` as its scalar.
    """
    ctx = context if context is not None else LambdaContext(problem, lam, tol)
    if isinstance(f, HVector):
        grids, fvals = f.grids, f.values
    else:
        F = sample(problem, f, f1, n)
        grids, fvals = F.grids, F.values
    phis = [ctx.phi.sample(g, i) for i, g in enumerate(grids)]
    chis = [ctx.chi.sample(g, i) for i, g in enumerate(grids)]
    # left[i](x) = int_a^x w phi f ; right[i](x) = int_x^b w chi f, each split at the
    # interfaces so no Simpson panel crosses a jump
    left, right = [], []
    acc = 0.0
    for w, g, fv, ph in zip(problem.weights, grids, fvals, phis):
        c = cumulative_simpson(w * ph.u * fv, x=g, initial=0.0)
        left.append(acc + c)
        acc = acc + c[-1]
    acc = 0.0
    for w, g, fv, ch in reversed(list(zip(problem.weights, grids, fvals, chis))):
        c = cumulative_simpson(w * ch.u * fv, x=g, initial=0.0)
        right.append(acc + (c[-1] - c))
        acc = acc + c[-1]
    right.reverse()
    k = f1 / (problem.d1 * problem.d2)
    vals, ders = [], []
    for L, Rt, ph, ch in zip(left, right, phis, chis):
        vals.append((ch.u * L + ph.u * Rt + k * ph.u) / ctx.omega)
        ders.append((ch.up * L + ph.up * Rt + k * ph.up) / ctx.omega)
    _, Rp = r_functionals(StateVector(vals[2][-1], ders[2][-1]), problem.right_bc)
    return HVector(tuple(grids), tuple(vals), Rp, tuple(ders))


def _d1(v: np.ndarray, h: float) -> np.ndarray:
    """4th-order first derivative on a uniform grid (one-sided at the ends)."""
    d = np.empty_like(v)
    d[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    fwd = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    d[0] = fwd @ v[:5] / h
    d[1] = fwd @ v[1:6] / h
    d[-1] = -(fwd @ v[::-1][:5]) / h
    d[-2] = -(fwd @ v[::-1][1:6]) / h
    return d


def resolvent_residuals(problem: ValidatedProblem, lam, U: HVector, F: HVector) -> dict[str, float]:
    """Residuals of ``(lam - tau) u = f``, ``lam R'(u) + R(u) = f1`` and the domain conditions.

    The domain conditions are the left boundary condition and both transmission pairs.

    ``u''`` is obtained by differencing the ``u'`` samples on each grid.
    Interior residuals are scaled by ``max(1, |f|_inf)``.
    """
    if U.derivs is None:
        raise ValueError("U must carry derivative samples")
    scale = max(1.0, F.sup_norm())
    ode = 0.0
    for i, (g, u, up, f) in enumerate(zip(U.grids, U.values, U.derivs, F.values)):
        upp = _d1(up, g[1] - g[0])
        r = lam * u + upp - problem.potential[i](g) * u - f
        ode = max(ode, float(np.max(np.abs(r[2:-2]))))
    R, Rp = r_functionals(U.end_state, problem.right_bc)
    out = {"ode": ode / scale, "bc_b": float(abs(lam * Rp + R - F.scalar)) / max(1.0, abs(F.scalar))}
    lb = problem.left_bc
    u0, up0 = U.values[0][0], U.derivs[0][0]
    sc = max(1.0, abs(u0), abs(up0))
    out["bc_a"] = float(abs(lb.beta1 * u0 + lb.beta2 * up0)) / sc
    for name, t, i in (("-eps", problem.t_left, 0), ("+eps", problem.t_right, 1)):
        u, up = t.apply(U.values[i][-1], U.derivs[i][-1])
        v, vp = U.values[i + 1][0], U.derivs[i + 1][0]
        sc = max(1.0, abs(v), abs(vp))
        out["T" + name] = float(abs(v - u)) / sc
        out["T'" + name] = float(abs(vp - up)) / sc
    return out
