"""Eigenvalues as the real zeros of the characteristic function.

The pipeline is: push a lower bound below the spectrum, scan ``omega`` on a
grid, bracket sign changes (plus hidden pairs signalled by a dip of
``|omega|``), refine all brackets together with a safeguarded Illinois
iteration, then normalize ``phi`` at each root in the ``H`` norm.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import BoundSearchExhausted, ClusterWarning, MovingSLError, ZeroOnContour
from .fundamental import PiecewiseSolution, chi, omega, omega_scaled, phi
from .hilbert import from_solution, h_norm
from .problem import ValidatedProblem, coefficient_depth, potential_min, validate

log = logging.getLogger(__name__)

__all__ = [
    "Eigenpair",
    "SweepTable",
    "find_lower_bound",
    "find_eigenvalues",
    "default_lambda_max",
    "default_scan_step",
    "eigenfunction_residuals",
    "solution_residuals",
    "proportionality_residual",
    "count_zeros_contour",
    "count_real_zeros",
    "sweep_epsilon",
]

SCAN_RTOL = 1e-8
REFINE_RTOL = 1e-11
EIGENFUNCTION_TOL = 1e-12


@dataclass(frozen=True)
class Eigenpair:
    """One eigenvalue with its ``H``-normalized eigenfunction.

    ``s_n`` is the principal square root of ``lambda_n`` (purely imaginary
    for negative eigenvalues).  ``omega_residual`` is ``|omega(lambda_n)|``
    divided by the local slope of ``omega``, i.e. the implied error in
    ``lambda`` units.
    """

    index: int
    lambda_n: float
    s_n: complex
    eigenfunction: PiecewiseSolution | None
    h_norm: float
    omega_residual: float
    sequence_tag: str | None = None
    sequence_n: int | None = None
    s_pred: float | None = None

    def tagged(self, tag: str | None) -> "Eigenpair":
        return replace(self, sequence_tag=tag, sequence_n=None, s_pred=None)

    def matched(self, tag: str, n: int, s_pred: float) -> "Eigenpair":
        return replace(self, sequence_tag=tag, sequence_n=n, s_pred=s_pred)

    @property
    def s_err(self) -> float | None:
        return None if self.s_pred is None else self.s_real - self.s_pred

    @property
    def s_real(self) -> float:
        """``s_n`` as a real number (negative-eigenvalue roots carry a minus sign)."""
        return self.s_n.real if self.lambda_n >= 0 else -self.s_n.imag


def default_scan_step(problem: ValidatedProblem) -> float:
    return (math.pi / (problem.b - problem.a)) ** 2 / 8


def default_lambda_max(problem: ValidatedProblem, count: int = 20) -> float:
    """A ``lambda`` comfortably above the first ``count`` eigenvalues.

    Counting function of the leading asymptotics: about ``s (b - a) / pi``
    eigenvalues lie below ``s**2``.
    """
    qmax = max(float(np.max(np.abs(problem.potential[i](np.linspace(lo, hi, 33)))))
               for i, (lo, hi) in enumerate(problem.pieces))
    s = (count + 4) * math.pi / (problem.b - problem.a)
    return s * s + qmax


def find_lower_bound(problem: ValidatedProblem, tol: float = SCAN_RTOL, probes: int = 32,
                     max_extensions: int = 60) -> float:
    """A ``lambda_lo`` below which ``omega`` has no zeros.

    Starting at ``min q`` the search window is doubled downward
    (``lo <- 2 lo - hi``); each new segment is probed at ``probes`` points.
    The search stops once the three most recent segments show a constant sign
    and ``log|omega|`` growing monotonically downward, and the window reaches
    below the depth where coefficient ratios could still produce a root.  The
    top of that three-segment window is returned.
    """
    hi = potential_min(problem)
    lo = hi - 1.0
    k = coefficient_depth(problem)
    depth = hi - 4.0 * k * k - 1.0
    segments = []  # (top, bottom, sign, monotone)
    top = hi
    for _ in range(max_extensions):
        lams = np.linspace(top, lo, probes)
        m, s = omega_scaled(problem, lams, rtol=tol, atol=tol * 1e-2)
        signs = np.sign(m)
        with np.errstate(divide="ignore"):
            logmag = np.log(np.abs(m)) + s
        const = bool(np.all(signs == signs[0]) and signs[0] != 0)
        mono = bool(np.all(np.diff(logmag) > 0))
        segments.append((top, lo, signs[0] if const else 0.0, mono))
        if len(segments) >= 3 and lo <= depth:
            recent = segments[-3:]
            if all(r[2] != 0 and r[2] == recent[0][2] and r[3] for r in recent):
                return float(recent[0][0])
        top, lo = lo, 2 * lo - hi
    raise BoundSearchExhausted(f"no sign-stable region found after {max_extensions} extensions")


def _refine(problem, lo, hi, flo, fhi, refine_tol, rtol=REFINE_RTOL, max_iter=200):
    """Vectorized Illinois iteration with a bisection safeguard on all brackets.

    Brackets shrink to ``refine_tol * max(1, |lam|)``.  Iterates closer than
    half that to an end are pushed inward by half the tolerance, so a
    converged end collapses the bracket instead of creeping toward it.
    """
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    flo, fhi = flo.astype(float).copy(), fhi.astype(float).copy()
    side = np.zeros(lo.shape, dtype=int)
    stall = np.zeros(lo.shape, dtype=int)
    for _ in range(max_iter):
        width = hi - lo
        scale = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
        tol = np.maximum(refine_tol * scale, 4 * np.spacing(scale))
        active = (width > tol) & (flo != 0) & (fhi != 0)
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        a, b, fa, fb, t = lo[idx], hi[idx], flo[idx], fhi[idx], 0.5 * tol[idx]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (a * fb - b * fa) / (fb - fa)
        bad = ~np.isfinite(x) | (stall[idx] >= 3)
        x = np.where(bad, 0.5 * (a + b), x)
        x = np.clip(x, a + t, b - t)
        x = np.where(b - a <= 2 * t, 0.5 * (a + b), x)
        stall[idx] = np.where(bad, 0, stall[idx])
        fx = omega(problem, x, rtol=rtol, atol=rtol * 1e-2)
        left = np.sign(fx) == np.sign(fa)
        new_w = np.where(left, b - x, x - a)
        stall[idx] = np.where(new_w > 0.5 * (b - a), stall[idx] + 1, 0)
        # Illinois: halve the stale end value when the same side is kept twice
        s_prev = side[idx]
        fb_new = np.where(left & (s_prev == 1), 0.5 * fb, fb)
        fa_new = np.where(~left & (s_prev == -1), 0.5 * fa, fa)
        lo[idx] = np.where(left, x, a)
        flo[idx] = np.where(left, fx, fa_new)
        hi[idx] = np.where(left, b, x)
        fhi[idx] = np.where(left, fb_new, fx)
        side[idx] = np.where(left, 1, -1)
    root = np.where(flo == 0, lo, np.where(fhi == 0, hi, 0.5 * (lo + hi)))
    return root, lo, hi


def _hidden_pairs(problem, grid, vals, rtol, iterations=40):
    """Search dips of ``|omega|`` without a sign change for a pair of close roots.

    Returns the split points ``lam*`` (one per dip that crosses zero).
    """
    s = np.sign(vals)
    mag = np.abs(vals)
    i = np.arange(1, len(vals) - 1)
    dip = (s[i - 1] == s[i]) & (s[i] == s[i + 1]) & (mag[i] < mag[i - 1]) & (mag[i] < mag[i + 1])
    cand = i[dip]
    if cand.size == 0:
        return np.array([])
    sgn = s[cand]
    a, b = grid[cand - 1].copy(), grid[cand + 1].copy()
    gr = (math.sqrt(5) - 1) / 2
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc = sgn * omega(problem, c, rtol=rtol, atol=rtol * 1e-2)
    fd = sgn * omega(problem, d, rtol=rtol, atol=rtol * 1e-2)
    found = np.full(cand.shape, np.nan)
    for _ in range(iterations):
        found = np.where(np.isnan(found) & (fc < 0), c, found)
        found = np.where(np.isnan(found) & (fd < 0), d, found)
        todo = np.isnan(found)
        if not np.any(todo):
            break
        keep_left = fc < fd
        b = np.where(keep_left, d, b)
        a = np.where(keep_left, a, c)
        c_new = np.where(keep_left, b - gr * (b - a), d)
        d_new = np.where(keep_left, c, a + gr * (b - a))
        probe = np.where(keep_left, c_new, d_new)
        fp = np.full(cand.shape, np.inf)
        fp[todo] = sgn[todo] * omega(problem, probe[todo], rtol=rtol, atol=rtol * 1e-2)
        fc, fd = np.where(keep_left, fp, fd), np.where(keep_left, fc, fp)
        c, d = c_new, d_new
    return found[~np.isnan(found)]


def _brackets(problem, lam_lo, lambda_max, scan_step, rtol=SCAN_RTOL):
    # anchored at lam_lo so a larger lambda_max only appends grid points
    n = max(3, int(math.ceil((lambda_max - lam_lo) / scan_step)) + 1)
    grid = lam_lo + scan_step * np.arange(n)
    vals = omega(problem, grid, rtol=rtol, atol=rtol * 1e-2)
    exact = grid[vals == 0]
    splits = _hidden_pairs(problem, grid, vals, rtol)
    if splits.size:
        grid = np.concatenate([grid, splits])
        vals = np.concatenate([vals, omega(problem, splits, rtol=rtol, atol=rtol * 1e-2)])
        order = np.argsort(grid)
        grid, vals = grid[order], vals[order]
    change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    return grid[change], grid[change + 1], vals[change], vals[change + 1], exact


def _normalized_eigenfunction(problem: ValidatedProblem, lam: float):
    sol = phi(problem, lam, EIGENFUNCTION_TOL)
    vec = from_solution(sol)
    norm = h_norm(vec, problem)
    first = next((v for piece in vec.values for v in piece if abs(v) > 1e-8 * norm), 1.0)
    c = math.copysign(1.0 / norm, first)
    return sol.scaled(c), h_norm(vec * c, problem)


def _polish(problem, root: float, refine_tol: float, rtol: float) -> float:
    """Re-solve one root with scalar evaluations from a canonical bracket.

    Batched evaluations share step sizes, so the last bits of a root depend on
    which other roots were refined alongside it.  Restarting from a bracket
    on a power-of-two lattice makes the result a function of the root alone.
    """
    quantum = 2.0 ** (math.ceil(math.log2(max(1.0, abs(root)))) - 30)
    a = (math.floor(root / quantum) - 1) * quantum
    b = a + 3 * quantum
    fa = omega(problem, a, rtol=rtol, atol=rtol * 1e-2)
    fb = omega(problem, b, rtol=rtol, atol=rtol * 1e-2)
    if not fa * fb < 0:
        return root
    r, _, _ = _refine(problem, np.array([a]), np.array([b]), np.array([fa]), np.array([fb]),
                      refine_tol, rtol)
    return float(r[0])


def find_eigenvalues(problem: ValidatedProblem, lambda_max: float | None = None,
                     scan_step: float | None = None, refine_tol: float = 1e-12,
                     lambda_lo: float | None = None, eigenfunctions: bool = True,
                     scan_rtol: float = SCAN_RTOL, refine_rtol: float = REFINE_RTOL,
                     polish: bool = False) -> list[Eigenpair]:
    """All eigenvalues in ``[lambda_lo, lambda_max]``, sorted, with normalized eigenfunctions.

    ``refine_tol`` is the final bracket width relative to ``max(1, |lam|)``
    (floored at a few ulps).  Roots closer than ``10 * scan_step`` raise a
    :class:`ClusterWarning`.  ``polish=True`` re-solves every root on its own
    so that the output is independent of ``lambda_max`` bit for bit (slower).
    """
    if lambda_max is None:
        lambda_max = default_lambda_max(problem)
    if scan_step is None:
        scan_step = default_scan_step(problem)
    lam_lo = find_lower_bound(problem) if lambda_lo is None else lambda_lo
    if not lambda_max > lam_lo:
        raise ValueError(f"lambda_max={lambda_max} must exceed the lower bound {lam_lo}")
    lo, hi, flo, fhi, exact = _brackets(problem, lam_lo, lambda_max, scan_step, scan_rtol)
    roots, _, _ = _refine(problem, lo, hi, flo, fhi, refine_tol, refine_rtol)
    roots = np.sort(np.concatenate([roots, exact]))
    roots = roots[roots <= lambda_max]
    if polish:
        roots = np.array([_polish(problem, float(r), refine_tol, refine_rtol) for r in roots])
    if roots.size > 1 and np.any(np.diff(roots) < 10 * scan_step):
        warnings.warn(f"eigenvalues closer than 10*scan_step={10 * scan_step:g}; "
                      "multiplicity cannot be resolved, treating them as simple", ClusterWarning)
    log.debug("found %d eigenvalues in [%g, %g]", roots.size, lam_lo, lambda_max)
    # implied lambda error: |omega| over the local slope
    h = 1e-7 * np.maximum(1.0, np.abs(roots))
    stencil = np.concatenate([roots, roots + h, roots - h])
    if polish:
        vals = np.array([omega(problem, float(x), rtol=refine_rtol, atol=refine_rtol * 1e-2) for x in stencil])
    else:
        vals = omega(problem, stencil, rtol=refine_rtol, atol=refine_rtol * 1e-2)
    f0, fp, fm = np.split(np.asarray(vals, dtype=float), 3)
    slope = np.abs(fp - fm) / (2 * h)
    resid = np.abs(f0) / np.where(slope > 0, slope, 1.0)
    pairs = []
    for n, lam in enumerate(roots):
        lam = float(lam)
        if eigenfunctions:
            ef, norm = _normalized_eigenfunction(problem, lam)
        else:
            ef, norm = None, float("nan")
        pairs.append(Eigenpair(n, lam, cmath.sqrt(lam), ef, norm, float(resid[n])))
    return pairs


def count_real_zeros(problem: ValidatedProblem, lambda_lo: float, lambda_max: float,
                     scan_step: float | None = None) -> int:
    """Number of real zeros of ``omega`` in ``[lambda_lo, lambda_max]`` (no refinement)."""
    lo, _, _, _, exact = _brackets(problem, lambda_lo, lambda_max,
                                   scan_step or default_scan_step(problem))
    return int(lo.size + exact.size)


def solution_residuals(problem: ValidatedProblem, lam: float, sol: PiecewiseSolution,
                       n: int = 801) -> dict[str, float]:
    """Residuals of a piecewise solution at ``lam`` for the ODE and for every side condition.

    The ODE residual uses a 5-point second difference of dense output and is
    scaled by ``max(1, |lam|) * max|u|``; the others are scaled by the size of
    the states they involve.
    """
    p = problem
    umax = 0.0
    ode = 0.0
    for i, (lo, hi) in enumerate(p.pieces):
        x = np.linspace(lo, hi, n)
        h = min((hi - lo) / (n - 1), 0.25 / math.sqrt(max(1.0, abs(lam))))
        u = sol.sample(x, i).u
        umax = max(umax, float(np.max(np.abs(u))))
        inner = x[(x - 2 * h >= lo) & (x + 2 * h <= hi)]
        if inner.size == 0:
            continue
        st = [sol.sample(inner + k * h, i).u for k in (-2, -1, 0, 1, 2)]
        upp = (-st[0] + 16 * st[1] - 30 * st[2] + 16 * st[3] - st[4]) / (12 * h * h)
        r = -upp + (p.potential[i](inner) - lam) * st[2]
        ode = max(ode, float(np.max(np.abs(r))))
    out = {"ode": ode / (max(1.0, abs(lam)) * max(umax, 1e-300))}
    u, up = sol.at_a
    lb = p.left_bc
    out["bc_a"] = abs(lb.beta1 * u + lb.beta2 * up) / ((abs(lb.beta1) + abs(lb.beta2)) * max(abs(u), abs(up), 1e-300))
    u, up = sol.at_b
    rb = p.right_bc
    res = lam * rb.r_prime(u, up) + rb.r(u, up)
    size = (abs(lam) * (abs(rb.alpha1p) + abs(rb.alpha2p)) + abs(rb.alpha1) + abs(rb.alpha2)) * max(abs(u), abs(up))
    out["bc_b"] = abs(res) / max(size, 1e-300)
    for name, t, left, right in (("-eps", p.t_left, sol.left_of_minus, sol.right_of_minus),
                                 ("+eps", p.t_right, sol.left_of_plus, sol.right_of_plus)):
        v, vp = t.apply(*left)
        sc = max(abs(v), abs(vp), abs(right.u), abs(right.up), 1e-300)
        out["T" + name] = abs(right.u - v) / sc
        out["T'" + name] = abs(right.up - vp) / sc
    return {k: float(v) for k, v in out.items()}


def eigenfunction_residuals(pair: Eigenpair, problem: ValidatedProblem) -> dict[str, float]:
    if pair.eigenfunction is None:
        raise ValueError("eigenpair was computed without its eigenfunction")
    return solution_residuals(problem, pair.lambda_n, pair.eigenfunction)


def proportionality_residual(problem: ValidatedProblem, lam: float, n: int = 201) -> float:
    """Relative least-squares residual of ``chi = k phi`` on the first piece."""
    x = np.linspace(problem.a, problem.x_minus, n)
    p = phi(problem, lam, EIGENFUNCTION_TOL).sample(x, 0)
    c = chi(problem, lam, EIGENFUNCTION_TOL).sample(x, 0)
    A = np.concatenate([p.u, p.up])
    y = np.concatenate([c.u, c.up])
    k = (A @ y) / (A @ A)
    return float(np.linalg.norm(y - k * A) / np.linalg.norm(y))


def count_zeros_contour(problem: ValidatedProblem, lambda_center: complex, half_width: float,
                        half_height: float, n_samples: int = 64, max_rounds: int = 40,
                        rtol: float = 1e-9) -> int:
    """Zeros of ``omega`` inside a rectangle, by the argument principle.

    The boundary is sampled counterclockwise at a spacing of a quarter of the
    short side, then segments are bisected until every step changes
    ``arg omega`` by less than ``pi/2``.
    """
    c = complex(lambda_center)
    corners = [c + complex(-half_width, -half_height), c + complex(half_width, -half_height),
               c + complex(half_width, half_height), c + complex(-half_width, half_height)]
    # spacing tied to the short side keeps every zero at least four steps from the
    # boundary, so no single step can alias a full turn of the argument
    spacing = min(half_width, half_height) / 4
    pts = np.concatenate([
        np.linspace(corners[k], corners[(k + 1) % 4],
                    max(n_samples // 4, math.ceil(abs(corners[(k + 1) % 4] - corners[k]) / spacing)),
                    endpoint=False)
        for k in range(4)])
    pts = np.append(pts, pts[0])

    def evaluate(z):
        m, _ = omega_scaled(problem, z.astype(complex), rtol=rtol, atol=rtol * 1e-2)
        if np.any(m == 0) or not np.all(np.isfinite(m)):
            raise ZeroOnContour("omega vanishes on the contour")
        return np.angle(m)

    order = np.argsort(np.abs(pts[:-1]))
    ang = np.empty(pts.size)
    ang[:-1][order] = evaluate(pts[:-1][order])
    ang[-1] = ang[0]
    min_len = 1e-9 * max(half_width, half_height)
    for _ in range(max_rounds):
        d = np.angle(np.exp(1j * np.diff(ang)))
        bad = np.nonzero(np.abs(d) >= math.pi / 2)[0]
        if bad.size == 0:
            return int(round(float(np.sum(d)) / (2 * math.pi)))
        if np.min(np.abs(pts[bad + 1] - pts[bad])) < min_len:
            raise ZeroOnContour("argument jumps persist at resolution limit; a zero is on or near the contour")
        mids = 0.5 * (pts[bad] + pts[bad + 1])
        mid_ang = evaluate(mids)
        pts = np.insert(pts, bad + 1, mids)
        ang = np.insert(ang, bad + 1, mid_ang)
    raise ZeroOnContour("argument resolution did not converge")


@dataclass(frozen=True)
class SweepTable:
    """Eigenvalue trajectories: ``lambdas[i, n]`` at ``eps[i]``; NaN marks a missing index."""

    eps: np.ndarray
    lambdas: np.ndarray
    errors: tuple[str | None, ...] = field(default=())

    def rows(self):
        for i, e in enumerate(self.eps):
            for n in range(self.lambdas.shape[1]):
                yield float(e), n, float(self.lambdas[i, n]), self.errors[i] if self.errors else None


def sweep_epsilon(base: ValidatedProblem, eps_values: Sequence[float], lambda_max: float,
                  **solver_kw) -> SweepTable:
    """Eigenvalues below ``lambda_max`` for each ``eps``; failures are recorded per row."""
    results, errors = [], []
    for e in eps_values:
        try:
            prob = validate(base.spec.with_epsilon(float(e)))
            pairs = find_eigenvalues(prob, lambda_max, eigenfunctions=False, **solver_kw)
            results.append([p.lambda_n for p in pairs])
            errors.append(None)
        except MovingSLError as exc:
            results.append([])
            errors.append(f"{type(exc).__name__}: {exc}")
    width = max((len(r) for r in results), default=0)
    table = np.full((len(results), width), np.nan)
    for i, r in enumerate(results):
        table[i, :len(r)] = r
    return SweepTable(np.asarray(eps_values, dtype=float), table, tuple(errors))
