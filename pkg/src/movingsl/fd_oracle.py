"""Finite-difference discretization of the operator as a matrix pencil.

This is an independent cross-check of the shooting solver: it shares no
numerical code with it.  Each piece carries ``m + 1`` uniform nodes
(one-sided values at both interfaces) and one extra unknown holds the
boundary scalar ``f1``.  Rows at piece ends are constraints (boundary,
transmission and ``f1 = R'(f)``) with zero weight in ``N``; interior rows
discretize ``-f'' + q f = lam f``; the scalar row realizes ``-R(f) = lam f1``.
Everything is second order.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import EigensolverFailure, GridTooCoarse, SingularSystem
from .hilbert import HVector
from .problem import ValidatedProblem, coefficient_depth, potential_min

log = logging.getLogger(__name__)

__all__ = [
    "PencilSystem",
    "build_pencil",
    "oracle_spectrum",
    "oracle_eigenvalues",
    "oracle_resolve",
    "richardson",
    "richardson_eigenvalues",
    "richardson_resolve",
]

MIN_POINTS = 16
DENSE_LIMIT = 700
INFINITE = 1e12


@dataclass(frozen=True)
class PencilSystem:
    """``M v = lam N v`` with ``v = (u on piece 1, piece 2, piece 3, f1)``."""

    M: sp.csr_matrix
    N: sp.csr_matrix
    m: int
    grids: tuple[np.ndarray, np.ndarray, np.ndarray]
    problem: ValidatedProblem

    @property
    def size(self) -> int:
        return self.M.shape[0]

    @property
    def h(self) -> tuple[float, float, float]:
        return tuple(g[1] - g[0] for g in self.grids)

    @property
    def slot(self) -> int:
        return 3 * (self.m + 1)

    def index(self, piece: int, j: int) -> int:
        return piece * (self.m + 1) + j


def _left_d1(row: dict, base: int, h: float, scale: float = 1.0):
    # u'(x0) ~ (-3 u0 + 4 u1 - u2) / 2h
    for k, c in enumerate((-3.0, 4.0, -1.0)):
        row[base + k] = row.get(base + k, 0.0) + scale * c / (2 * h)


def _right_d1(row: dict, last: int, h: float, scale: float = 1.0):
    # u'(xm) ~ (3 um - 4 um-1 + um-2) / 2h
    for k, c in enumerate((3.0, -4.0, 1.0)):
        row[last - k] = row.get(last - k, 0.0) + scale * c / (2 * h)


def build_pencil(problem: ValidatedProblem, m: int) -> PencilSystem:
    """Assemble the sparse pencil with ``m`` subintervals per piece (size ``3m + 4``)."""
    if m < MIN_POINTS:
        raise GridTooCoarse(f"need at least {MIN_POINTS} subintervals per piece, got {m}")
    p = problem
    grids = tuple(np.linspace(lo, hi, m + 1) for lo, hi in p.pieces)
    n = 3 * (m + 1) + 1
    slot = n - 1
    rows, cols, vals = [], [], []
    ndiag = np.zeros(n)

    def put(r: int, entries: dict):
        for c, v in entries.items():
            rows.append(r)
            cols.append(c)
            vals.append(v)

    idx = lambda i, j: i * (m + 1) + j  # noqa: E731
    for i in range(3):
        x, h = grids[i], grids[i][1] - grids[i][0]
        q = np.broadcast_to(np.asarray(p.potential[i](x[1:-1]), dtype=float), (m - 1,))
        j = np.arange(1, m)
        r = idx(i, j)
        rows.extend(np.repeat(r, 3))
        cols.extend(np.column_stack([r - 1, r, r + 1]).ravel())
        vals.extend(np.column_stack([np.full(m - 1, -1 / h**2), 2 / h**2 + q,
                                     np.full(m - 1, -1 / h**2)]).ravel())
        ndiag[r] = 1.0
    h1, h2, h3 = (g[1] - g[0] for g in grids)
    lb, rb = p.left_bc, p.right_bc

    row = {idx(0, 0): lb.beta1}
    _left_d1(row, idx(0, 0), h1, lb.beta2)
    put(idx(0, 0), row)

    for t, (il, hl), (ir, hr) in ((p.t_left, (0, h1), (1, h2)), (p.t_right, (1, h2), (2, h3))):
        last, first = idx(il, m), idx(ir, 0)
        # value: u(+) - (t11 u(-) + t12 u'(-)) = 0
        row = {first: 1.0, last: -t.m11}
        _right_d1(row, last, hl, -t.m12)
        put(last, row)
        # derivative: u'(+) - (t21 u(-) + t22 u'(-)) = 0
        row = {last: -t.m21}
        _left_d1(row, first, hr)
        _right_d1(row, last, hl, -t.m22)
        put(first, row)

    b = idx(2, m)
    row = {slot: 1.0, b: -rb.alpha1p}
    _right_d1(row, b, h3, rb.alpha2p)
    put(b, row)
    # scalar row: -R(f) = -(alpha1 f(b) - alpha2 f'(b))
    row = {b: -rb.alpha1}
    _right_d1(row, b, h3, rb.alpha2)
    put(slot, row)
    ndiag[slot] = 1.0

    M = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    M.sum_duplicates()
    N = sp.diags(ndiag, format="csr")
    return PencilSystem(M, N, m, grids, problem)


def _sigma_below(pencil: PencilSystem) -> float:
    k = coefficient_depth(pencil.problem)
    return potential_min(pencil.problem) - 4.0 * k * k - 10.0


def oracle_spectrum(pencil: PencilSystem, count: int) -> np.ndarray:
    """Lowest ``count`` finite generalized eigenvalues (complex, sorted by real part)."""
    if pencil.size <= DENSE_LIMIT:
        try:
            w = scipy.linalg.eigvals(pencil.M.toarray(), pencil.N.toarray())
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigensolverFailure(str(exc)) from exc
        w = w[np.isfinite(w) & (np.abs(w) < INFINITE)]
        w = w[np.argsort(w.real, kind="stable")]
        if w.size < count:
            raise EigensolverFailure(f"only {w.size} finite eigenvalues")
        return w[:count]
    sigma = _sigma_below(pencil)
    for _ in range(8):
        try:
            lu = spla.splu((pencil.M - sigma * pencil.N).tocsc())
        except RuntimeError as exc:
            sigma -= 1.0
            log.debug("shift %g singular (%s); moving", sigma, exc)
            continue
        op = spla.LinearOperator(pencil.M.shape, matvec=lambda v: lu.solve(pencil.N @ v),
                                 dtype=complex if np.iscomplexobj(lu.L.data) else float)
        k = min(count + 6, pencil.size - 2)
        try:
            nu = spla.eigs(op, k=k, which="LM", tol=1e-13, maxiter=20 * pencil.size,
                           v0=np.ones(pencil.size), return_eigenvectors=False)
        except spla.ArpackError as exc:
            raise EigensolverFailure(str(exc)) from exc
        nu = nu[np.abs(nu) > 1 / INFINITE]
        w = sigma + 1.0 / nu
        w = w[np.argsort(w.real, kind="stable")]
        if np.all(w.real > sigma):
            return w[:count]
        sigma = float(w.real.min()) - 10.0 * (1.0 + abs(w.real.min()))
    raise EigensolverFailure("could not place the shift below the spectrum")


def oracle_eigenvalues(pencil: PencilSystem, count: int) -> np.ndarray:
    """Lowest ``count`` eigenvalues as reals; a non-negligible imaginary part is an error."""
    w = oracle_spectrum(pencil, count)
    bad = np.abs(w.imag) > 1e-8 * np.maximum(1.0, np.abs(w.real))
    if np.any(bad):
        raise EigensolverFailure(f"complex eigenvalues in the pencil spectrum: {w[bad]}")
    return w.real.copy()


def richardson(coarse, fine):
    """Second-order extrapolation from grids with ``h`` and ``h/2``."""
    return (4.0 * np.asarray(fine) - np.asarray(coarse)) / 3.0


def richardson_eigenvalues(problem: ValidatedProblem, m: int, count: int) -> np.ndarray:
    e1 = oracle_eigenvalues(build_pencil(problem, m), count)
    e2 = oracle_eigenvalues(build_pencil(problem, 2 * m), count)
    return richardson(e1, e2)


# smallest/largest LU pivot below this marks a numerically singular shift
_PIVOT_RATIO = 1e-14


def oracle_resolve(pencil: PencilSystem, lam: float, f, f1: float) -> HVector:
    """Solve ``(lam N - M) v = N (f, f1)``; ``f`` is a callable or per-piece node values."""
    if callable(f):
        fv = [np.broadcast_to(np.asarray(f(g), dtype=float), g.shape) for g in pencil.grids]
    else:
        fv = [np.asarray(v, dtype=float) for v in f]
    rhs = np.concatenate([*fv, [f1]])
    rhs = pencil.N @ rhs
    A = (lam * pencil.N - pencil.M).tocsc()
    try:
        lu = spla.splu(A)
        v = lu.solve(rhs)
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    piv = np.abs(lu.U.diagonal())
    if piv.min() <= _PIVOT_RATIO * piv.max():
        raise SingularSystem(f"pivot ratio {piv.min() / piv.max():.1e}; lam is (numerically) an eigenvalue of the pencil")
    if not np.all(np.isfinite(v)):
        raise SingularSystem("non-finite solution; lam is (numerically) an eigenvalue of the pencil")
    m1 = pencil.m + 1
    vals = tuple(v[i * m1:(i + 1) * m1] for i in range(3))
    return HVector(pencil.grids, vals, float(v[-1]))


def richardson_resolve(problem: ValidatedProblem, m: int, lam: float, f, f1: float) -> HVector:
    """Extrapolated resolvent on the coarse grid (fine grid sampled at every other node)."""
    u1 = oracle_resolve(build_pencil(problem, m), lam, f, f1)
    u2 = oracle_resolve(build_pencil(problem, 2 * m), lam, f, f1)
    vals = tuple(richardson(a, b[::2]) for a, b in zip(u1.values, u2.values))
    return HVector(u1.grids, vals, float(richardson(u1.scalar, u2.scalar)))
