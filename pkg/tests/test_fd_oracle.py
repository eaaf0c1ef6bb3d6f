import dataclasses
import math

import numpy as np
import pytest
import scipy.linalg

from conftest import P_CONT_LAMBDA0, p_cont_eigenvalues
from movingsl.errors import EigensolverFailure, GridTooCoarse, SingularSystem
from movingsl.fd_oracle import (
    build_pencil,
    oracle_eigenvalues,
    oracle_resolve,
    oracle_spectrum,
    richardson,
    richardson_eigenvalues,
    richardson_resolve,
)
from movingsl.problem import TransmissionMatrix, ValidatedProblem


def test_pencil_shape_and_weights(p0):
    pen = build_pencil(p0, 32)
    assert pen.size == 3 * 32 + 4
    assert pen.M.shape == pen.N.shape == (pen.size, pen.size)
    diag = pen.N.diagonal()
    assert set(np.unique(diag)) <= {0.0, 1.0}
    assert (pen.N - scipy.sparse.diags(diag)).nnz == 0
    # constraint rows: left boundary, four interface rows, the node at b
    assert int(np.sum(diag == 0)) == 6
    assert diag[pen.slot] == 1.0


def test_too_coarse(p0):
    with pytest.raises(GridTooCoarse):
        build_pencil(p0, 8)


def test_free_interior_stencil(p_cont):
    pen = build_pencil(p_cont, 20)
    h = pen.h[1]
    r = pen.index(1, 5)
    row = pen.M.getrow(r).toarray().ravel()
    assert row[r - 1: r + 2] == pytest.approx(np.array([-1.0, 2.0, -1.0]) / h ** 2)
    assert np.count_nonzero(row) == 3


def test_identity_transmission_rows_are_continuity(p_cont):
    pen = build_pencil(p_cont, 20)
    last, first = pen.index(0, 20), pen.index(1, 0)
    value = pen.M.getrow(last).toarray().ravel()
    assert value[first] == 1.0 and value[last] == -1.0 and np.count_nonzero(value) == 2
    deriv = pen.M.getrow(first).toarray().ravel()
    # one-sided u'(+) minus one-sided u'(-)
    h1, h2 = pen.h[0], pen.h[1]
    assert deriv[first: first + 3] == pytest.approx(np.array([-3.0, 4.0, -1.0]) / (2 * h2))
    assert deriv[last - 2: last + 1] == pytest.approx(-np.array([1.0, -4.0, 3.0]) / (2 * h1))


def test_continuous_ground_state(p_cont):
    lam0 = oracle_eigenvalues(build_pencil(p_cont, 2000), 1)[0]
    assert lam0 == pytest.approx(P_CONT_LAMBDA0, rel=1e-4)


def test_second_order_convergence(p_cont):
    ref = p_cont_eigenvalues(4)
    e = [oracle_eigenvalues(build_pencil(p_cont, m), 4) for m in (100, 200, 400)]
    d1, d2 = np.abs(e[0] - e[1]), np.abs(e[1] - e[2])
    assert np.all((3.0 < d1 / d2) & (d1 / d2 < 5.0))
    rich = richardson(e[1], e[2])
    assert np.all(np.abs(rich - ref) < np.abs(e[2] - ref))


def _single_interval_fd(problem, n, count):
    """Plain FD on one grid over [a, b]; no interface rows at all."""
    h = (problem.b - problem.a) / n
    size = n + 2
    M = np.zeros((size, size))
    D = np.zeros(size)
    lb, rb = problem.left_bc, problem.right_bc
    M[0, 0] = lb.beta1
    M[0, :3] += lb.beta2 * np.array([-3.0, 4.0, -1.0]) / (2 * h)
    for j in range(1, n):
        M[j, j - 1: j + 2] = np.array([-1.0, 2.0, -1.0]) / h ** 2
        D[j] = 1.0
    back = np.array([1.0, -4.0, 3.0]) / (2 * h)
    M[n, size - 1] = 1.0
    M[n, n] -= rb.alpha1p
    M[n, n - 2: n + 1] += rb.alpha2p * back
    M[size - 1, n] = -rb.alpha1
    M[size - 1, n - 2: n + 1] += rb.alpha2 * back
    D[size - 1] = 1.0
    w = scipy.linalg.eigvals(M, np.diag(D))
    return np.sort(w[np.isfinite(w) & (np.abs(w) < 1e12)].real)[:count]


def test_identity_matches_single_interval_scheme(p_cont):
    # equal pieces so every piece has the same h as the single grid
    p = p_cont.with_epsilon(math.pi / 6)
    diffs = []
    for m in (100, 200):
        e = oracle_eigenvalues(build_pencil(p, m), 6)
        diffs.append(np.max(np.abs(e - _single_interval_fd(p, 3 * m, 6)) / np.abs(e)))
    # the schemes differ only in the one-sided interface stencils, an O(h^2) effect
    assert diffs[1] < 1e-5
    assert diffs[0] / diffs[1] > 3.0


def test_oracle_spectrum_is_real(case_problem):
    w = oracle_spectrum(build_pencil(case_problem, 200), 20)
    assert np.max(np.abs(w.imag)) <= 1e-8


def test_negative_determinant_canary(p_cont):
    # bypass validation: det(t_left) = -1 is inadmissible and the pencil turns non-real
    spec = dataclasses.replace(p_cont.spec, t_left=TransmissionMatrix(1.0, 0.0, 0.0, -1.0))
    bad = ValidatedProblem(spec, p_cont.theta, p_cont.x_minus, p_cont.x_plus, -1.0, 1.0, 1.0)
    with pytest.raises(EigensolverFailure, match="complex"):
        oracle_eigenvalues(build_pencil(bad, 100), 20)


def test_sparse_and_dense_paths_agree(p0):
    small = oracle_eigenvalues(build_pencil(p0, 200), 6)       # dense path
    big = oracle_eigenvalues(build_pencil(p0, 400), 6)         # shift-invert path
    assert np.allclose(small, big, rtol=1e-3)


def test_resolve_closed_form(p_cont):
    # quadratics are reproduced exactly by every stencil in the pencil
    u = oracle_resolve(build_pencil(p_cont, 64), 0.0, lambda x: np.ones_like(x), 0.0)
    err = max(np.max(np.abs(v - (g ** 2 / 2 - math.pi * g))) for g, v in zip(u.grids, u.values))
    assert err < 1e-8
    zero = oracle_resolve(build_pencil(p_cont, 64), 0.5, lambda x: np.zeros_like(x), 0.0)
    assert zero.sup_norm() == 0.0 and zero.scalar == 0.0


def test_resolve_accepts_node_values(p0):
    pen = build_pencil(p0, 64)
    by_call = oracle_resolve(pen, 2.0, np.sin, 0.3)
    by_value = oracle_resolve(pen, 2.0, [np.sin(g) for g in pen.grids], 0.3)
    assert all(np.array_equal(a, b) for a, b in zip(by_call.values, by_value.values))


def test_resolve_self_convergence(p0):
    ref = richardson_resolve(p0, 800, 2.0, np.sin, 0.3)
    errs = []
    for m in (100, 200):
        u = oracle_resolve(build_pencil(p0, m), 2.0, np.sin, 0.3)
        step = 800 // m
        errs.append(max(np.max(np.abs(a - b[::step])) for a, b in zip(u.values, ref.values)))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_singular_at_pencil_eigenvalue(p0):
    pen = build_pencil(p0, 64)
    lam = oracle_eigenvalues(pen, 1)[0]
    with pytest.raises(SingularSystem):
        oracle_resolve(pen, float(lam), np.sin, 0.0)


def test_richardson_eigenvalues_shape(p0):
    assert richardson_eigenvalues(p0, 100, 3).shape == (3,)
