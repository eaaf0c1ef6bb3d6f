import math

import numpy as np
import pytest

from movingsl.ivp import integrate, integrate_many


def zero(x):
    return 0.0 * np.asarray(x)


@pytest.mark.parametrize("lam", [4.0, 0.25, 100.0])
def test_free_solution_matches_sine(lam):
    s = math.sqrt(lam)
    path = integrate(zero, lam, 0.0, 2.0, (0.0, 1.0), 1e-12, 1e-14)
    assert path.end.u == pytest.approx(math.sin(2 * s) / s, rel=1e-10, abs=1e-12)
    assert path.end.up == pytest.approx(math.cos(2 * s), rel=1e-10, abs=1e-12)
    mid = path(1.3)
    assert mid.u == pytest.approx(math.sin(1.3 * s) / s, rel=1e-9, abs=1e-12)


def test_negative_lambda_gives_hyperbolic_growth():
    path = integrate(zero, -9.0, 0.0, 1.0, (1.0, 0.0), 1e-12, 1e-14)
    assert path.end.u == pytest.approx(math.cosh(3.0), rel=1e-10)


def test_backward_integration():
    path = integrate(zero, 1.0, 2.0, 0.0, (math.sin(2.0), math.cos(2.0)), 1e-12, 1e-14)
    assert path.end.u == pytest.approx(0.0, abs=1e-11)
    assert path.end.up == pytest.approx(1.0, rel=1e-10)


def test_batch_agrees_with_single_runs():
    lams = np.array([0.5, 3.0, 17.0])
    batch = integrate_many(zero, lams, 0.0, 1.5, np.ones(3), np.zeros(3), 1e-12, 1e-14)
    for k, lam in enumerate(lams):
        one = integrate(zero, lam, 0.0, 1.5, (1.0, 0.0), 1e-12, 1e-14)
        assert batch.end.u[k] == pytest.approx(one.end.u, rel=1e-9)


def test_complex_lambda():
    lam = 2.0 + 1.0j
    s = np.sqrt(lam)
    path = integrate(zero, lam, 0.0, 1.0, (1.0, 0.0), 1e-12, 1e-14)
    assert abs(path.end.u - np.cos(s)) < 1e-10


@pytest.mark.parametrize("lam, exact", [
    (1.0, lambda x: (-math.sin(x), -math.cos(x))),
    (0.0, lambda x: (-x, -1.0)),
    (-1.0, lambda x: (-math.sinh(x), -math.cosh(x))),
])
def test_closed_form_solutions(lam, exact):
    path = integrate(zero, lam, 0.0, math.pi / 2, (0.0, -1.0), 1e-12, 1e-14)
    assert tuple(path.start) == (0.0, -1.0)
    for x in (0.3, 1.1, math.pi / 2):
        assert tuple(path(x)) == pytest.approx(exact(x), rel=1e-10, abs=1e-12)


def test_linearity_and_reversibility():
    q = lambda x: np.cos(x)  # noqa: E731
    tol = 1e-10
    p1 = integrate(q, 3.0, 0.0, 2.0, (1.0, 0.0), tol)
    p2 = integrate(q, 3.0, 0.0, 2.0, (0.0, 1.0), tol)
    p3 = integrate(q, 3.0, 0.0, 2.0, (2.0, -0.5), tol)
    assert p3.end.u == pytest.approx(2 * p1.end.u - 0.5 * p2.end.u, abs=10 * tol * 10)
    back = integrate(q, 3.0, 2.0, 0.0, tuple(p3.end), tol)
    assert tuple(back.end) == pytest.approx((2.0, -0.5), abs=10 * tol * 10)
    assert np.all(np.diff(back.x) < 0)


def test_energy_conserved_for_free_equation():
    s = 3.0
    path = integrate(zero, s * s, 0.0, 2.0, (0.7, 1.3), 1e-12, 1e-14)
    energy = s * s * path.u ** 2 + path.up ** 2
    assert np.ptp(energy) < 1e-9 * energy[0]


def test_dense_output_reproduces_samples():
    path = integrate(lambda x: x, 5.0, 0.0, 1.0, (1.0, 0.0), 1e-10)
    for k in (3, len(path.x) // 2):
        assert tuple(path(path.x[k])) == pytest.approx((path.u[k], path.up[k]), rel=1e-8, abs=1e-10)


def test_solution_is_smooth_in_lambda():
    # samples on a radius-0.1 circle agree with a degree-4 interpolant from the real axis
    q = lambda x: 1.0 + 0.0 * np.asarray(x)  # noqa: E731
    centre = 2.0
    nodes = centre + 0.1 * np.cos(np.pi * np.arange(5) / 4)
    vals = [integrate(q, lam, 0.0, 1.5, (1.0, 0.0), 1e-12, 1e-14).end.u for lam in nodes]
    poly = np.polynomial.Polynomial.fit(nodes, vals, 4)
    for t in np.linspace(0, 2 * np.pi, 7):
        z = centre + 0.1 * np.exp(1j * t)
        u = integrate(q, z, 0.0, 1.5, (1.0, 0.0), 1e-12, 1e-14).end.u
        assert abs(u - poly(z)) < 1e-6
