import math
import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from movingsl.config import load_config
from movingsl.errors import ClusterWarning
from movingsl.problem import validate

# fixed example sequence so runs are reproducible
settings.register_profile("fixed", derandomize=True)
settings.load_profile("fixed")

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

# root of cos(s pi) - s sin(s pi) = 0 (brentq, xtol 1e-15) frozen
P_CONT_LAMBDA0 = 0.14703283096679207


def load_problem(name: str):
    return validate(load_config(CONFIGS / f"{name}.toml").spec)


@pytest.fixture(scope="session")
def p_cont():
    return load_problem("p_cont")


@pytest.fixture(scope="session")
def p0():
    return load_problem("p0")


@pytest.fixture(scope="session", params=[1, 2, 3, 4], ids=lambda i: f"case{i}")
def case_problem(request):
    return load_problem(f"case{request.param}")


@pytest.fixture(autouse=True)
def _quiet_clusters():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClusterWarning)
        yield


def p_cont_omega(lam):
    """Closed form ``cos(s pi) - s sin(s pi)`` with ``s = sqrt(lam)`` (entire in ``lam``)."""
    s = np.sqrt(np.asarray(lam, dtype=complex))
    return np.cos(s * math.pi) - s * np.sin(s * math.pi)


def p_cont_eigenvalues(count: int) -> np.ndarray:
    """Roots of the closed form: one per interval ``s in (k, k + 1/2)``."""
    f = lambda s: math.cos(s * math.pi) - s * math.sin(s * math.pi)  # noqa: E731
    return np.array([brentq(f, k + 1e-12, k + 0.5, xtol=1e-15) ** 2 for k in range(count)])


def single_interval_eigenvalues(problem, count: int, lam_lo: float, step: float = 0.05) -> np.ndarray:
    """Plain shooting on ``[a, b]`` with no interfaces; ``q`` is taken from the first piece."""
    q = problem.potential[0]
    lb, rb = problem.left_bc, problem.right_bc

    def mismatch(lam):
        sol = solve_ivp(lambda x, y: [y[1], (q(x) - lam) * y[0]], (problem.a, problem.b),
                        [lb.beta2, -lb.beta1], method="DOP853", rtol=1e-13, atol=1e-15)
        u, up = sol.y[:, -1]
        return (lam * rb.alpha1p + rb.alpha1) * u - (lam * rb.alpha2p + rb.alpha2) * up

    roots, lam = [], lam_lo
    # root spacing in lam grows like 2 sqrt(lam), so the step can grow with it
    f_prev = mismatch(lam)
    while len(roots) < count:
        h = step * (1.0 + math.sqrt(max(lam, 0.0)))
        f_next = mismatch(lam + h)
        if np.sign(f_next) != np.sign(f_prev):
            roots.append(brentq(mismatch, lam, lam + h, xtol=1e-14, rtol=1e-15))
        lam, f_prev = lam + h, f_next
    return np.array(roots)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
