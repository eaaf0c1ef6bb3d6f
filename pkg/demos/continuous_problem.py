"""Continuous reference problem: no jumps, zero potential, lambda in the right condition.

Here omega(lam) = cos(s pi) - s sin(s pi) with s = sqrt(lam), so every computed
eigenvalue can be checked against a one-line root find.
"""

import math
from pathlib import Path

from scipy.optimize import brentq

from movingsl import find_eigenvalues, green, validate
from movingsl.config import load_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    problem = validate(load_config(CONFIGS / "p_cont.toml").spec)
    f = lambda s: math.cos(s * math.pi) - s * math.sin(s * math.pi)  # noqa: E731

    print(" n   lambda_n (solver)     lambda_n (closed form)")
    for pair in find_eigenvalues(problem, 60.0)[:6]:
        k = pair.index
        exact = brentq(f, k + 1e-12, k + 0.5, xtol=1e-15) ** 2
        print(f"{k:2d}   {pair.lambda_n:.15f}   {exact:.15f}")

    # at lam = 0 the kernel is -min(x, y)
    print("\nG(x, y; 0) against -min(x, y):")
    for x, y in [(0.3, 1.1), (2.0, 0.7), (2.5, 2.9)]:
        print(f"  G({x}, {y}) = {green(problem, 0.0, x, y).value:+.12f}   -min = {-min(x, y):+.12f}")


if __name__ == "__main__":
    main()
