"""Diagonal jumps at both interfaces, and how the spectrum moves with eps.

The interfaces sit at theta - eps and theta + eps.  Sliding eps moves every
eigenvalue continuously; with identity transmissions nothing moves at all.
"""

import warnings
from pathlib import Path

import numpy as np

from movingsl import sweep_epsilon, validate
from movingsl.config import load_config
from movingsl.errors import ClusterWarning

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
EPS = (0.2, 0.4, 0.6, 0.785, 1.0)


def show(name):
    problem = validate(load_config(CONFIGS / f"{name}.toml").spec)
    table = sweep_epsilon(problem, EPS, 40.0)
    print(f"\n{name}: D1 = {problem.d1:g}, D2 = {problem.d2:g}")
    print("  eps    " + "  ".join(f"lam_{n}".rjust(9) for n in range(table.lambdas.shape[1])))
    for e, row in zip(table.eps, table.lambdas):
        print(f"  {e:5.3f}  " + "  ".join(f"{v:9.5f}" for v in row))
    spread = np.ptp(table.lambdas, axis=0)
    print("  largest movement over the grid:", f"{spread.max():.3e}")


def main():
    warnings.simplefilter("ignore", ClusterWarning)
    show("p0")
    show("p_cont")


if __name__ == "__main__":
    main()
