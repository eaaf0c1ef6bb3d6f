"""Shooting solver against an independent finite-difference matrix pencil.

The pencil discretizes the operator directly (including the scalar component
that carries lambda in the right condition), so agreement checks both codes.
"""

import warnings
from pathlib import Path

import numpy as np

from movingsl import find_eigenvalues, validate
from movingsl.config import load_config
from movingsl.errors import ClusterWarning
from movingsl.fd_oracle import build_pencil, oracle_eigenvalues, richardson

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    warnings.simplefilter("ignore", ClusterWarning)
    problem = validate(load_config(CONFIGS / "case2.toml").spec)
    coarse = oracle_eigenvalues(build_pencil(problem, 500), 8)
    fine = oracle_eigenvalues(build_pencil(problem, 1000), 8)
    extrap = richardson(coarse, fine)
    solver = np.array([p.lambda_n for p in find_eigenvalues(problem, extrap[-1] + 5.0, eigenfunctions=False)[:8]])
    print(" n       solver        FD m=500     FD m=1000    Richardson    rel diff")
    for n in range(8):
        rel = abs(solver[n] - extrap[n]) / max(1.0, abs(extrap[n]))
        print(f"{n:2d}  {solver[n]:12.7f}  {coarse[n]:12.7f}  {fine[n]:12.7f}  {extrap[n]:12.7f}  {rel:.1e}")


if __name__ == "__main__":
    main()
