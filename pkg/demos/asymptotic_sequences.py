"""High eigenvalues split into three sequences, one per subinterval length.

Each computed eigenvalue is matched to its nearest predicted s_n; the residual
s - s_pred shrinks like 1/n, so n * (s - s_pred) stays bounded.
"""

import math
import warnings
from pathlib import Path

import numpy as np

from movingsl import classify_case, find_eigenvalues, match_to_sequences, predictions_up_to, validate
from movingsl.asymptotics import SEQUENCES
from movingsl.config import load_config
from movingsl.errors import ClusterWarning

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    warnings.simplefilter("ignore", ClusterWarning)
    for k in range(1, 5):
        problem = validate(load_config(CONFIGS / f"case{k}.toml").spec)
        case = classify_case(problem)
        pairs = find_eigenvalues(problem, 3000.0, scan_step=2.0, eigenfunctions=False)
        preds = predictions_up_to(problem, math.sqrt(3500.0), case)
        matched = match_to_sequences(pairs, preds, window=0.5 * math.pi / max(problem.lengths))
        print(f"\ncase {case.case_id}: {len(pairs)} eigenvalues below 3000")
        for seq in SEQUENCES:
            members = [p for p in matched if p.sequence_tag == seq]
            nr = np.array([p.sequence_n * p.s_err for p in members if p.sequence_n >= 5])
            print(f"  {seq:13s} {len(members):3d} members, n*(s - s_pred) in [{nr.min():+.3f}, {nr.max():+.3f}]")


if __name__ == "__main__":
    main()
