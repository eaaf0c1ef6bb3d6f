"""Command-line front end.

Every subcommand reads a TOML config (see :mod:`movingsl.config`) and writes a
table as CSV or JSON lines.  Columns per subcommand:

  eigs     n, lambda_n, s_n, omega_residual, sequence_tag, s_pred, s_err
  charfn   lambda, omega, omega1, omega2, omega3, omega2_over_d1, omega3_over_d1d2
  sweep    epsilon, n, lambda_n, error
  asym     case, sequence, n, s_pred, lambda_pred
  green    x, y, G
  resolve  piece, x, u        (last row: piece=scalar, u=R'(u))
  verify   check, value, tol, status
  oracle   n, lambda_oracle, lambda_solver, rel_diff

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure (including
a failed ``verify`` check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from typing import Iterable, Sequence

import numpy as np

from .asymptotics import SEQUENCES, asymptotic_omega, classify_case, match_to_sequences, predict_s, predictions_up_to
from .config import RunConfig, load_config
from .eigen import find_eigenvalues, sweep_epsilon
from .errors import DegenerateLeadingCoefficient, MovingSLError, ValidationError
from .fundamental import characteristic
from .hilbert import LambdaContext, green_matrix, resolve
from .problem import ValidatedProblem, validate
from .verify import run_checks

log = logging.getLogger(__name__)

COLUMNS = {
    "eigs": ["n", "lambda_n", "s_n", "omega_residual", "sequence_tag", "s_pred", "s_err"],
    "charfn": ["lambda", "omega", "omega1", "omega2", "omega3", "omega2_over_d1", "omega3_over_d1d2"],
    "sweep": ["epsilon", "n", "lambda_n", "error"],
    "asym": ["case", "sequence", "n", "s_pred", "lambda_pred"],
    "green": ["x", "y", "G"],
    "resolve": ["piece", "x", "u"],
    "verify": ["check", "value", "tol", "status"],
    "oracle": ["n", "lambda_oracle", "lambda_solver", "rel_diff"],
}

RHS = {
    "zero": lambda x: np.zeros_like(x),
    "one": lambda x: np.ones_like(x),
    "x": lambda x: np.asarray(x, dtype=float),
    "sin": np.sin,
    "cos": np.cos,
}


class VerifyFailed(MovingSLError):
    pass


def _fmt(v, precision: int):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else f"{float(v):.{precision}g}"
    return str(v)


def _json_value(v, precision: int):
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(f"{float(v):.{precision}g}")
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_table(columns: Sequence[str], rows: Iterable[Sequence], fmt: str, precision: int, out) -> None:
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(v, precision) for v in r])
    else:
        for r in rows:
            out.write(json.dumps({c: _json_value(v, precision) for c, v in zip(columns, r)}) + "\n")


def _s_text(pair, precision: int):
    # a plain number when real; negative eigenvalues give an imaginary root written as "<v>i"
    if pair.lambda_n >= 0:
        return float(pair.s_n.real)
    return _fmt(pair.s_n.imag, precision) + "i"


def cmd_eigs(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    sv = cfg.solver
    pairs = find_eigenvalues(problem, sv.lambda_max, sv.scan_step, sv.refine_tol,
                             eigenfunctions=False, polish=True)
    try:
        case = classify_case(problem)
        asymptotic_omega(problem, case, 1.0)  # raises when the sequences carry no information
        s_max = max((p.s_real for p in pairs), default=0.0) + math.pi / min(problem.lengths)
        preds = predictions_up_to(problem, s_max, case)
        pairs = match_to_sequences(pairs, preds, window=0.5 * math.pi / max(problem.lengths))
    except DegenerateLeadingCoefficient:
        pass
    prec = cfg.output.precision
    return [[p.index, p.lambda_n, _s_text(p, prec), p.omega_residual, p.sequence_tag, p.s_pred, p.s_err]
            for p in pairs]


def cmd_charfn(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    sv = cfg.solver
    rows = []
    for lam in np.linspace(sv.lambda_lo, sv.lambda_hi, sv.n_points):
        cv = characteristic(problem, float(lam))
        rows.append([float(lam), cv.omega, cv.omega1, cv.omega2, cv.omega3,
                     cv.omega2 / problem.d1, cv.omega3 / (problem.d1 * problem.d2)])
    return rows


def cmd_sweep(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    sv = cfg.solver
    eps = sv.eps_list or tuple(np.linspace(0.2, 0.8, 5) * (problem.b - problem.a) / 2)
    lam_max = sv.lambda_max if sv.lambda_max is not None else 60.0
    table = sweep_epsilon(problem, eps, lam_max, scan_step=sv.scan_step, refine_tol=sv.refine_tol)
    rows = []
    for i, e in enumerate(table.eps):
        if table.errors[i] is not None or table.lambdas.shape[1] == 0:
            rows.append([float(e), None, None, table.errors[i]])
            continue
        for n in range(table.lambdas.shape[1]):
            rows.append([float(e), n, float(table.lambdas[i, n]), None])
    return rows


def cmd_asym(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    case = classify_case(problem)
    return [[case.case_id, seq, n, (p := predict_s(problem, case, seq, n)).s_pred, p.lambda_pred]
            for seq in SEQUENCES for n in range(1, args.n_max + 1)]


def _interior_grid(problem: ValidatedProblem, n: int) -> np.ndarray:
    h = (problem.b - problem.a) / n
    xs = problem.a + h * (np.arange(n) + 0.5)
    # nudge any node that lands on an interface
    for x0 in (problem.x_minus, problem.x_plus):
        xs = np.where(np.isclose(xs, x0, rtol=0, atol=1e-12), xs + 0.25 * h, xs)
    return xs


def _lam(cfg: RunConfig, args) -> float:
    lam = args.lam if args.lam is not None else cfg.solver.lam
    if lam is None:
        raise ValidationError("lambda is required (set solver.lambda or pass --lambda)")
    return float(lam)


def cmd_green(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    lam = _lam(cfg, args)
    xs = _interior_grid(problem, cfg.solver.grid_n)
    G = green_matrix(LambdaContext(problem, lam), xs)
    return [[float(x), float(y), float(G[i, j])] for i, x in enumerate(xs) for j, y in enumerate(xs)]


def cmd_resolve(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    lam = _lam(cfg, args)
    if cfg.solver.f not in RHS:
        raise ValidationError(f"solver.f must be one of {sorted(RHS)}")
    U = resolve(problem, lam, RHS[cfg.solver.f], cfg.solver.f1, n=cfg.solver.grid_points)
    rows = [[i + 1, float(x), float(u)] for i, (g, v) in enumerate(zip(U.grids, U.values)) for x, u in zip(g, v)]
    rows.append(["scalar", None, float(U.scalar)])
    return rows


def cmd_verify(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    results = run_checks(problem, skip_oracle="oracle" in (args.skip or []), lambda_max=cfg.solver.lambda_max)
    rows = [[r.name, r.value, r.tol, "pass" if r.passed else "FAIL"] for r in results]
    args._failed = [r.name for r in results if not r.passed]
    return rows


def cmd_oracle(cfg: RunConfig, problem: ValidatedProblem, args) -> list[list]:
    from .fd_oracle import richardson_eigenvalues

    count, m = cfg.solver.oracle_count, cfg.solver.oracle_m
    ref = richardson_eigenvalues(problem, m, count)
    pairs = find_eigenvalues(problem, float(ref[-1]) + 1.0 + 1e-3 * abs(ref[-1]), cfg.solver.scan_step,
                             cfg.solver.refine_tol, eigenfunctions=False, polish=True)
    rows = []
    for n, r in enumerate(ref):
        lam = pairs[n].lambda_n if n < len(pairs) else float("nan")
        rows.append([n, float(r), lam, abs(lam - r) / max(1.0, abs(r))])
    return rows


COMMANDS = {
    "eigs": (cmd_eigs, "eigenvalues with asymptotic sequence tags"),
    "charfn": (cmd_charfn, "characteristic function and Wronskians on a lambda grid"),
    "sweep": (cmd_sweep, "eigenvalue trajectories over a list of eps"),
    "asym": (cmd_asym, "predicted asymptotic s_n for the three sequences"),
    "green": (cmd_green, "Green's function on a grid of interior points"),
    "resolve": (cmd_resolve, "resolvent applied to a named right-hand side"),
    "verify": (cmd_verify, "pass/fail report of the invariant checks"),
    "oracle": (cmd_oracle, "finite-difference pencil eigenvalues against the solver"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="movingsl", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=f"{help_text}. Columns: {', '.join(COLUMNS[name])}")
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--format", choices=("csv", "jsonl"), help="override output.format")
        p.add_argument("--out", help="write the table here instead of stdout")
        p.add_argument("--lambda-max", type=float, help="override solver.lambda_max")
        p.add_argument("--precision", type=int, help="significant digits (default output.precision)")
        if name == "sweep":
            p.add_argument("--eps-list", type=float, nargs="+", help="eps values to sweep")
        if name in ("green", "resolve"):
            p.add_argument("--lambda", dest="lam", type=float, help="spectral parameter")
        if name == "asym":
            p.add_argument("--n-max", type=int, default=10, help="largest index per sequence")
        if name == "verify":
            p.add_argument("--skip", nargs="*", choices=("oracle",), default=[], help="checks to skip")
    return parser


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    from dataclasses import replace

    solver, output = cfg.solver, cfg.output
    if args.lambda_max is not None:
        solver = replace(solver, lambda_max=args.lambda_max)
    if getattr(args, "eps_list", None):
        solver = replace(solver, eps_list=tuple(args.eps_list))
    if args.format:
        output = replace(output, format=args.format)
    if args.out:
        output = replace(output, path=args.out)
    if args.precision is not None:
        output = replace(output, precision=args.precision)
    return replace(cfg, solver=solver, output=output)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        problem = validate(cfg.spec)
        func = COMMANDS[args.command][0]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            rows = func(cfg, problem, args)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MovingSLError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    buf = io.StringIO()
    write_table(COLUMNS[args.command], rows, cfg.output.format, cfg.output.precision, buf)
    if cfg.output.path:
        with open(cfg.output.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if getattr(args, "_failed", None):
        print(f"error: failed checks: {', '.join(args._failed)}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
