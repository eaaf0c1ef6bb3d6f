"""TOML run configuration: problem coefficients, solver knobs and output settings.

Example::

    [problem]
    a = 0.0
    b = 3.141592653589793
    epsilon = 0.7853981633974483
    beta = [1.0, 0.0]
    alpha_primed = [1.0, 0.0]
    alpha = [0.0, 1.0]
    mu = [[2.0, 0.0], [0.0, 1.0]]
    eta = [[1.0, 0.0], [0.0, 3.0]]

    [problem.potential]
    type = "zero"            # or "constant" (value = c or [c1, c2, c3]),
                             # or "piecewise_poly" (coeffs = [[...], [...], [...]])

    [solver]
    lambda_max = 60.0

    [output]
    format = "csv"
    precision = 10
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ValidationError
from .problem import LeftBC, PiecewisePotential, ProblemSpec, RightBC, TransmissionMatrix

__all__ = ["ConfigError", "SolverSettings", "OutputSettings", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValidationError):
    condition = "config"


@dataclass(frozen=True)
class SolverSettings:
    lambda_max: float | None = None
    scan_step: float | None = None
    refine_tol: float = 1e-12
    grid_points: int = 801
    lam: float | None = None
    lambda_lo: float = 0.0
    lambda_hi: float = 4.0
    n_points: int = 5
    eps_list: tuple[float, ...] = ()
    grid_n: int = 9
    oracle_m: int = 500
    oracle_count: int = 8
    f: str = "one"
    f1: float = 0.0


@dataclass(frozen=True)
class OutputSettings:
    format: str = "csv"
    path: str | None = None
    precision: int = 10


@dataclass(frozen=True)
class RunConfig:
    spec: ProblemSpec
    solver: SolverSettings = field(default_factory=SolverSettings)
    output: OutputSettings = field(default_factory=OutputSettings)


def _pair(block: dict, key: str) -> tuple[float, float]:
    try:
        v = block[key]
        x, y = (float(t) for t in v)
    except KeyError:
        raise ConfigError(f"problem.{key} is required") from None
    except (TypeError, ValueError):
        raise ConfigError(f"problem.{key} must be a list of two numbers") from None
    return x, y


def _matrix(block: dict, key: str) -> TransmissionMatrix:
    if key not in block:
        return TransmissionMatrix.identity()
    try:
        return TransmissionMatrix.from_rows(block[key])
    except (TypeError, ValueError):
        raise ConfigError(f"problem.{key} must be a 2x2 list of numbers") from None


def _potential(desc: Any) -> PiecewisePotential:
    if desc is None:
        return PiecewisePotential.zero()
    if isinstance(desc, str):
        desc = {"type": desc}
    kind = desc.get("type", "zero")
    try:
        if kind == "zero":
            return PiecewisePotential.zero()
        if kind == "constant":
            value = desc["value"]
            if not isinstance(value, (int, float)) and len(value) != 3:
                raise ConfigError("potential.value must be a number or three numbers")
            return PiecewisePotential.constant(value)
        if kind == "piecewise_poly":
            return PiecewisePotential.piecewise_poly(desc["coeffs"])
    except KeyError as exc:
        raise ConfigError(f"potential of type {kind!r} needs key {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad potential descriptor: {exc}") from None
    raise ConfigError(f"unknown potential type {kind!r} (zero, constant, piecewise_poly)")


def parse_config(data: dict) -> RunConfig:
    if "problem" not in data:
        raise ConfigError("missing [problem] section")
    pb = data["problem"]
    try:
        a, b, eps = float(pb["a"]), float(pb["b"]), float(pb["epsilon"])
    except KeyError as exc:
        raise ConfigError(f"problem.{exc.args[0]} is required") from None
    except (TypeError, ValueError):
        raise ConfigError("problem.a, problem.b and problem.epsilon must be numbers") from None
    spec = ProblemSpec(
        a, b, eps,
        LeftBC(*_pair(pb, "beta")),
        RightBC(*_pair(pb, "alpha_primed"), *_pair(pb, "alpha")),
        _matrix(pb, "mu"),
        _matrix(pb, "eta"),
        _potential(pb.get("potential")),
    )
    sv = dict(data.get("solver", {}))
    if "lambda" in sv:
        sv["lam"] = sv.pop("lambda")
    if "eps_list" in sv:
        sv["eps_list"] = tuple(float(e) for e in sv["eps_list"])
    try:
        solver = SolverSettings(**sv)
    except TypeError as exc:
        raise ConfigError(f"unknown [solver] key: {exc}") from None
    try:
        output = OutputSettings(**data.get("output", {}))
    except TypeError as exc:
        raise ConfigError(f"unknown [output] key: {exc}") from None
    if output.format not in ("csv", "jsonl"):
        raise ConfigError(f"output.format must be csv or jsonl, got {output.format!r}")
    return RunConfig(spec, solver, output)


def load_config(path: str | Path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)
