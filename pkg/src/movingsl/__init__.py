"""Sturm-Liouville problems with two symmetric moving interfaces and a spectral boundary condition."""

from .asymptotics import (
    AsymptoticCase,
    AsymptoticPrediction,
    classify_case,
    match_to_sequences,
    predict_s,
    predictions_up_to,
)
from .eigen import Eigenpair, find_eigenvalues, sweep_epsilon
from .errors import MovingSLError, NumericalError, ValidationError
from .fundamental import characteristic, chi, omega, phi
from .hilbert import HVector, apply_A, green, inner_product, resolve
from .problem import (
    LeftBC,
    PiecewisePotential,
    ProblemSpec,
    RightBC,
    TransmissionMatrix,
    ValidatedProblem,
    validate,
)

__all__ = [
    "AsymptoticCase", "AsymptoticPrediction", "classify_case", "match_to_sequences", "predict_s",
    "predictions_up_to", "Eigenpair", "find_eigenvalues", "sweep_epsilon", "MovingSLError",
    "NumericalError", "ValidationError", "characteristic", "chi", "omega", "phi", "HVector",
    "apply_A", "green", "inner_product", "resolve", "LeftBC", "PiecewisePotential", "ProblemSpec",
    "RightBC", "TransmissionMatrix", "ValidatedProblem", "validate",
]
