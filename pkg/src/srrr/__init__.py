"""Sparse reduced rank regression by alternating Procrustes and majorized proximal updates."""

__version__ = "0.1.0"

from .baseline import SubGradConfig, fit_subgrad, subgrad_B
from .errors import (
    DegenerateIterateError,
    InvalidArgumentError,
    InvalidStateError,
    NumericalFailureError,
    RankDeficientError,
    SrrrError,
    UnsupportedPenaltyError,
)
from .evalsim import GenSpec, GroundTruth, generate, monte_carlo, principal_angles, subspace_angle
from .model import Dataset, FitResult, SrrrConfig, loss, objective, regularizer
from .penalty import Penalty, kappa, rho, rho_prime
from .solver import build_majorization, fit, prox_rows, update_A

__all__ = [
    "Dataset", "SrrrConfig", "FitResult", "Penalty", "GenSpec", "GroundTruth", "SubGradConfig",
    "fit", "fit_subgrad", "update_A", "build_majorization", "prox_rows", "subgrad_B",
    "loss", "regularizer", "objective", "rho", "rho_prime", "kappa",
    "generate", "subspace_angle", "principal_angles", "monte_carlo",
    "SrrrError", "InvalidArgumentError", "UnsupportedPenaltyError", "InvalidStateError",
    "NumericalFailureError", "RankDeficientError", "DegenerateIterateError",
]
