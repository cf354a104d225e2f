"""Covariant transmission of a Cartesian frame with N spins using equivalent irreps."""

__version__ = "0.1.0"

from .protocol import (
    EstimationResult,
    LikelihoodModel,
    ReferenceState,
    average_character,
    average_error,
    monte_carlo_error,
    sample_estimate,
)
from .representation import cg_coefficient, clebsch_series, max_useful_reps, multiplicity, orbit_dimension
from .spectral import (
    OptimalProtocol,
    TridiagonalSymmetric,
    asymptotic_error,
    build_M,
    build_T,
    leading_eigenpair,
    optimal_protocol,
    sigma_closed_form,
)
from .su2 import GroupElement, HalfInt, character, haar_integrate, haar_sample, transmission_error, wigner_D

__all__ = [
    "EstimationResult",
    "GroupElement",
    "HalfInt",
    "LikelihoodModel",
    "OptimalProtocol",
    "ReferenceState",
    "TridiagonalSymmetric",
    "asymptotic_error",
    "average_character",
    "average_error",
    "build_M",
    "build_T",
    "cg_coefficient",
    "character",
    "clebsch_series",
    "haar_integrate",
    "haar_sample",
    "leading_eigenpair",
    "max_useful_reps",
    "monte_carlo_error",
    "multiplicity",
    "optimal_protocol",
    "orbit_dimension",
    "sample_estimate",
    "sigma_closed_form",
    "transmission_error",
    "wigner_D",
]
