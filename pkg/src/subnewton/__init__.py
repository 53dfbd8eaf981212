"""Subsampled inexact Newton methods for finite-sum convex minimization."""

from .cg import CgOutcome, cg_solve, cg_solve_semidefinite
from .errors import ConfigError, LineSearchFailure, NumericalFailure
from .forcing import AdaptiveForcing, FixedForcing, ForcingState, model_value, next_eta
from .linesearch import LineSearchResult, NuSchedule, backtrack, nu_k
from .problem import (
    Dataset,
    FiniteSumProblem,
    QuadraticSpec,
    make_logistic,
    make_quadratic,
    make_semidefinite_quadratic,
    subsampled_gradient,
    subsampled_hessvec,
    subsampled_value,
    testing_error,
)
from .sampling import (
    HessianSampleRule,
    NkSchedule,
    adaptive_dk,
    bernstein_size,
    chernoff_size,
    draw_subsample,
    gamma_k,
    nk_schedule,
)
from .solver import IterationRecord, SolveReport, SolverConfig, fev_cost, reference_minimizer, solve

__version__ = "0.1.0"

__all__ = [
    "AdaptiveForcing",
    "CgOutcome",
    "ConfigError",
    "Dataset",
    "FiniteSumProblem",
    "FixedForcing",
    "ForcingState",
    "HessianSampleRule",
    "IterationRecord",
    "LineSearchFailure",
    "LineSearchResult",
    "NkSchedule",
    "NuSchedule",
    "NumericalFailure",
    "QuadraticSpec",
    "SolveReport",
    "SolverConfig",
    "adaptive_dk",
    "backtrack",
    "bernstein_size",
    "cg_solve",
    "cg_solve_semidefinite",
    "chernoff_size",
    "draw_subsample",
    "fev_cost",
    "gamma_k",
    "make_logistic",
    "make_quadratic",
    "make_semidefinite_quadratic",
    "model_value",
    "next_eta",
    "nk_schedule",
    "nu_k",
    "reference_minimizer",
    "solve",
    "subsampled_gradient",
    "subsampled_hessvec",
    "subsampled_value",
    "testing_error",
]
