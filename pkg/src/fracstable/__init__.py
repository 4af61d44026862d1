"""Fractional-in-time stable-in-space diffusion: kernels, solver, validation."""

from .analysis import (
    DecayFit,
    ProfileError,
    ThresholdScan,
    approx_identity_trace,
    critical_threshold_scan,
    fit_decay,
    kernel_decay_fit,
    lipschitz_trace,
    profile_error,
    slope_solution,
    slope_weak,
    slope_y,
    slope_z,
)
from .errors import FracstableError
from .grids import Grid, analyze, synthesize
from .kernels import (
    KernelField,
    KernelProfile,
    ModelParams,
    check_scaling,
    g_alpha,
    g_field,
    lp_norm,
    suggest_extent,
    weak_lp_quasinorm,
    y_field,
    y_from_z_check,
    z_field,
)
from .mittag_leffler import MLEvaluator, get_evaluator, ml
from .solver import (
    GateReport,
    SolutionTrajectory,
    extend_solution,
    linear_evolution,
    mass_balance,
    picard_solve,
    positivity_check,
    small_data_solve,
    validate_params,
)
from .stochastic import (
    MCEnsemble,
    empirical_vs_z,
    sample_inverse_subordinator,
    sample_process,
    sample_stable,
)
from .subordination import stable_subordinator_density, y_subordination, z_subordination
from .symbol import SpectralMeasure, Symbol, build_measure

__all__ = [
    "DecayFit",
    "FracstableError",
    "GateReport",
    "Grid",
    "KernelField",
    "KernelProfile",
    "MCEnsemble",
    "MLEvaluator",
    "ModelParams",
    "ProfileError",
    "SolutionTrajectory",
    "SpectralMeasure",
    "Symbol",
    "ThresholdScan",
    "analyze",
    "approx_identity_trace",
    "build_measure",
    "check_scaling",
    "critical_threshold_scan",
    "empirical_vs_z",
    "extend_solution",
    "fit_decay",
    "g_alpha",
    "g_field",
    "get_evaluator",
    "kernel_decay_fit",
    "linear_evolution",
    "lipschitz_trace",
    "slope_solution",
    "slope_weak",
    "slope_y",
    "slope_z",
    "lp_norm",
    "mass_balance",
    "ml",
    "picard_solve",
    "positivity_check",
    "profile_error",
    "sample_inverse_subordinator",
    "sample_process",
    "sample_stable",
    "small_data_solve",
    "stable_subordinator_density",
    "synthesize",
    "validate_params",
    "suggest_extent",
    "weak_lp_quasinorm",
    "y_field",
    "y_from_z_check",
    "y_subordination",
    "z_field",
    "z_subordination",
]

__version__ = "0.1.0"
