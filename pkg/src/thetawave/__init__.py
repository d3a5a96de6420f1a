"""Periodic-wave solutions of coupled KdV-type bilinear equations via Riemann theta functions."""

__version__ = "0.1.0"

from .bilinear import BilinearForm, BilinearSystem, builtin_system, custom_system
from .field import (
    GridSpec,
    WaveGrid,
    bilinear_residual_oracle,
    export_grid,
    oracle_check,
    read_grid_csv,
    reconstruct,
    sample_fields,
)
from .residual import GivenParams, ResidualSystem, UnknownVector, theta_params
from .seed import SeedConfig, dispersion_seed, initial_guess
from .solver import SolveReport, SolverConfig, gauss_newton, newton_square
from .theta import (
    LatticeTruncation,
    NotPositiveDefiniteError,
    ThetaParams,
    choose_truncation,
    theta_eval,
    theta_partial,
)

__all__ = [
    "BilinearForm",
    "BilinearSystem",
    "GivenParams",
    "GridSpec",
    "LatticeTruncation",
    "NotPositiveDefiniteError",
    "ResidualSystem",
    "SeedConfig",
    "SolveReport",
    "SolverConfig",
    "ThetaParams",
    "UnknownVector",
    "WaveGrid",
    "bilinear_residual_oracle",
    "builtin_system",
    "choose_truncation",
    "custom_system",
    "dispersion_seed",
    "export_grid",
    "gauss_newton",
    "initial_guess",
    "newton_square",
    "oracle_check",
    "read_grid_csv",
    "reconstruct",
    "sample_fields",
    "theta_eval",
    "theta_params",
    "theta_partial",
]
