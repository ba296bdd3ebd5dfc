"""Stabilized projection schemes for transient Stokes (P1/P1 and P2/P2)."""

from ._pstokes import (
    ConfigError,
    build_grid,
    choose_delta,
    default_config,
    normalize_config,
    rho_of,
    run_experiment,
    run_scheme,
    steady_solve,
    system_matrices,
)

__all__ = [
    "ConfigError",
    "build_grid",
    "choose_delta",
    "default_config",
    "normalize_config",
    "rho_of",
    "run_experiment",
    "run_scheme",
    "steady_solve",
    "system_matrices",
]
