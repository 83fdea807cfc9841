"""Python bindings for the obstlab core."""

from ._core import (
    GridSpec,
    Grid,
    Field,
    manufacture,
    solve_heat,
    solve_obstacle,
    lcp_residual,
    omega,
    omega_tilde,
    n_tilde,
    n_hat,
    n_reg,
    log_ladder,
    parse_ladder,
    dini_integral,
    dini_bound,
    run_cli,
)

__all__ = [
    "GridSpec",
    "Grid",
    "Field",
    "manufacture",
    "solve_heat",
    "solve_obstacle",
    "lcp_residual",
    "omega",
    "omega_tilde",
    "n_tilde",
    "n_hat",
    "n_reg",
    "log_ladder",
    "parse_ladder",
    "dini_integral",
    "dini_bound",
    "run_cli",
]
