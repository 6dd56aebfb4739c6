"""Patch SIS epidemic model: R0, thresholds, equilibria, asymptotic profiles."""

from ._core import (
    ConnectivityMatrix,
    SispatchError,
    classify_J,
    dI_to_zero_profiles,
    endemic_equilibrium,
    find_dI_star,
    find_dI_star_star,
    h_functions,
    perron_vector,
    r0,
    simulate,
    solve_auxiliary,
    star_graph,
)

__all__ = [
    "ConnectivityMatrix",
    "SispatchError",
    "classify_J",
    "dI_to_zero_profiles",
    "endemic_equilibrium",
    "find_dI_star",
    "find_dI_star_star",
    "h_functions",
    "perron_vector",
    "r0",
    "simulate",
    "solve_auxiliary",
    "star_graph",
]
__version__ = "0.1.0"
