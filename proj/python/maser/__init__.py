"""Single-artificial-atom maser simulator."""

from ._core import (
    ConfigError,
    IoError,
    SolverError,
    __version__,
    component_spectrum,
    correlation_linewidth,
    default_parameters,
    fit_lorentzian,
    fit_snail,
    steady_state,
    sweep,
    validate,
)

__all__ = [
    "ConfigError",
    "IoError",
    "SolverError",
    "component_spectrum",
    "correlation_linewidth",
    "default_parameters",
    "fit_lorentzian",
    "fit_snail",
    "steady_state",
    "sweep",
    "validate",
]
