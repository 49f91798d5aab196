"""Normalized solutions of ``-Lap u + lambda u = f(u)`` with ``|u|_2 = rho``.

Submodules: ``nonlinearity`` (models and assumption checks), ``thresholds``
(``C0``, ``S``, the mass threshold and ``R0 < R1``), ``field`` (radial grids
and functionals), ``fibering`` (the fiber map and ``M`` decomposition),
``solver`` (local minimiser and ``M_-`` minimiser), ``dynamics`` (time
evolution, stability and blow-up probes), ``scalar_bounds`` and ``cli``.
"""

__version__ = "0.1.0"

from .exceptions import (
    AccuracyError,
    DomainError,
    NormsolError,
    RhoTooLargeError,
    SolverError,
    StepSizeError,
)
from .field import RadialField, RadialGrid
from .nonlinearity import (
    MultiPowerSpec,
    NonlinearityModel,
    make_logpower_example,
    make_multipower,
    pure_power_model,
    two_power_model,
)
from .solver import LocalMinimizer, MMinusMinimizer, minimize_local, minimize_on_Mminus
from .thresholds import geometry_report

__all__ = [
    "__version__",
    "AccuracyError",
    "DomainError",
    "NormsolError",
    "RhoTooLargeError",
    "SolverError",
    "StepSizeError",
    "RadialField",
    "RadialGrid",
    "MultiPowerSpec",
    "NonlinearityModel",
    "make_logpower_example",
    "make_multipower",
    "pure_power_model",
    "two_power_model",
    "LocalMinimizer",
    "MMinusMinimizer",
    "minimize_local",
    "minimize_on_Mminus",
    "geometry_report",
]
