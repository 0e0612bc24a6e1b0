"""Decay-rate laboratory for the Moore-Gibson-Thompson equation.

``tau phi_ttt + phi_tt - Lap phi - (delta + tau) Lap phi_t = 0`` on ``R^n``.
The modules are layered: :mod:`roots` solves the characteristic cubic,
:mod:`kernels` builds the Fourier-space solution kernels, :mod:`radial` is
the radial transform engine, and :mod:`dissipative` and :mod:`conservative`
measure decay rates against the predicted exponents.
"""

from .errors import (ConfigError, DegenerateConfigurationError, DomainError, FitError, IntegrationFailure,
                     MgtError, ResolutionError, UsageError)
from .roots import MgtParams, RootTriple, solve_characteristic

__version__ = "0.1.0"

__all__ = [
    "MgtParams",
    "RootTriple",
    "solve_characteristic",
    "MgtError",
    "DomainError",
    "UsageError",
    "DegenerateConfigurationError",
    "ResolutionError",
    "FitError",
    "IntegrationFailure",
    "ConfigError",
]
