"""Steady states of synchronously pumped dispersive cavities in a Hermite-Gaussian basis."""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, NumericalError, SingularDenominatorError
from .hg_basis import FrequencyGrid, SpectralField, gauss_hermite_grid, project, synthesize
from .cavity import CavityParams, n_d, n_gamma
from .series import DecayProfile, n_lim, series_solve

__all__ = [
    "__version__",
    "CavityParams",
    "ConfigError",
    "ConvergenceError",
    "DecayProfile",
    "FrequencyGrid",
    "NumericalError",
    "SingularDenominatorError",
    "SpectralField",
    "gauss_hermite_grid",
    "n_d",
    "n_gamma",
    "n_lim",
    "project",
    "series_solve",
    "synthesize",
]
