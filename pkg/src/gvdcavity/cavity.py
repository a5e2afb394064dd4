"""Steady-state intracavity spectrum of a synchronously pumped dispersive cavity.

The carrier is resonant and the group-delay term is dropped, so a round trip
only adds the GVD phase ``phi(x) = (k2 / 2) (x / tau_s)^2 L`` at the
dimensionless frequency ``x = omega * tau_s``. Three solvers of increasing
approximation are provided:

* :func:`steady_state_full`       -- ``T in / (1 - R exp(i phi))``
* :func:`steady_state_linearized` -- ``exp(i phi)`` replaced by ``1 + i phi``
* :func:`steady_state_maclaurin`  -- geometric series of the linearized form

(``R``, ``T`` being the amplitude reflection/transmission of the coupler.)
The linearized solution factors as ``T/(1-R) * 1/(1 - i r x^2)`` with
``r = N_gamma / N_D``, and the Maclaurin sum is its expansion in ``r x^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, SingularDenominatorError
from .hg_basis import SpectralField, project, synthesize

_DEN_FLOOR = 1e-15


@dataclass(frozen=True)
class CavityParams:
    """Cavity and pump parameters.

    Units: ``length`` mm, ``round_trip_time`` fs, ``k2`` fs^2/mm,
    ``tau_s`` fs. ``sqrt_t`` defaults to ``sqrt(1 - sqrt_r**2)``.
    """

    sqrt_r: float
    length: float
    round_trip_time: float
    k2: float
    tau_s: float
    sqrt_t: Optional[float] = field(default=None)

    def __post_init__(self):
        if not 0.0 < self.sqrt_r < 1.0:
            raise ConfigError(f"sqrt_r must lie in (0, 1), got {self.sqrt_r}")
        if self.sqrt_t is None:
            object.__setattr__(self, "sqrt_t", math.sqrt(1.0 - self.sqrt_r**2))
        elif abs(self.sqrt_r**2 + self.sqrt_t**2 - 1.0) > 1e-12:
            raise ConfigError(
                f"lossless coupler needs sqrt_r^2 + sqrt_t^2 = 1, got "
                f"{self.sqrt_r**2 + self.sqrt_t**2!r}"
            )
        for name in ("length", "round_trip_time", "tau_s"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not math.isfinite(self.k2):
            raise ConfigError("k2 must be finite")

    @property
    def amplification(self) -> float:
        """Resonant field build-up ``sqrt_t / (1 - sqrt_r)``."""
        return self.sqrt_t / (1.0 - self.sqrt_r)

    def numbers(self) -> "DimensionlessNumbers":
        return DimensionlessNumbers.from_params(self)

    def phase(self, x) -> np.ndarray:
        """Round-trip GVD phase at dimensionless frequency ``x``."""
        x = np.asarray(x, dtype=float)
        return 0.5 * self.k2 * (x / self.tau_s) ** 2 * self.length


def n_gamma(sqrt_r: float) -> float:
    """Round trips for the intracavity intensity to fall by 1/e."""
    if not 0.0 < sqrt_r < 1.0:
        raise ConfigError(f"sqrt_r must lie in (0, 1), got {sqrt_r}")
    return sqrt_r / (2.0 * (1.0 - sqrt_r))


def n_d(tau_s: float, k2: float, length: float) -> float:
    """Round trips for a pulse of duration ``tau_s`` to broaden by sqrt(2).

    Negative for anomalous dispersion; ``inf`` without dispersion.
    """
    if k2 * length == 0:
        return math.inf
    return tau_s**2 / (k2 * length)


@dataclass(frozen=True)
class DimensionlessNumbers:
    n_gamma: float
    n_d: float

    @property
    def ratio(self) -> float:
        if math.isinf(self.n_d):
            return 0.0
        return self.n_gamma / self.n_d

    @classmethod
    def from_params(cls, params: CavityParams) -> "DimensionlessNumbers":
        return cls(n_gamma(params.sqrt_r), n_d(params.tau_s, params.k2, params.length))


def _checked_division(numerator, denominator, grid):
    small = np.abs(denominator) < _DEN_FLOOR
    if np.any(small):
        i = int(np.flatnonzero(small)[0])
        raise SingularDenominatorError(
            f"near-resonance singularity at node {i} (x = {grid.nodes[i]!r}): "
            f"|denominator| = {abs(denominator[i]):.3e}"
        )
    return numerator / denominator


def steady_state_full(params: CavityParams, pump: SpectralField) -> SpectralField:
    phi = params.phase(pump.grid.nodes)
    den = 1.0 - params.sqrt_r * np.exp(1j * phi)
    return SpectralField(pump.grid, _checked_division(params.sqrt_t * pump.values, den, pump.grid))


def steady_state_linearized(params: CavityParams, pump: SpectralField) -> SpectralField:
    phi = params.phase(pump.grid.nodes)
    den = 1.0 - params.sqrt_r * (1.0 + 1j * phi)
    return SpectralField(pump.grid, _checked_division(params.sqrt_t * pump.values, den, pump.grid))


def maclaurin_terms(params: CavityParams, pump: SpectralField, terms: int) -> np.ndarray:
    """Individual series terms, shape ``(terms, len(grid))``."""
    if terms < 1:
        raise ValueError("need at least one Maclaurin term")
    step = 1j * params.numbers().ratio * pump.grid.nodes**2
    out = np.empty((terms, len(pump.grid)), dtype=complex)
    out[0] = params.amplification * pump.values
    for k in range(1, terms):
        out[k] = out[k - 1] * step
    return out


def steady_state_maclaurin(params: CavityParams, pump: SpectralField, terms: int) -> SpectralField:
    """Partial sum of the first ``terms`` Maclaurin terms.

    Diverges node-wise wherever ``r x^2 >= 1``; see :func:`maclaurin_diagnostics`.
    """
    parts = maclaurin_terms(params, pump, terms)
    return SpectralField(pump.grid, parts.sum(axis=0))


def maclaurin_diagnostics(params: CavityParams, pump: SpectralField, terms: int) -> dict:
    parts = maclaurin_terms(params, pump, terms)
    node_ratio = np.abs(params.numbers().ratio) * pump.grid.nodes**2
    divergent = node_ratio >= 1.0
    return {
        "max_term": float(np.abs(parts).max()),
        "last_term": float(np.abs(parts[-1]).max()),
        "node_ratio": node_ratio,
        "divergent_nodes": np.flatnonzero(divergent),
        "diverges": bool(np.any(divergent & (np.abs(pump.values) > 0))),
    }


LEVELS = ("full", "linearized", "maclaurin")


def steady_state(params: CavityParams, pump: SpectralField, level: str = "linearized",
                 terms: int = 64) -> SpectralField:
    if level == "full":
        return steady_state_full(params, pump)
    if level == "linearized":
        return steady_state_linearized(params, pump)
    if level == "maclaurin":
        return steady_state_maclaurin(params, pump, terms)
    raise ValueError(f"unknown solver level {level!r}; expected one of {LEVELS}")


def input_mode_amplitudes(params: CavityParams, pump: SpectralField, n_max: int) -> np.ndarray:
    """Pump overlaps scaled by the resonant build-up ``sqrt_t / (1 - sqrt_r)``."""
    return params.amplification * project(pump, n_max, phased=False)


def cavity_mode_amplitudes(params: CavityParams, pump: SpectralField, n_max: int,
                           level: str = "linearized", terms: int = 64) -> np.ndarray:
    """Intracavity amplitudes in the phase-free Hermite-Gaussian basis."""
    return project(steady_state(params, pump, level, terms), n_max, phased=False)


def pump_from_modes(coeffs, grid) -> SpectralField:
    """Pump spectrum built from phase-free mode coefficients."""
    return synthesize(coeffs, grid, phased=False)
