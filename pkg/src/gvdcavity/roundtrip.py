"""Brute-force steady state: iterate the per-round-trip map until it settles.

One round trip maps the intracavity spectrum ``E`` to

    E' = sqrt_r exp(i phi(x)) E + sqrt_t E_in

whose unique fixed point (for sqrt_r < 1) is the analytic steady state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from numpy.polynomial import polynomial as P

from .cavity import CavityParams
from .dispersion import C_MM_PER_FS, SellmeierFit, carrier_frequency, refractive_index
from .errors import ConvergenceError
from .hg_basis import SpectralField, require_same_grid

_FIT_DEGREE = 6


@dataclass(frozen=True)
class PhaseModel:
    """Round-trip spectral phase.

    ``gvd_only`` uses ``(k2 / 2)(x / tau_s)^2 L`` (``k2=None`` takes the value
    from the cavity). ``full_sellmeier`` uses ``k(omega) L`` from the fit with
    its best-fit constant and linear parts removed, which is the resonant,
    co-moving frame of the analytic solvers.
    """

    kind: str = "gvd_only"
    k2: Optional[float] = None
    fit: Optional[SellmeierFit] = None
    lambda0: float = 0.795

    def __post_init__(self):
        if self.kind not in ("gvd_only", "full_sellmeier"):
            raise ValueError(f"unknown phase model {self.kind!r}")
        if self.kind == "full_sellmeier" and self.fit is None:
            object.__setattr__(self, "fit", SellmeierFit())

    def phase(self, params: CavityParams, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "gvd_only":
            k2 = params.k2 if self.k2 is None else self.k2
            return 0.5 * k2 * (x / params.tau_s) ** 2 * params.length
        omega = carrier_frequency(self.lambda0) + x / params.tau_s
        lam = 2 * np.pi * C_MM_PER_FS * 1e3 / omega
        k = refractive_index(self.fit, lam) * omega / C_MM_PER_FS
        total = k * params.length
        # Remove resonance offset and group delay. A bare line fit would also
        # soak up the mean of the quadratic part, so fit a higher-degree
        # polynomial and drop only its constant and linear coefficients.
        scale = np.abs(x).max() or 1.0
        u = x / scale
        degree = min(_FIT_DEGREE, x.size - 1)
        coef = P.polyfit(u, total, degree)
        return total - coef[0] - coef[1] * u


def roundtrip_step(field: SpectralField, params: CavityParams, phase: PhaseModel,
                   pump: SpectralField) -> SpectralField:
    require_same_grid(field.grid, pump.grid)
    phi = phase.phase(params, field.grid.nodes)
    values = params.sqrt_r * field.values * np.exp(1j * phi) + params.sqrt_t * pump.values
    return SpectralField(field.grid, values)


class SteadyResult(NamedTuple):
    field: SpectralField
    iterations: int
    trace: list


def iterate_to_steady(params: CavityParams, phase: PhaseModel, pump: SpectralField,
                      tol: float = 1e-8, max_iter: int = 100_000) -> SteadyResult:
    """Iterate from a cold cavity until the estimated distance to the fixed point is below ``tol``.

    The change between successive round trips shrinks exactly by ``sqrt_r``,
    so the remaining distance is bounded by ``sqrt_r / (1 - sqrt_r)`` times
    the last change. That bound, taken node-wise and scaled by the injected
    amplitude ``max|sqrt_t E_in|``, is the stopping residual; it falls below
    ``tol`` after ``ceil(ln(tol (1 - sqrt_r)) / ln sqrt_r)`` round trips.
    ``trace`` holds ``(iteration, residual)`` pairs.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = pump.grid
    decay = params.sqrt_r * np.exp(1j * phase.phase(params, grid.nodes))
    inject = params.sqrt_t * pump.values
    scale = np.abs(inject).max(initial=0.0)
    values = np.zeros(len(grid), dtype=complex)
    if scale == 0:
        return SteadyResult(SpectralField(grid, values), 0, [])
    tail = params.sqrt_r / (1.0 - params.sqrt_r)
    trace = []
    for i in range(1, max_iter + 1):
        new = decay * values + inject  # same update as roundtrip_step
        est = tail * np.abs(new - values).max() / scale
        values = new
        trace.append((i, float(est)))
        if est <= tol:
            return SteadyResult(SpectralField(grid, values), i, trace)
    raise ConvergenceError(
        f"round-trip iteration hit max_iter={max_iter} with residual {est:.3e}",
        residual=est,
        iterations=max_iter,
    )


def predicted_iterations(sqrt_r: float, tol: float) -> int:
    return math.ceil(math.log(tol * (1 - sqrt_r)) / math.log(sqrt_r))


def residual(field: SpectralField, reference: SpectralField) -> float:
    """Relative L2 distance ``||field - reference|| / ||reference||``.

    Norms are continuous ``int |.|^2 dx`` quadratures on the shared grid. A
    zero reference yields the absolute norm and a ``RuntimeWarning``.
    """
    require_same_grid(field.grid, reference.grid)
    weights = field.grid.dx_weights
    diff = np.sqrt(np.sum(weights * np.abs(field.values - reference.values) ** 2))
    ref = np.sqrt(np.sum(weights * np.abs(reference.values) ** 2))
    if ref == 0:
        warnings.warn("zero reference field; returning absolute L2 norm", RuntimeWarning, stacklevel=2)
        return float(diff)
    return float(diff / ref)


def phase_mismatch_bound(params: CavityParams, phase_a: PhaseModel, phase_b: PhaseModel,
                         pump: SpectralField) -> float:
    """Upper bound on the relative L2 gap between two steady states.

    Node-wise ``|E_a - E_b| <= |E_b| sqrt_r |phi_a - phi_b| / (1 - sqrt_r)``.
    """
    x = pump.grid.nodes
    phi_a = phase_a.phase(params, x)
    phi_b = phase_b.phase(params, x)
    ref = params.sqrt_t * pump.values / (1.0 - params.sqrt_r * np.exp(1j * phi_b))
    rel = params.sqrt_r / (1 - params.sqrt_r) * np.abs(phi_a - phi_b)
    w = pump.grid.dx_weights
    return float(np.sqrt(np.sum(w * np.abs(ref * rel) ** 2) / np.sum(w * np.abs(ref) ** 2)))
