"""Hermite-Gaussian spectral modes, Gauss-Hermite quadrature and overlaps.

Mode ``n`` on the dimensionless frequency axis x = omega * tau_s is

    s_n(x) = i**n * h_n(x),
    h_n(x) = (sqrt(pi) 2**n n!)**-1/2 H_n(x) exp(-x**2 / 2).

The real profile ``h_n`` is generated by the normalized three-term
recurrence, so no factorials are ever formed. The ``i**n`` factor is kept
apart as a per-mode global phase (:func:`mode_phase`).

Projection convention
---------------------
``project`` uses the conjugated kernel, ``c_m = int field(x) conj(b_m(x)) dx``,
and ``synthesize`` builds ``sum_n c_n b_n(x)``, so the two are exact inverses
on the span of the basis. ``b_n`` is ``s_n`` when ``phased=True`` (default)
and the phase-free profile ``h_n`` otherwise. The cavity solvers work in the
phase-free basis: that is the basis in which the analytic coupling matrix
(see :mod:`gvdcavity.coupling`) reproduces the exact steady state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import roots_hermite

GAUSS_HERMITE = "gauss_hermite"
UNIFORM = "uniform"

_PI_QUARTER = np.pi ** -0.25


class QuadratureError(RuntimeError):
    """Gauss-Hermite node/weight generation failed its sanity checks."""


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Sample points on the dimensionless frequency axis.

    For ``kind == "gauss_hermite"`` the weights integrate ``f(x) exp(-x**2)``;
    for ``kind == "uniform"`` they are plain trapezoid weights for ``f(x) dx``.
    :attr:`dx_weights` always gives weights for a bare ``int g(x) dx``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = GAUSS_HERMITE

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("grid needs a nonempty 1-D node array")
        if weights.shape != nodes.shape:
            raise ValueError("nodes and weights differ in length")
        if self.kind not in (GAUSS_HERMITE, UNIFORM):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise ValueError("grid nodes must be strictly increasing")
        if self.kind == GAUSS_HERMITE and np.any(weights <= 0):
            raise ValueError("Gauss-Hermite weights must be strictly positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def dx_weights(self) -> np.ndarray:
        """Weights ``v_i`` with ``sum v_i g(x_i) ~ int g(x) dx``."""
        if self.kind == GAUSS_HERMITE:
            # w * exp(x^2), formed in log space to dodge overflow of exp(x^2)
            return np.exp(np.log(self.weights) + self.nodes**2)
        return self.weights

    def same_as(self, other: "FrequencyGrid") -> bool:
        return self is other or (
            self.kind == other.kind
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex spectral amplitude sampled on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.nodes.shape:
            raise ValueError(
                f"field has {values.size} samples but grid has {len(self.grid)} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains NaN or Inf")
        object.__setattr__(self, "values", values)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        require_same_grid(self.grid, other.grid)
        return SpectralField(self.grid, self.values + other.values)

    def __mul__(self, scale: complex) -> "SpectralField":
        return SpectralField(self.grid, scale * self.values)

    __rmul__ = __mul__

    def norm(self) -> float:
        """Continuous L2 norm, ``sqrt(int |field|^2 dx)``, by quadrature."""
        return float(np.sqrt(np.sum(self.grid.dx_weights * np.abs(self.values) ** 2)))


# Mode amplitudes are plain complex numpy vectors indexed by mode order.
ModeAmplitudes = np.ndarray

GridLike = Union[FrequencyGrid, np.ndarray, float]


def require_same_grid(a: FrequencyGrid, b: FrequencyGrid):
    if not a.same_as(b):
        raise ValueError("fields live on different frequency grids")


def _nodes_of(grid: GridLike) -> np.ndarray:
    if isinstance(grid, FrequencyGrid):
        return grid.nodes
    return np.atleast_1d(np.asarray(grid, dtype=float))


def gauss_hermite_grid(q: int) -> FrequencyGrid:
    """Q-point Gauss-Hermite rule for ``int f(x) exp(-x**2) dx``.

    Exact for polynomials of degree <= 2Q - 1.
    """
    if q < 2:
        raise ValueError(f"need at least 2 quadrature nodes, got {q}")
    nodes, weights = roots_hermite(q)
    if (
        not np.all(np.isfinite(nodes))
        or not np.all(np.isfinite(weights))
        or np.any(weights <= 0)
        or np.any(np.diff(nodes) <= 0)
        or abs(weights.sum() - np.sqrt(np.pi)) > 1e-10
    ):
        raise QuadratureError(
            f"Gauss-Hermite rule with Q={q} failed to converge "
            "(weights underflow or nodes not separated); use fewer nodes"
        )
    return FrequencyGrid(nodes, weights, GAUSS_HERMITE)


def uniform_grid(lo: float, hi: float, count: int) -> FrequencyGrid:
    if count < 2 or not hi > lo:
        raise ValueError("uniform grid needs hi > lo and at least 2 points")
    nodes = np.linspace(lo, hi, count)
    weights = np.full(count, nodes[1] - nodes[0])
    weights[[0, -1]] *= 0.5
    return FrequencyGrid(nodes, weights, UNIFORM)


def default_quadrature_size(n_max: int) -> int:
    return max(64, 2 * n_max + 8)


def hermite_functions(n_max: int, x: GridLike) -> np.ndarray:
    """Real profiles ``h_0 .. h_{n_max-1}`` at ``x``, shape ``(n_max, len(x))``.

    Uses psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}.
    """
    x = _nodes_of(x)
    out = np.empty((n_max, x.size))
    if n_max == 0:
        return out
    out[0] = _PI_QUARTER * np.exp(-0.5 * x**2)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def mode_profile(n: int, x: GridLike) -> np.ndarray:
    """Phase-free real profile ``h_n(x)``."""
    if n < 0:
        raise ValueError("mode order must be non-negative")
    return hermite_functions(n + 1, x)[n]


_PHASES = np.array([1, 1j, -1, -1j])


def mode_phase(n):
    """Global phase ``i**n`` carried by mode ``n`` (exact, from a lookup)."""
    return _PHASES[np.asarray(n) % 4]


def mode_eval(n: int, grid: GridLike) -> np.ndarray:
    """``s_n`` sampled at the grid nodes (complex)."""
    return mode_phase(n) * mode_profile(n, grid)


def mode_basis(n_max: int, grid: FrequencyGrid, phased: bool) -> np.ndarray:
    profiles = hermite_functions(n_max, grid)
    if not phased:
        return profiles.astype(complex)
    return mode_phase(np.arange(n_max))[:, None] * profiles


def project(field: SpectralField, n_max: int, phased: bool = True) -> ModeAmplitudes:
    """Overlap coefficients ``c_m = int field conj(b_m) dx`` for m < n_max."""
    grid = field.grid
    if grid.kind != GAUSS_HERMITE:
        raise ValueError(
            f"projection needs a gauss_hermite grid, got {grid.kind!r}"
        )
    if len(grid) < n_max + 4:
        raise ValueError(
            f"Q={len(grid)} nodes cannot resolve {n_max} modes (need Q >= n_max + 4)"
        )
    basis = mode_basis(n_max, grid, phased)
    return (basis.conj() * grid.dx_weights) @ field.values


def synthesize(coeffs, grid: FrequencyGrid, phased: bool = True) -> SpectralField:
    """Field ``sum_n coeffs[n] b_n(x)`` on ``grid``."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if not np.all(np.isfinite(coeffs)):
        raise ValueError("mode coefficients must be finite")
    basis = mode_basis(coeffs.size, grid, phased)
    return SpectralField(grid, coeffs @ basis)


def overlap_matrix(n_max: int, grid: FrequencyGrid, phased: bool = True) -> np.ndarray:
    """Gram matrix ``int conj(b_n) b_m dx``; identity for a good grid."""
    basis = mode_basis(n_max, grid, phased)
    return (basis.conj() * grid.dx_weights) @ basis.T
