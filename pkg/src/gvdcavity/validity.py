"""Parameter maps of the per-mode convergence ratio and their threshold contours.

The mapped quantity is ``|N_gamma_n / N_D| |O_nn|`` (mode 1 uses ``|O_13|``).
Level 1 separates the convergent region from the violating one; levels 1/2,
1/5 and 1/10 mark where the leading perturbative term is 2, 5 and 10 times
the next one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from skimage.measure import find_contours

from . import coupling
from .errors import ConfigError
from .series import DecayProfile

AXIS_NAMES = ("n", "N_D", "N_gamma0", "beta")
DEFAULT_LEVELS = (1.0, 0.5, 0.2, 0.1)


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    samples: int = 50

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if self.samples < 2 or not self.hi > self.lo:
            raise ConfigError(f"axis {self.name}: need hi > lo and at least 2 samples")
        if self.name in ("N_D", "N_gamma0") and self.lo <= 0:
            raise ConfigError(f"axis {self.name} must stay positive, got lo={self.lo}")
        if self.name in ("n", "beta") and self.lo < 0:
            raise ConfigError(f"axis {self.name} must be non-negative, got lo={self.lo}")

    def values(self) -> np.ndarray:
        if self.name == "n":
            # mode order only exists at integers
            return np.arange(math.ceil(self.lo), math.floor(self.hi) + 1, dtype=float)
        return np.linspace(self.lo, self.hi, self.samples)


@dataclass(frozen=True)
class MapSpec:
    x_axis: Axis
    y_axis: Axis
    profile: DecayProfile = field(default_factory=DecayProfile)
    n_d: float = 36.0
    n: int = 0
    levels: tuple = DEFAULT_LEVELS

    def __post_init__(self):
        if self.x_axis.name == self.y_axis.name:
            raise ConfigError("x and y axes must differ")
        levels = tuple(sorted((float(v) for v in self.levels), reverse=True))
        object.__setattr__(self, "levels", levels)


@dataclass(frozen=True)
class MapGrid:
    """Ratios on the axis product; ``values[j, i]`` is at ``(xs[i], ys[j])``."""

    x_name: str
    y_name: str
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray

    def rows(self):
        """``(x, y, ratio)`` triples with x varying fastest."""
        for j, y in enumerate(self.ys):
            for i, x in enumerate(self.xs):
                yield float(x), float(y), float(self.values[j, i])


def diagonal_magnitude(n) -> np.ndarray:
    """``|O_nn|``, with ``|O_13|`` standing in for mode 1."""
    n = np.asarray(n, dtype=float)
    out = n + 0.5
    return np.where(n == 1, abs(coupling.element(1, 3)), out)


def ratio_at(n, profile: DecayProfile, n_d: float):
    if n_d == 0:
        raise ValueError("N_D must be nonzero")
    if math.isinf(n_d):
        return np.zeros_like(np.asarray(n, dtype=float))
    lifetimes = profile.at(n)
    if np.any(~(lifetimes > 0)) or not np.all(np.isfinite(lifetimes)):
        raise ConfigError("decay profile gives non-positive or infinite N_gamma on the map")
    return np.abs(lifetimes / n_d) * diagonal_magnitude(n)


def _evaluate(spec: MapSpec, x: float, y: float) -> float:
    settings = {"n": spec.n, "N_D": spec.n_d, "N_gamma0": spec.profile.n_gamma0,
                "beta": spec.profile.beta}
    settings[spec.x_axis.name] = x
    settings[spec.y_axis.name] = y
    profile = replace(spec.profile, n_gamma0=settings["N_gamma0"], beta=settings["beta"])
    return float(ratio_at(settings["n"], profile, settings["N_D"]))


def grid(spec: MapSpec) -> MapGrid:
    xs = spec.x_axis.values()
    ys = spec.y_axis.values()
    if "N_gamma0" not in (spec.x_axis.name, spec.y_axis.name) and spec.profile.n_gamma0 <= 0:
        raise ConfigError("profile N_gamma0 must be positive")
    values = np.empty((ys.size, xs.size))
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            values[j, i] = _evaluate(spec, x, y)
    return MapGrid(spec.x_axis.name, spec.y_axis.name, xs, ys, values)


def contours(gridvals: MapGrid, levels=DEFAULT_LEVELS) -> dict:
    """Marching-squares level sets, ``{level: [array of (x, y) points, ...]}``.

    Levels outside the data range give an empty list. Points are linearly
    interpolated between samples and mapped to axis units.
    """
    values = np.asarray(gridvals.values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("contouring needs a finite grid")
    col_index = np.arange(gridvals.xs.size)
    row_index = np.arange(gridvals.ys.size)
    out = {}
    for level in levels:
        lines = []
        if values.min() <= level <= values.max():
            for path in find_contours(values, level):
                xs = np.interp(path[:, 1], col_index, gridvals.xs)
                ys = np.interp(path[:, 0], row_index, gridvals.ys)
                lines.append(np.column_stack([xs, ys]))
        out[float(level)] = lines
    return out


def violating_region(gridvals: MapGrid, level: float) -> np.ndarray:
    """Boolean mask of samples with ratio >= level."""
    return gridvals.values >= level


def boundary_along_n(values_along_n: np.ndarray, ns: np.ndarray, level: float = 1.0) -> Optional[float]:
    """First crossing of ``level`` along an increasing mode-order axis, linearly interpolated."""
    above = np.flatnonzero(values_along_n >= level)
    if above.size == 0:
        return None
    k = int(above[0])
    if k == 0:
        return float(ns[0])
    v0, v1 = values_along_n[k - 1], values_along_n[k]
    return float(ns[k - 1] + (level - v0) / (v1 - v0) * (ns[k] - ns[k - 1]))
