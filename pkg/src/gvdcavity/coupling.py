"""Dispersive coupling matrix between Hermite-Gaussian modes.

The analytic element is

    O_nm = -(n + 1/2) d_{n,m} - sqrt((n-1) n)/2 d_{n,m+2} - sqrt((n+1)(n+2))/2 d_{n,m-2}

i.e. a real symmetric band matrix (bandwidth 2) with diagonal -(n + 1/2).

Quadrature of ``int h_n x**2 h_m dx`` with the phase-free profiles gives the
same matrix with every entry negated, so ``O = -<h_n|x^2|h_m>`` with one
uniform global sign. With the ``i**n`` phased modes and a conjugated kernel
the diagonal keeps that sign but the off-diagonal entries flip, so no single
global factor relates the two; :func:`quadrature_sign` measures this.
"""

from __future__ import annotations

import math

import numpy as np

from .hg_basis import mode_basis, gauss_hermite_grid


def element(n: int, m: int) -> float:
    """Analytic coupling coefficient ``O_nm``."""
    if n < 0 or m < 0:
        raise ValueError("mode orders must be non-negative")
    if n == m:
        return -(n + 0.5)
    if n == m + 2:
        return -math.sqrt((n - 1) * n) / 2
    if n == m - 2:
        return -math.sqrt((n + 1) * (n + 2)) / 2
    return 0.0


def build(n_max: int) -> np.ndarray:
    """Dense ``n_max x n_max`` coupling matrix."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    n = np.arange(n_max)
    out = np.diag(-(n + 0.5))
    off = -np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0)) / 2
    out[n[:-2], n[:-2] + 2] = off
    out[n[:-2] + 2, n[:-2]] = off
    return out


def _x_power_overlap(n: int, m: int, power: int, q: int, phased: bool) -> float:
    grid = gauss_hermite_grid(q)
    size = max(n, m) + 1
    basis = mode_basis(size, grid, phased)
    val = np.sum(grid.dx_weights * basis[n].conj() * grid.nodes**power * basis[m])
    # imaginary part is zero by parity for every kernel used here
    return float(val.real)


def element_by_quadrature(n: int, m: int, q: int | None = None, phased: bool = False) -> float:
    """``int conj(b_n) x^2 b_m dx`` by Gauss-Hermite quadrature.

    ``phased=False`` integrates the real profiles (equal to ``-element``);
    ``phased=True`` uses the ``i**n`` modes literally.
    """
    if q is None:
        q = n + m + 4
    if q < n + m + 4:
        raise ValueError(f"Q={q} too small for orders ({n}, {m}); need Q >= n + m + 4")
    return _x_power_overlap(n, m, 2, q, phased)


def quartic_overlap(q_mode: int, p_mode: int, q: int | None = None) -> float:
    """``int h_q x^4 h_p dx``; equals ``(O @ O)[q, p]`` by completeness."""
    if q is None:
        q = q_mode + p_mode + 8
    if q < q_mode + p_mode + 8:
        raise ValueError("too few quadrature nodes for the quartic overlap")
    return _x_power_overlap(q_mode, p_mode, 4, q, phased=False)


def quadrature_matrix(n_max: int, q: int | None = None, phased: bool = False) -> np.ndarray:
    """All ``int conj(b_n) x^2 b_m dx`` for n, m < n_max in one pass."""
    if q is None:
        q = 2 * n_max + 4
    grid = gauss_hermite_grid(q)
    basis = mode_basis(n_max, grid, phased)
    return ((basis.conj() * (grid.dx_weights * grid.nodes**2)) @ basis.T).real


def quadrature_sign(n_max: int, q: int | None = None, phased: bool = False, atol: float = 1e-9):
    """Global sign relating ``build(n_max)`` to its quadrature counterpart.

    Returns ``(sign, uniform)``. ``uniform`` is False when the nonzero entries
    do not all share the same sign ratio.
    """
    analytic = build(n_max)
    numeric = quadrature_matrix(n_max, q, phased)
    mask = np.abs(analytic) > atol
    ratios = np.sign(numeric[mask]) * np.sign(analytic[mask])
    sign = int(ratios[0])
    return sign, bool(np.all(ratios == sign))


def matrix_square_element(q_mode: int, p_mode: int) -> float:
    """``(O @ O)[q, p]`` from a matrix big enough to hold every intermediate rung."""
    size = max(q_mode, p_mode) + 3
    o = build(size)
    return float(o[q_mode] @ o[:, p_mode])
