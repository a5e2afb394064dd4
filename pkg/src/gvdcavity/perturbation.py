"""Order-by-order perturbative solution of the steady-state mode equations.

Steady state of the coupled-mode equations (detuning zero) reads

    0 = -gamma_n / 2 a_n - i sum_m C_nm a_m + f_n

with the dispersive couplings ``C_nm = (gamma_n / 2)(N_gamma_n / N_D) O_nm``.
Treating ``C`` as the perturbation gives ``a^(0) = 2 f / gamma`` and the
iteration ``a^(k) = (2 / gamma)(f - i C a^(k-1))``.

:func:`pt_order1` and :func:`pt_order2` implement the closed first- and
second-order expressions exactly as usually written, with powers of
``gamma_n`` only. They agree with :func:`pt_iterate` for a mode-independent
decay rate; for mode-dependent rates the iteration picks up
``gamma_n gamma_m`` products instead, and :func:`equivalence_report` shows
the difference rather than hiding it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import series
from .cavity import CavityParams


@dataclass(frozen=True)
class PTParams:
    """Decay rates (1/fs), couplings (1/fs) and drive amplitudes for one Fourier component.

    ``gvd_parameter`` is ``sqrt_r k2 L / (2 T_R)``; it only documents the
    strength of the second-derivative term and is not used by the
    steady-state solvers. Detuning is fixed at zero (resonant carrier).
    """

    gamma: np.ndarray
    coupling: np.ndarray
    drive: np.ndarray
    gvd_parameter: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=float)
        c = np.asarray(self.coupling, dtype=complex)
        f = np.asarray(self.drive, dtype=complex)
        if np.any(gamma <= 0):
            raise ValueError("decay rates must be positive")
        if c.shape != (gamma.size, gamma.size) or f.shape != gamma.shape:
            raise ValueError("gamma, coupling and drive dimensions disagree")
        if self.detuning != 0:
            raise ValueError("only the resonant case (zero detuning) is supported")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "coupling", c)
        object.__setattr__(self, "drive", f)

    @classmethod
    def from_cavity(cls, params: CavityParams, n_gamma_vec, o, alpha_in) -> "PTParams":
        """Build the mode equations matching a cavity and input amplitudes.

        ``gamma_n = 1 / (N_gamma_n T_R)`` and the drive is chosen so that
        ``2 f_n / gamma_n = alpha_in[n]``.
        """
        n_gamma_vec = np.asarray(n_gamma_vec, dtype=float)
        gamma = 1.0 / (n_gamma_vec * params.round_trip_time)
        c = coupling_from_o(gamma, n_gamma_vec, params.numbers().n_d, o)
        drive = gamma * np.asarray(alpha_in, dtype=complex) / 2
        return cls(gamma, c, drive, gvd_parameter=gvd_parameter(params))


def gvd_parameter(params: CavityParams) -> float:
    return params.sqrt_r * params.k2 * params.length / (2 * params.round_trip_time)


def coupling_from_o(gamma, n_gamma_vec, n_d: float, o) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    n_gamma_vec = np.asarray(n_gamma_vec, dtype=float)
    return ((gamma / 2) * (n_gamma_vec / n_d))[:, None] * np.asarray(o, dtype=complex)


def pt_order0(drive, gamma) -> np.ndarray:
    return 2 * np.asarray(drive, dtype=complex) / np.asarray(gamma, dtype=float)


def pt_order1(drive, gamma, c) -> np.ndarray:
    f = np.asarray(drive, dtype=complex)
    g = np.asarray(gamma, dtype=float)
    return 2 * f / g - 1j * (np.asarray(c) @ (4 * f)) / g**2


def pt_order2(drive, gamma, c) -> np.ndarray:
    f = np.asarray(drive, dtype=complex)
    g = np.asarray(gamma, dtype=float)
    c = np.asarray(c, dtype=complex)
    return 2 * f / g - 1j * (c @ (4 * f)) / g**2 - (c @ (c @ (8 * f))) / g**3


def pt_iterate(drive, gamma, c, order: int) -> np.ndarray:
    """Apply ``a <- (2 / gamma)(f - i C a)`` ``order`` times starting from ``a^(0)``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    f = np.asarray(drive, dtype=complex)
    g = np.asarray(gamma, dtype=float)
    c = np.asarray(c, dtype=complex)
    a = 2 * f / g
    for _ in range(order):
        a = (2 / g) * (f - 1j * (c @ a))
    return a


def series_equivalent(drive, gamma, c, order: int) -> np.ndarray:
    """Matrix-series truncation for the same mode equations.

    ``2 C_nm / gamma_n`` is read off as ``(N_gamma_n / N_D) O_nm``, so the
    series is driven with unit lifetimes and ``N_D = 1``.
    """
    g = np.asarray(gamma, dtype=float)
    scaled = (2 / g)[:, None] * np.asarray(c, dtype=complex)
    alpha_in = pt_order0(drive, g)
    return series.series_truncation(scaled, np.ones(g.size), 1.0, alpha_in, order)


def equivalence_report(drive, gamma, c, max_order: int) -> list:
    """``[(M, max|pt_iterate(M) - series(M)|)]`` for M = 0..max_order."""
    rows = []
    for m in range(max_order + 1):
        diff = pt_iterate(drive, gamma, c, m) - series_equivalent(drive, gamma, c, m)
        rows.append((m, float(np.abs(diff).max(initial=0.0))))
    return rows


def closed_form_report(drive, gamma, c) -> list:
    """Differences between the closed order-1/2 expressions and the iteration."""
    return [
        (1, float(np.abs(pt_order1(drive, gamma, c) - pt_iterate(drive, gamma, c, 1)).max())),
        (2, float(np.abs(pt_order2(drive, gamma, c) - pt_iterate(drive, gamma, c, 2)).max())),
    ]
