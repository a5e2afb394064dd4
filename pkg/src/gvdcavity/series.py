"""Matrix power-series solution for intracavity mode amplitudes.

The intracavity amplitudes are

    alpha_cav = sum_M (-i diag(N_gamma_n) / N_D  O)^M  alpha_in

where ``O`` is the coupling matrix from :mod:`gvdcavity.coupling` and
``N_gamma_n`` the per-mode decay numbers. The ladder is truncated at
``n_max`` modes; each order walks one rung (two mode indices) up, so the
input should live on ``n <= n_max - 4`` to keep the top rungs from being
starved of their upward coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import coupling
from .errors import ConfigError

PROFILE_KINDS = ("constant", "linear", "quadratic", "exponential", "table")


@dataclass(frozen=True)
class DecayProfile:
    """Per-mode round-trip lifetimes ``N_gamma_n`` as a function of mode order.

    ``linear``/``quadratic``/``exponential`` describe decay rates growing with
    ``n``; the lifetimes are their reciprocals scaled by ``n_gamma0``.
    """

    kind: str = "constant"
    n_gamma0: float = 1.0
    beta: float = 0.0
    table: Optional[Sequence[float]] = None
    n_max: int = 32

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ConfigError(f"unknown decay profile {self.kind!r}; expected one of {PROFILE_KINDS}")
        if self.kind == "table":
            if self.table is None or len(self.table) != self.n_max:
                raise ConfigError(f"table profile needs exactly n_max={self.n_max} entries")
            object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        if self.n_max < 1:
            raise ConfigError("n_max must be at least 1")

    def at(self, n) -> np.ndarray:
        """Lifetimes at (possibly non-integer) mode orders ``n``."""
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._at(n)

    def _at(self, n):
        if self.kind == "constant":
            out = np.full_like(n, self.n_gamma0)
        elif self.kind == "linear":
            out = self.n_gamma0 / (1.0 + self.beta * n)
        elif self.kind == "quadratic":
            out = self.n_gamma0 / (1.0 + self.beta * n**2)
        elif self.kind == "exponential":
            out = self.n_gamma0 * np.exp(-self.beta * n)
        else:
            out = np.asarray(self.table)[n.astype(int)]
        return out  # callers reject non-positive or non-finite lifetimes


def decay_numbers(profile: DecayProfile) -> np.ndarray:
    values = profile.at(np.arange(profile.n_max))
    if np.any(~(values > 0)) or not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~(values > 0) | ~np.isfinite(values))[0])
        raise ConfigError(f"decay profile gives N_gamma[{bad}] = {values[bad]!r}; must be positive")
    return values


@dataclass
class SeriesDiagnostics:
    terms_used: int
    last_term_norm: float
    converged: bool
    spectral_radius_estimate: float
    per_mode_ratio: np.ndarray
    diverged: bool = False
    divergence_order: Optional[int] = None
    term_norms: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "terms_used": self.terms_used,
            "last_term_norm": self.last_term_norm,
            "converged": self.converged,
            "diverged": self.diverged,
            "divergence_order": self.divergence_order,
            "spectral_radius_estimate": self.spectral_radius_estimate,
            "per_mode_ratio": [float(v) for v in self.per_mode_ratio],
        }


def iteration_matrix(o: np.ndarray, n_gamma_vec, n_d: float) -> np.ndarray:
    """``-i diag(N_gamma_n) O / N_D``."""
    n_gamma_vec = np.asarray(n_gamma_vec, dtype=float)
    if o.shape != (n_gamma_vec.size, n_gamma_vec.size):
        raise ValueError(f"coupling matrix {o.shape} does not match {n_gamma_vec.size} decay numbers")
    if n_d == 0:
        raise ValueError("N_D must be nonzero")
    return -1j * (n_gamma_vec / n_d)[:, None] * o


def series_truncation(o, n_gamma_vec, n_d, alpha_in, order: int) -> np.ndarray:
    """Explicit partial sum over orders ``0..order`` by repeated mat-vec."""
    a = iteration_matrix(o, n_gamma_vec, n_d)
    term = np.asarray(alpha_in, dtype=complex)
    total = term.copy()
    for _ in range(order):
        term = a @ term
        total = total + term
    return total


def spectral_radius(o, n_gamma_vec, n_d) -> float:
    """``rho(diag(N_gamma) O / N_D)``.

    For symmetric ``O`` and positive lifetimes the matrix is similar to the
    real symmetric ``D^1/2 O D^1/2 / N_D``, whose eigenvalues come from a
    symmetric solver. Power iteration is not used: the even and odd rungs of
    the ladder decouple and their top eigenvalues nearly coincide, which
    stalls it.
    """
    n_gamma_vec = np.asarray(n_gamma_vec, dtype=float)
    o = np.asarray(o)
    if math.isinf(n_d):
        return 0.0
    if np.all(n_gamma_vec > 0) and np.array_equal(o, o.T) and np.isrealobj(o):
        root = np.sqrt(n_gamma_vec)
        sym = root[:, None] * o * root[None, :] / n_d
        return float(np.abs(np.linalg.eigvalsh(sym)).max())
    return float(np.abs(np.linalg.eigvals(n_gamma_vec[:, None] * o / n_d)).max())


def per_mode_ratio(n_gamma_vec, n_d: float, substitute_n1: bool = True) -> np.ndarray:
    """``|N_gamma_n / N_D * O_nn|``; mode 1 uses ``|O_13|`` when ``substitute_n1``.

    Mode 1 is the one place where the diagonal does not dominate its
    off-diagonal neighbour, so the neighbour stands in for it there.
    """
    n_gamma_vec = np.asarray(n_gamma_vec, dtype=float)
    n = np.arange(n_gamma_vec.size)
    diag = n + 0.5
    if substitute_n1 and n_gamma_vec.size > 1:
        diag[1] = abs(coupling.element(1, 3))
    if math.isinf(n_d):
        return np.zeros_like(diag)
    return np.abs(n_gamma_vec / n_d) * diag


def series_solve(o, n_gamma_vec, n_d, alpha_in, m_max: int = 64, tol: float = 1e-12,
                 growth_run: int = 3):
    """Sum the matrix series until the added term is below ``tol`` (max-norm).

    ``m_max`` is the largest number of terms summed (``m_max=1`` keeps only
    the identity term). Divergence is declared once the term norm, measured
    in the ``1/N_gamma``-weighted 2-norm, grows for ``growth_run``
    consecutive orders; that norm never grows when the spectral radius is
    below one. Returns ``(amplitudes, SeriesDiagnostics)``.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    n_gamma_vec = np.asarray(n_gamma_vec, dtype=float)
    a = iteration_matrix(o, n_gamma_vec, n_d)
    weight = 1.0 / np.sqrt(n_gamma_vec)
    term = np.asarray(alpha_in, dtype=complex)
    total = term.copy()
    term_norms = [float(np.abs(term).max(initial=0.0))]
    prev_energy = np.linalg.norm(weight * term)
    growth = 0
    converged = term_norms[0] <= tol
    diverged = False
    divergence_order = None
    terms_used = 1
    while not converged and terms_used < m_max:
        term = a @ term
        total = total + term
        terms_used += 1
        term_norms.append(float(np.abs(term).max()))
        energy = np.linalg.norm(weight * term)
        growth = growth + 1 if energy > prev_energy else 0
        prev_energy = energy
        if term_norms[-1] <= tol:
            converged = True
        elif growth >= growth_run:
            diverged = True
            divergence_order = terms_used - growth_run
            break

    diagnostics = SeriesDiagnostics(
        terms_used=terms_used,
        last_term_norm=term_norms[-1],
        converged=converged,
        spectral_radius_estimate=spectral_radius(o, n_gamma_vec, n_d),
        per_mode_ratio=per_mode_ratio(n_gamma_vec, n_d),
        diverged=diverged,
        divergence_order=divergence_order,
        term_norms=term_norms,
    )
    return total, diagnostics


def convergence_check(o, n_gamma_vec, n_d) -> SeriesDiagnostics:
    """A-priori diagnostics without summing the series (``terms_used == 0``)."""
    rho = spectral_radius(o, n_gamma_vec, n_d)
    return SeriesDiagnostics(
        terms_used=0,
        last_term_norm=math.nan,
        converged=False,
        spectral_radius_estimate=rho,
        per_mode_ratio=per_mode_ratio(n_gamma_vec, n_d),
    )


def n_lim(n_gamma_value: float, n_d: float) -> Optional[int]:
    """Lowest mode order violating the condition for a constant profile.

    ``ceil((2 N_D - N_gamma) / (2 N_gamma))``, clipped at zero. ``None``
    when ``N_D`` is not positive and finite (no finite threshold).
    """
    if not n_gamma_value > 0:
        raise ValueError("N_gamma must be positive")
    if not (n_d > 0 and math.isfinite(n_d)):
        return None
    return max(0, math.ceil((2 * n_d - n_gamma_value) / (2 * n_gamma_value)))


def n_lim_scan(n_gamma_value: float, n_d: float, limit: int = 1_000_000) -> Optional[int]:
    """Brute-force counterpart of :func:`n_lim`: first n with ratio (n + 1/2) >= 1."""
    if not (n_d > 0 and math.isfinite(n_d)):
        return None
    ratio = n_gamma_value / n_d
    for n in range(limit):
        if ratio * (n + 0.5) >= 1.0:
            return n
    return None


def first_violating_mode(n_gamma_vec, n_d, substitute_n1: bool = True) -> Optional[int]:
    """Smallest n with per-mode ratio >= 1 under an arbitrary profile."""
    bad = np.flatnonzero(per_mode_ratio(n_gamma_vec, n_d, substitute_n1) >= 1.0)
    return int(bad[0]) if bad.size else None


def fit_geometric_ratio(values: Sequence[float]) -> float:
    """``exp(slope)`` of a least-squares line through ``log(values)``."""
    values = np.asarray(values, dtype=float)
    if values.size < 2 or np.any(values <= 0):
        raise ValueError("need at least two positive values to fit a geometric ratio")
    slope = np.polyfit(np.arange(values.size), np.log(values), 1)[0]
    return float(np.exp(slope))
