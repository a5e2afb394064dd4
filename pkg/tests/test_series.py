import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvdcavity import coupling, series
from gvdcavity.cavity import CavityParams, cavity_mode_amplitudes, input_mode_amplitudes, n_gamma, pump_from_modes
from gvdcavity.errors import ConfigError
from gvdcavity.hg_basis import gauss_hermite_grid
from gvdcavity.series import DecayProfile


def test_decay_numbers():
    np.testing.assert_array_equal(series.decay_numbers(DecayProfile("constant", 4.5, n_max=4)), [4.5] * 4)
    assert series.decay_numbers(DecayProfile("linear", 4.5, 0.5, n_max=4))[2] == pytest.approx(2.25)
    np.testing.assert_array_equal(series.decay_numbers(DecayProfile("table", table=(1, 2, 3), n_max=3)), [1, 2, 3])


def test_decay_profile_rejects():
    with pytest.raises(ConfigError):
        DecayProfile("cubic")
    with pytest.raises(ConfigError):
        DecayProfile("table", table=(1, 2), n_max=3)
    with pytest.raises(ConfigError):
        series.decay_numbers(DecayProfile("table", table=(1, -2, 3), n_max=3))


def test_identity_term_only():
    o = coupling.build(8)
    alpha = np.arange(8) + 1j
    total, diag = series.series_solve(o, np.full(8, 4.5), 36.76, alpha, m_max=1)
    np.testing.assert_array_equal(total, alpha)
    assert diag.terms_used == 1


@pytest.mark.parametrize("k", [0, 2, 3])
def test_single_mode_second_order(k):
    n = 16
    o = coupling.build(n)
    r = 4.5 / 36.76
    alpha = np.zeros(n, dtype=complex)
    alpha[k] = 1.0
    out = series.series_truncation(o, np.full(n, 4.5), 36.76, alpha, 2)
    expected_k = 1 - 1j * r * o[k, k] - r**2 * sum(o[k, m] * o[m, k] for m in range(n))
    assert out[k] == pytest.approx(expected_k, abs=1e-14)
    for l in (k - 2, k + 2):
        if l >= 0:
            # first order plus the order-2 contribution through the diagonal of both ends
            second = -r**2 * sum(o[l, m] * o[m, k] for m in range(n))
            assert out[l] == pytest.approx(-1j * r * o[l, k] + second, abs=1e-14)


def reference_case(max_ratio, n_max=12, q=72):
    """Gaussian pump with N_D chosen so that max per-mode ratio equals ``max_ratio``."""
    ng = n_gamma(0.9)
    nd = ng * (n_max - 0.5) / max_ratio
    p = CavityParams(0.9, 2.0, 13160.0, 100.0**2 / (nd * 2.0), 100.0)
    grid = gauss_hermite_grid(q)
    pump = pump_from_modes([1.0], grid)
    return p, pump, np.full(n_max, ng), nd


def test_series_bounded_by_geometric_tail():
    p, pump, ngv, nd = reference_case(0.3)
    exact = cavity_mode_amplitudes(p, pump, 12, "linearized")
    alpha_in = input_mode_amplitudes(p, pump, 12)
    o = coupling.build(12)
    for m_max in range(1, 11):
        total, diag = series.series_solve(o, ngv, nd, alpha_in, m_max=m_max)
        m_used = diag.terms_used - 1
        err = np.linalg.norm(total - exact) / np.linalg.norm(exact)
        assert err <= 2 * 0.3 ** (m_used + 1), m_max


def test_n_lim_examples():
    assert series.n_lim(4.5, 36.76) == 8
    assert series.n_lim(10.0, 5.0) == 0
    assert series.n_lim(4.5, -36.76) is None
    assert series.n_lim(4.5, math.inf) is None


@settings(max_examples=100)
@given(st.floats(0.05, 50), st.floats(0.05, 500))
def test_n_lim_matches_scan(ng, nd):
    assert series.n_lim(ng, nd) == series.n_lim_scan(ng, nd)


def test_convergence_check():
    o = coupling.build(16)
    diag = series.convergence_check(o, np.full(16, 4.5), 36.76)
    assert diag.terms_used == 0
    assert diag.per_mode_ratio[8] == pytest.approx(4.5 / 36.76 * 8.5, abs=1e-12)
    assert diag.per_mode_ratio[8] == pytest.approx(1.040, abs=1e-3)
    assert diag.per_mode_ratio[7] < 1
    flat = series.convergence_check(o, np.full(16, 4.5), math.inf)
    assert flat.spectral_radius_estimate == 0 and not np.any(flat.per_mode_ratio)


def test_n1_substitution():
    ratios = series.per_mode_ratio(np.full(4, 1.0), 1.0)
    assert ratios[1] == pytest.approx(math.sqrt(6) / 2)
    assert series.per_mode_ratio(np.full(4, 1.0), 1.0, substitute_n1=False)[1] == 1.5


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 12))
def test_truncation_identity(seed, order):
    rng = np.random.default_rng(seed)
    n = 12
    o = coupling.build(n)
    ngv = rng.uniform(0.5, 5, n)
    nd = rng.uniform(50, 200)
    alpha = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    a = -1j * np.diag(ngv) @ o / nd
    explicit = sum(np.linalg.matrix_power(a, m) @ alpha for m in range(order + 1))
    got = series.series_truncation(o, ngv, nd, alpha, order)
    assert np.abs(got - explicit).max() <= 1e-14 * max(1.0, np.abs(explicit).max())
    total, diag = series.series_solve(o, ngv, nd, alpha, m_max=order + 1, tol=0.0)
    if not diag.diverged:
        np.testing.assert_array_equal(total, got)


def test_spectral_radius_matches_eigenvalues():
    rng = np.random.default_rng(3)
    o = coupling.build(20)
    ngv = rng.uniform(1, 5, 20)
    rho = series.spectral_radius(o, ngv, 80.0)
    exact = np.abs(np.linalg.eigvals(np.diag(ngv) @ o / 80.0)).max()
    assert rho == pytest.approx(exact, rel=1e-9)


def test_divergence_detected_above_one():
    # ratio at the top mode exceeds one, diagonal bound gives rho > 1
    n = 16
    o = coupling.build(n)
    ngv = np.full(n, 4.5)
    nd = 36.76
    alpha = np.zeros(n, dtype=complex)
    alpha[0] = 1
    total, diag = series.series_solve(o, ngv, nd, alpha)
    assert diag.diverged and not diag.converged
    assert diag.divergence_order is not None and diag.divergence_order >= 1
    assert diag.spectral_radius_estimate > 1


def test_convergence_below_one():
    n = 12
    o = coupling.build(n)
    ngv = np.full(n, 1.0)
    nd = 40.0
    alpha = np.ones(n, dtype=complex)
    total, diag = series.series_solve(o, ngv, nd, alpha)
    assert diag.converged and not diag.diverged
    np.testing.assert_allclose(total, np.linalg.solve(np.eye(n) + 1j * o / nd, alpha), atol=1e-11)


def test_first_violating_mode():
    assert series.first_violating_mode(np.full(20, 4.5), 36.76) == 8
    assert series.first_violating_mode(np.full(20, 0.01), 36.76) is None


def test_fit_geometric_ratio():
    assert series.fit_geometric_ratio(0.4 ** np.arange(10)) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        series.fit_geometric_ratio([1.0])
