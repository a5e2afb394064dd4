import math

import numpy as np
import pytest

from gvdcavity.cavity import CavityParams, pump_from_modes, steady_state_full
from gvdcavity.dispersion import BIBO, gvd, tod
from gvdcavity.errors import ConvergenceError
from gvdcavity.hg_basis import SpectralField, gauss_hermite_grid
from gvdcavity.roundtrip import (
    PhaseModel,
    iterate_to_steady,
    phase_mismatch_bound,
    predicted_iterations,
    residual,
    roundtrip_step,
)


def setup(sqrt_r=0.9, k2=136.0):
    p = CavityParams(sqrt_r, 2.0, 13160.0, k2, 100.0)
    g = gauss_hermite_grid(64)
    return p, pump_from_modes([1.0, 0, 0.3], g)


def test_first_injection():
    p, pump = setup()
    zero = SpectralField(pump.grid, np.zeros(64))
    out = roundtrip_step(zero, p, PhaseModel(), pump)
    np.testing.assert_allclose(out.values, p.sqrt_t * pump.values, rtol=1e-15)


def test_pure_decay():
    p, pump = setup()
    none = SpectralField(pump.grid, np.zeros(64))
    field = pump
    for _ in range(10):
        field = roundtrip_step(field, p, PhaseModel(), none)
    np.testing.assert_allclose(np.abs(field.values), 0.9**10 * np.abs(pump.values), rtol=1e-13)


def test_geometric_partial_sum():
    p, pump = setup(k2=0.0)
    field = SpectralField(pump.grid, np.zeros(64))
    for _ in range(25):
        field = roundtrip_step(field, p, PhaseModel(), pump)
    expected = p.sqrt_t * (1 - 0.9**25) / (1 - 0.9) * pump.values
    np.testing.assert_allclose(field.values, expected, rtol=1e-13)


def test_iteration_count_and_fixed_point():
    p, pump = setup()
    tol = 1e-8
    result = iterate_to_steady(p, PhaseModel(), pump, tol=tol)
    predicted = math.ceil(math.log(tol * (1 - 0.9)) / math.log(0.9))
    assert predicted == predicted_iterations(0.9, tol) == 197
    assert abs(result.iterations - predicted) <= 5
    assert residual(result.field, steady_state_full(p, pump)) <= 10 * tol


def test_tiny_reflectivity_single_iteration():
    p, pump = setup(sqrt_r=1e-12)
    result = iterate_to_steady(p, PhaseModel(), pump, tol=1e-8)
    assert result.iterations == 1
    np.testing.assert_allclose(result.field.values, p.sqrt_t * pump.values, rtol=1e-15)


def test_max_iter_reported():
    p, pump = setup()
    with pytest.raises(ConvergenceError) as info:
        iterate_to_steady(p, PhaseModel(), pump, tol=1e-8, max_iter=10)
    assert info.value.iterations == 10 and info.value.residual > 1e-8


def test_fixed_point_idempotent():
    p, pump = setup()
    steady = steady_state_full(p, pump)
    again = roundtrip_step(steady, p, PhaseModel(), pump)
    assert residual(again, steady) <= 1e-12


def test_convergence_ratio():
    p, pump = setup()
    result = iterate_to_steady(p, PhaseModel(), pump, tol=1e-12)
    it, res = np.array(result.trace).T
    slope = np.polyfit(it[20:], np.log(res[20:]), 1)[0]
    assert slope == pytest.approx(math.log(0.9), rel=0.02)


def test_residual_basics():
    p, pump = setup()
    assert residual(pump, pump) == 0
    assert residual(pump * 1.01, pump) == pytest.approx(0.01, rel=1e-12)


def test_residual_second_summation_order():
    rng = np.random.default_rng(11)
    g = gauss_hermite_grid(64)
    a = SpectralField(g, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    b = SpectralField(g, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    w = g.dx_weights
    num = math.fsum(reversed(list(w * np.abs(a.values - b.values) ** 2)))
    den = math.fsum(reversed(list(w * np.abs(b.values) ** 2)))
    assert residual(a, b) == pytest.approx(math.sqrt(num / den), rel=1e-15, abs=1e-15)


def test_residual_zero_reference_flagged():
    p, pump = setup()
    zero = SpectralField(pump.grid, np.zeros(64))
    with pytest.warns(RuntimeWarning):
        assert residual(pump, zero) == pytest.approx(pump.norm())


def test_sellmeier_phase_agrees_within_bound():
    k2 = float(gvd(BIBO, 0.795))
    p, pump = setup(k2=k2)
    gvd_only = PhaseModel("gvd_only")
    sellmeier = PhaseModel("full_sellmeier", lambda0=0.795)
    # grid stays well inside the band where GVD dominates
    omega = np.abs(pump.grid.nodes).max() / p.tau_s
    assert omega < abs(3 * k2 / tod(BIBO, 0.795)) / 10
    a = iterate_to_steady(p, sellmeier, pump, tol=1e-10).field
    b = iterate_to_steady(p, gvd_only, pump, tol=1e-10).field
    bound = phase_mismatch_bound(p, sellmeier, gvd_only, pump)
    assert 0 < residual(a, b) <= bound
    assert bound < 0.5


def test_phase_model_validation():
    with pytest.raises(ValueError):
        PhaseModel("cubic")
    with pytest.raises(ValueError):
        iterate_to_steady(*setup()[:1], PhaseModel(), setup()[1], tol=0)
