import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gvdcavity import coupling, series
from gvdcavity.cavity import CavityParams
from gvdcavity.perturbation import (
    PTParams,
    closed_form_report,
    coupling_from_o,
    equivalence_report,
    gvd_parameter,
    pt_iterate,
    pt_order0,
    pt_order1,
    pt_order2,
    series_equivalent,
)

T_R = 13160.0


def constant_system(n=16, ng=4.5, nd=36.76, seed=0):
    rng = np.random.default_rng(seed)
    gamma = np.full(n, 1 / (ng * T_R))
    c = coupling_from_o(gamma, np.full(n, ng), nd, coupling.build(n))
    drive = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return drive, gamma, c


def test_coupling_zero_rows():
    o = coupling.build(6)
    o[2] = 0
    c = coupling_from_o(np.ones(6), np.ones(6), 10.0, o)
    assert not np.any(c[2])


def test_order0():
    assert not np.any(pt_order0(np.zeros(4), np.ones(4)))
    gamma = np.array([0.1, 0.2, 0.3])
    alpha_in = np.array([0.0, 2.0 + 1j, 0.0])
    np.testing.assert_allclose(pt_order0(gamma * alpha_in / 2, gamma), alpha_in)


def test_zero_coupling_orders():
    drive, gamma, _ = constant_system()
    zero = np.zeros((16, 16))
    np.testing.assert_array_equal(pt_order1(drive, gamma, zero), pt_order0(drive, gamma))
    np.testing.assert_array_equal(pt_order2(drive, gamma, zero), pt_order0(drive, gamma))
    assert all(v == 0 for _, v in equivalence_report(drive, gamma, zero, 5))


@pytest.mark.parametrize("k", [0, 3])
def test_single_mode_closed_forms(k):
    n, ng, nd = 16, 4.5, 36.76
    r = ng / nd
    o = coupling.build(n)
    gamma = np.full(n, 1 / (ng * T_R))
    c = coupling_from_o(gamma, np.full(n, ng), nd, o)
    alpha_in = np.zeros(n, dtype=complex)
    alpha_in[k] = 1.0
    drive = gamma * alpha_in / 2
    a1 = pt_order1(drive, gamma, c)
    for l in range(n):
        if l != k:
            assert a1[l] == pytest.approx(-1j * r * o[l, k], abs=1e-14)
    a2 = pt_order2(drive, gamma, c)
    expected = 1 - 1j * r * o[k, k] - r**2 * sum(o[k, m] * o[m, k] for m in range(n))
    assert a2[k] == pytest.approx(expected, abs=1e-13)


def test_iterate_reproduces_closed_forms_constant_gamma():
    drive, gamma, c = constant_system()
    np.testing.assert_allclose(pt_iterate(drive, gamma, c, 0), pt_order0(drive, gamma), rtol=1e-14)
    np.testing.assert_allclose(pt_iterate(drive, gamma, c, 1), pt_order1(drive, gamma, c), rtol=1e-13)
    np.testing.assert_allclose(pt_iterate(drive, gamma, c, 2), pt_order2(drive, gamma, c), rtol=1e-13)
    assert max(v for _, v in closed_form_report(drive, gamma, c)) <= 1e-12 * np.abs(pt_order0(drive, gamma)).max()


def test_closed_forms_differ_for_mode_dependent_gamma():
    n = 12
    ngv = 4.5 / (1 + 0.3 * np.arange(n))
    gamma = 1 / (ngv * T_R)
    c = coupling_from_o(gamma, ngv, 60.0, coupling.build(n))
    drive = gamma * np.ones(n) / 2
    diffs = dict(closed_form_report(drive, gamma, c))
    assert diffs[1] > 1e-3 and diffs[2] > 1e-3


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 8))
def test_structural_equivalence(seed, order):
    drive, gamma, c = constant_system(seed=seed)
    a = pt_iterate(drive, gamma, c, order)
    b = series_equivalent(drive, gamma, c, order)
    assert np.abs(a - b).max() <= 1e-13 * max(1.0, np.abs(b).max())


def test_mode_dependent_gamma_matches_generalized_series():
    n = 12
    params = CavityParams(0.9, 2.0, T_R, 136.0, 100.0)
    ngv = series.decay_numbers(series.DecayProfile("exponential", 4.5, 0.1, n_max=n))
    o = coupling.build(n)
    alpha_in = np.random.default_rng(1).standard_normal(n) + 0j
    pt = PTParams.from_cavity(params, ngv, o, alpha_in)
    nd = params.numbers().n_d
    for order in (0, 1, 2):
        a = pt_iterate(pt.drive, pt.gamma, pt.coupling, order)
        b = series.series_truncation(o, ngv, nd, alpha_in, order)
        assert np.abs(a - b).max() <= 1e-13 * max(1.0, np.abs(b).max())


def test_equivalence_report_small():
    drive, gamma, c = constant_system()
    rows = equivalence_report(drive, gamma, c, 6)
    assert [m for m, _ in rows] == list(range(7))
    scale = np.abs(pt_iterate(drive, gamma, c, 6)).max()
    assert all(v <= 1e-13 * scale for _, v in rows)


def test_error_scales_with_spectral_radius():
    n = 16
    ng = 1.0
    o = coupling.build(n)
    rho_unit = np.abs(np.linalg.eigvalsh(o)).max()
    nd = rho_unit / 0.5  # rho = 0.5
    gamma = np.full(n, 1 / (ng * T_R))
    c = coupling_from_o(gamma, np.full(n, ng), nd, o)
    drive = gamma * np.random.default_rng(7).standard_normal(n) / 2
    exact = np.linalg.solve(np.diag(gamma / 2) + 1j * c, drive)
    orders = np.arange(10, 31)
    errs = [np.linalg.norm(pt_iterate(drive, gamma, c, m) - exact) for m in orders]
    slope = np.polyfit(orders, np.log(errs), 1)[0]
    assert slope == pytest.approx(np.log(0.5), rel=0.1)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_closed_forms_linear_in_drive(seed):
    rng = np.random.default_rng(seed)
    f1, gamma, c = constant_system(seed=seed)
    f2 = rng.standard_normal(16) + 0j
    a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
    for fn in (pt_order1, pt_order2):
        lhs = fn(a * f1 + b * f2, gamma, c)
        rhs = a * fn(f1, gamma, c) + b * fn(f2, gamma, c)
        assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(lhs).max())


def test_params_validation():
    with pytest.raises(ValueError):
        PTParams(np.array([1.0, -1.0]), np.zeros((2, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        PTParams(np.ones(2), np.zeros((3, 3)), np.zeros(2))
    with pytest.raises(ValueError):
        pt_iterate(np.ones(2), np.ones(2), np.zeros((2, 2)), -1)


def test_gvd_parameter():
    p = CavityParams(0.9, 2.0, T_R, 136.0, 100.0)
    assert gvd_parameter(p) == pytest.approx(0.9 * 136 * 2 / (2 * T_R))
