import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qstar.errors import BadRange, DomainError
from qstar.limit import (CdfTable, LimitParams, cdf_table, density_f_x_eta, density_with_error,
                         dtau_dxi, f_tilde, f_tilde_with_error, limit_cdf, limit_cdf_with_error,
                         p_eta, p_integral, qe_step_cdf, r_grid, tau_eta, tau_star)

etas = st.floats(0.05, 20.0)
alphas = st.sampled_from([1.0, 2.0, 3.0, 5.0])
xis = st.floats(0.0, 300.0)


def test_p_at_origin():
    p = LimitParams(alpha=1.0, eta=1.0)
    assert p_eta(0.0, p) == pytest.approx(complex(math.cos(math.pi / 4), -math.sin(math.pi / 4))
                                          / math.sqrt(math.pi), rel=1e-15)


@given(etas, alphas, xis)
def test_p_and_tau_even(eta, alpha, xi):
    p = LimitParams(alpha=alpha, eta=eta)
    assert p_eta(-xi, p) == p_eta(xi, p)
    assert tau_eta(-xi, p) == pytest.approx(tau_eta(xi, p), rel=1e-15, abs=1e-15)


@given(etas, alphas, xis)
def test_re_tau_bounded_below(eta, alpha, xi):
    p = LimitParams(alpha=alpha, eta=eta)
    assert tau_eta(xi, p).real >= tau_star(p) * (1 - 1e-12)


@given(etas, alphas, st.floats(1e-3, 300.0))
def test_re_dtau_nonnegative(eta, alpha, xi):
    p = LimitParams(alpha=alpha, eta=eta)
    assert dtau_dxi(xi, p).real >= -1e-14


def test_tau_origin_and_derivative():
    for eta in (0.5, 1.0, 2.0):
        for a in (2.0, 3.0):
            p = LimitParams(alpha=a, eta=eta)
            assert tau_eta(0.0, p).real == pytest.approx(tau_star(p), rel=1e-14)
            xi = np.linspace(0.1, 60.0, 200)
            h = 1e-5
            fd = (tau_eta(xi + h, p) - tau_eta(xi - h, p)) / (2 * h)
            assert np.max(np.abs(fd - dtau_dxi(xi, p))) < 1e-7


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_tau_approaches_alpha_xi(eta, alpha):
    p = LimitParams(alpha=alpha, eta=eta)
    xi = np.geomspace(10, 100, 400)
    d = np.abs(tau_eta(xi, p) - alpha * xi)
    slope = np.polyfit(np.log(xi), np.log(d), 1)[0]
    assert -2.5 <= slope <= -1.5
    C = np.max(d * xi**2)
    assert abs(tau_eta(40.0, p) - 40 * alpha) <= C / 1600
    far = np.geomspace(100, 2000, 400)
    assert np.max(np.abs(tau_eta(far, p) - alpha * far) * far**2) <= 1.5 * C


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_p_integral(eta, alpha):
    assert abs(p_integral(LimitParams(alpha=alpha, eta=eta)) - 2 * alpha) < 1e-8


def test_p_integral_independent_of_cutoff():
    p = LimitParams(alpha=3.0, eta=0.7)
    assert abs(p_integral(p, xi_cut=60.0) - p_integral(p, xi_cut=400.0)) < 1e-9


def test_params_validated():
    with pytest.raises(BadRange):
        LimitParams(alpha=0.5)
    with pytest.raises(BadRange):
        LimitParams(eta=0.0)
    with pytest.raises(BadRange):
        LimitParams(xi_cut=10.0)


def test_f_tilde_symmetric_point():
    # alpha = 2: U and V have the same law, so P(U/V < 1) = 1/2
    assert f_tilde(1.0, LimitParams(alpha=2.0)) == pytest.approx(0.5, abs=1e-9)


def test_f_tilde_is_a_cdf():
    p = LimitParams(alpha=2.0)
    grid = np.geomspace(0.1, 10.0, 12)
    vals = np.array([f_tilde(e, p) for e in grid])
    assert np.all(np.diff(vals) > 0)
    assert 0 < vals[0] and vals[-1] < 1
    # the tail of U/V decays like eta^(-1/2): slow approach to 1
    assert f_tilde(1e4, p) > 0.99


def test_f_tilde_cutoff_doubling():
    p = LimitParams(alpha=3.0, xi_cut=200.0)
    for eta in (0.3, 1.0, 4.0):
        a, err = f_tilde_with_error(eta, p)
        b = f_tilde(eta, LimitParams(alpha=3.0, xi_cut=400.0))
        assert abs(a - b) < 1e-4
        assert err < 1e-4


def test_limit_cdf_relation_and_domain():
    p = LimitParams(alpha=3.0)
    assert limit_cdf(0.25, p) == pytest.approx(1 - f_tilde(3.0, p), abs=1e-12)
    val, err = limit_cdf_with_error(0.5, p)
    assert 0 < val < 1 and err < 1e-4
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError):
            limit_cdf(bad, p)


def test_qe_step():
    assert qe_step_cdf(0.5, 3) == 1.0
    assert qe_step_cdf(0.2, 3) == 0.0
    assert qe_step_cdf(1 / 3, 3) == 1.0
    assert np.array_equal(qe_step_cdf(np.array([0.1, 0.9]), 2), [0.0, 1.0])


def test_cdf_table_coarse():
    t = cdf_table(3.0, [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99])
    assert t.monotone()
    assert t.F[0] < 0.15 and t.F[-1] > 0.9
    assert np.all(t.err < 1e-4)
    # non-ergodicity: far from the step at 1/3
    assert np.max(np.abs(t.F - qe_step_cdf(t.R, 3))) > 0.1
    assert t(0.0) == 0.0 and t(1.0) == 1.0
    assert t(0.2) == pytest.approx(np.interp(0.2, t.R, t.F))


def test_cdf_table_validation():
    with pytest.raises(BadRange):
        CdfTable(np.array([0.5, 0.4]), np.array([0.1, 0.2]), np.zeros(2))


def test_r_grid():
    g = r_grid(0.01, 0.99, 0.01)
    assert g.size == 99 and g[0] == 0.01 and g[-1] == 0.99


def test_density_zero_on_positive_axis():
    p = LimitParams(alpha=2.0)
    assert density_f_x_eta(0.5, p) == 0.0
    assert np.array_equal(density_f_x_eta(np.array([0.0, 2.0]), p), [0.0, 0.0])


def test_density_nonnegative_and_stable():
    p = LimitParams(alpha=2.0, eta=1.0)
    for s in (-20.0, -3.0, -1.0, -0.3, -0.05, -0.01):
        val, err = density_with_error(s, p)
        assert val >= -1e-6
        assert err < 1e-4 * max(1.0, val)
