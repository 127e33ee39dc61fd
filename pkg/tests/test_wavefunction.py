import math

import numpy as np
import pytest
from scipy.integrate import quad

from qstar.errors import BadRange, BondOutOfRange, PositionOutOfRange, UnnormalizableState
from qstar.graph import (CosinePacket, Polynomial, SmoothObservable, SplitObservable, Tabulated,
                         make_graph)
from qstar.spectrum import eigenvalues
from qstar.wavefunction import (build_eigenfunction, eval_dpsi, eval_psi, indicator_elements,
                                matrix_element_indicator, matrix_element_leading,
                                matrix_element_smooth, norms, oscillatory_term)

SQ2 = math.sqrt(2.0)
G2 = make_graph([1.0, SQ2])
G5 = make_graph([1.0, SQ2, math.sqrt(3.0), math.pi / 2, math.e / 2])


def _quad_mass(ef, bonds):
    """sum over ``bonds`` of int |psi|^2 by adaptive quadrature."""
    total = 0.0
    for b in bonds:
        L = ef.graph.lengths[b - 1]
        val, _ = quad(lambda x: eval_psi(ef, b, x) ** 2, 0.0, L, limit=400,
                      epsabs=1e-14, epsrel=1e-13)
        total += val
    return total


@pytest.mark.parametrize("n", [1, 2, 7, 40])
def test_normalisation_against_quadrature(n):
    rec = eigenvalues(G2, n)[n - 1]
    ef = build_eigenfunction(rec, G2)
    assert _quad_mass(ef, [1, 2]) == pytest.approx(1.0, abs=1e-12)
    assert ef.norm() == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("n", [3, 11, 50])
def test_indicator_element_against_quadrature(n):
    rec = eigenvalues(G5, n)[n - 1]
    ef = build_eigenfunction(rec, G5)
    mask = np.array([True, False, True, False, False])
    assert matrix_element_indicator(ef, mask) == pytest.approx(_quad_mass(ef, [1, 3]), abs=1e-12)


def test_vertex_conditions():
    for rec in eigenvalues(G5, 30):
        ef = build_eigenfunction(rec, G5)
        centre = [eval_psi(ef, b, 0.0) for b in range(1, 6)]
        assert np.ptp(centre) <= 1e-9 * max(1.0, np.abs(centre).max())
        flux = sum(eval_dpsi(ef, b, 0.0) for b in range(1, 6))
        assert abs(flux) <= 1e-8 * ef.k * np.abs(ef.amplitudes).max()
        for b in range(1, 6):
            assert abs(eval_dpsi(ef, b, G5.lengths[b - 1])) <= 1e-12 * ef.k


def test_position_checked():
    ef = build_eigenfunction(eigenvalues(G2, 1)[0], G2)
    with pytest.raises(PositionOutOfRange):
        eval_psi(ef, 1, 1.5)
    with pytest.raises(BondOutOfRange):
        eval_psi(ef, 3, 0.1)


def test_scaled_arithmetic_next_to_pole():
    # sec^2 ~ 1e32 on bond 1 does not overflow the normalisation
    ef = build_eigenfunction(math.pi / 2, G2)
    assert np.all(np.isfinite(ef.amplitudes))
    assert matrix_element_leading(ef, np.array([True, False])) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(UnnormalizableState):
        build_eigenfunction(math.inf, G2)


def test_bulk_elements_match_single():
    s = eigenvalues(G5, 300)
    obs_mask = np.array([True, True, False, False, False])
    exact, leading = indicator_elements(s.k, G5, obs_mask)
    for i in (0, 17, 299):
        ef = build_eigenfunction(s[i], G5)
        assert exact[i] == pytest.approx(matrix_element_indicator(ef, obs_mask), abs=1e-14)
        assert leading[i] == pytest.approx(matrix_element_leading(ef, obs_mask), abs=1e-14)
    assert np.all((leading >= 0) & (leading <= 1))
    # leading and exact differ by the tan/k term
    assert np.max(np.abs(exact - leading)) < 1.0 / (s.k[0] * G5.lengths.min())
    assert np.max(np.abs(norms(s.k, G5) - 1.0)) < 1e-12


def test_split_observable_shape_checked():
    s = eigenvalues(G5, 3)
    with pytest.raises(BadRange):
        indicator_elements(s.k, G5, SplitObservable(2, 3))


def test_linear_function_on_single_bond():
    g = make_graph([1.0])
    f = SmoothObservable((Polynomial((0.0, 1.0)),))
    for rec in eigenvalues(g, 5):
        assert matrix_element_smooth(build_eigenfunction(rec, g), f) == pytest.approx(0.5, abs=1e-12)


def test_smooth_constant_and_indicator():
    s = eigenvalues(G5, 20)
    one = SmoothObservable.constant(5)
    ind = SmoothObservable.indicator(5, [2, 4])
    mask = np.array([False, True, False, True, False])
    for rec in s:
        ef = build_eigenfunction(rec, G5)
        assert matrix_element_smooth(ef, one) == pytest.approx(1.0, abs=1e-11)
        assert matrix_element_smooth(ef, ind) == pytest.approx(matrix_element_indicator(ef, mask),
                                                               abs=1e-11)


def test_smooth_against_quadrature():
    packet = CosinePacket(1.0, 3.0, 0.4, 0.2)
    x = np.linspace(0.0, SQ2, 40)
    tab = Tabulated(x, np.sin(x) ** 2)
    f = SmoothObservable((packet, tab))
    ef = build_eigenfunction(eigenvalues(G2, 25)[24], G2)
    ref = sum(quad(lambda t: fi(t) * eval_psi(ef, b, t) ** 2, 0.0, L, limit=400,
                   epsabs=1e-14)[0]
              for b, (fi, L) in enumerate(zip(f.functions, G2.lengths), start=1))
    assert matrix_element_smooth(ef, f, tol=1e-12) == pytest.approx(ref, abs=1e-10)


def test_filon_branch_agrees_with_gauss_branch(monkeypatch):
    import qstar.wavefunction as wf

    f = SmoothObservable((Polynomial((0.2, 0.0, 1.0)), CosinePacket(1.0, 2.0, 0.7, 0.3)))
    ef = build_eigenfunction(eigenvalues(G2, 4000)[3999], G2)
    a = oscillatory_term(ef, f, tol=1e-12)
    monkeypatch.setattr(wf, "MAX_GAUSS_PERIODS", 10)
    b = oscillatory_term(ef, f, tol=1e-12)
    assert a == pytest.approx(b, abs=1e-11)


def test_oscillatory_term_decays():
    f = SmoothObservable((Polynomial((0.0, 1.0)), Polynomial((1.0, 0.0, -0.3))))
    s = eigenvalues(G2, 2000)
    vals = [abs(oscillatory_term(build_eigenfunction(s[i], G2), f)) * s.k[i] for i in (99, 999, 1999)]
    assert max(vals) < 5.0
