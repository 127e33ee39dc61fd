import math
import warnings
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from qstar._trig import reduce_kl, secular_and_slope, tan_sec2, tan_sec2_np, two_prod
from qstar.errors import (BadRange, CoincidentPoles, EmptyGraph, NonPositiveLength, PoleProximity,
                          RationalLengthWarning)
from qstar.graph import make_graph
from qstar.spectrum import (consecutive_poles, counting_function, eigenvalues, eigenvalues_between,
                            nth_pole, pole_count, pole_rank, poles_in, secular, secular_derivative,
                            solve_gap, weyl_deviation)

SQ2 = math.sqrt(2.0)


# ---------------------------------------------------------------- argument reduction

@given(st.floats(1e-3, 1e8), st.floats(0.5, 20.0))
def test_two_prod_is_exact(a, b):
    p, e = two_prod(a, b)
    assert Fraction(p) + Fraction(e) == Fraction(a) * Fraction(b)


@pytest.mark.parametrize("k", [0.3, 17.25, 1234.5678, 9.87654321e5, 3.3e7, 6.0e7])
@pytest.mark.parametrize("L", [1.0, SQ2, 4.71238898038469, 2.5 * math.sqrt(5.0)])
def test_tan_matches_high_precision(k, L):
    mp.mp.dps = 50
    exact = mp.tan(mp.mpf(k) * mp.mpf(L))
    t, s2, sgn, dist = tan_sec2(k, L)
    assert abs(t - float(exact)) <= 1e-14 * max(1.0, abs(float(exact)))
    assert s2 == pytest.approx(1.0 + float(exact) ** 2, rel=1e-13)
    assert sgn == float(mp.sign(mp.cos(mp.mpf(k) * mp.mpf(L))))
    tn, s2n, sgnn, distn = tan_sec2_np(k, L)
    assert float(tn) == pytest.approx(t, rel=2e-16, abs=1e-300) and float(sgnn) == sgn


def test_reduction_remainder_small():
    for k in np.geomspace(1.0, 1e9, 50):
        r, q = reduce_kl(k, math.e)
        assert abs(r) <= math.pi / 4 + 1e-12


def test_secular_against_mpmath():
    mp.mp.dps = 40
    g = make_graph([1.0, SQ2])
    exact = mp.tan(1) + mp.tan(mp.sqrt(2))
    assert secular(1.0, g) == pytest.approx(float(exact), rel=1e-14)
    dexact = mp.sec(1) ** 2 + mp.sqrt(2) * mp.sec(mp.sqrt(2)) ** 2
    assert secular_derivative(1.0, g) == pytest.approx(float(dexact), rel=1e-14)
    z, dz, dmin = secular_and_slope(1.0, g.lengths)
    assert dmin == pytest.approx(math.pi / (2 * SQ2) - 1.0, rel=1e-12)


def test_secular_refuses_pole():
    g = make_graph([1.0])
    with pytest.raises(PoleProximity):
        secular(math.pi / 2, g)
    with pytest.raises(PoleProximity):
        secular(np.array([1.0, 1.5 * math.pi]), g)


# ---------------------------------------------------------------- graph validation

def test_graph_validation():
    with pytest.raises(EmptyGraph):
        make_graph([])
    with pytest.raises(NonPositiveLength):
        make_graph([1.0, -2.0])
    with pytest.raises(BadRange):
        make_graph([1.0, 0.1])
    with pytest.warns(RationalLengthWarning):
        g = make_graph([1.0, 3.0])
    assert not g.independent


# ---------------------------------------------------------------- poles

def test_pole_counting_and_ranks():
    g = make_graph([1.0, SQ2, math.pi / 2])
    ps = poles_in(g, 0.0, 50.0)
    assert len(ps) == pole_count(g, 50.0)
    assert np.all(np.diff(ps.k) > 0)
    for i, p in enumerate(ps, start=1):
        assert pole_rank(g, p) == i
        assert nth_pole(g, i) == p
    window = consecutive_poles(g, 7, 5)
    assert np.array_equal(window.k, ps.k[6:11])


# ---------------------------------------------------------------- closed forms

def test_single_bond():
    s = eigenvalues(make_graph([1.0]), 100)
    n = np.arange(1, 101)
    assert np.max(np.abs(s.k / (n * math.pi) - 1)) < 1e-14


def test_two_bonds_closed_form():
    s = eigenvalues(make_graph([1.0, SQ2]), 100)
    n = np.arange(1, 101)
    assert np.max(np.abs(s.k / (n * math.pi / (1 + SQ2)) - 1)) < 1e-14


def _sign_scan_roots(L, count, step=2e-4):
    """Roots of sum tan(k L_j) located by a sign change from - to + on a dense grid."""
    L = np.asarray(L)
    K = (count + len(L) + 2) * math.pi / L.sum()
    k = np.arange(step, K, step)
    z = np.tan(np.outer(k, L)).sum(1)
    up = np.nonzero((z[:-1] < 0) & (z[1:] > 0))[0]
    f = lambda x: float(np.tan(x * L).sum())
    return np.array([brentq(f, k[i], k[i + 1], xtol=1e-15, rtol=1e-15) for i in up[:count]])


def test_three_bonds_against_sign_scan():
    L = [1.0, 1.1, 1.23]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RationalLengthWarning)
        g = make_graph(L)
    ref = _sign_scan_roots(L, 100)
    s = eigenvalues(g, 100)
    assert np.max(np.abs(s.k - ref)) < 1e-8


# ---------------------------------------------------------------- sweep structure

def test_one_root_per_gap_and_residuals():
    g = make_graph([1.0, SQ2, math.sqrt(3.0), math.pi / 2, math.e / 2])
    s = eigenvalues(g, 2000)
    assert np.all(s.left.k < s.k) and np.all(s.k < s.right.k)
    assert np.array_equal(s.left.k[1:], s.right.k[:-1])
    assert np.all(s.residual < 1e-11)
    assert np.all(np.abs(s.z) / secular_derivative(s.k, g) <= 1e-10 * s.k)


def test_windowed_sweep_matches_single_window():
    g = make_graph([1.0, SQ2, math.sqrt(3.0)])
    a = eigenvalues(g, 1000, chunk=1 << 16)
    b = eigenvalues(g, 1000, chunk=77)
    assert np.array_equal(a.k, b.k)
    c = eigenvalues(g, 100, start=501)
    assert np.array_equal(c.k, a.k[500:600])
    assert np.array_equal(c.n, a.n[500:600])


def test_eigenvalues_between_keeps_indices():
    g = make_graph([1.0, SQ2, math.sqrt(3.0)])
    full = eigenvalues(g, 400)
    part = eigenvalues_between(g, 100.0, 200.0)
    i = np.searchsorted(full.k, 100.0)
    assert part.n[0] == full.n[i]
    assert np.array_equal(part.k, full.k[i:i + len(part)])


def test_solve_gap():
    g = make_graph([1.0])
    k, z, rel = solve_gap(g, 0.5 * math.pi, 1.5 * math.pi)
    assert k == pytest.approx(math.pi, rel=1e-15)


def test_coincident_poles_detected():
    with pytest.warns(RationalLengthWarning):
        g = make_graph([1.0, 3.0])
    with pytest.raises(CoincidentPoles):
        eigenvalues(g, 10)


def test_bad_counts():
    g = make_graph([1.0])
    with pytest.raises(BadRange):
        eigenvalues(g, 0)
    with pytest.raises(BadRange):
        eigenvalues(g, 3, start=0)


def test_weyl_bound():
    g = make_graph([1.0, SQ2, math.sqrt(3.0), math.sqrt(5.0)])
    s = eigenvalues(g, 3000)
    assert weyl_deviation(g, s) <= g.b + 1
    assert counting_function(s, s.k[99]) == 100
