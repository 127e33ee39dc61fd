"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line
(collected again in the terminal summary)."""
import cmath
import math
import time

import numpy as np
import pytest
from scipy.integrate import quad

from qstar.graph import SplitObservable, ensemble_graph, make_graph
from qstar.limit import (LimitParams, cdf_table, density_mass_below_zero, f_tilde_with_error,
                         p_integral, qe_step_cdf, r_grid, tau_eta, tau_star)
from qstar.scars import in_sweep, scar_sequence
from qstar.special import faddeeva_w, integral_zw, integral_zw_real_limit
from qstar.spectrum import eigenvalues, weyl_deviation
from qstar.statistics import (collect_matrix_elements, convergence_study, ks_noise, sup_distance,
                              sup_distance_to, x_eta_samples)
from qstar.wavefunction import build_eigenfunction, eval_psi, norms

SQ2 = math.sqrt(2.0)


@pytest.fixture(scope="module")
def table_alpha3():
    t0 = time.perf_counter()
    return cdf_table(3.0, r_grid()), time.perf_counter() - t0


@pytest.fixture(scope="module")
def table_alpha2():
    t0 = time.perf_counter()
    return cdf_table(2.0, r_grid()), time.perf_counter() - t0


@pytest.fixture(scope="module")
def graph90():
    return ensemble_graph(30, 3, count=10_000, seed=2024)


def test_criterion_01_closed_form_spectra(acceptance):
    eigenvalues(make_graph([1.0]), 1)  # compile / load cached kernels
    t0 = time.perf_counter()
    n = np.arange(1, 101)
    one = eigenvalues(make_graph([1.0]), 100).k
    two = eigenvalues(make_graph([1.0, SQ2]), 100).k
    dt = time.perf_counter() - t0
    e1 = np.max(np.abs(one / (n * math.pi) - 1))
    e2 = np.max(np.abs(two / (n * math.pi / (1 + SQ2)) - 1))
    ok = e1 < 1e-10 and e2 < 1e-10 and dt < 1.0
    acceptance(1, "closed-form spectra", ok,
               f"rel err {e1:.1e} / {e2:.1e} (< 1e-10), {dt:.3f} s (< 1 s)")
    assert ok


def test_criterion_02_normalisation(acceptance, graph90):
    t0 = time.perf_counter()
    s = eigenvalues(graph90, 10_000)
    dev = np.abs(norms(s.k, graph90) - 1.0)
    # second route: adaptive quadrature of |psi|^2 bond by bond on a sample
    quad_dev = 0.0
    for i in (0, 1, 99, 4999, 9999):
        ef = build_eigenfunction(s[i], graph90)
        tot = sum(quad(lambda x: eval_psi(ef, b, x) ** 2, 0.0, L, limit=200, epsabs=1e-15, epsrel=1e-13)[0]
                  for b, L in enumerate(graph90.lengths, start=1))
        quad_dev = max(quad_dev, abs(tot - 1.0))
    dt = time.perf_counter() - t0
    ok = dev.max() < 1e-9 and quad_dev < 1e-9 and dt < 60
    acceptance(2, "exact normalisation", ok,
               f"max |norm-1| {dev.max():.1e}, quadrature {quad_dev:.1e} (< 1e-9), {dt:.1f} s")
    assert ok


def test_criterion_03_weyl(acceptance, graph90):
    s = eigenvalues(graph90, 10_000)
    d = weyl_deviation(graph90, s)
    # independent count on a dense grid of K
    K = np.linspace(0.01, s.k[-1], 200_001)
    grid_dev = np.max(np.abs(np.searchsorted(s.k, K, side="right") - K * graph90.total_length / math.pi))
    ok = d <= 91 and grid_dev <= 91
    acceptance(3, "Weyl count", ok, f"sup |N(K) - K sum L/pi| = {d:.2f} (grid {grid_dev:.2f}) <= 91")
    assert ok


def test_criterion_04_special_functions(acceptance):
    e0 = abs(faddeeva_w(0j) - 1.0)
    r = np.geomspace(0.01, 20, 10)
    t = np.linspace(-math.pi / 4 + 0.01, 5 * math.pi / 4 - 0.01, 10)
    z = (r[:, None] * np.exp(1j * t[None, :])).ravel()
    rhs = 2 * np.exp(-z * z)
    refl = np.max(np.abs(faddeeva_w(z) + faddeeva_w(-z) - rhs) / np.maximum(1, np.abs(rhs)))
    # closed form: sqrt(pi)/2 - arg z/sqrt(pi) + i (log(2|z|R) + gamma/2)/sqrt(pi) + O(1/(|z|R)^2);
    # the imaginary constant is the large-X limit of int_0^X Dawson - log(X)/2 = (gamma + 2 log 2)/4
    R = 10.0
    worst = 0.0
    for a in (-0.7, -0.2, 0.0, 0.8, math.pi / 2, 2.5, 3.8):
        for mod in (5.0, 12.0, 40.0):
            zz = mod * cmath.exp(1j * a)
            closed = complex(integral_zw_real_limit(zz),
                             (math.log(2 * mod * R) + np.euler_gamma / 2) / math.sqrt(math.pi))
            worst = max(worst, abs(integral_zw(zz, R) - closed) * (mod * R) ** 2)
    ok = e0 < 1e-12 and refl < 1e-10 and worst <= 3.0
    acceptance(4, "special functions", ok,
               f"|w(0)-1| {e0:.1e}, reflection {refl:.1e}, closed-form error "
               f"{worst:.2f} x remainder (<= 3)")
    assert ok


def test_criterion_05_limit_internals(acceptance):
    p_err = 0.0
    tau_gap = math.inf
    slopes = []
    xi_dense = np.linspace(-200, 200, 40_001)
    xi_tail = np.geomspace(10, 100, 400)
    for eta in (0.5, 1.0, 2.0):
        for a in (2.0, 3.0):
            prm = LimitParams(alpha=a, eta=eta)
            p_err = max(p_err, abs(p_integral(prm) - 2 * a))
            tau_gap = min(tau_gap, float(np.min(tau_eta(xi_dense, prm).real)) - tau_star(prm))
            d = np.abs(tau_eta(xi_tail, prm) - a * xi_tail)
            slopes.append(np.polyfit(np.log(xi_tail), np.log(d), 1)[0])
    ok = p_err < 1e-6 and tau_gap >= -1e-12 and all(-2.5 <= s <= -1.5 for s in slopes)
    acceptance(5, "limit-distribution internals", ok,
               f"|int P - 2 alpha| {p_err:.1e}, min(Re tau - tau*) {tau_gap:.2e}, "
               f"slopes {min(slopes):.2f}..{max(slopes):.2f}")
    assert ok


@pytest.mark.slow
def test_criterion_06_figure5(acceptance, table_alpha3):
    table, t_table = table_alpha3
    t0 = time.perf_counter() - t_table
    g = ensemble_graph(30, 3, count=100_000, seed=0)
    e = collect_matrix_elements(g, SplitObservable(30, 3), 100_000)
    d = sup_distance(e, table)
    d_qe = sup_distance_to(e, lambda r: qe_step_cdf(r, 3))
    dt = time.perf_counter() - t0
    ok = d < 0.05 and d_qe > 0.1 and dt < 600
    acceptance(6, "figure 5 reproduction", ok,
               f"D(ECDF, F) {d:.4f} (< 0.05), D(ECDF, step) {d_qe:.3f} (> 0.1), {dt:.1f} s "
               f"incl. F table")
    assert ok


@pytest.mark.slow
def test_criterion_07_figure6(acceptance, table_alpha3):
    table, t_table = table_alpha3
    t0 = time.perf_counter() - t_table
    rep = convergence_study([5, 10, 15, 20, 25, 30], 3, [0], 50_000, table)
    dt = time.perf_counter() - t0
    ds = {v: rep.D(v) for v in rep.v_list}
    ok = ds[30] < ds[5] and dt < 1800
    acceptance(7, "figure 6 reproduction", ok,
               "D_v " + ", ".join(f"{v}:{d:.4f}" for v, d in ds.items())
               + f"; {dt:.1f} s incl. F table")
    assert ok


def test_criterion_08_scars(acceptance):
    t0 = time.perf_counter()
    g = make_graph([1.0, 4 * SQ2, 3 * math.sqrt(3), 2.5 * math.sqrt(5), 1.7 * math.pi])
    certs = scar_sequence(g, 1, 2, [0.2, 0.1, 0.05, 0.02], budget=10**7)
    masses = [c.mass for c in certs]
    swept = all(in_sweep(g, c) for c in certs)
    res = max(c.residual for c in certs)
    dt = time.perf_counter() - t0
    ok = (len(certs) == 4 and all(b > a for a, b in zip(masses, masses[1:]))
          and masses[-1] >= 0.95 and 0.8 <= certs[-1].ratio <= 1.25
          and res < 1e-10 and swept and dt < 300)
    acceptance(8, "scars", ok,
               "m " + ", ".join(f"{m:.6f}" for m in masses)
               + f"; ratio {certs[-1].ratio:.5f}; residual {res:.1e}; in sweep {swept}; {dt:.2f} s")
    assert ok


@pytest.mark.slow
def test_criterion_09_density_vs_ftilde(acceptance):
    worst = 0.0
    parts = []
    for eta in (0.5, 1.0, 2.0):
        prm = LimitParams(alpha=2.0, eta=eta)
        mass, _ = density_mass_below_zero(prm)
        ft, _ = f_tilde_with_error(eta, prm)
        worst = max(worst, abs(mass - ft))
        parts.append(f"eta={eta}: {mass:.6f} vs {ft:.6f}")
    ok = worst < 1e-3
    acceptance(9, "density mass vs F-tilde", ok, "; ".join(parts) + f"; max diff {worst:.1e}")
    assert ok


@pytest.fixture(scope="module")
def v200():
    t0 = time.perf_counter()
    g = ensemble_graph(200, 2, count=200_000, seed=0)
    s = eigenvalues(g, 200_000)
    e = collect_matrix_elements(g, SplitObservable(200, 2), 200_000, spectrum=s)
    return g, s, e, time.perf_counter() - t0


@pytest.mark.slow
def test_criterion_10_monte_carlo(acceptance, table_alpha2, v200):
    table, t_table = table_alpha2
    g, s, e, dt = v200
    dt += t_table
    d = sup_distance(e, table)
    ok = d < 0.03 and dt < 1800
    acceptance(10, "v=200 Monte-Carlo", ok,
               f"D(ECDF, F) {d:.4f} (< 0.03; KS noise {ks_noise(e.n):.4f}), {dt:.1f} s incl. F table")
    assert ok


@pytest.mark.slow
def test_density_matches_simulated_histogram(v200):
    from qstar.limit import density_f_x_eta

    g, s, _, _ = v200
    x = x_eta_samples(s.k, g, SplitObservable(200, 2), 1.0)
    edges = np.linspace(-4.0, 0.0, 21)
    h, _ = np.histogram(x, edges)
    h = h / (x.size * np.diff(edges))
    mid = 0.5 * (edges[1:] + edges[:-1])
    f = density_f_x_eta(mid, LimitParams(alpha=2.0, eta=1.0))
    assert np.max(np.abs(h - f)) < 0.05
