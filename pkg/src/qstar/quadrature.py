"""Quadrature helpers: composite Gauss-Legendre, chirp panels and Filon-Legendre.

Integrals over xi of a chirp exp(i omega xi^2) times a slowly varying factor
become integrals over nu = xi^2 with a linear phase. Panels are laid out
uniformly in nu (a fixed number per period of the fastest phase) and the
Gauss nodes are placed in xi on each panel, which avoids the nu^{-1/2}
singularity at the origin. Beyond the cutoff the factor is replaced by its
power-log asymptote and integrated term by term (repeated integration by
parts).
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander

from .errors import QuadratureFailure


@lru_cache(maxsize=32)
def gauss_rule(order: int):
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(breaks: np.ndarray, order: int = 10):
    """Gauss nodes and weights on consecutive panels [breaks[j], breaks[j+1]]."""
    t, w = gauss_rule(order)
    lo = breaks[:-1, None]
    hi = breaks[1:, None]
    half = 0.5 * (hi - lo)
    x = half * t + (lo + half)
    return x, half * w


def composite_gauss(f, a: float, b: float, panels: int, order: int = 10):
    x, w = panel_nodes(np.linspace(a, b, panels + 1), order)
    return np.sum(w * f(x))


def gauss_panels(f, a: float, b: float, panels: int, tol: float = 1e-9, order: int = 10,
                 max_doublings: int = 10):
    """Composite Gauss-Legendre, doubling the panel count until two passes agree."""
    prev = composite_gauss(f, a, b, panels, order)
    scale = max(1.0, abs(prev))
    for _ in range(max_doublings):
        panels *= 2
        cur = composite_gauss(f, a, b, panels, order)
        if abs(cur - prev) <= tol * scale:
            return cur
        prev = cur
        scale = max(1.0, abs(cur))
    raise QuadratureFailure(f"Gauss panels did not reach tol {tol:g} on [{a}, {b}]")


def filon_legendre(f, a: float, b: float, omega: float, shift: float = 0.0,
                   tol: float = 1e-9, order: int = 16, panels: int = 2,
                   max_doublings: int = 10) -> complex:
    """int_a^b f(x) exp(i omega (x - shift)) dx for smooth, non-oscillatory f.

    On each panel f is projected onto Legendre polynomials P_n(t), whose
    Fourier moments are known exactly:
    int_{-1}^{1} P_n(t) exp(i theta t) dt = 2 i^n j_n(theta).
    The number of panels doubles until two passes agree to ``tol``.
    """
    from scipy.special import spherical_jn

    t, w = gauss_rule(order)
    vander = legvander(t, order - 1)  # (order, order): P_n(t_j)
    n = np.arange(order)
    proj = vander.T * w * (2 * n[:, None] + 1) / 2.0  # a_n = proj @ f(t)
    ipow = (1j) ** n

    def run(m):
        edges = np.linspace(a, b, m + 1)
        c = 0.5 * (edges[:-1] + edges[1:])
        h = 0.5 * (edges[1:] - edges[:-1])
        fx = f(c[:, None] + h[:, None] * t)
        coef = fx @ proj.T
        theta = omega * h
        jn = spherical_jn(n[None, :], theta[:, None])
        mom = 2.0 * ipow * jn
        return np.sum(h * np.exp(1j * omega * (c - shift)) * np.sum(coef * mom, axis=1))

    prev = run(panels)
    for _ in range(max_doublings):
        panels *= 2
        cur = run(panels)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return complex(cur)
        prev = cur
    raise QuadratureFailure(f"Filon-Legendre did not reach tol {tol:g}")


def chirp_breaks(V: float, freqs, per_period: int = 2, fine=None) -> np.ndarray:
    """Panel edges in nu on [0, V].

    ``freqs`` are angular frequencies in nu; the panel width is set by the
    fastest. ``fine`` is an optional (omega, nu_max) pair adding a denser grid
    on [0, nu_max] for a fast phase that only matters near the origin.
    """
    fmax = max(abs(f) for f in freqs)
    width = 2.0 * math.pi / (per_period * fmax)
    n = max(4, int(math.ceil(V / width)))
    n += (-n) % 4  # keep V/4 on a panel edge so halving the cutoff reuses panels
    edges = np.linspace(0.0, V, n + 1)
    if fine is not None:
        om, top = fine
        top = min(V, top)
        w2 = 2.0 * math.pi / (per_period * abs(om))
        if w2 < width and top > 0:
            extra = np.arange(0.0, top, w2)
            edges = np.unique(np.concatenate([edges, extra]))
    return edges


def chirp_panel_sums(func, nu_breaks: np.ndarray, order: int = 10, chunk: int = 1 << 18):
    """Per-panel Gauss sums of func(xi) over xi-panels sqrt(nu_breaks)."""
    xb = np.sqrt(nu_breaks)
    npan = xb.shape[0] - 1
    out = np.empty(npan, dtype=complex)
    step = max(1, chunk // order)
    for s in range(0, npan, step):
        e = min(npan, s + step)
        x, w = panel_nodes(xb[s:e + 1], order)
        out[s:e] = np.sum(w * func(x), axis=1)
    return out


def chirp_tail(omega: float, V: float, c0: complex, c1: complex = 0.0, a: float = 0.5,
               nterms: int = 12) -> complex:
    """int_V^inf exp(i omega nu) nu^{-a} (c0 + c1 ln nu) d nu by integration by parts.

    The k-th derivative of nu^{-a}(A + B ln nu) is nu^{-a-k}(A_k + B_k ln nu)
    with A_{k+1} = (-a-k) A_k + B_k and B_{k+1} = (-a-k) B_k. The asymptotic
    series is stopped at its smallest term.
    """
    if omega == 0:
        raise ValueError("chirp_tail needs a nonzero frequency")
    A, B = complex(c0), complex(c1)
    lv = math.log(V)
    s = 0.0j
    last = math.inf
    io = 1j * omega
    for k in range(nterms):
        g = V ** (-a - k) * (A + B * lv)
        term = (-1) ** k * g / io ** (k + 1)
        if abs(term) > last:
            break
        s += term
        last = abs(term)
        A, B = (-a - k) * A + B, (-a - k) * B
    return -np.exp(1j * omega * V) * s
