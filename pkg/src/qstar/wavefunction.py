"""Eigenfunctions psi_i(x) = A_i cos k(x - L_i) and their diagonal matrix elements.

At an eigenvalue the amplitudes are A_i = sec(k L_i) sqrt(2 / D) with
D = sum_j L_j sec^2(k L_j). Every sec^2-weighted sum is formed after dividing
by the largest sec^2, so states pinned between bunched poles (sec^2 beyond
1e20) stay finite.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit, prange
from ._trig import tan_sec2, tan_sec2_np
from .errors import (
    BadRange,
    PositionOutOfRange,
    QuadratureFailure,
    UnnormalizableState,
)
from .graph import SmoothObservable, SplitObservable, StarGraph, check_bond
from .quadrature import filon_legendre, gauss_panels
from .spectrum import DEFAULT_TOL, EigenvalueRecord


@dataclass(frozen=True)
class Eigenfunction:
    k: float
    amplitudes: np.ndarray
    graph: StarGraph
    tan: np.ndarray
    sec2_scaled: np.ndarray
    sec2_max: float

    @property
    def sec2(self) -> np.ndarray:
        return self.sec2_scaled * self.sec2_max

    def norm(self) -> float:
        """sum_i A_i^2 (L_i/2 + sin(2 k L_i) / (4 k)), the exact L2 norm squared."""
        L = self.graph.lengths
        a2 = self.amplitudes**2
        # sin(2x) = 2 tan(x) cos^2(x), and cos^2 = 1/sec^2.
        sin2 = 2.0 * self.tan / (self.sec2_scaled * self.sec2_max)
        return float(np.sum(a2 * (0.5 * L + sin2 / (4.0 * self.k))))


def _bond_terms(k: float, L: np.ndarray):
    t, s2, sgn, _ = tan_sec2_np(k, L)
    if not np.all(np.isfinite(s2)):
        raise UnnormalizableState(f"k={k!r} sits on a pole; sec^2 is infinite")
    m = float(s2.max())
    return t, s2 / m, sgn, m


def build_eigenfunction(rec: EigenvalueRecord | float, graph: StarGraph,
                        tol: float = DEFAULT_TOL) -> Eigenfunction:
    """Normalised eigenfunction for an eigenvalue record (or a bare k)."""
    if isinstance(rec, EigenvalueRecord):
        if not rec.residual < tol:
            raise BadRange(f"record residual {rec.residual:g} exceeds tolerance {tol:g}")
        k = rec.k
    else:
        k = float(rec)
    if not (math.isfinite(k) and k > 0):
        raise UnnormalizableState(f"k={k!r} is not a positive finite wavenumber")
    L = graph.lengths
    t, s, sgn, m = _bond_terms(k, L)
    d = float(np.sum(L * s))
    if not (d > 0 and math.isfinite(d)):
        raise UnnormalizableState(f"normalisation sum {d!r} at k={k!r}")
    # A_i = sec(kL_i) sqrt(2/D) with sec = sgn * sqrt(sec^2); rescaled by sqrt(m) / sqrt(m).
    amp = sgn * np.sqrt(2.0 * s / d)
    return Eigenfunction(k, amp, graph, t, s, m)


def eval_psi(ef: Eigenfunction, bond: int, x):
    """psi_bond(x) = A_bond cos(k (x - L_bond)) for 0 <= x <= L_bond."""
    check_bond(bond, ef.graph.b)
    Lb = ef.graph.lengths[bond - 1]
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > Lb):
        raise PositionOutOfRange(f"x outside [0, {Lb}] on bond {bond}")
    out = ef.amplitudes[bond - 1] * np.cos(ef.k * (xa - Lb))
    return float(out) if np.ndim(x) == 0 else out


def eval_dpsi(ef: Eigenfunction, bond: int, x):
    """Derivative of psi_bond at x."""
    check_bond(bond, ef.graph.b)
    Lb = ef.graph.lengths[bond - 1]
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > Lb):
        raise PositionOutOfRange(f"x outside [0, {Lb}] on bond {bond}")
    out = -ef.k * ef.amplitudes[bond - 1] * np.sin(ef.k * (xa - Lb))
    return float(out) if np.ndim(x) == 0 else out


def matrix_element_indicator(ef: Eigenfunction, obs: SplitObservable | np.ndarray) -> float:
    """Exact <psi|B|psi> for an indicator of bonds.

    Equal to sum_{i in B}(L_i sec^2 + tan/k) / sum_j L_j sec^2, the leading
    ratio of sec^2-weighted lengths plus its tan/k correction. ``obs`` is a
    :class:`SplitObservable` or a boolean mask over bonds.
    """
    mask = _mask(obs, ef.graph)
    L = ef.graph.lengths
    num = np.sum(L[mask] * ef.sec2_scaled[mask] + ef.tan[mask] / (ef.k * ef.sec2_max))
    return float(num / np.sum(L * ef.sec2_scaled))


def matrix_element_leading(ef: Eigenfunction, obs: SplitObservable | np.ndarray) -> float:
    """Leading term sum_{i in B} L_i sec^2 / sum_j L_j sec^2, dropping the O(1/k) part."""
    mask = _mask(obs, ef.graph)
    L = ef.graph.lengths
    return float(np.sum(L[mask] * ef.sec2_scaled[mask]) / np.sum(L * ef.sec2_scaled))


def _mask(obs, graph: StarGraph) -> np.ndarray:
    if isinstance(obs, SplitObservable):
        if not obs.compatible(graph):
            raise BadRange(f"observable expects {obs.b} bonds, graph has {graph.b}")
        return obs.mask()
    m = np.asarray(obs, dtype=bool)
    if m.shape != (graph.b,):
        raise BadRange("bond mask has the wrong length")
    return m


@njit(parallel=True)
def _indicator_many_nb(k, L, mask, out_exact, out_leading):
    b = L.shape[0]
    for n in prange(k.shape[0]):
        kn = k[n]
        smax = 0.0
        for j in range(b):
            _t, s2, _g, _d = tan_sec2(kn, L[j])
            if s2 > smax:
                smax = s2
        num = 0.0
        corr = 0.0
        den = 0.0
        for j in range(b):
            t, s2, _g, _d = tan_sec2(kn, L[j])
            w = L[j] * (s2 / smax)
            den += w
            if mask[j]:
                num += w
                corr += t / (kn * smax)
        out_leading[n] = num / den
        out_exact[n] = (num + corr) / den


def _indicator_many_np(k, L, mask, chunk=1 << 20):
    n = k.shape[0]
    exact = np.empty(n)
    leading = np.empty(n)
    rows = max(1, chunk // max(1, L.shape[0]))
    for s in range(0, n, rows):
        kk = k[s:s + rows]
        t, s2, _, _ = tan_sec2_np(kk[:, None], L)
        smax = s2.max(axis=1, keepdims=True)
        w = L * (s2 / smax)
        den = w.sum(axis=1)
        num = w[:, mask].sum(axis=1)
        corr = (t[:, mask] / (kk[:, None] * smax)).sum(axis=1)
        leading[s:s + rows] = num / den
        exact[s:s + rows] = (num + corr) / den
    return exact, leading


def indicator_elements(k, graph: StarGraph, obs: SplitObservable | np.ndarray):
    """Exact and leading indicator matrix elements for an array of eigenvalues."""
    k = np.ascontiguousarray(np.asarray(k, dtype=np.float64))
    mask = np.ascontiguousarray(_mask(obs, graph))
    if _accel.use_numba():
        exact = np.empty_like(k)
        leading = np.empty_like(k)
        _indicator_many_nb(k, graph.lengths, mask, exact, leading)
        return exact, leading
    return _indicator_many_np(k, graph.lengths, mask)


def norms(k, graph: StarGraph) -> np.ndarray:
    """sum_i integral |psi_i|^2 for each k, computed from the amplitudes."""
    exact, _ = indicator_elements(k, graph, np.ones(graph.b, dtype=bool))
    return exact


# ---------------------------------------------------------------- smooth f

MAX_GAUSS_PERIODS = 20000


def _bond_integrals(f, L: float, k: float, tol: float):
    """Return (int_0^L f, int_0^L cos(2k(x - L)) f) for one bond."""
    plain = f.integral(L)
    if plain is None:
        plain = gauss_panels(f, 0.0, L, 8, tol)
    periods = 2.0 * k * L / (2.0 * math.pi)
    if periods <= MAX_GAUSS_PERIODS:
        # At least ten Gauss nodes per period of cos(2kx), doubled until stable.
        panels = max(8, int(math.ceil(periods)))

        def g(x):
            return np.cos(2.0 * k * (x - L)) * f(x)

        osc = gauss_panels(g, 0.0, L, panels, tol)
    else:
        # Too many periods to sample directly: expand f in Legendre series per
        # panel and integrate against exp(2ik(x - L)) exactly.
        val = filon_legendre(f, 0.0, L, 2.0 * k, shift=L, tol=tol)
        osc = val.real
    return plain, osc


def oscillatory_parts(ef: Eigenfunction, f: SmoothObservable, tol: float = 1e-9):
    """Per-bond (int f_i, int cos 2k(x - L_i) f_i) pairs."""
    f.check(ef.graph)
    return [
        _bond_integrals(fi, float(L), ef.k, tol)
        for fi, L in zip(f.functions, ef.graph.lengths)
    ]


def matrix_element_smooth(ef: Eigenfunction, f: SmoothObservable, tol: float = 1e-9) -> float:
    """<psi|f|psi> = sum_i (A_i^2 / 2)(int f_i + int cos 2k(x - L_i) f_i(x) dx)."""
    parts = oscillatory_parts(ef, f, tol)
    a2 = ef.amplitudes**2
    total = 0.0
    for (plain, osc), a in zip(parts, a2):
        total += 0.5 * a * (plain + osc)
    if not math.isfinite(total):
        raise QuadratureFailure("non-finite smooth matrix element")
    return float(total)


def oscillatory_term(ef: Eigenfunction, f: SmoothObservable, tol: float = 1e-9) -> float:
    """sum_i (A_i^2/2) int cos 2k(x - L_i) f_i, the part that decays like 1/k."""
    parts = oscillatory_parts(ef, f, tol)
    return float(sum(0.5 * a * osc for (_, osc), a in zip(parts, ef.amplitudes**2)))
