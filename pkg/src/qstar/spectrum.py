"""Poles and roots of the secular function Z(k) = sum_j tan(k L_j).

Every bond contributes poles at pi (m + 1/2) / L_j. Z increases strictly
between consecutive poles, running from -inf to +inf, so the n-th positive
eigenvalue k_n is the unique root in the gap between the n-th and (n+1)-th
pole of the merged lattice.

Residuals are reported as ``|Z(k)| / (k Z'(k))``, the relative size of the
Newton correction still available at ``k``. The raw value of Z is kept as
well; near bunched poles Z' can exceed 1e10 and |Z| at the nearest double
then sits far above any absolute tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._roots import bisection_steps, solve_gaps_nb, solve_gaps_np
from ._trig import secular_and_slope, secular_and_slope_np
from .errors import BadRange, CoincidentPoles, NoConvergence, PoleProximity
from .graph import StarGraph

DEFAULT_TOL = 1e-11
DEFAULT_MAXITER = 200
BISECT_FRAC = 1e-6
COINCIDENT_REL = 1e-13
GUARD_REL = 1e-12


@dataclass(frozen=True)
class Pole:
    """Pole pi (order + 1/2) / L_bond of tan(k L_bond); ``bond`` is 1-based."""

    k: float
    bond: int
    order: int


@dataclass(frozen=True)
class EigenvalueRecord:
    n: int
    k: float
    left_pole: Pole
    right_pole: Pole
    residual: float
    z: float


class PoleSet:
    """Sorted poles of all bonds in an interval, stored column-wise."""

    def __init__(self, k, bond, order):
        self.k = k
        self.bond = bond
        self.order = order

    def __len__(self):
        return int(self.k.shape[0])

    def __getitem__(self, i):
        if isinstance(i, slice):
            return PoleSet(self.k[i], self.bond[i], self.order[i])
        return Pole(float(self.k[i]), int(self.bond[i]), int(self.order[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def coincident(self) -> np.ndarray:
        """Mask of poles closer than 1e-13 k to their right neighbour."""
        m = np.zeros(len(self), dtype=bool)
        if len(self) > 1:
            m[:-1] = np.diff(self.k) < COINCIDENT_REL * self.k[1:]
        return m


class Spectrum:
    """Column-wise eigenvalue records; indexing yields :class:`EigenvalueRecord`."""

    def __init__(self, n, k, residual, z, left: PoleSet, right: PoleSet, iterations=None):
        self.n = n
        self.k = k
        self.residual = residual
        self.z = z
        self.left = left
        self.right = right
        self.iterations = iterations

    def __len__(self):
        return int(self.k.shape[0])

    def __getitem__(self, i):
        if isinstance(i, slice):
            it = None if self.iterations is None else self.iterations[i]
            return Spectrum(self.n[i], self.k[i], self.residual[i], self.z[i],
                            self.left[i], self.right[i], it)
        return EigenvalueRecord(int(self.n[i]), float(self.k[i]), self.left[i], self.right[i],
                                float(self.residual[i]), float(self.z[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @staticmethod
    def concat(parts):
        parts = list(parts)
        cat = np.concatenate
        return Spectrum(
            cat([p.n for p in parts]), cat([p.k for p in parts]),
            cat([p.residual for p in parts]), cat([p.z for p in parts]),
            PoleSet(cat([p.left.k for p in parts]), cat([p.left.bond for p in parts]),
                    cat([p.left.order for p in parts])),
            PoleSet(cat([p.right.k for p in parts]), cat([p.right.bond for p in parts]),
                    cat([p.right.order for p in parts])),
            cat([p.iterations for p in parts]),
        )


def secular(k, graph: StarGraph, guard: float | None = None):
    """Z(k) = sum_j tan(k L_j), refusing arguments within ``guard`` of a pole.

    ``guard`` defaults to 1e-12 k. Accepts a scalar or an array of k.
    """
    L = graph.lengths
    scalar = np.ndim(k) == 0
    kk = np.atleast_1d(np.asarray(k, dtype=np.float64))
    if _accel.use_numba() and scalar:
        z, _, d = secular_and_slope(float(kk[0]), L)
        z, d = np.array([z]), np.array([d])
    else:
        z, _, d = secular_and_slope_np(kk, L)
    g = GUARD_REL * kk if guard is None else np.full_like(kk, guard)
    if np.any(d < g):
        bad = kk[np.argmax(d < g)]
        raise PoleProximity(f"k={bad!r} lies within {g.max():.3g} of a pole")
    return float(z[0]) if scalar else z


def secular_derivative(k, graph: StarGraph):
    """Z'(k) = sum_j L_j sec^2(k L_j)."""
    _, dz, _ = secular_and_slope_np(np.asarray(k, dtype=np.float64), graph.lengths)
    return float(dz) if np.ndim(k) == 0 else dz


def pole_count(graph: StarGraph, K: float) -> int:
    """Number of poles in (0, K]."""
    if K <= 0:
        return 0
    m = np.floor(K * graph.lengths / math.pi + 0.5)
    return int(np.maximum(m, 0).sum())


def poles_in(graph: StarGraph, k_lo: float, k_hi: float) -> PoleSet:
    """All poles in the open interval (k_lo, k_hi), merged and sorted."""
    if not (0 <= k_lo < k_hi):
        raise BadRange(f"need 0 <= k_lo < k_hi, got ({k_lo}, {k_hi})")
    ks, bs, os_ = [], [], []
    for j, Lj in enumerate(graph.lengths):
        m0 = max(0, int(math.floor(k_lo * Lj / math.pi - 0.5)))
        m1 = int(math.ceil(k_hi * Lj / math.pi - 0.5)) + 1
        m = np.arange(m0, m1, dtype=np.int64)
        p = math.pi * (m + 0.5) / Lj
        keep = (p > k_lo) & (p < k_hi)
        ks.append(p[keep])
        os_.append(m[keep])
        bs.append(np.full(int(keep.sum()), j + 1, dtype=np.int64))
    k = np.concatenate(ks)
    order = np.argsort(k, kind="stable")
    return PoleSet(k[order], np.concatenate(bs)[order], np.concatenate(os_)[order])


def pole_rank(graph: StarGraph, pole: Pole) -> int:
    """1-based rank of ``pole`` in the merged pole lattice.

    The pole's own bond contributes exactly order + 1 poles up to and including
    it, avoiding a floor() right on top of a pole.
    """
    L = graph.lengths
    m = np.floor(pole.k * L / math.pi + 0.5)
    m = np.maximum(m, 0)
    m[pole.bond - 1] = pole.order + 1
    return int(m.sum())


def _safe_cut(graph: StarGraph, K: float) -> float:
    """Nudge K downwards until it is not numerically on top of a pole."""
    L = graph.lengths
    for _ in range(64):
        x = K * L / math.pi + 0.5
        if np.all(np.abs(x - np.rint(x)) > 1e-7) or K <= 0:
            return K
        K -= 1e-5 * math.pi / L.max()
    return K


def consecutive_poles(graph: StarGraph, n: int, m: int) -> PoleSet:
    """The poles with 1-based ranks n, n+1, ..., n+m-1."""
    if n < 1 or m < 1:
        raise BadRange("pole ranks start at 1")
    S = graph.total_length
    b = graph.b
    k_a = _safe_cut(graph, max(0.0, math.pi * (n - b - 1) / S))
    c_a = pole_count(graph, k_a)
    k_b = math.pi * (n + m + b + 1) / S
    ps = poles_in(graph, k_a, k_b)
    off = n - c_a - 1
    if off < 0 or off + m > len(ps):  # pragma: no cover - bounds above are generous
        raise RuntimeError("pole window too small")
    return ps[off:off + m]


def nth_pole(graph: StarGraph, n: int) -> Pole:
    return consecutive_poles(graph, n, 1)[0]


def _solve(lo, hi, L, tol, maxiter):
    n_bis = bisection_steps(BISECT_FRAC)
    if _accel.use_numba():
        k = np.empty(lo.shape[0])
        z = np.empty_like(k)
        rel = np.empty_like(k)
        it = np.empty(lo.shape[0], dtype=np.int64)
        solve_gaps_nb(lo, hi, L, n_bis, maxiter, k, z, rel, it)
    else:
        k, z, rel, it = solve_gaps_np(lo, hi, L, n_bis, maxiter)
    bad = ~(rel <= tol)
    if bad.any():
        i = int(np.argmax(bad))
        raise NoConvergence(
            f"root in gap ({lo[i]!r}, {hi[i]!r}) reached residual {rel[i]:.3g} "
            f"after {it[i]} iterations (tol {tol:g}, budget {maxiter})"
        )
    return k, z, rel, it


def solve_gap(graph: StarGraph, lo: float, hi: float, tol: float = DEFAULT_TOL,
              maxiter: int = DEFAULT_MAXITER):
    """Root of Z inside a single pole-free interval (lo, hi): returns (k, z, residual)."""
    k, z, rel, _ = _solve(np.array([lo], dtype=float), np.array([hi], dtype=float),
                          graph.lengths, tol, maxiter)
    return float(k[0]), float(z[0]), float(rel[0])


def eigenvalues(graph: StarGraph, count: int, start: int = 1, tol: float = DEFAULT_TOL,
                maxiter: int = DEFAULT_MAXITER, chunk: int = 1 << 16) -> Spectrum:
    """Eigenvalues k_start, ..., k_{start+count-1}, one per inter-pole gap.

    The sweep runs over windows of ``chunk`` gaps so memory stays bounded for
    long spectra. Raises :class:`CoincidentPoles` when two poles are closer
    than 1e-13 k (commensurate lengths) and :class:`NoConvergence` when a root
    misses ``tol`` within ``maxiter`` iterations.
    """
    if count < 1:
        raise BadRange("count must be >= 1")
    if start < 1:
        raise BadRange("start must be >= 1")
    L = graph.lengths
    parts = []
    for s in range(start, start + count, chunk):
        w = min(chunk, start + count - s)
        ps = consecutive_poles(graph, s, w + 1)
        gap = np.diff(ps.k)
        close = gap < COINCIDENT_REL * ps.k[1:]
        if close.any():
            i = int(np.argmax(close))
            raise CoincidentPoles(
                f"poles of bonds {ps.bond[i]} and {ps.bond[i + 1]} coincide near k={ps.k[i]!r}"
            )
        lo, hi = ps.k[:-1], ps.k[1:]
        k, z, rel, it = _solve(lo, hi, L, tol, maxiter)
        parts.append(Spectrum(np.arange(s, s + w, dtype=np.int64), k, rel, z,
                              ps[:-1], ps[1:], it))
    return parts[0] if len(parts) == 1 else Spectrum.concat(parts)


def eigenvalues_between(graph: StarGraph, k_lo: float, k_hi: float, **kw) -> Spectrum:
    """All eigenvalues in [k_lo, k_hi], carrying their global indices."""
    if not (0 <= k_lo < k_hi):
        raise BadRange(f"need 0 <= k_lo < k_hi, got ({k_lo}, {k_hi})")
    first = max(1, pole_count(graph, k_lo))
    last = max(first, pole_count(graph, k_hi))
    spec = eigenvalues(graph, last - first + 1, start=first, **kw)
    keep = (spec.k >= k_lo) & (spec.k <= k_hi)
    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        return spec[0:0]
    return spec[int(idx[0]):int(idx[-1]) + 1]


def counting_function(spec: Spectrum, K):
    """N(K): how many of the computed eigenvalues (starting at k_1) are <= K."""
    return np.searchsorted(spec.k, np.asarray(K, dtype=float), side="right")


def weyl_deviation(graph: StarGraph, spec: Spectrum) -> float:
    """sup over 0 < K <= k_last of |N(K) - K sum(L) / pi| for a spectrum from k_1.

    Between eigenvalues the difference is linear in K, so the supremum is
    attained at an eigenvalue, from the left or from the right.
    """
    if len(spec) == 0 or spec.n[0] != 1:
        raise BadRange("weyl_deviation needs a spectrum starting at k_1")
    smooth = spec.k * graph.total_length / math.pi
    n = spec.n.astype(float)
    return float(max(np.abs(n - smooth).max(), np.abs(n - 1 - smooth).max()))
