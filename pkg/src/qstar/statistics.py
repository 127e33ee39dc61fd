"""Empirical distributions of matrix elements and their distance to the limit law."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BadRange
from .graph import SplitObservable, StarGraph, ensemble_graph, resolve_delta_l
from .limit import CdfTable
from ._trig import tan_sec2_np
from .spectrum import eigenvalues
from .wavefunction import indicator_elements


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted samples with a right-continuous ECDF."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float).ravel())
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return int(self.samples.shape[0])

    def __call__(self, x):
        """ECDF(x) = #{samples <= x} / N."""
        out = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(x) == 0 else out

    def left_limit(self, x):
        """#{samples < x} / N."""
        out = np.searchsorted(self.samples, np.asarray(x, dtype=float), side="left") / self.n
        return float(out) if np.ndim(x) == 0 else out

    def mean(self) -> float:
        return float(self.samples.mean())

    def variance(self) -> float:
        return float(self.samples.var())

    def histogram(self, bins=None, range_=None):
        """Density histogram; Freedman-Diaconis bin width unless ``bins`` is given."""
        if bins is None:
            q75, q25 = np.percentile(self.samples, [75, 25])
            width = 2.0 * (q75 - q25) / self.n ** (1.0 / 3.0)
            lo, hi = range_ if range_ is not None else (self.samples[0], self.samples[-1])
            bins = max(1, int(math.ceil((hi - lo) / width))) if width > 0 else 1
        return np.histogram(self.samples, bins=bins, range=range_, density=True)


def ecdf_of(samples) -> EmpiricalDistribution:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise BadRange("an empirical distribution needs at least one sample")
    return EmpiricalDistribution(x)


def collect_matrix_elements(graph: StarGraph, obs: SplitObservable, count: int,
                            use_leading: bool = True, spectrum=None) -> EmpiricalDistribution:
    """Indicator matrix elements over the first ``count`` eigenstates.

    ``use_leading`` selects the leading sec^2 ratio, the quantity whose
    distribution converges to the limit law; otherwise the exact value.
    """
    if count < 1:
        raise BadRange("count must be >= 1")
    spec = spectrum if spectrum is not None else eigenvalues(graph, count)
    exact, leading = indicator_elements(spec.k[:count], graph, obs)
    return ecdf_of(leading if use_leading else exact)


def weighted_sums(k, graph: StarGraph, obs: SplitObservable, chunk: int = 4096):
    """(U, V) per eigenvalue: U = sum of L_j sec^2(k L_j) off the observable, V on it."""
    if not obs.compatible(graph):
        raise BadRange(f"observable expects {obs.b} bonds, graph has {graph.b}")
    k = np.asarray(k, dtype=float)
    L = graph.lengths
    mask = obs.mask()
    U = np.empty(k.shape)
    V = np.empty(k.shape)
    for i in range(0, k.size, chunk):
        _, s2, _, _ = tan_sec2_np(k[i:i + chunk, None], L)
        w = L * s2
        V[i:i + chunk] = w[:, mask].sum(1)
        U[i:i + chunk] = w[:, ~mask].sum(1)
    return U, V


def x_eta_samples(k, graph: StarGraph, obs: SplitObservable, eta: float) -> np.ndarray:
    """Samples of X = (U - eta V) / (v^2 mean(L)), the variable whose density is
    :func:`qstar.limit.density_f_x_eta` in the large-v limit."""
    U, V = weighted_sums(k, graph, obs)
    return (U - eta * V) / (obs.v**2 * float(graph.lengths.mean()))


def sup_distance_to(ecdf: EmpiricalDistribution, cdf, grid=None) -> float:
    """sup |ECDF - F| for a callable CDF, checked at every sample (both one-sided
    limits of the ECDF) and at the optional grid points."""
    x = ecdf.samples
    F = np.asarray(cdf(x), dtype=float)
    # left limits are compared with left limits, so a jump in F is handled too
    F_left = np.asarray(cdf(np.nextafter(x, -np.inf)), dtype=float)
    d = max(np.abs(ecdf(x) - F).max(), np.abs(ecdf.left_limit(x) - F_left).max())
    if grid is not None:
        g = np.asarray(grid, dtype=float)
        d = max(d, float(np.abs(ecdf(g) - np.asarray(cdf(g), dtype=float)).max()))
    return float(min(1.0, d))


def sup_distance(ecdf: EmpiricalDistribution, cdf: CdfTable) -> float:
    """sup over samples and table grid points of |ECDF - F|, F interpolated linearly."""
    return sup_distance_to(ecdf, cdf, grid=cdf.R)


def ks_noise(n: int) -> float:
    """Typical sup-distance of an n-sample ECDF from its own CDF (about 0.87/sqrt(n))."""
    return 0.8687 / math.sqrt(n)


@dataclass
class ConvergenceEntry:
    v: int
    seed: int
    count: int
    delta_l: float
    D: float
    runtime: float


@dataclass
class ConvergenceReport:
    alpha: float
    entries: list = field(default_factory=list)

    def D(self, v: int) -> float:
        """Mean sup-distance over the seeds used for ``v``."""
        vals = [e.D for e in self.entries if e.v == v]
        if not vals:
            raise KeyError(v)
        return float(np.mean(vals))

    @property
    def v_list(self):
        return sorted({e.v for e in self.entries})


def convergence_study(v_list, alpha: int, seeds, count: int, cdf: CdfTable,
                      l_bar: float = 1.0, delta_l="auto", use_leading: bool = True,
                      keep_samples: dict | None = None) -> ConvergenceReport:
    """D_v = sup_R |ECDF_v(R) - F(R)| for each v (and seed), with fresh length samples."""
    v_list = list(v_list)
    if not v_list:
        raise BadRange("v_list must be nonempty")
    seeds = [seeds] if np.ndim(seeds) == 0 else list(seeds)
    report = ConvergenceReport(float(alpha))
    for v in v_list:
        for seed in seeds:
            t0 = time.perf_counter()
            dl = resolve_delta_l(int(v), int(alpha), count, l_bar, delta_l)
            g = ensemble_graph(int(v), int(alpha), l_bar=l_bar, delta_l=dl, seed=int(seed))
            emp = collect_matrix_elements(g, SplitObservable(int(v), int(alpha)), count, use_leading)
            d = sup_distance(emp, cdf)
            if keep_samples is not None:
                keep_samples[(int(v), int(seed))] = emp
            report.entries.append(ConvergenceEntry(int(v), int(seed), int(count), dl, d,
                                                   time.perf_counter() - t0))
    return report
