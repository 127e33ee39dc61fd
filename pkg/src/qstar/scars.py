"""Scarred eigenfunctions that concentrate on a pair of bonds.

Let p_n = pi (n + 1/2) / L_1 be the poles of bond i1 (written as bond 1).
Stepping n -> n + 1 shifts p_n by pi / L_1, so its offset from the pole
lattice (or node lattice) of another bond i is an irrational rotation on a
circle of length pi / L_i:

* delta_{n,i} = signed distance from p_n to the nearest pole of bond i;
* eta_{n,j}   = signed distance from p_n to the nearest node m pi / L_j of bond j.

When |delta_{n,i2}| <= eps/2 and every other bond has |eta_{n,j}| <= eps/2, the
two target poles bunch while the remaining bonds sit near tan = 0. The
eigenvalue trapped between the bunched poles then carries sec^2 values that
blow up on the two target bonds and stay near 1 elsewhere, so its mass
concentrates on those two bonds as eps -> 0.

Offsets are computed in closed form from frac((n + 1/2) L_i / L_1) with a
compensated product, so scanning to n ~ 1e7 accumulates no drift.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _accel
from ._accel import njit
from ._trig import tan_sec2_np, two_prod, two_prod_np
from .errors import BadEpsilon, BadRange, BudgetExhausted, TrapFailed
from .graph import SmoothObservable, StarGraph, check_bond
from .quadrature import gauss_panels
from .spectrum import DEFAULT_TOL, Pole, eigenvalues, poles_in, pole_rank, solve_gap
from .wavefunction import build_eigenfunction, matrix_element_indicator, matrix_element_smooth


@dataclass(frozen=True)
class TorusState:
    """Offsets of p_n = pi (n + 1/2) / L_{i1} from the other bonds' lattices.

    ``delta`` holds the pole offset of the partner bond, ``eta_dist`` the node
    offsets of the remaining bonds (in ``others`` order, 1-based labels).
    """

    n: int
    delta: np.ndarray
    eta_dist: np.ndarray
    i1: int
    partners: tuple
    others: tuple


def _order(graph: StarGraph, i1: int, i2: int):
    check_bond(i1, graph.b)
    check_bond(i2, graph.b)
    if i1 == i2:
        raise BadRange("the two target bonds must differ")
    others = tuple(j for j in range(1, graph.b + 1) if j not in (i1, i2))
    return (i2,), others


def _wrap(x, half):
    """Representative of x modulo 2*half in [-half, half)."""
    return (x + half) % (2.0 * half) - half


def closed_form_state(graph: StarGraph, n: int, i1: int, i2: int) -> TorusState:
    """TorusState at index n from delta + pi/(2L_i) = pi/(2L_1) + pi n / L_1 (mod pi/L_i)."""
    partners, others = _order(graph, i1, i2)
    L = graph.lengths
    L1 = L[i1 - 1]

    def frac_phase(i, shift):
        r = L[i - 1] / L1
        hi, lo = two_prod(float(n), r)
        f = (hi - math.floor(hi)) + lo + 0.5 * r + shift
        return f - math.floor(f)

    delta = np.array([(frac_phase(i, 0.0) - 0.5) * math.pi / L[i - 1] for i in partners])
    eta = np.array([(frac_phase(j, 0.5) - 0.5) * math.pi / L[j - 1] for j in others])
    return TorusState(int(n), delta, eta, i1, partners, others)


def torus_step(state: TorusState, graph: StarGraph, steps: int = 1) -> TorusState:
    """Advance n by ``steps``: every offset moves by steps * pi / L_1, wrapped."""
    L = graph.lengths
    shift = steps * math.pi / L[state.i1 - 1]
    halfs_d = np.array([math.pi / (2 * L[i - 1]) for i in state.partners])
    halfs_e = np.array([math.pi / (2 * L[j - 1]) for j in state.others])
    delta = _wrap(state.delta + shift, halfs_d) if state.delta.size else state.delta
    eta = _wrap(state.eta_dist + shift, halfs_e) if state.eta_dist.size else state.eta_dist
    return TorusState(state.n + steps, delta, eta, state.i1, state.partners, state.others)


@njit
def _scan_nb(ratios, shifts, limits, n0, n1, max_hits, out):
    """Indices n in [n0, n1] where |frac((n+1/2) r_j + s_j) - 1/2| <= lim_j for all j."""
    m = ratios.shape[0]
    found = 0
    for n in range(n0, n1 + 1):
        ok = True
        for j in range(m):
            r = ratios[j]
            hi, lo = two_prod(float(n), r)
            f = (hi - math.floor(hi)) + lo + 0.5 * r + shifts[j]
            f = f - math.floor(f)
            if abs(f - 0.5) > limits[j]:
                ok = False
                break
        if ok:
            out[found] = n
            found += 1
            if found >= max_hits:
                return found, n
    return found, n1


def _scan_np(ratios, shifts, limits, n0, n1, max_hits, chunk=1 << 20):
    hits = []
    for s in range(n0, n1 + 1, chunk):
        n = np.arange(s, min(n1, s + chunk - 1) + 1, dtype=np.float64)
        ok = np.ones(n.shape, dtype=bool)
        for r, sh, lim in zip(ratios, shifts, limits):
            hi, lo = two_prod_np(n, r)
            f = (hi - np.floor(hi)) + lo + 0.5 * r + sh
            f = f - np.floor(f)
            ok &= np.abs(f - 0.5) <= lim
        idx = n[ok].astype(np.int64)
        hits.extend(idx.tolist())
        if len(hits) >= max_hits:
            hits = hits[:max_hits]
            return np.array(hits, dtype=np.int64), int(hits[-1])
    return np.array(hits, dtype=np.int64), n1


def find_bunching(graph: StarGraph, i1: int, i2: int, epsilon: float, search_budget: int,
                  start: int = 0, max_hits: int | None = None) -> np.ndarray:
    """All n in [start, search_budget] where the partner pole is within eps/2 of p_n
    and every other bond has a node within eps/2 of p_n. May be empty."""
    partners, others = _order(graph, i1, i2)
    L = graph.lengths
    if not (0 < epsilon < math.pi / (2.0 * L.max())):
        raise BadEpsilon(f"epsilon must lie in (0, pi/(2 max L)) = (0, {math.pi / (2 * L.max()):.4g})")
    L1 = L[i1 - 1]
    bonds = list(partners) + list(others)
    ratios = np.array([L[i - 1] / L1 for i in bonds])
    shifts = np.array([0.0] * len(partners) + [0.5] * len(others))
    # |offset| <= eps/2 with offset = (f - 1/2) * pi / L_i
    limits = np.array([0.5 * epsilon * L[i - 1] / math.pi for i in bonds])
    budget = int(search_budget)
    cap = budget - int(start) + 1 if max_hits is None else int(max_hits)
    if budget < start or cap <= 0:
        return np.zeros(0, dtype=np.int64)
    if _accel.use_numba():
        out = np.empty(min(cap, 1 << 22), dtype=np.int64)
        hits = []
        n0 = int(start)
        while n0 <= budget:
            found, last = _scan_nb(ratios, shifts, limits, n0, budget, min(out.shape[0], cap - len(hits)), out)
            hits.append(out[:found].copy())
            if sum(h.shape[0] for h in hits) >= cap or last >= budget:
                break
            n0 = last + 1
        return np.concatenate(hits) if hits else np.zeros(0, dtype=np.int64)
    res, _ = _scan_np(ratios, shifts, limits, int(start), budget, cap)
    return res


def direct_offsets(graph: StarGraph, n: int, i1: int, i2: int):
    """(pole distance to i2, node distances to the other bonds) from p_n directly."""
    L = graph.lengths
    p = math.pi * (n + 0.5) / L[i1 - 1]
    L2 = L[i2 - 1]
    m = round(p * L2 / math.pi - 0.5)
    d = min(abs(p - math.pi * (mm + 0.5) / L2) for mm in (m - 1, m, m + 1))
    etas = []
    for j in range(1, graph.b + 1):
        if j in (i1, i2):
            continue
        Lj = L[j - 1]
        mj = round(p * Lj / math.pi)
        etas.append(min(abs(p - math.pi * mm / Lj) for mm in (mj - 1, mj, mj + 1)))
    return d, etas


@dataclass(frozen=True)
class ScarCertificate:
    n_r: int
    index: int
    k: float
    epsilon: float
    bonds: tuple
    sec2: np.ndarray = field(repr=False)
    sec2_i1: float
    sec2_i2: float
    sec2_max_other: float
    ratio: float
    mass: float
    residual: float
    left_pole: Pole
    right_pole: Pole
    r: int = 0


def trap_eigenvalue(graph: StarGraph, n_hit: int, i1: int, i2: int, epsilon: float,
                    tol: float = DEFAULT_TOL) -> ScarCertificate:
    """Solve Z = 0 between p_{n,i1} and the nearest pole of i2; certify the result.

    If another pole sits between the pair, the gap adjacent to p_{n,i1} on the
    partner's side is used.
    """
    _order(graph, i1, i2)
    L = graph.lengths
    L1, L2 = L[i1 - 1], L[i2 - 1]
    p1 = math.pi * (n_hit + 0.5) / L1
    m2 = int(round(p1 * L2 / math.pi - 0.5))
    p2 = math.pi * (m2 + 0.5) / L2
    if p1 == p2:
        raise TrapFailed(f"poles of bonds {i1} and {i2} coincide at k={p1!r}")
    left = Pole(p1, i1, int(n_hit)) if p1 < p2 else Pole(p2, i2, m2)
    right = Pole(p2, i2, m2) if p1 < p2 else Pole(p1, i1, int(n_hit))
    inner = poles_in(graph, left.k, right.k)
    if len(inner):
        if p1 < p2:
            right = inner[0]
        else:
            left = inner[len(inner) - 1]
    k, z, res = solve_gap(graph, left.k, right.k, tol=tol)
    if not (left.k < k < right.k):
        raise TrapFailed(f"no root strictly inside ({left.k!r}, {right.k!r})")
    if abs(k - p1) > epsilon:
        raise TrapFailed(f"trapped k={k!r} is {abs(k - p1):.3g} from p_n (eps={epsilon})")
    ef = build_eigenfunction(k, graph)
    sec2 = ef.sec2
    mask = np.zeros(graph.b, dtype=bool)
    mask[[i1 - 1, i2 - 1]] = True
    mass = matrix_element_indicator(ef, mask)
    others = sec2[~mask]
    return ScarCertificate(
        n_r=int(n_hit), index=pole_rank(graph, left), k=k, epsilon=float(epsilon),
        bonds=(i1, i2), sec2=sec2, sec2_i1=float(sec2[i1 - 1]), sec2_i2=float(sec2[i2 - 1]),
        sec2_max_other=float(others.max()) if others.size else 1.0,
        ratio=float(sec2[i1 - 1] / sec2[i2 - 1]), mass=mass, residual=res,
        left_pole=left, right_pole=right,
    )


def scar_sequence(graph: StarGraph, i1: int, i2: int, eps_schedule, budget: int = 10**7,
                  tol: float = DEFAULT_TOL, increasing_mass: bool = True) -> list:
    """One certificate per eps in a strictly decreasing schedule.

    Each level searches forward from the previous hit. With
    ``increasing_mass`` a hit is accepted only if its two-bond mass exceeds
    that of the previous certificate; the mass within one eps level depends
    on where the bunch falls inside the window, so the first hit alone does
    not give a monotone sequence. Raises :class:`BudgetExhausted` (carrying
    the certificates found so far) when a level runs out of torus steps.
    """
    eps = [float(e) for e in eps_schedule]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise BadEpsilon("eps_schedule must be positive and strictly decreasing")
    certs = []
    start = 0
    for r, e in enumerate(eps, start=1):
        floor = certs[-1].mass if (certs and increasing_mass) else -math.inf
        chosen = None
        while chosen is None:
            hits = find_bunching(graph, i1, i2, e, budget, start=start, max_hits=64)
            if hits.size == 0:
                raise BudgetExhausted(f"no acceptable bunching with eps={e} for n <= {budget}",
                                      partial=certs)
            for n in hits:
                cert = trap_eigenvalue(graph, int(n), i1, i2, e, tol=tol)
                start = int(n) + 1
                if cert.mass > floor:
                    chosen = cert
                    break
        certs.append(_with_r(chosen, r))
    return certs


def _with_r(cert: ScarCertificate, r: int) -> ScarCertificate:
    return replace(cert, r=r)


def tan_balance(graph: StarGraph, cert: ScarCertificate):
    """(|tan kL_i1 + tan kL_i2|, sum over other bonds of |tan kL_j|); the first is at most the second."""
    t, _, _, _ = tan_sec2_np(cert.k, graph.lengths)
    i1, i2 = cert.bonds
    mask = np.ones(graph.b, dtype=bool)
    mask[[i1 - 1, i2 - 1]] = False
    return float(abs(t[i1 - 1] + t[i2 - 1])), float(np.abs(t[mask]).sum())


def predicted_limit(graph: StarGraph, f: SmoothObservable, bonds) -> float:
    """(int f_i1 + int f_i2) / (L_i1 + L_i2), the scarred limit of <psi|f|psi>."""
    total = 0.0
    length = 0.0
    for i in bonds:
        Li = float(graph.lengths[i - 1])
        fi = f.functions[i - 1]
        val = fi.integral(Li)
        total += gauss_panels(fi, 0.0, Li, 8) if val is None else val
        length += Li
    return total / length


def smooth_mass(graph: StarGraph, cert: ScarCertificate, f: SmoothObservable) -> float:
    return matrix_element_smooth(build_eigenfunction(cert.k, graph), f)


def in_sweep(graph: StarGraph, cert: ScarCertificate, tol: float = DEFAULT_TOL) -> bool:
    """True when a windowed spectrum sweep finds cert.k at eigenvalue index cert.index."""
    spec = eigenvalues(graph, 3, start=max(1, cert.index - 1), tol=tol)
    hit = np.nonzero(spec.n == cert.index)[0]
    if hit.size == 0:
        return False
    return bool(abs(spec.k[hit[0]] - cert.k) <= 4e-15 * cert.k)
