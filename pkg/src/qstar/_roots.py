"""Root kernels for the secular equation on each inter-pole gap.

Each gap (a, b) holds exactly one root of the increasing function Z. The
bracket is halved a fixed number of times (down to ``bis_frac`` of its width)
and the midpoint is then polished by Newton steps, falling back to bisection
whenever a step would leave the current bracket.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit, prange
from ._trig import secular_and_slope, secular_and_slope_np

EPS_STEP = 4e-16


def bisection_steps(bis_frac: float) -> int:
    return max(0, int(math.ceil(math.log2(1.0 / bis_frac))))


@njit(parallel=True)
def solve_gaps_nb(lo, hi, L, n_bis, maxiter, out_k, out_z, out_rel, out_it):
    for g in prange(lo.shape[0]):
        a = lo[g]
        b = hi[g]
        it = 0
        exact = False
        for _ in range(n_bis):
            m = 0.5 * (a + b)
            z, dz, _d = secular_and_slope(m, L)
            it += 1
            if z > 0.0:
                b = m
            elif z < 0.0:
                a = m
            else:
                a = m
                b = m
                exact = True
                break
        k = 0.5 * (a + b)
        z, dz, _d = secular_and_slope(k, L)
        best_k = k
        best_z = z
        best_r = abs(z) / (k * dz)
        while not exact and it < maxiter and z != 0.0:
            if z > 0.0:
                b = k
            else:
                a = k
            kn = k - z / dz
            if abs(kn - k) <= EPS_STEP * k:
                break
            if not (kn > a and kn < b):
                kn = 0.5 * (a + b)
            step = abs(kn - k)
            k = kn
            z, dz, _d = secular_and_slope(k, L)
            it += 1
            r = abs(z) / (k * dz)
            if r < best_r:
                best_r = r
                best_k = k
                best_z = z
            if step <= EPS_STEP * k or (b - a) <= EPS_STEP * k:
                break
        out_k[g] = best_k
        out_z[g] = best_z
        out_rel[g] = best_r
        out_it[g] = it


def solve_gaps_np(lo, hi, L, n_bis, maxiter, chunk=4096):
    """Vectorised twin of :func:`solve_gaps_nb`; returns (k, z, rel, iters)."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    n = lo.shape[0]
    out_k = np.empty(n)
    out_z = np.empty(n)
    out_rel = np.empty(n)
    out_it = np.empty(n, dtype=np.int64)
    rows = max(1, chunk * 64 // max(1, L.shape[0]))
    for s in range(0, n, rows):
        a = lo[s:s + rows].copy()
        b = hi[s:s + rows].copy()
        it = np.zeros(a.shape[0], dtype=np.int64)
        done = np.zeros(a.shape[0], dtype=bool)
        for _ in range(n_bis):
            m = 0.5 * (a + b)
            z, _, _ = secular_and_slope_np(m, L)
            it += ~done
            pos = (z > 0.0) & ~done
            neg = (z < 0.0) & ~done
            hit = (z == 0.0) & ~done
            b = np.where(pos | hit, m, b)
            a = np.where(neg | hit, m, a)
            done |= hit
        k = 0.5 * (a + b)
        z, dz, _ = secular_and_slope_np(k, L)
        best_k, best_z = k.copy(), z.copy()
        best_r = np.abs(z) / (k * dz)
        active = ~done & (z != 0.0)
        while active.any():
            active &= it < maxiter
            if not active.any():
                break
            b = np.where(active & (z > 0.0), k, b)
            a = np.where(active & (z < 0.0), k, a)
            kn = k - z / dz
            tiny = np.abs(kn - k) <= EPS_STEP * k
            active &= ~tiny
            if not active.any():
                break
            bad = ~((kn > a) & (kn < b))
            kn = np.where(bad, 0.5 * (a + b), kn)
            step = np.abs(kn - k)
            k = np.where(active, kn, k)
            zn, dzn, _ = secular_and_slope_np(k, L)
            z = np.where(active, zn, z)
            dz = np.where(active, dzn, dz)
            it += active
            r = np.abs(z) / (k * dz)
            better = active & (r < best_r)
            best_r = np.where(better, r, best_r)
            best_k = np.where(better, k, best_k)
            best_z = np.where(better, z, best_z)
            stop = (step <= EPS_STEP * k) | ((b - a) <= EPS_STEP * k) | (z == 0.0)
            active &= ~stop
        sl = slice(s, s + a.shape[0])
        out_k[sl], out_z[sl], out_rel[sl], out_it[sl] = best_k, best_z, best_r, it
    return out_k, out_z, out_rel, out_it
