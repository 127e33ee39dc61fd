"""Argument-reduced tan/sec^2 of k*L, accurate next to the poles of tan.

k*L is formed exactly as a double-double (Dekker product) and reduced against
pi/2 with a three-part Cody-Waite constant. With q the nearest multiple of pi/2
and r the remainder, tan(kL) = tan(r) for even q and -1/tan(r) for odd q, so
near a pole the small remainder r is known to full relative precision. Valid
for k*L below about 1e9.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

SPLIT = 134217729.0  # 2**27 + 1
TWO_OVER_PI = 0.63661977236758134308
HALF_PI = 1.5707963267948966
PIO2_1 = 1.57079625129699707031
PIO2_2 = 7.54978941586159635336e-8
PIO2_3 = 5.39030285815811905290e-15


@njit
def two_prod(a, b):
    p = a * b
    t = SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


@njit
def reduce_kl(k, L):
    """Return (r, q) with k*L = q*pi/2 + r and |r| <~ pi/4.

    The first two pieces of pi/2 carry 25 bits each, so q * PIO2_{1,2} is exact
    while q < 2**28, i.e. for k*L below about 4e8.
    """
    hi, lo = two_prod(k, L)
    q = math.floor(hi * TWO_OVER_PI + 0.5)
    r = hi - q * PIO2_1
    r = r - q * PIO2_2
    r = r + (lo - q * PIO2_3)
    return r, int(q)


@njit
def tan_sec2(k, L):
    """tan(kL), sec^2(kL), sign of cos(kL) and the distance from kL to the nearest pole."""
    r, q = reduce_kl(k, L)
    t = math.tan(r)
    qm = q & 3
    if q & 1:
        if t == 0.0:
            return math.inf, math.inf, 1.0, 0.0
        tn = -1.0 / t
        sec2 = 1.0 + tn * tn
        dist = abs(r)
        sgn = -1.0 if (qm == 1) == (r > 0.0) else 1.0
    else:
        tn = t
        sec2 = 1.0 + t * t
        dist = HALF_PI - abs(r)
        sgn = 1.0 if qm == 0 else -1.0
    return tn, sec2, sgn, dist


@njit
def secular_and_slope(k, L):
    """Z(k) = sum tan(kL_j), Z'(k) = sum L_j sec^2(kL_j), and min pole distance in k."""
    z = 0.0
    dz = 0.0
    dmin = math.inf
    for j in range(L.shape[0]):
        t, s2, _, d = tan_sec2(k, L[j])
        z += t
        dz += L[j] * s2
        dk = d / L[j]
        if dk < dmin:
            dmin = dk
    return z, dz, dmin


# ---------------------------------------------------------------- numpy twins

def two_prod_np(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p = a * b
    t = SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def tan_sec2_np(k, L):
    """Vectorised :func:`tan_sec2`; ``k`` and ``L`` broadcast against each other."""
    hi, lo = two_prod_np(k, L)
    q = np.floor(hi * TWO_OVER_PI + 0.5)
    r = hi - q * PIO2_1
    r = r - q * PIO2_2
    r = r + (lo - q * PIO2_3)
    qi = q.astype(np.int64)
    odd = (qi & 1).astype(bool)
    qm = qi & 3
    t = np.tan(r)
    with np.errstate(divide="ignore", over="ignore"):
        tn = np.where(odd, -1.0 / t, t)
    tn = np.where(odd & (t == 0.0), np.inf, tn)
    sec2 = 1.0 + tn * tn
    dist = np.where(odd, np.abs(r), HALF_PI - np.abs(r))
    sgn_odd = np.where((qm == 1) == (r > 0.0), -1.0, 1.0)
    sgn_even = np.where(qm == 0, 1.0, -1.0)
    sgn = np.where(odd, sgn_odd, sgn_even)
    return tn, sec2, sgn, dist


def secular_and_slope_np(k, L):
    """Rows of ``k`` against the bond vector ``L``: returns Z, Z' and min pole distance."""
    k = np.asarray(k, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    t, s2, _, d = tan_sec2_np(k[..., None], L)
    return t.sum(-1), (L * s2).sum(-1), (d / L).min(-1)
