"""Faddeeva function, complex erf/erfc and the integral of z w(zp) over p."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._faddeeva import (
    ASYMPTOTIC,
    ASYMPTOTIC_RADIUS,
    AUTO,
    FRACTION,
    LAPLACE,
    REGION_ERROR,
    REGION_NAMES,
    SERIES,
    SERIES_RHO,
    asymptotic_upper,
    region_of,
    w_array_nb,
    w_array_np,
    w_upper,
)
from .errors import AccuracyLoss, QuadratureFailure
from .quadrature import panel_nodes

SQRT_PI = math.sqrt(math.pi)
SEAM_TOL = 1e-9
_SEAM_BAND = 0.02


@dataclass(frozen=True)
class FaddeevaResult:
    value: complex
    est_error: float
    region: str


def _neighbour_region(x: float, y: float, reg: int):
    """An alternative region valid at (x, y) when the point is close to a seam."""
    r = math.hypot(x, y)
    if reg == ASYMPTOTIC and r < ASYMPTOTIC_RADIUS * (1 + _SEAM_BAND):
        return FRACTION
    if reg != ASYMPTOTIC and r > ASYMPTOTIC_RADIUS * (1 - _SEAM_BAND):
        return ASYMPTOTIC
    rho = (abs(x) / 6.3) ** 2 + (y / 4.4) ** 2
    if reg == SERIES and rho > SERIES_RHO * (1 - _SEAM_BAND):
        return LAPLACE
    if reg == LAPLACE and rho < SERIES_RHO * (1 + _SEAM_BAND):
        return SERIES
    if reg == LAPLACE and rho > 1 - _SEAM_BAND:
        return FRACTION
    if reg == FRACTION and rho < 1 + _SEAM_BAND:
        return LAPLACE
    return None


def faddeeva(z: complex) -> FaddeevaResult:
    """w(z) with an error estimate and the name of the region used.

    Next to a region boundary the neighbouring method is evaluated too and an
    :class:`AccuracyLoss` warning is issued if the two differ by more than 1e-9.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("faddeeva needs a finite argument")
    lower = z.imag < 0
    zu = -z if lower else z
    x, y = zu.real, zu.imag
    reg = region_of(x, y)
    u, v = w_upper(x, y, AUTO)
    wu = complex(u, v)
    if reg == ASYMPTOTIC:
        _, _, last = asymptotic_upper(x, y)
        rel = last + 1e-16
    else:
        rel = REGION_ERROR
    alt = _neighbour_region(x, y, reg)
    if alt is not None:
        ua, va = w_upper(x, y, alt)
        gap = abs(complex(ua, va) - wu) / max(abs(wu), 1e-300)
        if gap > SEAM_TOL:
            warnings.warn(
                f"w({z}) regions {REGION_NAMES[reg]} and {REGION_NAMES[alt]} differ by {gap:.2e}",
                AccuracyLoss, stacklevel=2,
            )
        rel = max(rel, gap)
    if not lower:
        return FaddeevaResult(wu, rel * abs(wu), REGION_NAMES[reg])
    e = 2.0 * cmath.exp(-z * z)
    val = e - wu
    phase_err = 1e-16 * (1.0 + abs(2.0 * z.real * z.imag))
    err = abs(e) * phase_err + rel * abs(wu) + 1e-16 * abs(val)
    return FaddeevaResult(val, err, "reflected-" + REGION_NAMES[reg])


def faddeeva_w(z):
    """Vectorised w(z); scalar in, complex out."""
    za = np.asarray(z, dtype=complex)
    if _accel.use_numba():
        flat = np.ascontiguousarray(za.ravel())
        re = np.empty(flat.shape)
        im = np.empty(flat.shape)
        w_array_nb(flat.real.copy(), flat.imag.copy(), re, im)
        out = np.empty(flat.shape, dtype=complex)
        out.real = re
        out.imag = im
        out = out.reshape(za.shape)
    else:
        out = w_array_np(za)
    return complex(out) if np.ndim(z) == 0 else out


def erfc_complex(z):
    """erfc(z) = exp(-z^2) w(iz) for Re z >= 0, and 2 - erfc(-z) otherwise."""
    za = np.asarray(z, dtype=complex)
    neg = za.real < 0
    zz = np.where(neg, -za, za)
    with np.errstate(over="ignore", invalid="ignore"):
        val = np.exp(-zz * zz) * faddeeva_w(1j * zz)
    out = np.where(neg, 2.0 - val, val)
    return complex(out) if np.ndim(z) == 0 else out


_MACLAURIN_RADIUS = 0.5


def _erf_maclaurin(z):
    # erf z = 2/sqrt(pi) sum (-1)^n z^(2n+1) / (n! (2n+1))
    z2 = z * z
    term = z.copy()
    s = z.copy()
    for n in range(1, 30):
        term = term * (-z2) / n
        s = s + term / (2 * n + 1)
    return 2.0 / SQRT_PI * s


def erf_complex(z):
    """erf(z) for complex z via the Faddeeva function, odd-symmetric by construction.

    Small arguments use the Maclaurin series to avoid cancellation in 1 - erfc.
    """
    za = np.asarray(z, dtype=complex)
    small = np.abs(za) < _MACLAURIN_RADIUS
    neg = za.real < 0
    zz = np.where(neg, -za, za)
    with np.errstate(over="ignore", invalid="ignore"):
        big = 1.0 - np.exp(-zz * zz) * faddeeva_w(1j * zz)
    big = np.where(neg, -big, big)
    if small.any():
        big = np.where(small, _erf_maclaurin(np.where(small, za, 0.0)), big)
    return complex(big) if np.ndim(z) == 0 else big


def sector_arg(z: complex) -> float:
    """arg z taken in (-pi/4, 5pi/4) when possible (branch cut along -3pi/4)."""
    a = cmath.phase(z)
    if a < -0.75 * math.pi:
        a += 2.0 * math.pi
    return a


def integral_zw(z: complex, R: float, tol: float = 1e-12, max_doublings: int = 14) -> complex:
    """int_0^R z w(z p) dp by composite Gauss-Legendre in s = (|z| p)^2.

    Along a ray in the lower half-plane w carries exp(-z^2 p^2), a chirp in
    p; panels uniform in s keep a fixed number of nodes per period. The panel
    count doubles until successive results agree to ``tol``.
    """
    z = complex(z)
    if not R > 0:
        raise ValueError("R must be positive")
    r = abs(z)
    if r == 0:
        return 0j
    smax = (r * R) ** 2

    def run(npan):
        breaks = np.sqrt(np.linspace(0.0, smax, npan + 1)) / r  # back to p
        p, w = panel_nodes(breaks, 10)
        return complex(np.sum(w * z * faddeeva_w(z * p)))

    npan = max(8, int(math.ceil(smax / math.pi)))
    prev = run(npan)
    for _ in range(max_doublings):
        npan *= 2
        cur = run(npan)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise QuadratureFailure(f"integral_zw did not converge for z={z}, R={R}")


def integral_zw_real_limit(z: complex) -> float:
    """Large-|z|R limit of Re int_0^R z w(zp) dp: sqrt(pi)/2 - arg(z)/sqrt(pi)."""
    return SQRT_PI / 2.0 - sector_arg(z) / SQRT_PI


def seam_report(samples: int = 64) -> dict:
    """Largest relative disagreement between neighbouring regions along each seam."""
    th = np.linspace(0.0, math.pi, samples)
    out = {}

    def gap(points, a, b):
        worst = 0.0
        for x, y in points:
            ua, va = w_upper(x, y, a)
            ub, vb = w_upper(x, y, b)
            wa = complex(ua, va)
            worst = max(worst, abs(wa - complex(ub, vb)) / abs(wa))
        return worst

    s = math.sqrt(SERIES_RHO)
    out["series|laplace"] = gap([(6.3 * s * math.cos(t), 4.4 * s * math.sin(t)) for t in th],
                                SERIES, LAPLACE)
    out["laplace|fraction"] = gap([(6.3 * math.cos(t), 4.4 * math.sin(t)) for t in th],
                                  LAPLACE, FRACTION)
    R = ASYMPTOTIC_RADIUS
    out["fraction|asymptotic"] = gap([(R * math.cos(t), R * math.sin(t)) for t in th],
                                     FRACTION, ASYMPTOTIC)
    return out
