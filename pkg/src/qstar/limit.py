"""The large-graph limit law of the bond-indicator matrix elements.

All integrals over xi are computed in nu = xi^2, where the two chirps of
P_eta become linear phases exp(i nu / (4 eta)) and exp(-i nu / 4). Beyond
the cutoff Xi the slowly varying factor is replaced by its asymptote
(tau ~ alpha |xi|, z w(z) ~ i / sqrt(pi)) and the remaining integral is done
by repeated integration by parts; see :mod:`qstar.quadrature`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import BadRange, DomainError, QuadratureFailure
from .quadrature import chirp_breaks, chirp_panel_sums, chirp_tail, gauss_rule
from .special import erf_complex, faddeeva_w

SQRT_PI = math.sqrt(math.pi)
E_M_IPI4 = complex(math.cos(math.pi / 4), -math.sin(math.pi / 4))
E_IPI4 = E_M_IPI4.conjugate()
E_3IPI4 = complex(-math.sqrt(0.5), math.sqrt(0.5))
DOUBLING_TOL = 1e-4


@dataclass(frozen=True)
class LimitParams:
    alpha: float = 2.0
    eta: float = 1.0
    xi_cut: float = 200.0
    node_budget: int = 60_000_000
    per_period: int = 2
    order: int = 10

    def __post_init__(self):
        if not self.alpha >= 1:
            raise BadRange(f"alpha must be >= 1, got {self.alpha}")
        if not self.eta > 0:
            raise BadRange(f"eta must be positive, got {self.eta}")
        if not self.xi_cut >= 50:
            raise BadRange(f"xi_cut must be >= 50, got {self.xi_cut}")

    def with_eta(self, eta: float) -> "LimitParams":
        return replace(self, eta=float(eta))

    @property
    def chirp_coeffs(self):
        """(cA, omega_A, cB, omega_B) with P = cA e^{i omega_A nu} + cB e^{i omega_B nu}."""
        cA = E_M_IPI4 / math.sqrt(math.pi * self.eta)
        cB = (self.alpha - 1.0) / SQRT_PI * E_IPI4
        return cA, 1.0 / (4.0 * self.eta), cB, -0.25

    @property
    def freqs(self):
        _, wa, cB, wb = self.chirp_coeffs
        return [wa, wb] if cB != 0 else [wa]


def p_eta(xi, params: LimitParams):
    """P_eta(xi) = e^{-i pi/4 + i xi^2/4eta}/sqrt(pi eta) + (alpha-1) e^{i pi/4 - i xi^2/4}/sqrt(pi)."""
    nu = np.asarray(xi, dtype=float) ** 2
    cA, wa, cB, wb = params.chirp_coeffs
    out = cA * np.exp(1j * wa * nu) + cB * np.exp(1j * wb * nu)
    return complex(out) if np.ndim(xi) == 0 else out


def tau_eta(xi, params: LimitParams):
    """tau_eta(xi): two chirp exponentials plus the two xi * erf terms."""
    x = np.asarray(xi, dtype=float)
    eta, a = params.eta, params.alpha
    se = math.sqrt(eta)
    nu = x * x
    out = (
        2.0 / SQRT_PI * se * E_IPI4 * np.exp(1j * nu / (4.0 * eta))
        + x * erf_complex(E_M_IPI4 * x / (2.0 * se))
        + 2.0 * (a - 1.0) / SQRT_PI * E_M_IPI4 * np.exp(-1j * nu / 4.0)
        + x * (a - 1.0) * erf_complex(E_IPI4 * x / 2.0)
    )
    return complex(out) if np.ndim(xi) == 0 else out


def dtau_dxi(xi, params: LimitParams):
    """d tau / d xi = erf(e^{-i pi/4} xi / (2 sqrt eta)) + (alpha - 1) erf(e^{i pi/4} xi / 2)."""
    x = np.asarray(xi, dtype=float)
    se = math.sqrt(params.eta)
    out = erf_complex(E_M_IPI4 * x / (2.0 * se)) + (params.alpha - 1.0) * erf_complex(E_IPI4 * x / 2.0)
    return complex(out) if np.ndim(xi) == 0 else out


def tau_star(params: LimitParams) -> float:
    """Lower bound sqrt(2)(sqrt(eta) + alpha - 1)/sqrt(pi) for Re tau_eta, attained at xi = 0."""
    return math.sqrt(2.0) * (math.sqrt(params.eta) + params.alpha - 1.0) / SQRT_PI


def _check_budget(breaks, params: LimitParams):
    nodes = (breaks.shape[0] - 1) * params.order
    if nodes > params.node_budget:
        raise QuadratureFailure(f"{nodes} quadrature nodes exceed the budget {params.node_budget}")


def p_integral(params: LimitParams, xi_cut: float | None = None) -> complex:
    """int_{-inf}^{inf} P_eta(xi) d xi (equal to 2 alpha)."""
    Xi = params.xi_cut if xi_cut is None else xi_cut
    V = Xi * Xi
    breaks = chirp_breaks(V, params.freqs, params.per_period)
    _check_budget(breaks, params)
    main = chirp_panel_sums(lambda x: p_eta(x, params), breaks, params.order).sum()
    cA, wa, cB, wb = params.chirp_coeffs
    tail = chirp_tail(wa, breaks[-1], cA / 2.0)
    if cB != 0:
        tail += chirp_tail(wb, breaks[-1], cB / 2.0)
    return complex(2.0 * (main + tail))


# ---------------------------------------------------------------- F-tilde

def _log_tail(params: LimitParams, V: float) -> complex:
    """Tail of int_0^inf P (arg tau - i log|tau|) with tau replaced by alpha xi."""
    cA, wa, cB, wb = params.chirp_coeffs
    c0 = math.log(params.alpha) / 2.0
    t = cA * chirp_tail(wa, V, c0, 0.25)
    if cB != 0:
        t += cB * chirp_tail(wb, V, c0, 0.25)
    return -1j * t


def _ftilde_integrand(params: LimitParams):
    def g(x):
        t = tau_eta(x, params)
        return p_eta(x, params) * (np.angle(t) - 1j * np.log(np.abs(t)))
    return g


def _ftilde_two_cutoffs(params: LimitParams, Xi: float):
    V = Xi * Xi
    breaks = chirp_breaks(V, params.freqs, params.per_period)
    _check_budget(breaks, params)
    sums = chirp_panel_sums(_ftilde_integrand(params), breaks, params.order)
    quarter = (breaks.shape[0] - 1) // 4
    half_val = sums[:quarter].sum() + _log_tail(params, breaks[quarter])
    full_val = sums.sum() + _log_tail(params, breaks[-1])
    scale = 2.0 / (math.pi * params.alpha)
    return 0.5 + scale * full_val.real, 0.5 + scale * half_val.real


def f_tilde_with_error(eta: float, params: LimitParams | None = None):
    """F-tilde(eta) = 1/2 + (1/(pi alpha)) Re int P_eta (arg tau_eta - i log|tau_eta|) d xi.

    Returns (value, error estimate). The cutoff starts at
    max(xi_cut, 20 sqrt(eta)); the error is the change when the cutoff is
    halved (the half-cutoff sum reuses the same panels). The cutoff doubles
    until that change is below 1e-4.
    """
    params = (params or LimitParams()).with_eta(eta)
    Xi = max(params.xi_cut, 20.0 * math.sqrt(eta))
    while True:
        full, half = _ftilde_two_cutoffs(params, Xi)
        err = abs(full - half)
        if err < DOUBLING_TOL:
            return full, err
        Xi *= 2.0


def f_tilde(eta: float, params: LimitParams | None = None) -> float:
    return f_tilde_with_error(eta, params)[0]


def limit_cdf_with_error(R: float, params: LimitParams | None = None):
    if not (0.0 < R < 1.0):
        raise DomainError(f"F(R) is evaluated on 0 < R < 1, got R={R}")
    v, e = f_tilde_with_error(1.0 / R - 1.0, params)
    return 1.0 - v, e


def limit_cdf(R: float, params: LimitParams | None = None) -> float:
    """F(R) = 1 - F-tilde(1/R - 1), the limiting distribution of the matrix elements."""
    return limit_cdf_with_error(R, params)[0]


def qe_step_cdf(R, alpha: float):
    """CDF of the point mass at 1/alpha that quantum ergodicity would predict.

    Returns 1 at R = 1/alpha (the jump point is assigned to the upper value).
    """
    r = np.asarray(R, dtype=float)
    out = np.where(r >= 1.0 / alpha, 1.0, 0.0)
    return float(out) if np.ndim(R) == 0 else out


@dataclass(frozen=True)
class CdfTable:
    """F tabulated on a grid of R in (0, 1); linear interpolation with F(0)=0, F(1)=1."""

    R: np.ndarray
    F: np.ndarray
    err: np.ndarray
    alpha: float = float("nan")

    def __post_init__(self):
        if self.R.shape != self.F.shape or self.R.ndim != 1 or self.R.size == 0:
            raise BadRange("CdfTable needs matching 1-d R and F arrays")
        if np.any(np.diff(self.R) <= 0):
            raise BadRange("CdfTable grid must be strictly increasing")

    def __call__(self, r):
        xs = np.concatenate([[0.0], self.R, [1.0]])
        ys = np.concatenate([[0.0], self.F, [1.0]])
        return np.interp(r, xs, ys, left=0.0, right=1.0)

    def monotone(self, slack: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.F) >= -slack))


def r_grid(start: float = 0.005, stop: float = 0.995, step: float = 0.005) -> np.ndarray:
    n = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(n), 12)


def cdf_table(alpha: float, grid=None, params: LimitParams | None = None) -> CdfTable:
    """Tabulate F(R) for the given alpha."""
    params = replace(params or LimitParams(), alpha=float(alpha))
    grid = r_grid() if grid is None else np.asarray(grid, dtype=float)
    vals = np.empty(grid.shape)
    errs = np.empty(grid.shape)
    for i, r in enumerate(grid):
        vals[i], errs[i] = limit_cdf_with_error(float(r), params)
    return CdfTable(grid, vals, errs, float(alpha))


# ---------------------------------------------------------------- density of X_eta

_ZW_TAIL = (1.0, 0.5, 0.75, 1.875, 6.5625, 29.53125)  # (2m-1)!! / 2^m
_ZW_CUT = 12.0  # |z| at the cutoff where z w(z) is replaced by its series


def _h_of_p(p: float, params: LimitParams, xi_min: float = 100.0) -> float:
    """f_X(sigma) / (2 p^3) at sigma = -1/(4 p^2).

    With Z = e^{3 i pi/4} tau p the density integrand becomes
    8 p^2 P Z w(Z), and h(p) = -2/(alpha sqrt(pi) p) Re int_0^inf P Z w(Z) d xi.
    """
    a = params.alpha
    ap = a * p
    Xi = max(xi_min, _ZW_CUT / ap)
    V = Xi * Xi
    fast = ap * ap
    breaks = chirp_breaks(V, params.freqs, params.per_period, fine=(fast, 30.0 / fast))
    _check_budget(breaks, params)

    def g(x):
        Z = E_3IPI4 * p * tau_eta(x, params)
        return p_eta(x, params) * Z * faddeeva_w(Z)

    main = chirp_panel_sums(g, breaks, params.order).sum()
    cA, wa, cB, wb = params.chirp_coeffs
    q = 1j / (ap * ap)
    tail = 0j
    for m, am in enumerate(_ZW_TAIL):
        t = cA * chirp_tail(wa, breaks[-1], 0.5, a=0.5 + m)
        if cB != 0:
            t += cB * chirp_tail(wb, breaks[-1], 0.5, a=0.5 + m)
        tail += am * q**m * t
    tail *= 1j / SQRT_PI
    return -2.0 / (a * SQRT_PI * p) * (main + tail).real


def density_with_error(sigma: float, params: LimitParams):
    """f_X(sigma) and an error estimate from a second, 1.5x longer cutoff."""
    if sigma >= 0:
        return 0.0, 0.0
    p = 0.5 / math.sqrt(-sigma)
    f1 = 2.0 * p**3 * _h_of_p(p, params, xi_min=100.0)
    f2 = 2.0 * p**3 * _h_of_p(p, params, xi_min=150.0)
    return f2, abs(f2 - f1)


def density_f_x_eta(sigma, params: LimitParams):
    """Density of X_eta at sigma < 0; defined as 0 for sigma >= 0.

    f(sigma) = -1/(4 alpha sqrt(pi)) Re int P_eta tau' w(tau' / (2 sqrt(-sigma))) / (-sigma)^{3/2} d xi
    with tau' = e^{3 i pi/4} tau_eta(xi).
    """
    if np.ndim(sigma) == 0:
        return density_with_error(float(sigma), params)[0]
    return np.array([density_with_error(float(s), params)[0] for s in np.ravel(sigma)]).reshape(np.shape(sigma))


def density_mass_below_zero(params: LimitParams, p_small: float = 0.004, p_large: float = 6.0,
                            nodes: int = 40):
    """int_{-inf}^0 f_X(sigma) d sigma, integrated in p = 1/(2 sqrt(-sigma)).

    Returns (value, error estimate). d sigma = dp / (2 p^3), so the mass is
    int_0^inf h(p) dp with h from :func:`_h_of_p`:

    * [p_small, p_large]: Gauss-Legendre in log p;
    * [0, p_small]: h behaves like a + b p + c p log p + ..., fitted on a few
      points above p_small and integrated in closed form;
    * [p_large, inf): sigma is within 1/(4 p_large^2) of zero; f is taken
      linear in sigma there, fitted from two points.

    The error estimate compares against a run with 3/4 of the Gauss nodes.
    """
    def main(n):
        t, w = gauss_rule(n)
        u = 0.5 * (t + 1.0)
        ratio = math.log(p_large / p_small)
        pp = p_small * np.exp(ratio * u)
        hp = np.array([_h_of_p(float(p), params) for p in pp])
        return float(np.sum(w * 0.5 * ratio * pp * hp))

    I1 = main(nodes)
    I1b = main(max(8, 3 * nodes // 4))
    xs = p_small * np.array([1.0, 1.5, 2.2, 3.3, 5.0, 7.5])
    hs = np.array([_h_of_p(float(p), params) for p in xs])
    lx = np.log(xs)
    M = np.vstack([np.ones_like(xs), xs, xs * lx, xs**2, xs**2 * lx]).T
    c = np.linalg.lstsq(M, hs, rcond=None)[0]
    q = p_small
    lq = math.log(q)
    I0 = (c[0] * q + c[1] * q**2 / 2 + c[2] * (q**2 / 2 * lq - q**2 / 4)
          + c[3] * q**3 / 3 + c[4] * (q**3 / 3 * lq - q**3 / 9))
    I0b = c[0] * q + c[1] * q**2 / 2 + c[2] * (q**2 / 2 * lq - q**2 / 4)
    ps = np.array([p_large, 1.5 * p_large])
    fs = np.array([2.0 * p**3 * _h_of_p(float(p), params) for p in ps])
    sig = -1.0 / (4.0 * ps**2)
    f1 = (fs[1] - fs[0]) / (sig[1] - sig[0])
    f0 = fs[0] - f1 * sig[0]
    I2 = f0 / (4.0 * p_large**2) - f1 / (32.0 * p_large**4)
    total = I0 + I1 + I2
    err = abs(I1 - I1b) + abs(I0 - I0b) + abs(f1) / (32.0 * p_large**4)
    return total, err
