"""Subordination representation of the fundamental solutions (d = 1).

Z and Y are mixtures of the stable semigroup kernel G over an independent
one-sided alpha-stable time change. This path never touches the spectral
synthesis code (G is evaluated by a direct cosine-transform quadrature), so
it serves as an independent cross-check oracle at isolated points.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import gammaln

from .errors import QuadratureNonConvergent, UnsupportedDimension, UnsupportedParameters

_LOG_CUTOFF = 40.0
_PANELS = 250
_GL_ORDER = 8  # 250 x 8 = 2000 nodes total
_EXP_UNDERFLOW = 700.0


def _zolotarev_a(phi, alpha):
    """Zolotarev's A(phi) on (0, pi), increasing from A_min to infinity."""
    a = alpha
    num = np.sin(a * phi) ** a * np.sin((1.0 - a) * phi) ** (1.0 - a)
    return (num / np.sin(phi)) ** (1.0 / (1.0 - a))


def _a_min(alpha):
    a = alpha
    return (a**a * (1.0 - a) ** (1.0 - a)) ** (1.0 / (1.0 - a))


def stable_subordinator_density(alpha: float, s) -> float | np.ndarray:
    """Density w_alpha(s) of the standard one-sided alpha-stable law.

    Standard means Laplace transform exp(-lambda^alpha). Evaluated through
    Zolotarev's single-integral representation, with the closed form
    s^(-3/2) exp(-1/(4s)) / (2 sqrt(pi)) short-circuiting alpha = 1/2.
    """
    if not (0.0 < alpha < 1.0):
        raise UnsupportedParameters(f"alpha must lie in (0, 1), got {alpha}")
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    flat = arr.reshape(-1)
    if np.any(flat <= 0):
        raise UnsupportedParameters("the one-sided density is supported on s > 0")
    if alpha == 0.5:
        out = flat**-1.5 * np.exp(-0.25 / flat) / (2.0 * math.sqrt(math.pi))
        return float(out[0]) if scalar else out.reshape(arr.shape)
    out = np.empty_like(flat)
    large = flat >= 1.0
    if np.any(large):
        out[large] = _tail_series(alpha, flat[large])
    out[~large] = [_zolotarev_point(alpha, x) for x in flat[~large]]
    return float(out[0]) if scalar else out.reshape(arr.shape)


def _tail_series(alpha: float, x: np.ndarray) -> np.ndarray:
    """Convergent large-argument series (1/pi) sum (-1)^(k+1) G(ak+1)/k! sin(pi k a) x^(-ak-1).

    For x >= 1 the terms decay from the start, so there is no cancellation
    blow-up; the Zolotarev integral covers the small-x regime instead.
    """
    a = alpha
    lx = np.log(x)
    total = np.zeros_like(x)
    live = np.ones(x.shape, dtype=bool)
    for k in range(1, 600):
        lmag = gammaln(a * k + 1.0) - gammaln(k + 1.0) - (a * k + 1.0) * lx[live]
        coeff = (-1.0) ** (k + 1) * math.sin(math.pi * k * a) / math.pi
        total[live] += coeff * np.exp(lmag)
        live_new = lmag > np.log(np.maximum(np.abs(total[live]), 1e-300)) - 37.0
        live[np.nonzero(live)[0][~live_new]] = False
        if not np.any(live):
            break
    return np.maximum(total, 0.0)


def _zolotarev_point(alpha: float, x: float) -> float:
    a = alpha
    eps = x ** (-a / (1.0 - a))
    if eps * _a_min(a) > _EXP_UNDERFLOW:
        return 0.0

    def integrand(phi):
        av = _zolotarev_a(phi, a)
        return av * math.exp(-eps * av)

    # locate where the exponential starts killing the integrand so the
    # adaptive rule subdivides there (A blows up at phi = pi)
    points = None
    if eps * _zolotarev_a(np.pi * (1.0 - 1e-9), a) > 30.0 > eps * _a_min(a) * 1.001:
        lo, hi = 1e-9, np.pi * (1.0 - 1e-9)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if eps * _zolotarev_a(mid, a) < 30.0:
                lo = mid
            else:
                hi = mid
        points = [0.5 * (lo + hi)]
    val, err = quad(integrand, 0.0, np.pi, points=points, limit=400,
                    epsabs=1e-300, epsrel=1e-11)
    if not np.isfinite(val) or err > 1e-7 * abs(val) + 1e-300:
        raise QuadratureNonConvergent(
            f"Zolotarev quadrature error {err:.2e} too large at alpha={alpha}, s={x}"
        )
    pref = (a / (1.0 - a)) * x ** (-1.0 / (1.0 - a)) / math.pi
    return pref * val


def _g_point(symbol, tau, x: float) -> np.ndarray:
    """Stable kernel G(tau, x) in d = 1 by direct cosine-transform quadrature."""
    if symbol.measure.dimension != 1:
        raise UnsupportedDimension("the subordination cross-check is implemented for d=1")
    omega = symbol.omega(np.array([1.0]))
    beta = symbol.beta
    taus = np.asarray(tau, dtype=float).reshape(-1)
    if beta == 1.0:
        # Cauchy closed form for unit symbol scale omega
        vals = (taus * omega) / (np.pi * ((taus * omega) ** 2 + x**2))
        return vals

    out = np.empty(len(taus))
    for i, tv in enumerate(taus):
        if x != 0.0 and tv * omega <= 1e-6 * abs(x) ** beta:
            # leading small-time term of the stable kernel, relative error O(tv)
            out[i] = (tv * omega * math.gamma(1.0 + beta)
                      * math.sin(math.pi * beta / 2.0) / (math.pi * abs(x) ** (1.0 + beta)))
            continue
        if x != 0.0:
            # QAWF handles the oscillatory weight even when the envelope
            # decays slowly (tiny tv)
            val, err = quad(
                lambda xi: math.exp(-tv * omega * xi**beta),
                0.0,
                np.inf,
                weight="cos",
                wvar=x,
                limit=400,
            )
        else:
            val, err = quad(
                lambda xi: math.exp(-tv * omega * xi**beta),
                0.0,
                np.inf,
                limit=400,
            )
        if not np.isfinite(val) or err > max(1e-9 * abs(val), 1e-7):
            raise QuadratureNonConvergent(
                f"cosine-transform quadrature error {err:.2e} too large at tau={tv}"
            )
        out[i] = val / np.pi
    return out


def _log_mesh(panels: int, order: int):
    nodes, weights = leggauss(order)
    edges = np.linspace(-_LOG_CUTOFF, _LOG_CUTOFF, panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    u = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return u, w


def _mixture(params, symbol, t: float, x: float, kind: str, panels: int) -> float:
    a = params.alpha
    u, w = _log_mesh(panels, _GL_ORDER)
    s = np.exp(u)
    tau = s ** (-1.0 / a)
    dens = np.zeros_like(tau)
    with np.errstate(over="ignore"):
        live = tau ** (-a / (1.0 - a)) * _a_min(a) < _EXP_UNDERFLOW
    dens[live] = stable_subordinator_density(a, tau[live])
    g = np.zeros_like(tau)
    g[live] = _g_point(symbol, t**a * s[live], x)
    if kind == "Z":
        integrand = (1.0 / a) * g * s ** (-1.0 / a) * dens
    else:
        integrand = t ** (a - 1.0) * g * s ** (1.0 - 1.0 / a) * dens
    assert np.all(integrand >= 0.0), "mixture integrand is a product of densities"
    return float(integrand @ w)


def _converged_mixture(params, symbol, t, x, kind):
    if t <= 0:
        raise UnsupportedParameters("time must be positive")
    coarse = _mixture(params, symbol, t, x, kind, _PANELS // 2)
    fine = _mixture(params, symbol, t, x, kind, _PANELS)
    if abs(fine - coarse) > 1e-5 * max(abs(fine), 1e-30):
        raise QuadratureNonConvergent(
            f"subordination quadrature did not settle: {coarse!r} vs {fine!r}"
        )
    return fine


def z_subordination(params, symbol, t: float, x: float) -> float:
    """Z(t, x) as the subordinated mixture of G over the stable time change."""
    return _converged_mixture(params, symbol, t, x, "Z")


def y_subordination(params, symbol, t: float, x: float) -> float:
    """Y(t, x) via the mixture with the s^(-1/alpha) weight and t^(alpha-1) factor."""
    return _converged_mixture(params, symbol, t, x, "Y")
