"""Two-parameter Mittag-Leffler function on the negative real axis.

Only E_{alpha,delta}(-x) with x >= 0, alpha in (0,1], delta > 0 is supported;
that is the entire regime the transforms of the fundamental solutions need.

Evaluation strategy (per point, driven by y = x^(1/alpha)):
  y <= Y_SERIES   defining Taylor series, accumulated in extended precision
                  (80-bit long double) with a precomputed reciprocal-gamma
                  coefficient table; cancellation there is at most ~e^y.
  y >= Y_ASYM     divergent asymptotic expansion in 1/x, truncated at the
                  smallest term; accepted only when that term certifies the
                  target accuracy.
  in between      arbitrary-precision series (mpmath) with working precision
                  scaled to the e^y cancellation.

A cubic-spline fast path over log x serves bulk grid evaluation; the exact
path above is used directly by tests and the ml-eval CLI.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import rgamma

from .errors import PositiveArgument, UnsupportedParameters

Y_SERIES = 9.0
Y_ASYM = 25.0

_SERIES_MAX_TERMS = 2048
_ASYM_MAX_TERMS = 400
_SPLINE_PER_DECADE = 600
_SPLINE_X_LO = 1e-8

_EVALUATOR_CACHE: dict[tuple[float, float], "MLEvaluator"] = {}


def _check_params(alpha, delta):
    if not (0.0 < alpha <= 1.0):
        raise UnsupportedParameters(f"alpha must lie in (0, 1], got {alpha}")
    if delta <= 0.0:
        raise UnsupportedParameters(f"delta must be positive, got {delta}")


class MLEvaluator:
    """Evaluator for E_{alpha,delta}(-x), x >= 0, at fixed (alpha, delta)."""

    def __init__(self, alpha: float, delta: float, target_rel_tol: float = 1e-12):
        _check_params(alpha, delta)
        self.alpha = float(alpha)
        self.delta = float(delta)
        self.target_rel_tol = float(target_rel_tol)
        self.at_zero = float(rgamma(self.delta))
        # series switch point in x for this (alpha, delta)
        self.x_series_max = Y_SERIES**self.alpha
        self.x_asym_min = Y_ASYM**self.alpha
        self._series_ratios = self._build_series_ratios()
        self._asym_coeffs = self._build_asym_coeffs()
        self._spline = None
        self._spline_hi = 0.0

    # ------------------------------------------------------------------ setup

    def _build_series_ratios(self):
        """ratios[k] = Gamma((k-1)a+d)/Gamma(ka+d) in long double, k >= 1."""
        a, d = self.alpha, self.delta
        ratios = np.empty(_SERIES_MAX_TERMS, dtype=np.longdouble)
        with mpmath.workdps(40):
            # gamma arguments must be formed in mpf arithmetic: float64
            # rounding of k*a+d costs ~psi(k*a)*ulp relative per coefficient
            ma, md = mpmath.mpf(a), mpmath.mpf(d)
            prev = mpmath.gamma(md)
            for k in range(1, _SERIES_MAX_TERMS):
                cur = mpmath.gamma(k * ma + md)
                ratios[k] = np.longdouble(mpmath.nstr(prev / cur, 25))
                prev = cur
        return ratios

    def _build_asym_coeffs(self):
        a, d = self.alpha, self.delta
        ks = np.arange(1, _ASYM_MAX_TERMS + 1)
        signs = np.where(ks % 2 == 1, 1.0, -1.0)
        args = d - ks * a
        # arguments within rounding of a Gamma pole give terms that are tiny
        # for sign reasons only; they must not certify the truncation error
        self._asym_degenerate = np.abs(args - np.round(args)) < 1e-6
        self._asym_degenerate &= np.round(args) <= 0
        return signs * rgamma(args)

    # ------------------------------------------------------- evaluation paths

    def _series_longdouble(self, x):
        """Taylor series in long double; valid for modest cancellation."""
        x = np.asarray(x, dtype=np.longdouble)
        term = np.full_like(x, np.longdouble(self.at_zero))
        total = term.copy()
        for k in range(1, _SERIES_MAX_TERMS):
            term = -term * x * self._series_ratios[k]
            total += term
            if np.all(np.abs(term) <= np.abs(total) * np.longdouble(1e-25)):
                break
        return total.astype(float)

    def _asymptotic(self, x):
        """Truncated asymptotic expansion; returns (values, certified mask)."""
        x = np.asarray(x, dtype=float)
        inv = 1.0 / x
        total = np.zeros_like(x)
        best = np.full_like(x, np.inf)
        frozen = np.zeros(x.shape, dtype=bool)
        power = np.ones_like(x)
        for k in range(_ASYM_MAX_TERMS):
            power = power * inv
            with np.errstate(invalid="ignore", over="ignore"):
                term = self._asym_coeffs[k] * power
            # coefficient overflow times power underflow: the tail is zero
            term = np.where(np.isfinite(term), term, 0.0)
            mag = np.abs(term)
            growing = mag > best
            frozen |= growing
            done = frozen | (power == 0.0)
            active = ~done
            total = np.where(active, total + term, total)
            if not self._asym_degenerate[k]:
                best = np.where(active & (mag > 0), np.minimum(best, mag), best)
            # underflow before any term grew: the tail really is negligible
            converged = (power == 0.0) & ~frozen
            if np.all(done) or np.all(converged | (best <= np.abs(total) * 1e-16)):
                best = np.where(converged, 0.0, best)
                break
        certified = best <= np.maximum(np.abs(total), 1e-300) * (0.1 * self.target_rel_tol)
        return total, certified

    def _mpmath_point(self, x):
        """Arbitrary-precision series; handles the cancellation band."""
        a, d = self.alpha, self.delta
        y = x ** (1.0 / a)
        dps = int(30 + 0.45 * y)
        kstar = max(8, int(y / a) + 2)
        with mpmath.workdps(dps):
            ma, md = mpmath.mpf(a), mpmath.mpf(d)
            mx = mpmath.mpf(x)
            total = mpmath.mpf(0)
            term_floor = mpmath.mpf(10) ** (-(dps - 2))
            k = 0
            term = mpmath.mpf(1)
            while True:
                c = mpmath.rgamma(k * ma + md)
                total += term * c
                if k > kstar and abs(term) * abs(c) < term_floor:
                    break
                if k > 50 * kstar + 2000:  # pragma: no cover - safety stop
                    break
                k += 1
                term = -term * mx
            return float(total)

    # ------------------------------------------------------------- public API

    def evaluate_with_regime(self, x):
        """Exact-path value of E_{alpha,delta}(-x) plus the regime used."""
        x = float(x)
        if x < 0:
            raise PositiveArgument("argument z = -x must be nonpositive")
        if x == 0.0:
            return self.at_zero, "series"
        if self.alpha == 1.0 and self.delta == 1.0:
            return math.exp(-x), "closed-form"
        if x <= self.x_series_max:
            return float(self._series_longdouble(x)), "series"
        if x >= self.x_asym_min:
            val, ok = self._asymptotic(x)
            if bool(ok):
                return float(val), "asymptotic"
        return self._mpmath_point(x), "extended-precision-series"

    def ml_exact(self, x):
        """Vectorized exact path: certified to ~target_rel_tol."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        flat = arr.reshape(-1)
        if np.any(flat < 0):
            raise PositiveArgument("argument z = -x must be nonpositive")
        out = np.empty_like(flat)
        if self.alpha == 1.0 and self.delta == 1.0:
            out = np.exp(-flat)
            return float(out[0]) if scalar else out.reshape(arr.shape)
        zero = flat == 0.0
        out[zero] = self.at_zero
        lo = (~zero) & (flat <= self.x_series_max)
        if np.any(lo):
            out[lo] = self._series_longdouble(flat[lo])
        hi = flat >= self.x_asym_min
        if np.any(hi):
            vals, ok = self._asymptotic(flat[hi])
            idx = np.nonzero(hi)[0]
            out[idx[ok]] = vals[ok]
            for i in idx[~ok]:
                out[i] = self._mpmath_point(flat[i])
        mid = (~zero) & (~lo) & (~hi)
        for i in np.nonzero(mid)[0]:
            out[i] = self._mpmath_point(flat[i])
        return float(out[0]) if scalar else out.reshape(arr.shape)

    def ml_fast(self, x):
        """Bulk path for field synthesis: log-x cubic spline, ~1e-10 accurate.

        Exact at x = 0 (so discrete mass identities are preserved bit-for-bit)
        and falls back to the certified asymptotic branch above the spline.
        """
        arr = np.asarray(x, dtype=float)
        flat = arr.reshape(-1)
        xmax = float(flat.max(initial=0.0))
        self._ensure_spline(xmax)
        out = np.empty_like(flat)
        zero = flat == 0.0
        out[zero] = self.at_zero
        if self.alpha == 1.0 and self.delta == 1.0:
            np.exp(-flat, out=out)
            out[zero] = 1.0
            return out.reshape(arr.shape)
        tiny = (~zero) & (flat < _SPLINE_X_LO)
        if np.any(tiny):
            xt = flat[tiny]
            out[tiny] = (
                self.at_zero
                - xt * rgamma(self.alpha + self.delta)
                + xt**2 * rgamma(2 * self.alpha + self.delta)
            )
        big = flat > self._spline_hi
        if np.any(big):
            vals, _ = self._asymptotic(flat[big])
            out[big] = vals
        mid = (~zero) & (~tiny) & (~big)
        if np.any(mid):
            out[mid] = self._spline(np.log10(flat[mid]))
        return out.reshape(arr.shape)

    def _ensure_spline(self, xmax):
        hi_needed = max(self.x_asym_min * 4.0, min(xmax, 1e30))
        if self._spline is not None and hi_needed <= self._spline_hi:
            return
        lo = math.log10(_SPLINE_X_LO)
        hi = math.log10(hi_needed) + 0.1
        n = int((hi - lo) * _SPLINE_PER_DECADE) + 1
        u = np.linspace(lo, hi, n)
        vals = self.ml_exact(10.0**u)
        self._spline = CubicSpline(u, vals)
        self._spline_hi = 10.0**hi / 1.2


def get_evaluator(alpha, delta, target_rel_tol=1e-12) -> MLEvaluator:
    """Shared evaluator cache; coefficient tables are costly to rebuild."""
    key = (float(alpha), float(delta))
    ev = _EVALUATOR_CACHE.get(key)
    if ev is None:
        ev = MLEvaluator(alpha, delta, target_rel_tol)
        _EVALUATOR_CACHE[key] = ev
    return ev


def ml(alpha, delta, z):
    """E_{alpha,delta}(z) for z <= 0 (scalar or array), exact path."""
    _check_params(alpha, delta)
    arr = np.asarray(z, dtype=float)
    if np.any(arr > 0):
        raise PositiveArgument("ml is only defined for z <= 0")
    return get_evaluator(alpha, delta).ml_exact(-arr if arr.ndim else -float(arr))
