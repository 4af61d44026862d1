"""Reference evaluator for E_{alpha,delta}(-x), independent of the package.

Two regimes with disjoint machinery from the production code paths:
arbitrary-precision power series for x <= 10, and the Laplace branch-cut
inversion integral for x > 10. The two agree at the switch point to ~1e-12,
which bounds the oracle's own error well below the comparison tolerances.
"""

import math

import mpmath
import numpy as np
from scipy.integrate import quad


def _series(alpha: float, delta: float, x: float) -> float:
    y = x ** (1.0 / alpha)
    dps = 40 + int(0.5 * y)
    kstar = max(10, int(y / alpha) + 2)
    with mpmath.workdps(dps):
        ma, md, mx = mpmath.mpf(alpha), mpmath.mpf(delta), mpmath.mpf(x)
        total = mpmath.mpf(0)
        term = mpmath.mpf(1)
        floor = mpmath.mpf(10) ** (-dps - 10)
        k = 0
        while True:
            c = term * mpmath.rgamma(k * ma + md)
            total += c
            if k > kstar and abs(c) < abs(total) * mpmath.mpf(10) ** -25 + floor:
                break
            k += 1
            term = -term * mx
        return float(total)


def _branch_cut(alpha: float, delta: float, x: float) -> float:
    a, d = alpha, delta
    t = x ** (1.0 / a)
    sd = math.sin(math.pi * d)
    sda = math.sin(math.pi * (d - a))
    ca = math.cos(math.pi * a)

    def integrand(u):
        r = u / t
        num = r ** (a - d) * (r**a * sd + sda)
        den = r ** (2 * a) + 2.0 * r**a * ca + 1.0
        return math.exp(-u) * num / den

    val, err = quad(integrand, 0.0, np.inf, limit=400, epsabs=0.0, epsrel=1e-12)
    assert err <= 1e-11 * max(abs(val), 1e-280), "oracle quadrature did not settle"
    return t ** (1.0 - d) * val / (math.pi * t)


def ml_reference(alpha: float, delta: float, x: float) -> float:
    """E_{alpha,delta}(-x) for x >= 0, certified to well below 1e-10 relative."""
    if x == 0.0:
        return float(mpmath.rgamma(delta))
    if x <= 10.0:
        return _series(alpha, delta, x)
    return _branch_cut(alpha, delta, x)
