import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracstable import (
    ModelParams,
    stable_subordinator_density,
    y_subordination,
    z_subordination,
)
from fracstable.errors import UnsupportedParameters


def test_half_stable_closed_form():
    s = np.geomspace(0.01, 20.0, 30)
    expected = s**-1.5 * np.exp(-0.25 / s) / (2.0 * math.sqrt(math.pi))
    assert np.allclose(stable_subordinator_density(0.5, s), expected, rtol=1e-13)


def test_density_laplace_transform():
    # the standard one-sided law has Laplace transform exp(-lambda^alpha)
    for alpha in (0.3, 0.7):
        val, err = quad(lambda s: math.exp(-s) * stable_subordinator_density(alpha, s),
                        0.0, np.inf, limit=200)
        assert val == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_density_continuous_at_regime_switch():
    # evaluation switches machinery at s = 1
    for alpha in (0.4, 0.8):
        lo = stable_subordinator_density(alpha, 1.0 - 1e-9)
        hi = stable_subordinator_density(alpha, 1.0 + 1e-9)
        assert lo == pytest.approx(hi, rel=1e-7)


def test_density_parameter_errors():
    with pytest.raises(UnsupportedParameters):
        stable_subordinator_density(1.2, 1.0)
    with pytest.raises(UnsupportedParameters):
        stable_subordinator_density(0.5, -1.0)


def test_z_subordination_positive(params_nl, symbol_15):
    for x in (0.5, 1.0, 2.0):
        assert z_subordination(params_nl, symbol_15, 1.0, x) > 0.0


def test_y_exceeds_nothing_weird(params_nl, symbol_15):
    # both kernels decay in |x| away from the core
    z1 = z_subordination(params_nl, symbol_15, 1.0, 1.0)
    z3 = z_subordination(params_nl, symbol_15, 1.0, 3.0)
    y1 = y_subordination(params_nl, symbol_15, 1.0, 1.0)
    y3 = y_subordination(params_nl, symbol_15, 1.0, 3.0)
    assert z3 < z1 and y3 < y1
    assert y1 > 0 and y3 > 0
