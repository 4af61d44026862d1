import numpy as np
import pytest

from fracstable import Grid, analyze, synthesize
from fracstable.errors import UnsupportedDimension


def test_grid_validation():
    with pytest.raises(UnsupportedDimension):
        Grid(4, 10.0, 32)
    with pytest.raises(ValueError):
        Grid(1, 10.0, 33)
    with pytest.raises(ValueError):
        Grid(1, -1.0, 32)


def test_axis_and_spacing():
    g = Grid(1, 10.0, 20)
    x = g.axis()
    assert x[0] == -5.0
    assert np.allclose(np.diff(x), 0.5)
    assert g.center_index == (10,)
    assert x[g.center_index[0]] == 0.0


def test_roundtrip_1d():
    g = Grid(1, 40.0, 128)
    x = g.axis()
    v = np.exp(-(x**2)) * np.cos(x)
    back = synthesize(g, analyze(g, v)).real
    assert np.max(np.abs(back - v)) <= 1e-13


def test_roundtrip_2d():
    g = Grid(2, 20.0, 32)
    xs, ys = g.mesh()
    v = np.exp(-(xs**2 + ys**2))
    back = synthesize(g, analyze(g, v)).real
    assert np.max(np.abs(back - v)) <= 1e-13


def test_discrete_mass_equals_zero_frequency():
    g = Grid(1, 30.0, 64)
    rng = np.random.default_rng(1)
    f = rng.normal(size=64)
    vals = synthesize(g, f + 0j)
    # h * sum of synthesized values reproduces the transform at xi = 0
    assert float(vals.sum().real * g.spacing) == pytest.approx(f[0], abs=1e-12)


def test_gaussian_transform_pair():
    # exp(-x^2/2) has transform sqrt(2 pi) exp(-xi^2/2)
    g = Grid(1, 80.0, 1024)
    xi = g.freq_axis()
    field = synthesize(g, np.sqrt(2 * np.pi) * np.exp(-(xi**2) / 2.0)).real
    x = g.axis()
    assert np.max(np.abs(field - np.exp(-(x**2) / 2.0))) <= 1e-12


def test_rescaled_keeps_nodes():
    g = Grid(1, 10.0, 32)
    r = g.rescaled(2.0)
    assert r.extent == 20.0 and r.n == 32
