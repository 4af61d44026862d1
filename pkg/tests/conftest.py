import numpy as np
import pytest

from fracstable import Grid, ModelParams, Symbol, build_measure


@pytest.fixture(scope="session")
def measure_1d():
    return build_measure({"dimension": 1, "atoms": [[1.0, 0.5], [-1.0, 0.5]]})


@pytest.fixture(scope="session")
def measure_2d():
    return build_measure({"dimension": 2, "density": "uniform"})


@pytest.fixture(scope="session")
def symbol_15(measure_1d):
    return Symbol(measure_1d, 1.5)


@pytest.fixture(scope="session")
def symbol_10(measure_1d):
    return Symbol(measure_1d, 1.0)


@pytest.fixture(scope="session")
def params_nl():
    """Nonlinear absorbing benchmark configuration."""
    return ModelParams(0.5, 1.5, 2.0, -1.0, 1)


@pytest.fixture(scope="session")
def grid_1d():
    return Grid(1, 60.0, 256)


@pytest.fixture(scope="session")
def bump(grid_1d):
    x = grid_1d.axis()
    return np.exp(-(x**2))
