"""Uniform spatial grids and their exact discrete frequency duals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedDimension


@dataclass(frozen=True)
class Grid:
    """Tensor grid on [-L/2, L/2)^d with N nodes per axis.

    The dual frequency nodes are xi_k = 2*pi*k/L for k in [-N/2, N/2),
    stored in FFT ordering by the helpers below.
    """

    dimension: int
    extent: float
    n: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise UnsupportedDimension(f"grid dimension must be 1, 2 or 3, got {self.dimension}")
        if self.n < 16 or self.n % 2:
            raise ValueError("node count must be even and at least 16")
        if self.extent <= 0:
            raise ValueError("extent must be positive")

    @property
    def spacing(self) -> float:
        return self.extent / self.n

    def axis(self) -> np.ndarray:
        """Spatial nodes along one axis."""
        return -self.extent / 2.0 + self.spacing * np.arange(self.n)

    def mesh(self):
        """Spatial coordinate arrays, one per axis (meshgrid, ij indexing)."""
        axes = [self.axis()] * self.dimension
        return np.meshgrid(*axes, indexing="ij")

    def radius(self) -> np.ndarray:
        """|x| at every node."""
        coords = self.mesh()
        return np.sqrt(sum(c**2 for c in coords))

    def freq_axis(self) -> np.ndarray:
        """Frequency nodes along one axis, FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)

    def freq_points(self) -> np.ndarray:
        """All frequency nodes as an (N^d, d) array, FFT ordering."""
        axes = [self.freq_axis()] * self.dimension
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def shape(self):
        return (self.n,) * self.dimension

    @property
    def center_index(self):
        """Index of the x = 0 node."""
        return (self.n // 2,) * self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    def rescaled(self, factor: float) -> "Grid":
        """Same node count, extent multiplied by ``factor``."""
        return Grid(self.dimension, self.extent * factor, self.n)


def synthesize(grid: Grid, transform_values: np.ndarray) -> np.ndarray:
    """Invert a sampled Fourier transform onto the spatial grid.

    ``transform_values`` holds F(xi_k) in FFT ordering (shape grid.shape).
    Returns the real field values at x_j = -L/2 + j*h; the phase factor
    accounts for the half-extent shift. The discrete sum h^d * sum(values)
    equals F(0) identically, so mass identities hold to round-off.
    """
    f = np.asarray(transform_values, dtype=complex).reshape(grid.shape)
    f = _apply_shift_phase(grid, f)
    vals = np.fft.ifftn(f) * (grid.n / grid.extent) ** grid.dimension
    return vals


def analyze(grid: Grid, values: np.ndarray) -> np.ndarray:
    """Sampled Fourier transform of a gridded field (inverse of synthesize).

    Returns F(xi_k) = h^d * sum_j f(x_j) exp(-i xi_k . x_j) in FFT ordering;
    the phase factor undoes the half-extent origin shift, so
    synthesize(grid, analyze(grid, f)) == f to round-off.
    """
    f = np.fft.fftn(np.asarray(values, dtype=complex).reshape(grid.shape))
    f = _apply_shift_phase(grid, f) * grid.cell_volume
    return f


def _apply_shift_phase(grid: Grid, f: np.ndarray) -> np.ndarray:
    k = np.fft.fftfreq(grid.n) * grid.n
    sign = 1.0 - 2.0 * (np.mod(k, 2))
    for ax in range(grid.dimension):
        shape = [1] * grid.dimension
        shape[ax] = grid.n
        f = f * sign.reshape(shape)
    return f
