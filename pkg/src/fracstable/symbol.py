"""Spectral measures on the unit sphere and the homogeneous operator symbol.

The symbol of the spatial operator is psi(xi) = |xi|^beta * omega(xi/|xi|),
where omega(theta) is the directional moment of a centrally symmetric measure
on S^{d-1}. Supported dimensions: 1, 2, 3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    AsymmetricMeasure,
    NonPositiveWeight,
    NonUnitDirection,
    UnsupportedDimension,
    UnsupportedParameters,
)

_UNIT_NORM_TOL = 1e-12
_OMEGA_TABLE_SIZE = 1024

# d=3 product rule: Gauss-Legendre in cos(polar) x trapezoid in azimuth.
_D3_N_POLAR = 24
_D3_N_AZIMUTH = 48


@dataclass(frozen=True)
class SpectralMeasure:
    """Discrete (atomic or quadrature-sampled) measure on S^{d-1}.

    ``directions`` is an (n, d) array of unit vectors, ``weights`` the
    corresponding positive masses. Density-form measures are stored as atoms
    on their quadrature mesh, so all downstream code sees one representation.
    """

    dimension: int
    directions: np.ndarray
    weights: np.ndarray
    is_density: bool = False
    total_mass: float = field(init=False, default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "directions", np.atleast_2d(np.asarray(self.directions, dtype=float)))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        self.directions.setflags(write=False)
        self.weights.setflags(write=False)
        object.__setattr__(self, "total_mass", float(self.weights.sum()))


def _check_directions(directions, d):
    norms = np.linalg.norm(directions, axis=1)
    if not np.all(np.abs(norms - 1.0) <= _UNIT_NORM_TOL):
        raise NonUnitDirection(f"directions must be unit vectors within {_UNIT_NORM_TOL}")
    if directions.shape[1] != d:
        raise UnsupportedDimension(f"direction dimension {directions.shape[1]} != {d}")


def _symmetry_defect(directions, weights):
    """Max weight mismatch between each node and its antipode (inf if missing)."""
    defect = 0.0
    for eta, w in zip(directions, weights):
        dots = directions @ eta
        j = int(np.argmin(dots))
        if dots[j] > -1.0 + 1e-9:
            return np.inf
        defect = max(defect, abs(w - weights[j]))
    return defect


def _symmetrize(directions, weights):
    """Average the measure with its reflection, preserving total mass."""
    dirs = np.concatenate([directions, -directions])
    wts = np.concatenate([weights, weights]) / 2.0
    # merge coincident nodes
    out_dirs, out_wts = [], []
    used = np.zeros(len(dirs), dtype=bool)
    for i in range(len(dirs)):
        if used[i]:
            continue
        same = np.linalg.norm(dirs - dirs[i], axis=1) <= 1e-12
        out_dirs.append(dirs[i])
        out_wts.append(wts[same].sum())
        used |= same
    return np.array(out_dirs), np.array(out_wts)


def _d2_mesh(n):
    phi = 2.0 * np.pi * np.arange(n) / n
    directions = np.column_stack([np.cos(phi), np.sin(phi)])
    return phi, directions


def _d3_mesh():
    nodes_ct, wts_ct = np.polynomial.legendre.leggauss(_D3_N_POLAR)
    phi = 2.0 * np.pi * np.arange(_D3_N_AZIMUTH) / _D3_N_AZIMUTH
    w_phi = 2.0 * np.pi / _D3_N_AZIMUTH
    ct, ph = np.meshgrid(nodes_ct, phi, indexing="ij")
    st = np.sqrt(1.0 - ct**2)
    directions = np.column_stack(
        [(st * np.cos(ph)).ravel(), (st * np.sin(ph)).ravel(), ct.ravel()]
    )
    quad_w = (wts_ct[:, None] * w_phi * np.ones(_D3_N_AZIMUTH)[None, :]).ravel()
    return directions, quad_w


def build_measure(spec, symmetrize=False):
    """Build a SpectralMeasure from a description dict.

    Accepted forms:
      {"dimension": d, "atoms": [[*direction, weight], ...]}
      {"dimension": d, "density": "uniform"}            (d in {1,2,3})
      {"dimension": d, "density": [rho_0, ...]}          (samples on the mesh)
      optional "mesh_size": angle count for d=2 (default 256)

    Atomic measures must be centrally symmetric; pass ``symmetrize=True`` to
    average an asymmetric input with its reflection instead of rejecting it.
    """
    d = spec.get("dimension")
    if d not in (1, 2, 3):
        raise UnsupportedDimension(f"dimension must be 1, 2 or 3, got {d!r}")

    if "atoms" in spec:
        atoms = np.asarray(spec["atoms"], dtype=float)
        if atoms.ndim != 2 or atoms.shape[1] != d + 1:
            raise UnsupportedDimension(f"each atom needs {d} direction components plus a weight")
        directions = atoms[:, :d]
        weights = atoms[:, d]
        if np.any(weights <= 0):
            raise NonPositiveWeight("atom weights must be strictly positive")
        _check_directions(directions, d)
        if _symmetry_defect(directions, weights) > 1e-12:
            if not symmetrize:
                raise AsymmetricMeasure(
                    "measure is not centrally symmetric; pass symmetrize=True to average with its reflection"
                )
            directions, weights = _symmetrize(directions, weights)
        return SpectralMeasure(d, directions, weights, is_density=False)

    if "density" in spec:
        dens = spec["density"]
        if d == 1:
            directions = np.array([[1.0], [-1.0]])
            quad_w = np.array([1.0, 1.0])
        elif d == 2:
            n = int(spec.get("mesh_size", 256))
            if n % 2:
                raise UnsupportedDimension("d=2 mesh_size must be even for central symmetry")
            _, directions = _d2_mesh(n)
            quad_w = np.full(n, 2.0 * np.pi / n)
        else:
            directions, quad_w = _d3_mesh()

        if isinstance(dens, str):
            if dens != "uniform":
                raise NonPositiveWeight(f"unknown density name {dens!r}")
            surface = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}[d]
            rho = np.full(len(directions), 1.0 / surface)
        else:
            rho = np.asarray(dens, dtype=float)
            if rho.shape != (len(directions),):
                raise UnsupportedDimension(
                    f"density sample array must have {len(directions)} entries for this mesh"
                )
        if np.any(rho <= 0):
            raise NonPositiveWeight("density values must be strictly positive")
        weights = rho * quad_w
        if _symmetry_defect(directions, weights) > 1e-12:
            if not symmetrize:
                raise AsymmetricMeasure("sampled density is not centrally symmetric")
            weights = 0.5 * (weights + weights[_antipode_index(directions)])
        return SpectralMeasure(d, directions, weights, is_density=True)

    raise UnsupportedDimension("measure spec needs either 'atoms' or 'density'")


def _antipode_index(directions):
    idx = np.empty(len(directions), dtype=int)
    for i, eta in enumerate(directions):
        idx[i] = int(np.argmin(directions @ eta))
    return idx


class Symbol:
    """Evaluates omega(theta) and psi(xi) for a spectral measure.

    For d=2 density measures, omega is tabulated on a uniform angle mesh and
    evaluated by periodic cubic interpolation; atomic measures use the exact
    direct sum (cheap, and free of kink-interpolation error). ``method``
    forces one path: "table" or "direct".
    """

    def __init__(self, measure: SpectralMeasure, beta: float, method: str | None = None):
        if not (0.0 < beta < 2.0):
            raise UnsupportedParameters(f"beta must lie in (0, 2), got {beta}")
        self.measure = measure
        self.beta = float(beta)
        if method is None:
            method = "table" if (measure.dimension == 2 and measure.is_density) else "direct"
        if method not in ("table", "direct"):
            raise ValueError(f"unknown omega method {method!r}")
        self.method = method
        self._spline = None
        if self.method == "table":
            if measure.dimension != 2:
                raise UnsupportedDimension("omega table is implemented for d=2 only")
            ang = np.linspace(0.0, 2.0 * np.pi, _OMEGA_TABLE_SIZE + 1)
            thetas = np.column_stack([np.cos(ang), np.sin(ang)])
            vals = self._omega_direct(thetas)
            vals[-1] = vals[0]
            assert np.all(vals > 0), "omega table must be strictly positive"
            self._spline = CubicSpline(ang, vals, bc_type="periodic")

    def _omega_direct(self, thetas):
        thetas = np.atleast_2d(thetas)
        dots = np.abs(thetas @ self.measure.directions.T)
        return (dots**self.beta) @ self.measure.weights

    def omega(self, theta):
        """omega(theta) for a single unit vector theta."""
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if abs(np.linalg.norm(theta) - 1.0) > 1e-9:
            raise NonUnitDirection("theta must be a unit vector within 1e-9")
        return float(self._omega_vec(theta[None, :])[0])

    def _omega_vec(self, thetas):
        if self.method == "table":
            ang = np.arctan2(thetas[:, 1], thetas[:, 0]) % (2.0 * np.pi)
            return self._spline(ang)
        return self._omega_direct(thetas)

    def psi(self, xi):
        """psi(xi) = |xi|^beta * omega(xi/|xi|); psi(0) = 0.

        Accepts a single d-vector or an (n, d) array; returns float or array.
        """
        arr = np.asarray(xi, dtype=float)
        d = self.measure.dimension
        if d == 1:
            single = arr.ndim == 0
            pts = arr.reshape(-1, 1)
            out_shape = arr.shape
        else:
            single = arr.ndim == 1
            pts = arr.reshape(-1, d)
            out_shape = arr.shape[:-1]
        norms = np.linalg.norm(pts, axis=1)
        out = np.zeros(len(pts))
        nz = norms > 0
        if np.any(nz):
            out[nz] = norms[nz] ** self.beta * self._omega_vec(pts[nz] / norms[nz, None])
        if single:
            return float(out[0])
        return out.reshape(out_shape)
