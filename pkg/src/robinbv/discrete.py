"""Scalar fields on grid domains and the shared discrete operators.

All functionals below use forward differences restricted to the interior
mask: a difference across a missing neighbor is zero, so boundary faces
never enter the interior gradient. The isotropic total variation pairs the
two forward jumps of each cell in an Euclidean norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import GridDomain


@dataclass(eq=False)
class ScalarField:
    """One real value per interior cell, stored on the full bounding grid."""

    grid: GridDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError("field shape does not match the grid")
        if not np.all(np.isfinite(v[self.grid.mask])):
            raise ValueError("field has non-finite interior values")
        self.values = np.where(self.grid.mask, v, 0.0)

    @classmethod
    def constant(cls, grid: GridDomain, value: float = 1.0) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: GridDomain, fn) -> "ScalarField":
        return cls(grid, fn(np.asarray(grid.X), np.asarray(grid.Y)))

    @classmethod
    def indicator(cls, grid: GridDomain, subset_mask: np.ndarray) -> "ScalarField":
        return cls(grid, np.where(subset_mask & grid.mask, 1.0, 0.0))

    def interior(self) -> np.ndarray:
        return self.values[self.grid.mask]

    def is_zero(self) -> bool:
        return not np.any(self.values[self.grid.mask] != 0.0)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def forward_diffs(grid: GridDomain, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Forward jumps (right neighbor minus cell, upper minus cell) within the mask."""
    m = grid.mask
    dx = np.zeros(grid.shape)
    dy = np.zeros(grid.shape)
    both_x = m[:, :-1] & m[:, 1:]
    both_y = m[:-1, :] & m[1:, :]
    dx[:, :-1] = np.where(both_x, a[:, 1:] - a[:, :-1], 0.0)
    dy[:-1, :] = np.where(both_y, a[1:, :] - a[:-1, :], 0.0)
    return dx, dy


def _binomial_pass(a: np.ndarray) -> np.ndarray:
    """Separable 3x3 binomial filter with zero padding."""
    b = 0.5 * a
    b[:, 1:] += 0.25 * a[:, :-1]
    b[:, :-1] += 0.25 * a[:, 1:]
    c = 0.5 * b
    c[1:, :] += 0.25 * b[:-1, :]
    c[:-1, :] += 0.25 * b[1:, :]
    return c


class TVMeasure:
    """Isotropic total variation measured through a short masked mollifier.

    The raw forward-difference TV of a binary staircase overshoots oblique
    and curved boundaries by up to 16 percent (the per-cell Euclidean
    pairing only couples the two jump directions in half of the normal
    orientations). Measuring the TV of the mask-renormalized binomial
    smoothing of the field removes almost all of that bias (circles land
    within about 2 percent) while keeping straight axis-aligned interfaces
    and constant fields exact. The smoothing is a fixed linear operator,
    so the smoothed TV is still a convex positively 1-homogeneous
    functional with an explicit adjoint for primal-dual solvers.
    """

    def __init__(self, grid: GridDomain, passes: int = 2):
        self.grid = grid
        self.passes = passes
        self._maskf = grid.mask.astype(float)
        self._wm = np.maximum(_binomial_pass(self._maskf), 1e-300)

    def smooth(self, a: np.ndarray) -> np.ndarray:
        out = np.where(self.grid.mask, a, 0.0)
        for _ in range(self.passes):
            out = np.where(self.grid.mask, _binomial_pass(out * self._maskf) / self._wm, 0.0)
        return out

    def smooth_adjoint(self, a: np.ndarray) -> np.ndarray:
        out = a
        for _ in range(self.passes):
            out = self._maskf * _binomial_pass(np.where(self.grid.mask, out, 0.0) / self._wm)
        return np.where(self.grid.mask, out, 0.0)

    def gradient(self, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return forward_diffs(self.grid, self.smooth(a))

    def gradient_adjoint(self, qx: np.ndarray, qy: np.ndarray) -> np.ndarray:
        return self.smooth_adjoint(grad_adjoint(self.grid, qx, qy))

    def tv(self, a: np.ndarray) -> float:
        dx, dy = self.gradient(a)
        return self.grid.h * float(np.sqrt(dx * dx + dy * dy).sum())

    def operator_norm(self, iterations: int = 40, seed: int = 0) -> float:
        """Power-iteration estimate of the composed gradient operator norm."""
        rng = np.random.default_rng(seed)
        v = np.where(self.grid.mask, rng.standard_normal(self.grid.shape), 0.0)
        nrm = 1.0
        for _ in range(iterations):
            qx, qy = self.gradient(v)
            v = self.gradient_adjoint(qx, qy)
            nrm = math.sqrt(float((v * v).sum()))
            if nrm == 0.0:
                return math.sqrt(8.0)
            v = v / nrm
        return math.sqrt(nrm)


def grad_adjoint(grid: GridDomain, qx: np.ndarray, qy: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`forward_diffs`: <Dv, q> = <v, grad_adjoint(q)> exactly.

    Dual variables on invalid faces must be zero; this holds whenever q was
    produced by updates of the form q += sigma * forward_diffs(...).
    """
    out = np.zeros(grid.shape)
    out -= qx
    out[:, 1:] += qx[:, :-1]
    out -= qy
    out[1:, :] += qy[:-1, :]
    out[~grid.mask] = 0.0
    return out


def total_variation(grid: GridDomain, a: np.ndarray) -> float:
    """Isotropic discrete total variation h * sum_c |(jump_x, jump_y)|_2."""
    dx, dy = forward_diffs(grid, a)
    return grid.h * float(np.sqrt(dx * dx + dy * dy).sum())


def boundary_mass(grid: GridDomain, a: np.ndarray) -> float:
    """Weighted boundary sum: each face contributes its measure times |owner value|."""
    return float((grid.wsum * np.abs(a)).sum())


def interior_mass(grid: GridDomain, a: np.ndarray) -> float:
    """h^2-weighted sum of |values| over interior cells."""
    return grid.h**2 * float(np.abs(a[grid.mask]).sum())


def boundary_layer_mask(grid: GridDomain, width: float) -> np.ndarray:
    """Interior cells within the given physical distance of the boundary.

    The mask is padded with an exterior ring before the distance transform
    so domains that fill their bounding box still see the boundary.
    """
    padded = np.pad(grid.mask, 1, constant_values=False)
    dist_cells = ndimage.distance_transform_edt(padded)[1:-1, 1:-1]
    k = max(1, int(round(width / grid.h)))
    return grid.mask & (dist_cells <= k)


def trace_constant_estimate(grid: GridDomain, nprobes: int = 200, seed: int = 0) -> float:
    """Probe estimate of the discrete trace constant.

    Maximizes boundary mass / (total variation + interior mass) over random
    piecewise-constant fields plus deterministic boundary collars; the
    collars are the near-extremal profiles, the random probes guard against
    grid pathologies. Uses the raw forward-difference TV, the functional
    the relaxed solver actually descends on.
    """
    rng = np.random.default_rng(seed)
    ny, nx = grid.shape
    best = 0.0

    def ratio(v):
        num = boundary_mass(grid, v)
        den = total_variation(grid, v) + interior_mass(grid, v)
        return num / den if den > 0 else 0.0

    for k in range(1, 9):
        layer = boundary_layer_mask(grid, k * grid.h)
        best = max(best, ratio(np.where(layer, 1.0, 0.0)))

    for _ in range(nprobes):
        bs = int(rng.choice([2, 4, 8, 16]))
        coarse = rng.random(((ny + bs - 1) // bs, (nx + bs - 1) // bs))
        v = np.kron(coarse, np.ones((bs, bs)))[:ny, :nx]
        v = np.where(grid.mask, v, 0.0)
        best = max(best, ratio(v))

    return best
