"""Parametric planar domains, exact measures, and mask-based rasterization.

Domain specifications are small frozen dataclasses carrying exact geometry:
closed-form volume and boundary measure, strict point-membership tests, and
outward boundary normals. :func:`rasterize` turns a specification into a
:class:`GridDomain`, the uniform-grid carrier used by all discrete solvers.

Grid conventions
----------------
Cells are squares of side ``h``. The cell at row ``i``, column ``j`` has its
center at ``(x0 + (j + 0.5) h, y0 + (i + 0.5) h)``. A cell is interior when
its center lies in the open domain. A boundary face separates an interior
cell from a non-interior cell (or the edge of the bounding box); each face
is owned by exactly one interior cell.

Each boundary face carries the measure ``h * |n . e|`` where ``n`` is the
exact outward unit normal of the domain evaluated at the face midpoint and
``e`` is the face axis. Summed over the staircase this estimator converges
to the true boundary length and is exact for axis-aligned boundaries. The
unweighted count ``h * (number of faces)`` is also kept; it overestimates
oblique or curved boundaries by a factor of up to sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage
from scipy.special import ellipe


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in ``dim`` dimensions."""
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


class DomainSpec:
    """Base class for parametric domain descriptions."""

    dim: int = 2

    def volume(self) -> float:
        raise NotImplementedError

    def perimeter(self) -> float:
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        """Axis-aligned bounding box (xmin, ymin, xmax, ymax)."""
        raise NotImplementedError

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Strict membership in the open domain (vectorized)."""
        raise NotImplementedError

    def boundary_normal(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normal of the nearest boundary piece (vectorized)."""
        raise NotImplementedError

    @property
    def boundary_smoothness(self) -> str:
        """Recorded smoothness class of the boundary (metadata only)."""
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(DomainSpec):
    """Ball of given radius centered at the origin; any dimension >= 2."""

    radius: float
    dim: int = 2

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")

    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.radius ** self.dim

    def perimeter(self) -> float:
        return self.dim * unit_ball_volume(self.dim) * self.radius ** (self.dim - 1)

    def bbox(self):
        r = self.radius
        return (-r, -r, r, r)

    def contains(self, x, y):
        return x * x + y * y < self.radius**2

    def boundary_normal(self, x, y):
        r = np.hypot(x, y)
        r = np.where(r > 0, r, 1.0)
        return x / r, y / r

    @property
    def boundary_smoothness(self) -> str:
        return "smooth"

    def describe(self) -> dict:
        return {"type": "ball", "radius": self.radius, "dim": self.dim}


@dataclass(frozen=True)
class Annulus(DomainSpec):
    """Spherical shell ``inner < |x| < outer`` centered at the origin."""

    inner: float
    outer: float
    dim: int = 2

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("annulus requires 0 < inner < outer")
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")

    def volume(self) -> float:
        w = unit_ball_volume(self.dim)
        return w * (self.outer ** self.dim - self.inner ** self.dim)

    def perimeter(self) -> float:
        w = unit_ball_volume(self.dim)
        n = self.dim
        return n * w * (self.outer ** (n - 1) + self.inner ** (n - 1))

    def bbox(self):
        r = self.outer
        return (-r, -r, r, r)

    def contains(self, x, y):
        r2 = x * x + y * y
        return (r2 > self.inner**2) & (r2 < self.outer**2)

    def boundary_normal(self, x, y):
        r = np.hypot(x, y)
        rsafe = np.where(r > 0, r, 1.0)
        # points closer to the inner circle get the inward-pointing normal
        sign = np.where(np.abs(r - self.outer) <= np.abs(r - self.inner), 1.0, -1.0)
        return sign * x / rsafe, sign * y / rsafe

    @property
    def boundary_smoothness(self) -> str:
        return "smooth"

    def describe(self) -> dict:
        return {"type": "annulus", "inner": self.inner, "outer": self.outer, "dim": self.dim}


@dataclass(frozen=True)
class Rectangle(DomainSpec):
    """Axis-aligned rectangle (0, a) x (0, b)."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("rectangle sides must be positive")

    def volume(self) -> float:
        return self.a * self.b

    def perimeter(self) -> float:
        return 2.0 * (self.a + self.b)

    def bbox(self):
        return (0.0, 0.0, self.a, self.b)

    def contains(self, x, y):
        return (x > 0) & (x < self.a) & (y > 0) & (y < self.b)

    def boundary_normal(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        dists = np.stack([x, self.a - x, y, self.b - y])
        side = np.argmin(dists, axis=0)
        nx = np.choose(side, [-1.0, 1.0, 0.0, 0.0])
        ny = np.choose(side, [0.0, 0.0, -1.0, 1.0])
        return nx, ny

    @property
    def boundary_smoothness(self) -> str:
        return "lipschitz"

    def describe(self) -> dict:
        return {"type": "rectangle", "a": self.a, "b": self.b, "dim": 2}


@dataclass(frozen=True)
class RoundedRectangle(DomainSpec):
    """Rectangle (0, a) x (0, b) with corners rounded at the given radius."""

    a: float
    b: float
    corner_radius: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("sides must be positive")
        if not 0 < self.corner_radius <= min(self.a, self.b) / 2.0:
            raise ValueError("corner radius must lie in (0, min(a, b)/2]")

    def volume(self) -> float:
        return self.a * self.b - (4.0 - math.pi) * self.corner_radius**2

    def perimeter(self) -> float:
        return 2.0 * (self.a + self.b) - 8.0 * self.corner_radius + 2.0 * math.pi * self.corner_radius

    def bbox(self):
        return (0.0, 0.0, self.a, self.b)

    def _core_offsets(self, x, y):
        r = self.corner_radius
        dx = x - np.clip(x, r, self.a - r)
        dy = y - np.clip(y, r, self.b - r)
        return dx, dy

    def contains(self, x, y):
        dx, dy = self._core_offsets(x, y)
        return dx * dx + dy * dy < self.corner_radius**2

    def boundary_normal(self, x, y):
        dx, dy = self._core_offsets(x, y)
        d = np.hypot(dx, dy)
        on_arc = d > 1e-12 * self.corner_radius
        dsafe = np.where(on_arc, d, 1.0)
        rect = Rectangle(self.a, self.b)
        rx, ry = rect.boundary_normal(x, y)
        nx = np.where(on_arc, dx / dsafe, rx)
        ny = np.where(on_arc, dy / dsafe, ry)
        return nx, ny

    @property
    def boundary_smoothness(self) -> str:
        return "c1-curvature-bounded"

    def describe(self) -> dict:
        return {
            "type": "rounded_rectangle",
            "a": self.a,
            "b": self.b,
            "corner_radius": self.corner_radius,
            "dim": 2,
        }


@dataclass(frozen=True)
class Ellipse(DomainSpec):
    """Ellipse with semi-axes (a, b) centered at the origin."""

    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("semi-axes must be positive")

    def volume(self) -> float:
        return math.pi * self.a * self.b

    def perimeter(self) -> float:
        # complete elliptic integral of the second kind; exact to quadrature
        major, minor = max(self.a, self.b), min(self.a, self.b)
        m = 1.0 - (minor / major) ** 2
        return 4.0 * major * float(ellipe(m))

    def bbox(self):
        return (-self.a, -self.b, self.a, self.b)

    def contains(self, x, y):
        return (x / self.a) ** 2 + (y / self.b) ** 2 < 1.0

    def boundary_normal(self, x, y):
        gx = x / self.a**2
        gy = y / self.b**2
        g = np.hypot(gx, gy)
        g = np.where(g > 0, g, 1.0)
        return gx / g, gy / g

    @property
    def boundary_smoothness(self) -> str:
        return "smooth"

    def describe(self) -> dict:
        return {"type": "ellipse", "a": self.a, "b": self.b, "dim": 2}


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper intersection test for open segments (shared endpoints allowed)."""

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


@dataclass(frozen=True)
class Polygon(DomainSpec):
    """Simple closed polygon given by its vertices (counterclockwise)."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        area2 = 0.0
        for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
            area2 += x0 * y1 - x1 * y0
        if area2 == 0.0:
            raise ValueError("degenerate polygon")
        if area2 < 0:  # normalize to counterclockwise orientation
            verts = verts[::-1]
        n = len(verts)
        edges = list(zip(verts, verts[1:] + verts[:1]))
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j == i + 1) or (i == 0 and j == n - 1):
                    continue
                if _segments_intersect(*edges[i], *edges[j]):
                    raise ValueError("polygon must be simple (edges intersect)")
        object.__setattr__(self, "vertices", verts)

    def _edges(self):
        return list(zip(self.vertices, self.vertices[1:] + self.vertices[:1]))

    def volume(self) -> float:
        area2 = 0.0
        for (x0, y0), (x1, y1) in self._edges():
            area2 += x0 * y1 - x1 * y0
        return abs(area2) / 2.0

    def perimeter(self) -> float:
        return sum(math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in self._edges())

    def min_edge_length(self) -> float:
        return min(math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in self._edges())

    def bbox(self):
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def contains(self, x, y):
        # even-odd crossing rule, vectorized over query points
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for (x0, y0), (x1, y1) in self._edges():
            crosses = (y0 > y) != (y1 > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            inside ^= crosses & (x < np.where(crosses, xi, np.inf))
        return inside

    def boundary_normal(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        best = np.full(x.shape, np.inf)
        nx = np.zeros(x.shape)
        ny = np.zeros(x.shape)
        for (x0, y0), (x1, y1) in self._edges():
            ex, ey = x1 - x0, y1 - y0
            ee = ex * ex + ey * ey
            t = np.clip(((x - x0) * ex + (y - y0) * ey) / ee, 0.0, 1.0)
            px, py = x0 + t * ex, y0 + t * ey
            d = np.hypot(x - px, y - py)
            el = math.sqrt(ee)
            closer = d < best
            best = np.where(closer, d, best)
            # outward normal of a counterclockwise edge
            nx = np.where(closer, ey / el, nx)
            ny = np.where(closer, -ex / el, ny)
        return nx, ny

    @property
    def boundary_smoothness(self) -> str:
        return "lipschitz"

    def describe(self) -> dict:
        return {"type": "polygon", "vertices": [list(v) for v in self.vertices], "dim": 2}


def volume(spec: DomainSpec) -> float:
    """Exact closed-form volume of a parametric domain."""
    return spec.volume()


def perimeter(spec: DomainSpec) -> float:
    """Exact closed-form boundary measure of a parametric domain."""
    return spec.perimeter()


def equimeasurable_ball(spec: DomainSpec) -> Ball:
    """Ball centered at the origin with the same volume as ``spec``."""
    v = spec.volume()
    radius = (v / unit_ball_volume(spec.dim)) ** (1.0 / spec.dim)
    return Ball(radius=radius, dim=spec.dim)


# neighbor shift directions: (drow, dcol) with the face axis (e_x, e_y) = (dcol, drow)
_FACE_DIRECTIONS = ((0, 1), (0, -1), (1, 0), (-1, 0))


def _neighbor(mask: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """mask of 'neighbor in direction (dr, dc) is interior'; outside counts as exterior."""
    out = np.zeros_like(mask)
    if dr == 0 and dc == 1:
        out[:, :-1] = mask[:, 1:]
    elif dr == 0 and dc == -1:
        out[:, 1:] = mask[:, :-1]
    elif dr == 1 and dc == 0:
        out[:-1, :] = mask[1:, :]
    elif dr == -1 and dc == 0:
        out[1:, :] = mask[:-1, :]
    else:
        raise ValueError("invalid direction")
    return out


@dataclass(eq=False)
class GridDomain:
    """Rasterized domain: interior cell mask plus boundary-face bookkeeping.

    Attributes
    ----------
    spec : DomainSpec
        The parametric domain this grid was built from.
    h : float
        Cell side length.
    origin : tuple
        Physical coordinates of the bounding-box corner (xmin, ymin).
    mask : ndarray (bool)
        Interior cells, shape (ny, nx).
    face_rows, face_cols : ndarray (int)
        Owning interior cell of each boundary face.
    face_weights : ndarray (float)
        Normal-projected face measures; their sum approximates the true
        boundary measure.
    wsum : ndarray (float)
        Per-cell sum of owned boundary-face weights, shape (ny, nx).
    """

    spec: DomainSpec
    h: float
    origin: tuple
    mask: np.ndarray
    face_rows: np.ndarray
    face_cols: np.ndarray
    face_weights: np.ndarray
    wsum: np.ndarray

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    @property
    def interior_count(self) -> int:
        return int(self.mask.sum())

    @property
    def area(self) -> float:
        """Discrete interior measure h^2 * (number of interior cells)."""
        return self.h**2 * self.interior_count

    @property
    def boundary_measure(self) -> float:
        """Normal-projected boundary measure (consistent for curved shapes)."""
        return float(self.face_weights.sum())

    @property
    def boundary_face_count(self) -> int:
        return int(self.face_weights.size)

    @property
    def boundary_measure_unweighted(self) -> float:
        """Raw face-count measure h * (number of faces); ell^1-biased on oblique parts."""
        return self.h * self.boundary_face_count

    @cached_property
    def xs(self) -> np.ndarray:
        x0 = self.origin[0]
        return x0 + (np.arange(self.mask.shape[1]) + 0.5) * self.h

    @cached_property
    def ys(self) -> np.ndarray:
        y0 = self.origin[1]
        return y0 + (np.arange(self.mask.shape[0]) + 0.5) * self.h

    @cached_property
    def X(self) -> np.ndarray:
        return np.broadcast_to(self.xs[None, :], self.mask.shape)

    @cached_property
    def Y(self) -> np.ndarray:
        return np.broadcast_to(self.ys[:, None], self.mask.shape)


def rasterize(spec: DomainSpec, h: float) -> GridDomain:
    """Rasterize a parametric domain onto a uniform grid of spacing ``h``.

    Raises ``ValueError`` when the raster is degenerate (empty or
    disconnected mask) or, for polygons, when two consecutive vertices are
    closer than ``h``.
    """
    if h <= 0:
        raise ValueError("grid spacing must be positive")
    if spec.dim != 2:
        raise ValueError("grid rasterization is two-dimensional; use the radial solvers for dim >= 3")
    if isinstance(spec, Polygon) and spec.min_edge_length() < h:
        raise ValueError("polygon has vertices closer than the grid spacing")

    xmin, ymin, xmax, ymax = spec.bbox()
    nx = max(1, int(math.ceil((xmax - xmin) / h - 1e-9)))
    ny = max(1, int(math.ceil((ymax - ymin) / h - 1e-9)))
    xs = xmin + (np.arange(nx) + 0.5) * h
    ys = ymin + (np.arange(ny) + 0.5) * h
    X, Y = np.meshgrid(xs, ys)
    mask = np.asarray(spec.contains(X, Y), dtype=bool)

    if not mask.any():
        raise ValueError(f"degenerate raster: empty mask at h={h}")
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    _, ncomp = ndimage.label(mask, structure=structure)
    if ncomp != 1:
        raise ValueError(f"degenerate raster: mask has {ncomp} connected components at h={h}")

    rows_all, cols_all, weights_all = [], [], []
    for dr, dc in _FACE_DIRECTIONS:
        has_nb = _neighbor(mask, dr, dc)
        face_here = mask & ~has_nb
        rr, cc = np.nonzero(face_here)
        if rr.size == 0:
            continue
        mx = xs[cc] + dc * h / 2.0
        my = ys[rr] + dr * h / 2.0
        nrm_x, nrm_y = spec.boundary_normal(mx, my)
        w = h * np.abs(dc * nrm_x + dr * nrm_y)
        rows_all.append(rr)
        cols_all.append(cc)
        weights_all.append(w)

    face_rows = np.concatenate(rows_all)
    face_cols = np.concatenate(cols_all)
    face_weights = np.concatenate(weights_all)
    wsum = np.zeros(mask.shape)
    np.add.at(wsum, (face_rows, face_cols), face_weights)

    return GridDomain(
        spec=spec,
        h=h,
        origin=(xmin, ymin),
        mask=mask,
        face_rows=face_rows,
        face_cols=face_cols,
        face_weights=face_weights,
        wsum=wsum,
    )
