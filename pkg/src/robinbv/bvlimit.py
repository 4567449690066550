"""The p -> 1 side: total-variation ratio minimization and set functionals.

The limit quotient of a field v >= 0 on a grid domain is

    J(v) = ( TV_h(v) + min(beta, 1) * sum_f w_f v(owner) ) / ( h^2 sum v )

with TV_h the isotropic forward-difference total variation measured
through a short masked mollifier (see ``discrete.TVMeasure``; the
mollification removes the staircase bias that raw cell differences put
on oblique and curved interfaces). On an indicator field the same
expression is the set ratio

    R(E) = ( P_interior(E) + min(beta, 1) * H_boundary(E) ) / |E|

where P_interior is the total variation of the indicator (jumps inside
the domain) and H_boundary the summed measures of the domain-boundary
faces owned by E. Using one discretization on both sides keeps the
threshold scan auditable against the relaxed value.

``minimize_J`` runs a Dinkelbach ratio iteration: for the current ratio
estimate s it minimizes TV_h(v) + min(beta,1) B(v) - s M(v) over v in
[0, 1] with a first-order primal-dual loop until the subproblem value
stalls; a nonnegative stalled value certifies s. The headline value is
the final relaxed ratio; the best thresholded set and its (staircase-
biased) ratio are reported alongside as the set-valued witness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .discrete import (
    ScalarField,
    TVMeasure,
    boundary_layer_mask,
    boundary_mass,
    forward_diffs,
    grad_adjoint,
    interior_mass,
    total_variation,
    trace_constant_estimate,
)
from .geometry import GridDomain
from .radial import shell_R_value


@dataclass(eq=False)
class SubsetIndicator:
    """A subset of the domain: a grid mask or a parametric family member."""

    kind: str
    grid: GridDomain | None = None
    mask: np.ndarray | None = None
    # shell parameters
    inner: float = 0.0
    outer: float = 0.0
    dim: int = 2
    # corner-lens parameters (rounded square)
    side: float = 0.0
    corner_radius: float = 0.0
    radius: float = 0.0

    @classmethod
    def from_mask(cls, grid: GridDomain, mask: np.ndarray) -> "SubsetIndicator":
        m = np.asarray(mask, dtype=bool) & grid.mask
        if not m.any():
            raise ValueError("subset indicator must be nonempty")
        return cls(kind="grid", grid=grid, mask=m)

    @classmethod
    def shell(cls, inner: float, outer: float, dim: int = 2) -> "SubsetIndicator":
        if not 0.0 <= inner < outer:
            raise ValueError("shell requires 0 <= inner < outer")
        return cls(kind="shell", inner=inner, outer=outer, dim=dim)

    @classmethod
    def corner_lens(cls, side: float, corner_radius: float, radius: float) -> "SubsetIndicator":
        """Corner set of a rounded square: the region between the corner
        rounding arc and a larger circle tangent to the same two sides."""
        if not 0.0 < corner_radius < radius <= side / 2.0:
            raise ValueError("corner lens requires corner_radius < radius <= side/2")
        return cls(kind="corner_lens", side=side, corner_radius=corner_radius, radius=radius)

    def to_field(self) -> ScalarField:
        if self.kind != "grid":
            raise ValueError("only grid indicators convert to fields")
        return ScalarField.indicator(self.grid, self.mask)

    def area(self) -> float:
        if self.kind == "grid":
            return self.grid.h**2 * float(self.mask.sum())
        if self.kind == "shell":
            from .geometry import unit_ball_volume

            w = unit_ball_volume(self.dim)
            return w * (self.outer**self.dim - self.inner**self.dim)
        rho, r = self.corner_radius, self.radius
        return (1.0 - math.pi / 4.0) * (r * r - rho * rho)


def grid_set_measures(
    grid: GridDomain, subset_mask: np.ndarray, tvm: TVMeasure | None = None
) -> tuple[float, float, float]:
    """(interior perimeter, boundary trace measure, area) of a grid subset.

    The interior perimeter is the mollified total variation of the
    indicator, floored by the certified bound raw_TV / sqrt(2): the raw
    forward-difference TV of an indicator never exceeds sqrt(2) times the
    interface length, so the floor stops sub-mollifier boundary wiggles
    from reading as spuriously short.
    """
    if tvm is None:
        tvm = TVMeasure(grid)
    chi = np.where(subset_mask & grid.mask, 1.0, 0.0)
    p_interior = max(tvm.tv(chi), total_variation(grid, chi) / math.sqrt(2.0))
    h_boundary = float((grid.wsum * chi).sum())
    area = grid.h**2 * float(chi.sum())
    return p_interior, h_boundary, area


def evaluate_J(v: ScalarField, beta: float) -> float:
    """Limit quotient of a nonzero field; defined for every real beta.

    The boundary weight is min(beta, 1), so values below -1 are meaningful
    here (they drive the boundary-layer blow-up demonstrations) even
    though the minimization problem refuses them.
    """
    if v.is_zero():
        raise ValueError("quotient undefined for the zero field")
    a = v.values
    num = TVMeasure(v.grid).tv(a) + min(beta, 1.0) * boundary_mass(v.grid, a)
    return num / interior_mass(v.grid, a)


def evaluate_R(E: SubsetIndicator, beta: float) -> float:
    """Set ratio (interior perimeter + min(beta,1) * boundary trace) / area."""
    if E.kind == "grid":
        p_int, h_bd, area = grid_set_measures(E.grid, E.mask)
        if area == 0.0:
            raise ValueError("empty set")
        return (p_int + min(beta, 1.0) * h_bd) / area
    if E.kind == "shell":
        return shell_R_value(E.inner, E.outer, E.dim, beta)
    # corner lens: inner arc is a quarter circle of the tangent radius,
    # the domain boundary contributes two straight runs plus the corner arc
    rho, r = E.corner_radius, E.radius
    p_int = (math.pi / 2.0) * r
    h_bd = 2.0 * (r - rho) + (math.pi / 2.0) * rho
    return (p_int + min(beta, 1.0) * h_bd) / E.area()


@dataclass
class LimitResult:
    beta: float
    lam: float
    subset_value: float
    t_star: float
    subset: SubsetIndicator
    minimizer: ScalarField
    trace: list
    iterations: int
    converged: bool


def extract_level_set(v: ScalarField, beta: float, max_thresholds: int = 4096):
    """Best superlevel set of a field in [0, 1] under the set ratio.

    Thresholds are scanned over the distinct values (quantile-capped) of
    the mollified field, plus one threshold below the minimum so the full
    support is always a candidate; thresholding after mollification keeps
    the candidate boundaries free of sub-mollifier scallops that would
    fool the perimeter measurement. Returns ``(t_star, SubsetIndicator)``;
    raises if every candidate is empty.
    """
    if v.is_zero():
        raise ValueError("cannot threshold the zero field")
    grid = v.grid
    beta_hat = min(beta, 1.0)
    raw = v.values
    distinct = np.unique(raw[grid.mask])
    if distinct.size > max_thresholds:
        qs = np.quantile(raw[grid.mask], np.linspace(0.0, 1.0, max_thresholds))
        distinct = np.unique(qs)
    thresholds = distinct
    if distinct[0] > 0.0:
        # no zero plateau: let the full domain enter the scan
        lo = distinct[0] - max(1e-12, 1e-9 * (abs(distinct[-1]) + 1.0))
        thresholds = np.concatenate([[lo], distinct])

    # candidates are ranked by the raw functional (the exact discrete ratio,
    # which digital artifacts cannot undercount); the winner is then
    # re-measured with the mollified estimator by the caller
    best = None
    for t in thresholds:
        m = grid.mask & (raw > t)
        if not m.any():
            continue
        chi = np.where(m, 1.0, 0.0)
        p_raw = total_variation(grid, chi)
        h_bd = float((grid.wsum * chi).sum())
        area = grid.h**2 * float(chi.sum())
        val = (p_raw + beta_hat * h_bd) / area
        if best is None or val < best[1] - 1e-15 * max(1.0, abs(val)):
            best = (float(t), val, m)
    if best is None:
        raise ValueError("all level sets are empty")
    t_star, _, m = best
    return t_star, SubsetIndicator.from_mask(grid, m)


def minimize_J(
    grid: GridDomain,
    beta: float,
    tol: float = 1e-6,
    max_outer: int = 60,
    max_inner: int = 60000,
    check_every: int = 50,
    v0: ScalarField | None = None,
    seed: int = 0,
    multiscale: bool = True,
) -> LimitResult:
    """Minimize the limit quotient over nonnegative fields for beta > -1.

    Dinkelbach iteration on the ratio; each subproblem is solved by a
    Chambolle-Pock primal-dual loop with steps 1/sqrt(8) (the operator
    norm bound of the forward-difference stencil) until the subproblem
    value stalls. The relaxation is run on the raw forward-difference
    total variation, which is coercive against sub-grid oscillation; the
    headline ``lam`` is the achieved relaxed ratio, and the thresholded
    witness set with its mollified ratio comes along. Large grids warm
    start from a twice-coarser solve (smoothed prolongation). The outer
    loop stops when the stalled subproblem value is above ``-tol``
    (scaled by the domain measure) or when the ratio update falls under
    one part in 10^4.
    """
    if beta <= -1.0:
        raise ValueError("the limit quotient is unbounded below for beta <= -1")
    if beta < 0:
        c1h = trace_constant_estimate(grid, seed=seed)
        if 1.0 + beta * c1h <= 0.0:
            raise ValueError(
                f"discrete coercivity check failed: 1 + beta * c1_h = {1.0 + beta * c1h:.3e}; "
                "refine the grid for this beta"
            )

    mask = grid.mask
    h = grid.h
    beta_hat = min(beta, 1.0)

    if beta == 0.0:
        v = ScalarField(grid, np.where(mask, 1.0, 0.0))
        subset = SubsetIndicator.from_mask(grid, mask)
        return LimitResult(beta, 0.0, 0.0, 0.0, subset, v, [0.0], 0, True)

    def ratio(arr):
        num = total_variation(grid, arr) + beta_hat * float((grid.wsum * arr).sum())
        den = h * h * float(arr.sum())
        return num / den

    if v0 is None and multiscale and min(grid.shape) > 96 and grid.spec is not None:
        # warm start from a twice-coarser solve; the two grids share the
        # bounding-box origin, so fine cell (i, j) sits inside coarse cell
        # (i // 2, j // 2)
        try:
            coarse = rasterize_coarser(grid)
            coarse_res = minimize_J(
                coarse, beta, tol=tol, max_outer=max_outer, max_inner=max_inner,
                check_every=check_every, seed=seed, multiscale=True,
            )
            ny, nx = grid.shape
            ii = np.minimum(np.arange(ny) // 2, coarse.shape[0] - 1)
            jj = np.minimum(np.arange(nx) // 2, coarse.shape[1] - 1)
            prolonged = coarse_res.minimizer.values[np.ix_(ii, jj)]
            # smooth the blocky prolongation so the fine solve starts from a
            # field without sub-mollifier structure
            v0 = ScalarField(grid, TVMeasure(grid).smooth(prolonged))
        except ValueError:
            v0 = None

    constant = np.where(mask, 1.0, 0.0)
    v = constant if v0 is None else np.where(mask, np.clip(v0.values, 0.0, 1.0), 0.0)
    if not v.any() or ratio(v) > ratio(constant):
        v = constant
    qx = np.zeros(grid.shape)
    qy = np.zeros(grid.shape)

    s = ratio(v)
    trace = [s]
    sigma = tau = 1.0 / math.sqrt(8.0)
    tol_abs = tol * grid.area * max(1.0, abs(s))
    converged = False
    total_inner = 0
    v_best = v.copy()
    stall_checks = max(2, 600 // check_every)

    for _ in range(max_outer):
        b = np.where(mask, beta_hat * grid.wsum - s * h * h, 0.0)
        vbar = v.copy()
        phi_best = np.inf
        v_phi = v.copy()
        since_improved = 0
        inner = 0
        while inner < max_inner:
            for _ in range(check_every):
                dx, dy = forward_diffs(grid, vbar)
                qx += sigma * dx
                qy += sigma * dy
                nrm = np.sqrt(qx * qx + qy * qy)
                scale = np.minimum(1.0, h / np.maximum(nrm, 1e-300))
                qx *= scale
                qy *= scale
                v_new = np.clip(v - tau * (grad_adjoint(grid, qx, qy) + b), 0.0, 1.0)
                v_new = np.where(mask, v_new, 0.0)
                vbar = 2.0 * v_new - v
                v = v_new
            inner += check_every
            total_inner += check_every

            phi = total_variation(grid, v) + float((b * v).sum())
            if phi < phi_best - max(0.01 * abs(phi_best), 0.02 * tol_abs):
                phi_best = phi
                v_phi = v.copy()
                since_improved = 0
            else:
                phi_best = min(phi_best, phi)
                if phi < phi_best + 0.02 * tol_abs:
                    v_phi = v.copy()
                since_improved += 1
                if since_improved >= stall_checks:
                    break

        # subproblem solved (to stall or cap): decide between optimality and a ratio update
        if phi_best >= -tol_abs:
            converged = True
            break
        if not v_phi.any():
            break
        s_new = ratio(v_phi)
        if not s_new < s:
            break
        progress = s - s_new
        s = s_new
        trace.append(s)
        v_best = v_phi.copy()
        v = v_phi
        if progress < 1e-4 * max(1.0, abs(s)):
            converged = True
            break

    if not v.any() or ratio(v) > ratio(v_best):
        v = v_best
    field = ScalarField(grid, v)
    t_star, subset = extract_level_set(field, beta)
    subset_value = evaluate_R(subset, beta)
    lam = ratio(v)
    return LimitResult(beta, lam, subset_value, t_star, subset, field, trace, total_inner, converged)


def rasterize_coarser(grid: GridDomain) -> GridDomain:
    """Rasterize the grid's parametric spec at twice the spacing."""
    from .geometry import rasterize

    if grid.spec is None:
        raise ValueError("no parametric spec attached to this grid")
    return rasterize(grid.spec, 2.0 * grid.h)


def cheeger_constant(grid: GridDomain, **opts) -> float:
    """Discrete Cheeger constant: the limit minimization with boundary weight one."""
    return minimize_J(grid, 1.0, **opts).lam


def blow_up_sequence(grid: GridDomain, beta: float, eps_list) -> list[tuple[float, float]]:
    """Quotient values of boundary layers of shrinking width for beta < -1.

    Each layer must be at least two cells wide; the epsilon list must be
    decreasing. The values decrease without bound as the layer thins,
    which is the discrete face of the missing lower bound below beta = -1.
    """
    if beta >= -1.0:
        raise ValueError("the blow-up construction requires beta < -1")
    eps = list(eps_list)
    if any(later >= earlier for earlier, later in zip(eps, eps[1:])):
        raise ValueError("epsilon list must be decreasing")
    out = []
    for e in eps:
        if e < 2.0 * grid.h:
            raise ValueError(f"layer width {e} is unresolvable at h={grid.h}")
        layer = boundary_layer_mask(grid, e)
        field = ScalarField.indicator(grid, layer)
        out.append((float(e), evaluate_J(field, beta)))
    return out
