"""Grid minimization of the p-exponent boundary-penalized Rayleigh quotient.

The discrete quotient of a field u on a grid domain is

    ( h^(2-p) * sum_c |D u|_2^p  +  beta * sum_f w_f |u(owner)|^p )
    ---------------------------------------------------------------
                        h^2 * sum_c |u|^p

with D the masked forward-difference jumps and w_f the boundary-face
measures. The quotient is 0-homogeneous; its infimum over nonzero fields
is the discrete first eigenvalue.

The minimizer is found by monotone descent on the quotient. The engine is
a normalized conjugate-gradient descent with an exact line search (closed
form for p = 2, bracketed Brent otherwise). For p < 2 the descent is
interleaved with two monotone helpers that handle the degenerate gradient
density |g|^(p-2):

* reweighted quadratic steps: minimize the quadratic quotient obtained by
  freezing |.|^(p-2) weights at the current iterate, then line-search the
  true quotient along the segment to the candidate;
* power reshaping: a one-dimensional search over u -> u^theta, which moves
  transition layers sharper or flatter much faster than gradient steps.

Every accepted step decreases the true (unregularized) quotient, so the
recorded eigenvalue history is nonincreasing by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brent as _brent_min
from scipy.optimize import minimize_scalar

from .discrete import ScalarField, boundary_layer_mask, forward_diffs, grad_adjoint, trace_constant_estimate
from .geometry import GridDomain


class CoercivityError(ValueError):
    """The discrete functional is not bounded below on this grid for this beta."""


@dataclass
class EigenResult:
    p: float
    beta: float
    lam: float
    minimizer: ScalarField
    residual: float
    iterations: int
    converged: bool
    lam_history: list = field(default_factory=list)

    def constant_bound(self) -> float:
        """Quotient of the constant field: beta * |boundary| / |interior|."""
        g = self.minimizer.grid
        return self.beta * g.boundary_measure / g.area


def _pieces(grid: GridDomain, a: np.ndarray, p: float, beta: float):
    dx, dy = forward_diffs(grid, a)
    g2 = dx * dx + dy * dy
    num_grad = grid.h ** (2.0 - p) * float((g2 ** (p / 2.0)).sum())
    abs_p = np.abs(a) ** p
    num_bdry = beta * float((grid.wsum * abs_p).sum())
    den = grid.h**2 * float(abs_p.sum())
    return num_grad, num_bdry, den, dx, dy, g2


def rayleigh_quotient_p(u: ScalarField, p: float, beta: float) -> float:
    """Discrete quotient of a nonzero field; raises on the zero field."""
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if u.is_zero():
        raise ValueError("quotient undefined for the zero field")
    num_grad, num_bdry, den, *_ = _pieces(u.grid, u.values, p, beta)
    return (num_grad + num_bdry) / den


def _normalize(grid: GridDomain, a: np.ndarray, p: float) -> np.ndarray:
    nrm = (grid.h**2 * float((np.abs(a) ** p).sum())) ** (1.0 / p)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero field")
    return a / nrm


def _quotient_gradient(grid: GridDomain, a: np.ndarray, p: float, beta: float):
    """Quotient value, its gradient field, and the relative residual."""
    h = grid.h
    num_grad, num_bdry, den, dx, dy, g2 = _pieces(grid, a, p, beta)
    lam = (num_grad + num_bdry) / den

    gmag_mean = float(np.sqrt(g2).mean()) / h
    eps = 1e-8 * max(gmag_mean, 1e-30)
    m = (g2 / h**2 + eps**2) ** ((p - 2.0) / 2.0)
    d_grad = p * h * grad_adjoint(grid, m * dx / h, m * dy / h)
    pow_u = np.abs(a) ** (p - 1.0) * np.sign(a)
    d_num = d_grad + beta * p * grid.wsum * pow_u
    d_den = h**2 * p * pow_u
    r_field = d_num - lam * d_den
    scale = max(float(np.linalg.norm(d_num)), abs(lam) * float(np.linalg.norm(d_den)), 1e-300)
    residual_rel = float(np.linalg.norm(r_field)) / scale
    dq = np.where(grid.mask, r_field / den, 0.0)
    return lam, dq, residual_rel


def _rational_quadratic_argmin(Na, Da, Nd, Dd, Nad, Dad, lam):
    """Exact minimizer of t -> (Na + 2t Nad + t^2 Nd)/(Da + 2t Dad + t^2 Dd)."""
    A = 2.0 * (Nd * Dad - Nad * Dd)
    B = 2.0 * (Nd * Da - Na * Dd)
    C = 2.0 * (Nad * Da - Na * Dad)
    roots = []
    if A != 0.0:
        disc = B * B - 4.0 * A * C
        if disc >= 0.0:
            s = math.sqrt(disc)
            roots = [(-B + s) / (2.0 * A), (-B - s) / (2.0 * A)]
    elif B != 0.0:
        roots = [-C / B]
    best_t, best_q = 0.0, lam
    for t in roots:
        if t == 0.0:
            continue
        den = Da + 2.0 * t * Dad + t * t * Dd
        if den <= 0.0:
            continue
        q = (Na + 2.0 * t * Nad + t * t * Nd) / den
        if q < best_q:
            best_t, best_q = t, q
    return best_t, best_q


def _cg_descent(grid, a, p, beta, max_steps, history, stall_window=40, stall_rel=1e-8):
    """Conjugate descent with exact (p=2) or Brent line search; returns on stall."""

    def quotient(arr):
        ng, nb, den, *_ = _pieces(grid, arr, p, beta)
        return (ng + nb) / den

    def numden(arr):
        ng, nb, den, *_ = _pieces(grid, arr, p, beta)
        return ng + nb, den

    lam, dq, rres = _quotient_gradient(grid, a, p, beta)
    direction = -dq
    t_prev = 1.0
    steps = 0
    block = [lam]
    while steps < max_steps:
        slope = float((dq * direction).sum())
        if slope >= 0.0:
            direction = -dq
        dir_norm = float(np.linalg.norm(direction))
        if dir_norm == 0.0:
            break
        d = direction * (float(np.linalg.norm(a)) / dir_norm)

        if p == 2.0:
            Na, Da = numden(a)
            Nd, Dd = numden(d)
            Ns, Ds = numden(a + d)
            Nad = (Ns - Na - Nd) / 2.0
            Dad = (Ds - Da - Dd) / 2.0
            t_best, q_best = _rational_quadratic_argmin(Na, Da, Nd, Dd, Nad, Dad, lam)
        else:
            phi = lambda t: quotient(a + t * d)
            t1, f1 = t_prev, None
            f1 = phi(t1)
            k = 0
            while f1 >= lam and k < 40:
                t1 *= 0.3
                f1 = phi(t1)
                k += 1
            if f1 >= lam:
                break
            t2, f2 = 2.0 * t1, phi(2.0 * t1)
            k = 0
            while f2 < f1 and k < 40:
                t1, f1 = t2, f2
                t2 *= 2.0
                f2 = phi(t2)
                k += 1
            t_best, q_best, _, _ = _brent_min(phi, brack=(0.0, t1, t2), tol=1e-4, full_output=True)

        if t_best == 0.0 or not q_best < lam:
            break
        a = _normalize(grid, a + t_best * d, p)
        t_prev = max(t_best, 1e-12)
        steps += 1
        lam_new, dq_new, rres = _quotient_gradient(grid, a, p, beta)
        denom = float((dq * dq).sum())
        gamma = max(0.0, float((dq_new * (dq_new - dq)).sum()) / denom) if denom > 0 else 0.0
        direction = -dq_new + gamma * direction
        dq = dq_new
        lam = min(lam_new, lam)
        block.append(lam)
        history.append(lam)
        if len(block) > stall_window and abs(block[-stall_window] - lam) < stall_rel * max(1.0, abs(lam)):
            break
    return a, lam, rres, steps


def _weighted_quadratic_minimize(grid, a0, mgrad, bweight, dweight, iters=80):
    """Exact-line-search CG on the quadratic quotient with frozen weights."""

    def numden(v):
        dx, dy = forward_diffs(grid, v)
        n = float((mgrad * (dx * dx + dy * dy)).sum()) + float((bweight * v * v).sum())
        d = float((dweight * v * v).sum())
        return n, d

    def grad(v):
        dx, dy = forward_diffs(grid, v)
        n, d = numden(v)
        lam = n / d
        gn = 2.0 * grad_adjoint(grid, mgrad * dx, mgrad * dy) + 2.0 * bweight * v
        gd = 2.0 * dweight * v
        return lam, np.where(grid.mask, (gn - lam * gd) / d, 0.0)

    v = a0.copy()
    lam, dq = grad(v)
    d = -dq
    for _ in range(iters):
        if float((dq * d).sum()) >= 0.0:
            d = -dq
        Na, Da = numden(v)
        Nd, Dd = numden(d)
        Ns, Ds = numden(v + d)
        Nad = (Ns - Na - Nd) / 2.0
        Dad = (Ds - Da - Dd) / 2.0
        t, q = _rational_quadratic_argmin(Na, Da, Nd, Dd, Nad, Dad, lam)
        if t == 0.0:
            break
        v = v + t * d
        peak = float(np.abs(v).max())
        if peak > 0:
            v = v / peak
        lam_new, dq_new = grad(v)
        denom = float((dq * dq).sum())
        gamma = max(0.0, float((dq_new * (dq_new - dq)).sum()) / denom) if denom > 0 else 0.0
        d = -dq_new + gamma * d
        dq = dq_new
        lam = lam_new
    return v


def _irls_candidate(grid, a, p, beta, epsfac):
    """Candidate from one reweighted-quadratic solve at the current iterate."""
    h = grid.h
    dx, dy = forward_diffs(grid, a)
    gmag = np.sqrt(dx * dx + dy * dy) / h
    eps_g = max(epsfac * float(gmag.mean()), 1e-12)
    mgrad = h * h * (gmag**2 + eps_g**2) ** ((p - 2.0) / 2.0)
    au = np.abs(a)
    eps_u = max(epsfac * float(au[grid.mask].mean()), 1e-12)
    mmass = np.where(grid.mask, (au**2 + eps_u**2) ** ((p - 2.0) / 2.0), 0.0)
    return _weighted_quadratic_minimize(grid, a, mgrad, beta * grid.wsum * mmass, h * h * mmass)


def minimize_Jp(
    grid: GridDomain,
    p: float,
    beta: float,
    tol: float = 1e-7,
    residual_tol: float = 1e-3,
    max_iter: int = 20000,
    u0: ScalarField | None = None,
    seed: int = 0,
) -> EigenResult:
    """Minimize the discrete quotient for p > 1 and beta > -1.

    Warm starts: constants for beta >= 0, a boundary-peaked profile for
    beta < 0, or a caller-provided field (the best-scoring candidate wins).
    ``converged`` is set when both the relative eigenvalue change over a
    short window and the relative Euler-Lagrange residual fall under their
    tolerances; otherwise the best iterate is returned flagged. For
    beta < 0 a trace-constant precheck refuses grids on which the discrete
    functional is unbounded below.
    """
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if beta <= -1:
        raise ValueError("the quotient is unbounded below for beta <= -1")

    if beta < 0:
        c1h = trace_constant_estimate(grid, seed=seed)
        if 1.0 + beta * c1h <= 0.0:
            raise CoercivityError(
                f"discrete coercivity check failed: 1 + beta * c1_h = {1.0 + beta * c1h:.3e}; "
                "refine the grid for this beta"
            )

    mask = grid.mask
    if beta == 0.0:
        u = ScalarField(grid, _normalize(grid, np.where(mask, 1.0, 0.0), p))
        return EigenResult(p, beta, 0.0, u, 0.0, 0, True, [0.0])

    def quotient(arr):
        ng, nb, den, *_ = _pieces(grid, arr, p, beta)
        return (ng + nb) / den

    candidates = []
    if u0 is not None and not u0.is_zero():
        candidates.append(np.where(mask, np.abs(u0.values), 0.0))
    candidates.append(np.where(mask, 1.0, 0.0))
    if beta < 0:
        peaked = np.where(mask, 1.0, 0.0) + 2.0 * np.where(boundary_layer_mask(grid, 2 * grid.h), 1.0, 0.0)
        candidates.append(peaked)
    a = _normalize(grid, min(candidates, key=quotient), p)
    lam = quotient(a)
    history = [lam]
    total_steps = 0
    epsfac = 0.3
    residual = np.inf

    while total_steps < max_iter:
        lam_round_start = lam

        if p < 2.0:
            v = _irls_candidate(grid, a, p, beta, epsfac)
            seg = lambda s: quotient((1.0 - s) * a + s * v)
            r = minimize_scalar(seg, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-3})
            if r.fun < lam:
                a = _normalize(grid, (1.0 - r.x) * a + r.x * v, p)
                lam = float(r.fun)
                history.append(lam)
            epsfac = max(epsfac * 0.4, 1e-8)

        budget = min(400 if p != 2.0 else max_iter, max_iter - total_steps)
        a, lam, residual, used = _cg_descent(grid, a, p, beta, budget, history)
        total_steps += max(used, 1)

        if p < 2.0:
            peak = float(a.max())
            if peak > 0:
                base = np.where(mask, a.clip(0.0) / peak, 0.0)
                pow_obj = lambda th: quotient(base**th)
                rr = minimize_scalar(pow_obj, bounds=(0.3, 4.0), method="bounded", options={"xatol": 1e-2})
                if rr.fun < lam:
                    a = _normalize(grid, base**rr.x, p)
                    lam = float(rr.fun)
                    history.append(lam)

        rel_round = abs(lam_round_start - lam) / max(1.0, abs(lam))
        if rel_round < tol:
            break

    converged = residual <= residual_tol and len(history) >= 2
    if len(history) >= 4:
        recent = history[-4:]
        rel_changes = [abs(recent[i + 1] - recent[i]) / max(1.0, abs(recent[i + 1])) for i in range(3)]
        converged = converged and max(rel_changes) < max(tol, 1e-10) * 10
    if float(a[mask].mean()) < 0:
        a = -a
    a = _normalize(grid, a, p)
    u = ScalarField(grid, a)
    lam_final = quotient(a)
    return EigenResult(p, beta, lam_final, u, residual, total_steps, converged, history)


def warm_start_path(grid: GridDomain, beta: float, p_list, **opts) -> list[EigenResult]:
    """Solve a strictly decreasing sequence of exponents, warm-starting each solve."""
    ps = list(p_list)
    if any(q <= 1 for q in ps):
        raise ValueError("all exponents must exceed 1")
    if any(later >= earlier for earlier, later in zip(ps, ps[1:])):
        raise ValueError("exponent list must be strictly decreasing")
    results: list[EigenResult] = []
    prev: ScalarField | None = None
    for p in ps:
        res = minimize_Jp(grid, p, beta, u0=prev, **opts)
        results.append(res)
        prev = res.minimizer
    return results
