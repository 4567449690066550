"""Radial solvers for balls and spherical shells in any dimension N >= 2.

The eigenvalue problem on a ball reduces to a one-dimensional boundary
value problem for the radial profile psi(r):

    -|psi'|^(p-2) [ (p-1) psi'' + (N-1)/r psi' ] = lam * psi^(p-1),
    psi'(0) = 0,   |psi'(R)| = |beta|^(1/(p-1)) * psi(R).

Instead of the second-order form we integrate the equivalent first-order
flux system in (psi, W) with W = r^(N-1) |psi'|^(p-2) psi':

    W'   = -lam * r^(N-1) * psi^(p-1),
    psi' = sign(W) * |W / r^(N-1)|^(1/(p-1)).

The flux form absorbs the degeneracy of |psi'|^(p-2) (no epsilon
regularization is needed) and keeps the boundary condition well
conditioned as p -> 1, where it reads |W(R)| = |beta| * psi(R)^(p-1).

The eigenvalue is located by safeguarded bracketing (bisection with secant
acceleration) on the boundary mismatch; the bracket comes from the
constant-test-function bound lam <= beta*N/R and is widened geometrically
on failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq


@dataclass
class RadialProfile:
    """Radial eigenfunction sample with its eigenvalue and diagnostics."""

    r: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    p: float
    beta: float
    lam: float
    dim: int
    residual: float
    iterations: int
    converged: bool

    def interpolate(self, radii: np.ndarray) -> np.ndarray:
        """Evaluate the profile at arbitrary radii by linear interpolation."""
        return np.interp(radii, self.r, self.psi)

    def rows(self):
        """(r, psi, dpsi) triples for CSV export."""
        return zip(self.r.tolist(), self.psi.tolist(), self.dpsi.tolist())


def _integrate(lam: float, n_dim: int, radius: float, p: float, steps: int, record: bool = False):
    """RK4 integration of the flux system from a series start near r = 0.

    Returns (psi_R, w_R, crossed, r_stop, samples). ``w_R`` is the flux
    density W / r^(N-1) at the end point; ``crossed`` flags that psi hit
    zero at ``r_stop`` before reaching R (the trial eigenvalue is too
    large).
    """
    e = 1.0 / (p - 1.0)
    q_exp = p / (p - 1.0)
    nm1 = n_dim - 1.0

    r0 = 1e-6 * radius
    # two-term series: psi ~ 1 - sign(lam) * (|lam|/N)^e / q * r^q, exact flux W = -lam r^N / N
    amp = (abs(lam) / n_dim) ** e if lam != 0.0 else 0.0
    psi = 1.0 - math.copysign(1.0, lam) * amp * r0**q_exp / q_exp if lam != 0.0 else 1.0
    w_big = -lam * r0**n_dim / n_dim

    hstep = (radius - r0) / steps
    r = r0
    samples = None
    if record:
        samples = [(0.0, 1.0, 0.0), (r0, psi, -math.copysign(1.0, lam) * amp * r0 ** (q_exp - 1.0) if lam != 0.0 else 0.0)]

    def rhs(rr, ps, ww):
        wd = ww / rr**nm1
        dps = math.copysign(abs(wd) ** e, wd) if wd != 0.0 else 0.0
        dww = -lam * rr**nm1 * (ps if ps > 0.0 else 0.0) ** (p - 1.0)
        return dps, dww

    for _ in range(steps):
        k1p, k1w = rhs(r, psi, w_big)
        k2p, k2w = rhs(r + 0.5 * hstep, psi + 0.5 * hstep * k1p, w_big + 0.5 * hstep * k1w)
        k3p, k3w = rhs(r + 0.5 * hstep, psi + 0.5 * hstep * k2p, w_big + 0.5 * hstep * k2w)
        k4p, k4w = rhs(r + hstep, psi + hstep * k3p, w_big + hstep * k3w)
        psi += hstep * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
        w_big += hstep * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
        r += hstep
        if psi <= 0.0:
            return psi, w_big / r**nm1, True, r, samples
        if record:
            wd = w_big / r**nm1
            dps = math.copysign(abs(wd) ** e, wd) if wd != 0.0 else 0.0
            samples.append((r, psi, dps))

    return psi, w_big / r**nm1, False, r, samples


def shoot_radial_eigen(
    n_dim: int,
    radius: float,
    p: float,
    beta: float,
    tol: float = 1e-10,
    steps: int = 2048,
    max_widen: int = 8,
) -> RadialProfile:
    """First Robin eigenvalue of the radial problem on a ball.

    Parameters
    ----------
    n_dim : dimension N >= 2.
    radius : ball radius R > 0.
    p : exponent > 1.
    beta : boundary parameter (any real; beta = 0 short-circuits to the
        constant profile with eigenvalue zero).
    tol : acceptance threshold for the boundary-condition residual.
    steps : fixed RK4 step count over [0, R].

    Raises ``RuntimeError`` when no sign-changing bracket for the
    eigenvalue can be found after the configured number of widenings.
    """
    if n_dim < 2:
        raise ValueError("dimension must be at least 2")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if p <= 1:
        raise ValueError("exponent p must exceed 1")
    if tol <= 0:
        raise ValueError("tolerance must be positive")

    if beta == 0.0:
        r = np.linspace(0.0, radius, steps + 1)
        ones = np.ones_like(r)
        return RadialProfile(r, ones, np.zeros_like(r), p, beta, 0.0, n_dim, 0.0, 0, True)

    e = 1.0 / (p - 1.0)
    calls = 0

    def mismatch(lam: float) -> float:
        nonlocal calls
        calls += 1
        if lam == 0.0:
            return -abs(beta)
        psi_r, w_r, crossed, r_stop, _ = _integrate(lam, n_dim, radius, p, steps)
        if crossed:
            return abs(w_r) * (1.0 + (radius - r_stop) / radius) + abs(beta)
        return abs(w_r) - abs(beta) * psi_r ** (p - 1.0)

    if beta > 0:
        lo, glo = 0.0, -abs(beta)
        hi = beta * n_dim / radius
        ghi = mismatch(hi)
        widened = 0
        while ghi <= 0.0 and widened < max_widen:
            hi *= 2.0
            ghi = mismatch(hi)
            widened += 1
        if ghi <= 0.0:
            raise RuntimeError("eigenvalue bracket not found (upper end)")
    else:
        hi, ghi = 0.0, -abs(beta)
        lo = 2.0 * beta * n_dim / radius
        glo = mismatch(lo)
        widened = 0
        while glo <= 0.0 and widened < max_widen:
            lo *= 2.0
            glo = mismatch(lo)
            widened += 1
        if glo <= 0.0:
            raise RuntimeError("eigenvalue bracket not found (lower end)")
        lo, hi = lo, hi

    lam = brentq(mismatch, lo, hi, xtol=1e-13 * max(1.0, abs(hi - lo)), rtol=1e-15, maxiter=200)

    psi_r, w_r, crossed, _, samples = _integrate(lam, n_dim, radius, p, steps, record=True)
    if crossed or samples is None:
        raise RuntimeError("integration failed at the located eigenvalue")

    arr = np.array(samples)
    r_arr, psi_arr, dpsi_arr = arr[:, 0], arr[:, 1], arr[:, 2]
    if beta < 0:
        scale = 1.0 / psi_arr[-1]
        psi_arr = psi_arr * scale
        dpsi_arr = dpsi_arr * scale

    residual = abs(abs(dpsi_arr[-1]) - abs(beta) ** e * psi_arr[-1])
    converged = residual <= tol * max(1.0, abs(beta) ** e)
    return RadialProfile(r_arr, psi_arr, dpsi_arr, p, beta, lam, n_dim, residual, calls, converged)


def shell_ratio(t: float, n_dim: int, beta: float) -> float:
    """Ratio (t^(N-1) + beta) / (1 - t^N) of the unit shell family, t in [0, 1)."""
    if not 0.0 <= t < 1.0:
        raise ValueError("shell parameter must lie in [0, 1)")
    return (t ** (n_dim - 1) + beta) / (1.0 - t**n_dim)


def minimize_shell_ratio(n_dim: int, beta: float, samples: int = 100_001) -> tuple[float, float]:
    """Global minimum of the shell ratio over t in [0, 1).

    Located by a dense scan followed by golden-section refinement rather
    than assumed; for beta > -1 the minimum sits at t = 0 with value beta.
    """
    if beta <= -1.0:
        raise ValueError("shell minimization requires beta > -1")
    ts = np.linspace(0.0, 1.0 - 1e-6, samples)
    vals = (ts ** (n_dim - 1) + beta) / (1.0 - ts**n_dim)
    k = int(np.argmin(vals))
    if k == 0:
        return 0.0, float(beta)

    # golden-section polish inside the bracketing interval
    a = ts[max(k - 1, 0)]
    b = ts[min(k + 1, samples - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    for _ in range(200):
        if shell_ratio(c, n_dim, beta) < shell_ratio(d, n_dim, beta):
            b = d
        else:
            a = c
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        if b - a < 1e-14:
            break
    t_star = 0.5 * (a + b)
    return float(t_star), float(shell_ratio(t_star, n_dim, beta))


def shell_R_value(r: float, radius: float, n_dim: int, beta: float) -> float:
    """Set ratio of the shell {r < |x| < R} inside the ball of radius R.

    The inner sphere counts with weight one (it is interior boundary), the
    outer sphere with weight min(beta, 1).
    """
    if not 0.0 <= r < radius:
        raise ValueError("shell requires 0 <= r < R")
    beta_hat = min(beta, 1.0)
    return (n_dim / radius) * shell_ratio(r / radius, n_dim, beta_hat)


def ball_limit_eigenvalue(n_dim: int, radius: float, beta: float) -> float:
    """Small-p limit value on the ball: min(beta, 1) * N / R, for beta > -1."""
    if beta <= -1.0:
        raise ValueError("the limit value requires beta > -1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    return min(beta, 1.0) * n_dim / radius
