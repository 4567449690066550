"""Matplotlib figure rendering for the CLI report paths (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def save_field_figure(path, field, title=""):
    grid = field.grid
    data = np.where(grid.mask, field.values, np.nan)
    fig, ax = plt.subplots(figsize=(5, 4))
    x0, y0 = grid.origin
    ny, nx = grid.shape
    extent = (x0, x0 + nx * grid.h, y0, y0 + ny * grid.h)
    im = ax.imshow(data, origin="lower", extent=extent, cmap="viridis")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, path)


def save_mask_figure(path, grid, subset_mask, title=""):
    data = np.where(grid.mask, subset_mask.astype(float), np.nan)
    fig, ax = plt.subplots(figsize=(4.5, 4))
    x0, y0 = grid.origin
    ny, nx = grid.shape
    extent = (x0, x0 + nx * grid.h, y0, y0 + ny * grid.h)
    ax.imshow(data, origin="lower", extent=extent, cmap="gray_r", vmin=0, vmax=1)
    ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    return _save(fig, path)


def save_profile_figure(path, profile, title=""):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(profile.r, profile.psi, lw=1.5, label="psi")
    ax.plot(profile.r, profile.dpsi, lw=1.0, ls="--", label="dpsi")
    ax.set_xlabel("r")
    ax.legend(frameon=False)
    ax.set_title(title or f"radial profile, lambda={profile.lam:.6g}")
    return _save(fig, path)


def save_trace_figure(path, trace, title="ratio iteration"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(range(len(trace)), trace, "o-", ms=3)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("ratio")
    ax.set_title(title)
    return _save(fig, path)


def save_sweep_figure(path, report):
    ps = [row.p for row in report.rows]
    lams = [row.lam for row in report.rows]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ps, lams, "o", label="computed")
    pp = np.linspace(min(ps), 1.0 + 1e-6, 200)
    fit = report.lam_star + report.fit_coeff * (pp - 1.0) ** report.fit_alpha
    ax.plot(pp, fit, "-", lw=1, label=f"fit (alpha={report.fit_alpha:.2f})")
    ax.axhline(report.reference, color="k", ls=":", lw=1, label="limit reference")
    ax.set_xlabel("p")
    ax.set_ylabel("eigenvalue")
    ax.invert_xaxis()
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(f"sweep, extrapolated {report.lam_star:.5g}")
    return _save(fig, path)


def save_blowup_figure(path, rows):
    eps = [e for e, _ in rows]
    vals = [v for _, v in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.semilogx(eps, vals, "o-")
    ax.set_xlabel("layer width")
    ax.set_ylabel("quotient value")
    ax.invert_xaxis()
    ax.set_title("boundary-layer blow-up")
    return _save(fig, path)


def save_corner_demo_figure(path, rows, corner_radius):
    radii = [r for r, _ in rows]
    vals = [v for _, v in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(radii, vals, "o-", label="corner-lens ratio")
    ax.axhline(-1.0 / corner_radius, color="k", ls=":", lw=1, label="unattained infimum")
    ax.set_xlabel("tangent-circle radius")
    ax.set_ylabel("set ratio at weight -1")
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def save_verdict_figure(path, verdicts):
    labeled = [(v.get("id", v.get("kind", "?")), v) for v in verdicts]
    margins = [v.get("margin", 0.0) if "margin" in v else (0.0 if v.get("passed") else -1.0) for _, v in labeled]
    colors = ["tab:green" if v.get("passed") else "tab:red" for _, v in labeled]
    fig, ax = plt.subplots(figsize=(6, max(2.5, 0.25 * len(labeled))))
    ax.barh(range(len(labeled)), margins, color=colors)
    ax.set_yticks(range(len(labeled)))
    ax.set_yticklabels([f"{i}: {name}" for i, (name, _) in enumerate(labeled)], fontsize=6)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("verdict margin")
    return _save(fig, path)
