"""Command-line front end.

One JSON config file per run; subcommands dispatch to the solver modules
and write JSON/CSV artifacts (plus rendered figures) into the output
directory. Exit codes: 0 success, 1 configuration error, 2 solver
nonconvergence, 3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import figures, reporting
from .analysis import (
    DEFAULT_GRID_P_LIST,
    DEFAULT_RADIAL_P_LIST,
    demo_beta_minus_one,
    gamma_sweep,
    run_verification,
)
from .bvlimit import blow_up_sequence, minimize_J
from .discrete import ScalarField
from .eigensolver import minimize_Jp
from .geometry import (
    Annulus,
    Ball,
    Ellipse,
    Polygon,
    Rectangle,
    RoundedRectangle,
    rasterize,
)
from .radial import shoot_radial_eigen


class ConfigError(ValueError):
    pass


def _check_keys(block: dict, allowed: set, ctx: str):
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {ctx}: {sorted(unknown)}")


_DOMAIN_BUILDERS = {
    "ball": (Ball, {"radius"}, {"dim"}),
    "annulus": (Annulus, {"inner", "outer"}, {"dim"}),
    "rectangle": (Rectangle, {"a", "b"}, set()),
    "rounded_rectangle": (RoundedRectangle, {"a", "b", "corner_radius"}, set()),
    "ellipse": (Ellipse, {"a", "b"}, set()),
    "polygon": (Polygon, {"vertices"}, set()),
}


def parse_domain(block: dict):
    if not isinstance(block, dict) or "type" not in block:
        raise ConfigError("domain block must carry a 'type' key")
    kind = block["type"]
    if kind not in _DOMAIN_BUILDERS:
        raise ConfigError(f"unknown domain type {kind!r}")
    cls, required, optional = _DOMAIN_BUILDERS[kind]
    _check_keys(block, {"type"} | required | optional, f"domain[{kind}]")
    missing = required - set(block)
    if missing:
        raise ConfigError(f"domain[{kind}] missing keys: {sorted(missing)}")
    kwargs = {k: v for k, v in block.items() if k != "type"}
    if kind == "polygon":
        kwargs["vertices"] = tuple(tuple(v) for v in kwargs["vertices"])
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid domain parameters: {exc}") from exc


_SOLVER_KEYS = {
    "h", "tol", "residual_tol", "max_iter", "max_outer", "max_inner", "p",
    "p_list", "beta", "beta_values", "seed", "radial_steps", "mode",
    "eps_list", "corner_radius", "radii", "side", "suite", "fk_betas",
    "ball_betas",
}
_OUTPUT_KEYS = {"directory", "formats", "figures"}


def load_config(path: str) -> dict:
    import json

    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _check_keys(raw, {"domain", "solver", "output"}, "config")
    solver = raw.get("solver", {})
    output = raw.get("output", {})
    if not isinstance(solver, dict) or not isinstance(output, dict):
        raise ConfigError("'solver' and 'output' blocks must be objects")
    _check_keys(solver, _SOLVER_KEYS, "solver")
    _check_keys(output, _OUTPUT_KEYS, "output")
    fmts = output.get("formats", ["json", "csv"])
    if isinstance(fmts, str):
        fmts = [fmts]
    bad = set(fmts) - {"json", "csv"}
    if bad:
        raise ConfigError(f"unknown output formats: {sorted(bad)}")
    output["formats"] = list(fmts)
    raw["solver"] = solver
    raw["output"] = output
    return raw


def _require_positive(solver: dict, key: str, default):
    val = solver.get(key, default)
    if not isinstance(val, (int, float)) or val <= 0:
        raise ConfigError(f"solver.{key} must be positive")
    return val


def _validate_beta(solver: dict, lower: float | None = -1.0) -> float:
    beta = solver.get("beta", None)
    if beta is None:
        raise ConfigError("solver.beta is required")
    if not isinstance(beta, (int, float)):
        raise ConfigError("solver.beta must be a number")
    if lower is not None and beta <= lower:
        raise ConfigError(
            f"solver.beta = {beta} is not admissible: the functional is unbounded below for beta <= {lower}"
        )
    return float(beta)


def _validate_p_list(solver: dict, default) -> list:
    ps = solver.get("p_list", list(default))
    if not isinstance(ps, (list, tuple)) or len(ps) < 3:
        raise ConfigError("solver.p_list must list at least 3 exponents")
    if any(not isinstance(q, (int, float)) or q <= 1 for q in ps):
        raise ConfigError("all entries of solver.p_list must be numbers > 1")
    if any(b >= a for a, b in zip(ps, list(ps)[1:])):
        raise ConfigError("solver.p_list must be strictly decreasing")
    return [float(q) for q in ps]


class _Out:
    """Output sink honoring the directory/formats/figures settings."""

    def __init__(self, config: dict, args):
        out = config["output"]
        directory = args.out or out.get("directory")
        if not directory:
            raise ConfigError("no output directory (set output.directory or pass --out)")
        self.dir = Path(directory)
        fmt = args.format or None
        if fmt == "both":
            self.formats = {"json", "csv"}
        elif fmt in ("json", "csv"):
            self.formats = {fmt}
        else:
            self.formats = set(out["formats"])
        self.figures = bool(out.get("figures", True))
        self.written: list[str] = []

    def path(self, name: str) -> Path:
        return self.dir / name

    def json(self, name: str, obj):
        if "json" in self.formats:
            self.written.append(str(reporting.write_json(self.path(name), obj)))

    def csv(self, name: str, header, rows):
        if "csv" in self.formats:
            self.written.append(str(reporting.write_csv(self.path(name), header, rows)))

    def raw(self, name: str, writer, *args):
        self.written.append(str(writer(self.path(name), *args)))

    def figure(self, name: str, renderer, *args, **kwargs):
        if self.figures:
            self.dir.mkdir(parents=True, exist_ok=True)
            self.written.append(str(renderer(self.path(name), *args, **kwargs)))


def _base_payload(config: dict, spec) -> dict:
    return {
        "domain": spec.describe(),
        "boundary_smoothness": spec.boundary_smoothness,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


def cmd_eigen(config: dict, args) -> int:
    solver = config["solver"]
    spec = parse_domain(config.get("domain", {}))
    beta = _validate_beta(solver)
    p = solver.get("p", 2.0)
    if not isinstance(p, (int, float)) or p <= 1:
        raise ConfigError("solver.p must exceed 1")
    out = _Out(config, args)
    mode = solver.get("mode", "auto")
    if mode not in ("auto", "radial", "grid"):
        raise ConfigError("solver.mode must be auto, radial, or grid")
    use_radial = mode == "radial" or (mode == "auto" and isinstance(spec, Ball))

    payload = _base_payload(config, spec)
    payload.update({"kind": "eigen", "p": float(p), "beta": beta})

    if use_radial:
        steps = int(_require_positive(solver, "radial_steps", 2048))
        tol = _require_positive(solver, "tol", 1e-10)
        prof = shoot_radial_eigen(spec.dim, spec.radius, float(p), beta, tol=tol, steps=steps)
        payload.update(
            {
                "mode": "radial",
                "lambda": prof.lam,
                "residual": prof.residual,
                "iterations": prof.iterations,
                "converged": prof.converged,
            }
        )
        out.json("eigen_result.json", payload)
        if "csv" in out.formats:
            out.raw("profile.csv", reporting.write_profile_csv, prof)
        out.figure("eigen_profile.png", figures.save_profile_figure, prof)
        return 0 if prof.converged else 2

    h = _require_positive(solver, "h", 1 / 64)
    grid = rasterize(spec, h)
    res = minimize_Jp(
        grid,
        float(p),
        beta,
        tol=_require_positive(solver, "tol", 1e-7),
        residual_tol=_require_positive(solver, "residual_tol", 1e-3),
        max_iter=int(_require_positive(solver, "max_iter", 20000)),
        seed=int(solver.get("seed", 0)),
    )
    payload.update(
        {
            "mode": "grid",
            "h": h,
            "lambda": res.lam,
            "residual": res.residual,
            "iterations": res.iterations,
            "converged": res.converged,
            "constant_field_bound": res.constant_bound(),
        }
    )
    out.json("eigen_result.json", payload)
    if "csv" in out.formats:
        out.raw("field.csv", reporting.write_field_csv, res.minimizer)
    out.figure("eigen_field.png", figures.save_field_figure, res.minimizer, f"minimizer, lambda={res.lam:.6g}")
    return 0 if res.converged else 2


def _limit_like(config: dict, args, beta: float, name_prefix: str) -> int:
    solver = config["solver"]
    spec = parse_domain(config.get("domain", {}))
    out = _Out(config, args)
    h = _require_positive(solver, "h", 1 / 64)
    grid = rasterize(spec, h)
    res = minimize_J(
        grid,
        beta,
        tol=_require_positive(solver, "tol", 1e-6),
        max_outer=int(_require_positive(solver, "max_outer", 60)),
        max_inner=int(_require_positive(solver, "max_inner", 60000)),
        seed=int(solver.get("seed", 0)),
    )
    payload = _base_payload(config, spec)
    payload.update(
        {
            "kind": name_prefix,
            "beta": beta,
            "h": h,
            "lambda": res.lam,
            "subset_value": res.subset_value,
            "threshold": res.t_star,
            "dinkelbach_trace": list(res.trace),
            "iterations": res.iterations,
            "converged": res.converged,
        }
    )
    out.json(f"{name_prefix}_result.json", payload)
    if "csv" in out.formats:
        out.raw(f"{name_prefix}_mask.txt", reporting.write_mask, grid, res.subset.mask)
        out.raw(f"{name_prefix}_field.csv", reporting.write_field_csv, res.minimizer)
    out.figure(f"{name_prefix}_set.png", figures.save_mask_figure, grid, res.subset.mask,
               f"optimal set, value {res.lam:.6g}")
    out.figure(f"{name_prefix}_trace.png", figures.save_trace_figure, res.trace)
    return 0 if res.converged else 2


def cmd_limit(config: dict, args) -> int:
    beta = _validate_beta(config["solver"])
    return _limit_like(config, args, beta, "limit")


def cmd_cheeger(config: dict, args) -> int:
    return _limit_like(config, args, 1.0, "cheeger")


def cmd_sweep(config: dict, args) -> int:
    solver = config["solver"]
    spec = parse_domain(config.get("domain", {}))
    beta = _validate_beta(solver)
    default = DEFAULT_RADIAL_P_LIST if isinstance(spec, Ball) else DEFAULT_GRID_P_LIST
    p_list = _validate_p_list(solver, default)
    out = _Out(config, args)
    rep = gamma_sweep(
        spec,
        beta,
        p_list,
        h=_require_positive(solver, "h", 1 / 128),
        mode=solver.get("mode", "auto"),
    )
    payload = _base_payload(config, spec)
    payload.update(rep.to_jsonable())
    out.json("sweep_result.json", payload)
    out.csv("sweep.csv", ("p", "lambda", "residual"),
            [(r.p, r.lam, r.residual) for r in rep.rows])
    out.figure("sweep.png", figures.save_sweep_figure, rep)
    return 0 if rep.passed else 2


def cmd_blowup(config: dict, args) -> int:
    solver = config["solver"]
    spec = parse_domain(config.get("domain", {}))
    beta = _validate_beta(solver, lower=None)
    if beta >= -1.0:
        raise ConfigError("blowup requires beta < -1 (the unbounded regime)")
    h = _require_positive(solver, "h", 1 / 128)
    eps_list = solver.get("eps_list", [0.25, 0.125, 0.0625])
    if not isinstance(eps_list, (list, tuple)) or not eps_list:
        raise ConfigError("solver.eps_list must be a nonempty decreasing list")
    out = _Out(config, args)
    grid = rasterize(spec, h)
    rows = blow_up_sequence(grid, beta, [float(e) for e in eps_list])
    payload = _base_payload(config, spec)
    payload.update({"kind": "blowup", "beta": beta, "h": h,
                    "rows": [{"eps": e, "value": v} for e, v in rows]})
    out.json("blowup_result.json", payload)
    out.csv("blowup.csv", ("eps", "value"), rows)
    out.figure("blowup.png", figures.save_blowup_figure, rows)
    return 0


def cmd_demo_figure1(config: dict, args) -> int:
    solver = config["solver"]
    corner = solver.get("corner_radius", 0.1)
    side = solver.get("side", 1.0)
    radii = solver.get("radii", [0.5, 0.4, 0.3, 0.2, 0.15])
    if not isinstance(corner, (int, float)) or not 0 < corner < side / 2:
        raise ConfigError("solver.corner_radius must lie in (0, side/2)")
    try:
        rows = demo_beta_minus_one(float(corner), [float(r) for r in radii], side=float(side))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = _Out(config, args)
    payload = {
        "kind": "demo-figure1",
        "corner_radius": float(corner),
        "side": float(side),
        "rows": [{"radius": r, "value": v} for r, v in rows],
        "infimum": -1.0 / float(corner),
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    out.json("demo_figure1_result.json", payload)
    out.csv("demo_figure1.csv", ("radius", "value"), rows)
    out.figure("demo_figure1.png", figures.save_corner_demo_figure, rows, float(corner))
    return 0


def cmd_verify(config: dict, args) -> int:
    solver = config["solver"]
    if "domain" in config and config["domain"]:
        parse_domain(config["domain"])  # validated but the suite picks its own domains
    suite = solver.get("suite", ["ball-limit", "fk", "gamma-radial", "shell", "blowup"])
    if isinstance(suite, str):
        suite = [suite]
    known = {"ball-limit", "fk", "gamma-radial", "cheeger-bounds", "shell", "blowup"}
    bad = set(suite) - known
    if bad:
        raise ConfigError(f"unknown verify suite entries: {sorted(bad)}")
    if "p_list" in solver:
        _validate_p_list(solver, DEFAULT_RADIAL_P_LIST)
    h = _require_positive(solver, "h", 1 / 128)
    fk_betas = solver.get("fk_betas", [-0.5, -0.25, 0.5, 1.0, 2.0])
    ball_betas = solver.get("ball_betas", [-0.5, 0.5, 2.0])
    out = _Out(config, args)
    verdicts = run_verification(suite=tuple(suite), h=h, fk_betas=tuple(fk_betas), ball_betas=tuple(ball_betas))
    all_pass = all(v.get("passed", False) for v in verdicts)
    payload = {
        "kind": "verify",
        "suite": list(suite),
        "h": h,
        "all_passed": all_pass,
        "verdicts": verdicts,
        "generated_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    out.json("verify_result.json", payload)
    rows = []
    for v in verdicts:
        rows.append(
            (
                v.get("id", v.get("kind", "?")),
                v.get("domain", {}).get("type", "-") if isinstance(v.get("domain"), dict) else "-",
                v.get("params", {}).get("beta", "-") if isinstance(v.get("params"), dict) else "-",
                v.get("left", ""),
                v.get("right", ""),
                v.get("direction", ""),
                v.get("tol", ""),
                v.get("margin", ""),
                v.get("passed", False),
            )
        )
    out.csv("verdicts.csv", ("id", "domain", "beta", "left", "right", "direction", "tol", "margin", "passed"), rows)
    out.figure("verify.png", figures.save_verdict_figure, verdicts)
    return 0 if all_pass else 3


_COMMANDS = {
    "eigen": cmd_eigen,
    "limit": cmd_limit,
    "cheeger": cmd_cheeger,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "blowup": cmd_blowup,
    "demo-figure1": cmd_demo_figure1,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="robinbv", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to the JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        p.add_argument("--format", default=None, choices=["json", "csv", "both"])
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
