import json
import math
import re

import pytest

from oracles import disk_robin_eigenvalue_p2
from robinbv.cli import main


def run(tmp_path, command, config, name="cfg.json", extra=()):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return main([command, "--config", str(path), *extra])


def test_eigen_ball_radial(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "eigen", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"p": 2.0, "beta": 1.0},
        "output": {"directory": str(out)},
    })
    assert rc == 0
    payload = json.loads((out / "eigen_result.json").read_text())
    assert payload["lambda"] == pytest.approx(disk_robin_eigenvalue_p2(1.0), rel=1e-6)
    assert payload["converged"] is True
    assert (out / "profile.csv").exists()
    assert (out / "eigen_profile.png").exists()


def test_eigen_beta_zero(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "eigen", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"p": 2.0, "beta": 0.0},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    assert json.loads((out / "eigen_result.json").read_text())["lambda"] == 0.0


def test_eigen_unbounded_beta_is_config_error(tmp_path, capsys):
    rc = run(tmp_path, "eigen", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"p": 2.0, "beta": -1.5},
        "output": {"directory": str(tmp_path / "o")},
    })
    assert rc == 1
    assert "unbounded" in capsys.readouterr().err


def test_limit_ball(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "limit", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"beta": 0.5, "h": 1 / 32},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    payload = json.loads((out / "limit_result.json").read_text())
    assert payload["lambda"] == pytest.approx(1.0, rel=0.05)
    assert (out / "limit_mask.txt").exists()


def test_cheeger_square(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "cheeger", {
        "domain": {"type": "rectangle", "a": 1.0, "b": 1.0},
        "solver": {"h": 1 / 64},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    payload = json.loads((out / "cheeger_result.json").read_text())
    assert payload["lambda"] == pytest.approx(2 + math.sqrt(math.pi), rel=0.06)


def test_unknown_solver_key_rejected(tmp_path, capsys):
    rc = run(tmp_path, "limit", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"beta": 0.5, "bogus": 1},
        "output": {"directory": str(tmp_path / "o")},
    })
    assert rc == 1
    assert "unknown keys" in capsys.readouterr().err


def test_empty_mask_is_config_error(tmp_path):
    rc = run(tmp_path, "limit", {
        "domain": {"type": "ball", "radius": 0.3},
        "solver": {"beta": 0.5, "h": 2.0},
        "output": {"directory": str(tmp_path / "o")},
    })
    assert rc == 1


def test_malformed_p_list(tmp_path):
    rc = run(tmp_path, "sweep", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"beta": 0.5, "p_list": [1.5, 1.6, 1.2]},
        "output": {"directory": str(tmp_path / "o")},
    })
    assert rc == 1


def test_sweep_ball(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "sweep", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"beta": 0.5},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    payload = json.loads((out / "sweep_result.json").read_text())
    assert payload["lam_star"] == pytest.approx(1.0, rel=0.01)
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "p,lambda,residual"
    assert len(lines) == 6


def test_blowup_square(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "blowup", {
        "domain": {"type": "rectangle", "a": 1.0, "b": 1.0},
        "solver": {"beta": -1.5, "h": 1 / 64, "eps_list": [0.25, 0.125]},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    rows = json.loads((out / "blowup_result.json").read_text())["rows"]
    assert rows[0]["value"] > rows[1]["value"]


def test_blowup_requires_deep_negative_beta(tmp_path):
    rc = run(tmp_path, "blowup", {
        "domain": {"type": "rectangle", "a": 1.0, "b": 1.0},
        "solver": {"beta": -0.5, "h": 1 / 64},
        "output": {"directory": str(tmp_path / "o")},
    })
    assert rc == 1


def test_demo_figure1(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "demo-figure1", {
        "solver": {"corner_radius": 0.1, "radii": [0.5, 0.3, 0.2]},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    rows = json.loads((out / "demo_figure1_result.json").read_text())["rows"]
    assert [r["value"] for r in rows] == sorted([r["value"] for r in rows], reverse=True)


def test_verify_restricted_suite(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "verify", {
        "solver": {"suite": ["shell"]},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0
    payload = json.loads((out / "verify_result.json").read_text())
    assert payload["all_passed"] is True
    assert (out / "verdicts.csv").exists()


def test_verify_fk_square_negative_beta(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "verify", {
        "solver": {"suite": ["ball-limit"], "h": 1 / 32, "ball_betas": [-0.5]},
        "output": {"directory": str(out), "figures": False},
    })
    assert rc == 0


def test_format_flag_filters_outputs(tmp_path):
    out = tmp_path / "out"
    rc = run(tmp_path, "limit", {
        "domain": {"type": "ball", "radius": 1.0},
        "solver": {"beta": 0.5, "h": 1 / 16},
        "output": {"directory": str(out), "figures": False},
    }, extra=("--format", "json"))
    assert rc == 0
    assert (out / "limit_result.json").exists()
    assert not (out / "limit_field.csv").exists()


def test_deterministic_json_modulo_timestamp(tmp_path):
    cfg = {
        "domain": {"type": "rectangle", "a": 1.0, "b": 1.0},
        "solver": {"beta": 0.5, "h": 1 / 32, "seed": 0},
        "output": {"directory": str(tmp_path / "a"), "figures": False},
    }
    assert run(tmp_path, "limit", cfg, name="c1.json") == 0
    cfg["output"]["directory"] = str(tmp_path / "b")
    assert run(tmp_path, "limit", cfg, name="c2.json") == 0
    strip = lambda s: re.sub(r'"generated_at": "[^"]*"', "", s)
    a = strip((tmp_path / "a" / "limit_result.json").read_text())
    b = strip((tmp_path / "b" / "limit_result.json").read_text())
    assert a == b
