import math

import numpy as np
import pytest

from oracles import disk_robin_eigenvalue_p2
from robinbv.analysis import (
    DEFAULT_RADIAL_P_LIST,
    InequalityReport,
    check_cheeger_bound,
    check_faber_krahn,
    default_domain_library,
    demo_beta_minus_one,
    evaluate_H,
    fit_power_limit,
    gamma_sweep,
    run_verification,
)
from robinbv.bvlimit import SubsetIndicator, evaluate_R, grid_set_measures
from robinbv.geometry import Ball, Rectangle, rasterize, volume


def test_radial_sweep_positive_beta():
    rep = gamma_sweep(Ball(1.0), 0.5, DEFAULT_RADIAL_P_LIST)
    assert rep.mode == "radial"
    assert rep.reference == pytest.approx(1.0)
    assert rep.lam_star == pytest.approx(1.0, rel=0.01)
    assert rep.passed
    assert [r.p for r in rep.rows] == sorted([r.p for r in rep.rows], reverse=True)


def test_radial_sweep_negative_beta():
    rep = gamma_sweep(Ball(1.0), -0.5, DEFAULT_RADIAL_P_LIST)
    assert rep.reference == pytest.approx(-1.0)
    assert rep.lam_star == pytest.approx(-1.0, rel=0.01)
    assert rep.passed


def test_sweep_beta_zero_rows_vanish():
    rep = gamma_sweep(Ball(1.0), 0.0, (1.5, 1.25, 1.1))
    assert all(r.lam == 0.0 for r in rep.rows)
    assert rep.lam_star == 0.0
    assert rep.passed


def test_sweep_envelope():
    rep = gamma_sweep(Ball(1.0), 0.5, DEFAULT_RADIAL_P_LIST)
    lo = min([r.lam for r in rep.rows] + [rep.reference])
    hi = max([r.lam for r in rep.rows] + [rep.reference])
    slack = 1e-4 * max(1.0, abs(hi))  # least-squares fitting noise
    assert lo - slack <= rep.lam_star <= hi + slack


def test_sweep_validation():
    with pytest.raises(ValueError):
        gamma_sweep(Ball(1.0), 0.5, (1.5, 1.25))
    with pytest.raises(ValueError):
        gamma_sweep(Ball(1.0), 0.5, (1.25, 1.5, 1.75))
    with pytest.raises(ValueError):
        gamma_sweep(Ball(1.0), -1.5, DEFAULT_RADIAL_P_LIST)


def test_fit_power_limit_recovers_synthetic():
    ps = np.array([1.4, 1.2, 1.1, 1.05])
    lams = 2.0 + 3.0 * (ps - 1.0) ** 0.75
    lam_star, coeff, alpha, rms = fit_power_limit(ps, lams, nrows=4)
    assert lam_star == pytest.approx(2.0, abs=1e-6)
    assert alpha == pytest.approx(0.75, abs=0.051)
    assert rms < 1e-6


def test_check_faber_krahn_ball_equality():
    reps = check_faber_krahn(Ball(1.0), 0.5)
    assert len(reps) == 1
    assert reps[0].passed
    assert reps[0].margin == pytest.approx(0.0, abs=1e-12)


def test_check_faber_krahn_square_directions():
    s = math.sqrt(math.pi)
    pos = check_faber_krahn(Rectangle(s, s), 0.5, h=1 / 64)
    assert pos[0].inequality_id == "fk1"
    assert pos[0].passed and pos[0].left >= pos[0].right - 0.05
    neg = check_faber_krahn(Rectangle(s, s), -0.5, h=1 / 64)
    ids = [r.inequality_id for r in neg]
    assert ids == ["fk2", "upper-by-constants"]
    assert all(r.passed for r in neg)
    # the constant-field bound uses exact parametric measures
    assert neg[1].right == pytest.approx(-0.5 * 4 * s / math.pi, rel=1e-12)


def test_check_faber_krahn_validation():
    with pytest.raises(ValueError):
        check_faber_krahn(Ball(1.0), -1.0)


def test_evaluate_H_constant_weight_algebra():
    grid = rasterize(Rectangle(1.0, 1.0), 1 / 32)
    X = np.asarray(grid.X)
    E = SubsetIndicator.from_mask(grid, (X < 0.5) & grid.mask)
    p, beta = 2.0, 1.0
    psi = max(1.0, beta)
    got = evaluate_H(E, grid, psi, beta, p)
    p_int, h_bd, area = grid_set_measures(grid, E.mask)
    want = (psi * p_int + beta * h_bd - (p - 1) * psi ** (p / (p - 1)) * area) / area
    assert got == pytest.approx(want, rel=1e-12)


def test_evaluate_H_full_domain():
    grid = rasterize(Rectangle(1.0, 1.0), 1 / 32)
    E = SubsetIndicator.from_mask(grid, grid.mask)
    beta, p, psi = 0.8, 2.0, 1.0
    got = evaluate_H(E, grid, psi, beta, p)
    want = beta * grid.boundary_measure / grid.area - (p - 1) * psi ** (p / (p - 1))
    assert got == pytest.approx(want, rel=1e-10)


def test_evaluate_H_validation():
    grid = rasterize(Rectangle(1.0, 1.0), 1 / 32)
    E = SubsetIndicator.from_mask(grid, grid.mask)
    with pytest.raises(ValueError):
        evaluate_H(E, grid, -1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        evaluate_H(SubsetIndicator.shell(0.5, 1.0), grid, 1.0, 1.0, 2.0)


def test_check_cheeger_bound_ball():
    reps = check_cheeger_bound(Ball(1.0), 2.0, 1.0)
    byid = {r.inequality_id: r for r in reps}
    assert byid["cheeger-lower"].passed
    # exact self-consistency: h(ball) = 2, bound = 2 - 1 = 1, lam ~ 1.577
    assert byid["cheeger-lower"].left == pytest.approx(disk_robin_eigenvalue_p2(1.0), rel=1e-6)
    assert byid["cheeger-lower"].right == pytest.approx(1.0, rel=1e-12)
    assert "cheeger-power" in byid and byid["cheeger-power"].passed
    assert byid["cheeger-power"].right == pytest.approx(1.0, rel=1e-12)
    assert byid["upper-by-constants"].passed


def test_check_cheeger_bound_requires_positive_beta():
    with pytest.raises(ValueError):
        check_cheeger_bound(Ball(1.0), 2.0, 0.0)
    with pytest.raises(ValueError):
        check_cheeger_bound(Ball(1.0), 1.0, 1.0)


def test_demo_beta_minus_one_trend():
    rows = demo_beta_minus_one(0.1, [0.5, 0.4, 0.3, 0.2, 0.15])
    vals = [v for _, v in rows]
    assert all(a > b for a, b in zip(vals, vals[1:]))  # decreasing toward the infimum
    for r, v in rows:
        assert v == pytest.approx(-2.0 / (r + 0.1), rel=1e-14)
    assert vals[-1] > -1.0 / 0.1  # stays above the unattained infimum


def test_demo_beta_minus_one_inscribed_circle():
    rows = demo_beta_minus_one(0.1, [0.5])
    assert rows[0][1] == pytest.approx(-2.0 / 0.6, rel=1e-14)


def test_demo_beta_minus_one_validation():
    with pytest.raises(ValueError):
        demo_beta_minus_one(0.1, [0.05])
    with pytest.raises(ValueError):
        demo_beta_minus_one(0.1, [0.6])


def test_corner_lens_rasterized_cross_check():
    # rasterize one family member inside a rounded square; the set pinches
    # to zero width at its two tangency points, which trims both measured
    # curves by an O(sqrt(h)) amount, so the comparison is deliberately
    # loose and also checks improvement under refinement
    from robinbv.geometry import RoundedRectangle

    rho, r, side = 0.1, 0.35, 1.0
    spec = RoundedRectangle(side, side, rho)
    exact_R = -2.0 / (r + rho)
    errs = []
    for h in (1 / 256, 1 / 512):
        grid = rasterize(spec, h)
        X, Y = np.asarray(grid.X), np.asarray(grid.Y)
        cx = cy = side - r
        lens = (X >= cx) & (Y >= cy) & (np.hypot(X - cx, Y - cy) >= r) & grid.mask
        p_int, h_bd, area = grid_set_measures(grid, lens)
        assert area == pytest.approx((1 - math.pi / 4) * (r * r - rho * rho), rel=0.01)
        assert h_bd == pytest.approx(2 * (r - rho) + math.pi / 2 * rho, rel=0.2)
        assert p_int == pytest.approx(math.pi / 2 * r, rel=0.2)
        got = (p_int - h_bd) / area
        assert got == pytest.approx(exact_R, rel=0.3)
        errs.append(abs(got - exact_R))
    assert errs[1] < errs[0]


def test_domain_library_area_matched():
    for spec in default_domain_library():
        assert volume(spec) == pytest.approx(math.pi, rel=1e-12)


def test_inequality_report_margins():
    rep = InequalityReport("fk1", {}, {}, 1.0, 0.9, ">=", 0.05)
    assert rep.passed and rep.margin == pytest.approx(0.1)
    rep = InequalityReport("fk1", {}, {}, 0.9, 1.0, ">=", 0.05)
    assert rep.margin == pytest.approx(-0.1)
    assert not rep.passed
    rep = InequalityReport("fk2", {}, {}, 0.9, 1.0, "<=", 0.0)
    assert rep.passed


def test_run_verification_small_suites():
    verdicts = run_verification(suite=("shell",))
    assert len(verdicts) == 1 and verdicts[0]["passed"]
    verdicts = run_verification(suite=("blowup",), h=1 / 64)
    assert verdicts[0]["passed"]
