import math

import numpy as np
import pytest

from robinbv.geometry import (
    Annulus,
    Ball,
    Ellipse,
    Polygon,
    Rectangle,
    RoundedRectangle,
    equimeasurable_ball,
    perimeter,
    rasterize,
    volume,
)

ALL_SPECS = [
    Ball(1.0),
    Annulus(0.4, 1.0),
    Rectangle(1.3, 0.8),
    RoundedRectangle(1.2, 1.0, 0.3),
    Ellipse(1.3, 0.7),
    Polygon(((0.0, 0.0), (1.3, 0.2), (1.1, 1.2), (0.2, 0.9))),
]


def test_disk_measures():
    assert volume(Ball(1.0)) == pytest.approx(math.pi, rel=1e-14)
    assert perimeter(Ball(1.0)) == pytest.approx(2 * math.pi, rel=1e-14)


def test_higher_dimensional_ball():
    assert volume(Ball(1.0, dim=3)) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert perimeter(Ball(2.0, dim=3)) == pytest.approx(16 * math.pi, rel=1e-14)


def test_rectangle_measures():
    assert volume(Rectangle(2.0, 1.0)) == pytest.approx(2.0)
    assert perimeter(Rectangle(2.0, 1.0)) == pytest.approx(6.0)


def test_rounded_rectangle_measures():
    # area 1 - (4 - pi) rho^2, perimeter 4 - 8 rho + 2 pi rho
    r = RoundedRectangle(1.0, 1.0, 0.25)
    assert volume(r) == pytest.approx(1.0 - (4 - math.pi) * 0.0625, rel=1e-14)
    assert volume(r) == pytest.approx(0.94634954084936204, rel=1e-12)
    assert perimeter(r) == pytest.approx(4.0 - 2.0 + 2 * math.pi * 0.25, rel=1e-14)


def test_rounded_rectangle_measures_match_fine_raster():
    r = RoundedRectangle(1.0, 1.0, 0.25)
    g = rasterize(r, 1 / 512)
    assert g.area == pytest.approx(volume(r), rel=2e-3)
    assert g.boundary_measure == pytest.approx(perimeter(r), rel=2e-3)


def test_annulus_measures():
    a = Annulus(0.5, 1.0)
    assert volume(a) == pytest.approx(math.pi * 0.75, rel=1e-14)
    assert perimeter(a) == pytest.approx(3 * math.pi, rel=1e-14)


def test_ellipse_perimeter_against_quadrature():
    e = Ellipse(1.5, 2.0 / 3.0)
    # independent quadrature of the arc-length integral
    t = np.linspace(0, 2 * math.pi, 200001)
    x = 1.5 * np.cos(t)
    y = (2.0 / 3.0) * np.sin(t)
    arc = float(np.hypot(np.diff(x), np.diff(y)).sum())
    assert perimeter(e) == pytest.approx(arc, rel=1e-8)
    assert volume(e) == pytest.approx(math.pi, rel=1e-14)


def test_polygon_measures():
    tri = Polygon(((0, 0), (2, 0), (0, 1)))
    assert volume(tri) == pytest.approx(1.0)
    assert perimeter(tri) == pytest.approx(3.0 + math.sqrt(5.0))


def test_polygon_validation():
    with pytest.raises(ValueError):
        Polygon(((0, 0), (1, 0)))
    with pytest.raises(ValueError):
        Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))  # self-intersecting bowtie


def test_domain_validation():
    with pytest.raises(ValueError):
        Ball(-1.0)
    with pytest.raises(ValueError):
        Annulus(1.0, 0.5)
    with pytest.raises(ValueError):
        RoundedRectangle(1.0, 1.0, 0.9)


def test_equimeasurable_ball_identity():
    assert equimeasurable_ball(Ball(1.0)).radius == pytest.approx(1.0, rel=1e-14)


def test_equimeasurable_ball_from_rectangle():
    assert equimeasurable_ball(Rectangle(math.pi, 1.0)).radius == pytest.approx(1.0, rel=1e-14)
    assert equimeasurable_ball(Rectangle(2.0, 1.0)).radius == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_equimeasurable_ball_volume_matches(spec):
    ball = equimeasurable_ball(spec)
    assert volume(ball) == pytest.approx(volume(spec), rel=1e-12)


def test_rasterize_unit_square_quarter_h():
    g = rasterize(Rectangle(1.0, 1.0), 0.25)
    assert g.interior_count == 16
    assert g.area == pytest.approx(1.0, rel=1e-14)
    assert g.boundary_measure == pytest.approx(4.0, rel=1e-14)
    assert g.boundary_measure_unweighted == pytest.approx(4.0, rel=1e-14)


def test_rasterize_unit_square_half_h():
    g = rasterize(Rectangle(1.0, 1.0), 0.5)
    assert g.interior_count == 4
    assert g.boundary_face_count == 8


def test_rasterize_exact_for_axis_multiples():
    g = rasterize(Rectangle(1.5, 0.75), 0.25)
    assert g.area == pytest.approx(1.5 * 0.75, rel=1e-14)
    assert g.boundary_measure == pytest.approx(2 * (1.5 + 0.75), rel=1e-14)


def test_rasterize_degenerate_errors():
    with pytest.raises(ValueError):
        rasterize(Ball(0.3), 2.0)  # empty mask
    with pytest.raises(ValueError):
        rasterize(Annulus(0.45, 0.55), 0.4)  # unresolved ring
    with pytest.raises(ValueError):
        rasterize(Polygon(((0, 0), (1, 0), (1, 0.05), (0, 0.05))), 0.2)  # sliver vertices


def test_rasterize_requires_planar_domain():
    with pytest.raises(ValueError):
        rasterize(Ball(1.0, dim=3), 0.1)


def test_faces_owned_by_interior_cells():
    g = rasterize(Ball(1.0), 1 / 32)
    assert np.all(g.mask[g.face_rows, g.face_cols])
    assert g.wsum.sum() == pytest.approx(g.boundary_measure, rel=1e-12)
    # weights are axis projections of unit normals
    assert np.all(g.face_weights <= g.h + 1e-15)
    assert np.all(g.face_weights >= 0.0)


def test_ball_raster_measures_converge():
    errs = []
    for h in (1 / 32, 1 / 64, 1 / 128, 1 / 256):
        g = rasterize(Ball(1.0), h)
        errs.append(abs(g.area - math.pi))
    order = math.log(errs[0] / errs[-1]) / math.log(8.0)
    assert order >= 1.0
    g = rasterize(Ball(1.0), 1 / 256)
    assert g.boundary_measure == pytest.approx(2 * math.pi, rel=2e-4)
    # the unweighted face count carries the documented anisotropic factor
    assert g.boundary_measure_unweighted == pytest.approx(8.0, rel=1e-2)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_raster_area_first_order(spec):
    hs = [0.08 * 2**-k for k in range(6)]
    errs = [abs(rasterize(spec, h).area - volume(spec)) for h in hs]
    if errs[-1] == 0.0:  # axis-aligned exactness
        return
    order = math.log(errs[0] / errs[-1]) / math.log(hs[0] / hs[-1])
    assert order >= 1.0
