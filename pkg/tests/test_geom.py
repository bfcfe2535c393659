"""Tests for the model surfaces and their geodesics."""

import math

import numpy as np
import pytest

from nodallab.exceptions import ChartRangeError, UnsupportedSurfaceError
from nodallab.geom import (
    DISC,
    SPHERE,
    TORUS,
    CxPoint,
    GeodesicSegment,
    StripPoint,
    clairaut_integral,
    complexified_geodesic_point,
    distance,
    geodesic_point,
    quadrature_grid,
    surface_by_name,
)


@pytest.mark.parametrize(
    'surface,resolution,total',
    [
        (TORUS, 16, 1.0),
        (SPHERE, 16, 4 * math.pi),
        (DISC, 16, math.pi),
        (SPHERE, 33, 4 * math.pi),
    ],
)
def test_quadrature_weights_sum_to_area(surface, resolution, total):
    grid = quadrature_grid(surface, resolution)
    assert grid.total_weight == pytest.approx(total, rel=1e-12)
    assert grid.shape == (grid.u.size, grid.v.size)


def test_quadrature_rejects_coarse_resolution():
    with pytest.raises(ValueError):
        quadrature_grid(TORUS, 4)


@pytest.mark.parametrize(
    'surface,p,q,expected',
    [
        (TORUS, (0.1, 0.1), (0.9, 0.1), 0.2),
        (TORUS, (0.0, 0.0), (0.5, 0.5), math.sqrt(0.5)),
        (SPHERE, (0.0, 0.0), (math.pi / 2, 1.0), math.pi / 2),
        (SPHERE, (math.pi / 2, 0.0), (math.pi / 2, math.pi), math.pi),
        (DISC, (1.0, 0.0), (1.0, math.pi), 2.0),
    ],
)
def test_distance(surface, p, q, expected):
    assert distance(surface, p, q) == pytest.approx(expected, abs=1e-12)


def test_torus_chart_wraps():
    u, v = TORUS.check_chart(1.25, -0.25)
    assert float(u) == pytest.approx(0.25)
    assert float(v) == pytest.approx(0.75)


@pytest.mark.parametrize(
    'surface,point',
    [
        (SPHERE, (4.0, 0.0)),
        (SPHERE, (1.0, -0.5)),
        (DISC, (1.5, 0.0)),
        (TORUS, (math.nan, 0.0)),
    ],
)
def test_chart_range_errors(surface, point):
    with pytest.raises(ChartRangeError):
        surface.check_chart(*point)


def test_surface_by_name():
    assert surface_by_name('Sphere') is SPHERE
    with pytest.raises(UnsupportedSurfaceError):
        surface_by_name('klein')


# ----------------------------------------------------------------------
# Complex points
# ----------------------------------------------------------------------


def test_strip_point_range():
    assert StripPoint(0.3, 0.1, eps=0.2).w == complex(0.3, 0.1)
    with pytest.raises(ChartRangeError):
        StripPoint(0.0, 0.5, eps=0.4)


def test_cx_point_on_quadric():
    point = CxPoint(SPHERE, (1j, 0.0, math.sqrt(2.0)))
    assert point.array.shape == (3,)
    with pytest.raises(ChartRangeError):
        CxPoint(SPHERE, (1.0, 1.0, 0.0))
    with pytest.raises(UnsupportedSurfaceError):
        CxPoint(DISC, (0.0, 0.0))


# ----------------------------------------------------------------------
# Geodesics
# ----------------------------------------------------------------------


def test_torus_closed_geodesic_reduces_direction():
    seg = GeodesicSegment.torus_closed(2, 4)
    assert seg.closed
    assert seg.length == pytest.approx(math.sqrt(5.0))
    assert seg.direction == pytest.approx((1 / math.sqrt(5.0), 2 / math.sqrt(5.0)))
    u, v = geodesic_point(seg, seg.length)
    assert distance(TORUS, (u, v), seg.basepoint) == pytest.approx(0.0, abs=1e-12)


def test_closed_flag_requires_closing():
    with pytest.raises(ValueError):
        GeodesicSegment(TORUS, (0.0, 0.0), (1.0, 0.0), 0.5, closed=True)


def test_disc_has_no_geodesics():
    with pytest.raises(UnsupportedSurfaceError):
        GeodesicSegment(DISC, (0.5, 0.0), (1.0, 0.0), 0.5)


def test_geodesic_point_range():
    seg = GeodesicSegment.equator()
    with pytest.raises(ChartRangeError):
        geodesic_point(seg, 7.0)


def test_equator_points_and_clairaut():
    seg = GeodesicSegment.equator()
    assert seg.closed
    phi, theta = geodesic_point(seg, math.pi / 2)
    assert phi == pytest.approx(math.pi / 2)
    assert theta == pytest.approx(math.pi / 2)
    t = np.linspace(0.0, 6.0, 7)
    assert np.allclose(clairaut_integral(seg, t), 1.0)
    assert seg.normal == pytest.approx([0.0, 0.0, 1.0])


def test_meridian_clairaut_vanishes():
    seg = GeodesicSegment.meridian(0.3)
    values = clairaut_integral(seg, np.array([0.2, 1.0, 2.5]))
    assert np.allclose(values, 0.0, atol=1e-12)


def test_clairaut_is_sphere_only():
    with pytest.raises(UnsupportedSurfaceError):
        clairaut_integral(GeodesicSegment.torus_closed(1, 0), 0.1)


@pytest.mark.parametrize('t,tau', [(0.0, 0.2), (1.3, -0.35), (5.0, 0.4)])
def test_complexified_equator_stays_on_quadric(t, tau):
    point = complexified_geodesic_point(GeodesicSegment.equator(), StripPoint(t, tau))
    z = point.array
    assert abs(np.sum(z * z) - 1.0) < 1e-12
    assert z[0] == pytest.approx(np.cos(complex(t, tau)))


def test_complexified_torus_geodesic():
    seg = GeodesicSegment.torus_closed(1, 0, basepoint=(0.1, 0.2))
    point = complexified_geodesic_point(seg, StripPoint(0.3, 0.1))
    assert point.coords[0] == pytest.approx(complex(0.4, 0.1))
    assert point.coords[1] == pytest.approx(complex(0.2, 0.0))
