"""Tests for the complexified eigenfunctions and complex zero counting."""

import math

import numpy as np
import pytest

from nodallab.cx import (
    GeodesicRestriction,
    StripRect,
    argument_count,
    cauchy_riemann_residual,
    complexified_exp,
    count_zeros_rect,
    eval_cx,
    grauert_rho,
    growth_rate,
    intersection_density,
    period_rect,
    poincare_lelong_count,
    zero_locations,
)
from nodallab.exceptions import (
    ArgumentPrincipleError,
    BoundaryZeroError,
    GrowthBoundError,
    OutsideTubeError,
    TubeChartError,
    UnsupportedSurfaceError,
    VanishingRestrictionError,
)
from nodallab.experiments import closed_form_zero_count
from nodallab.factory import EigenFnFactory
from nodallab.geom import SPHERE, TORUS, CxPoint, GeodesicSegment
from nodallab.modes import TorusMode

# zeros of the (2, 1) sine mode along this circle sit at t = n/4 - 0.163
SEG = GeodesicSegment.torus_closed(1, 0, basepoint=(0.013, 0.3))
ZEROS = [0.087, 0.337, 0.587, 0.837]
STRIP = StripRect(0.0, 1.0, -0.1, 0.1)


@pytest.fixture
def mode21():
    return EigenFnFactory('torus', k=(2, 1))


# ----------------------------------------------------------------------
# The tube
# ----------------------------------------------------------------------


def test_torus_tube_function():
    z = CxPoint(TORUS, (0.1 + 0.3j, 0.2 - 0.4j))
    assert grauert_rho(TORUS, z) == pytest.approx(0.5)
    assert complexified_exp(TORUS, (0.1, 0.2), (0.3, -0.4)).coords == z.coords


@pytest.mark.parametrize('point', [(math.pi / 2, 0.0), (0.3, 2.0), (2.9, 5.0)])
def test_sphere_exp_round_trip(point):
    z = complexified_exp(SPHERE, point, (0.3, 0.4))
    assert grauert_rho(SPHERE, z) == pytest.approx(0.5, abs=1e-12)
    assert complex(np.sum(z.array**2)) == pytest.approx(1.0)


def test_zero_covector_stays_real():
    z = complexified_exp(SPHERE, (1.0, 2.0), (0.0, 0.0))
    assert np.allclose(z.array.imag, 0.0)
    assert grauert_rho(SPHERE, z) == pytest.approx(0.0, abs=1e-7)


def test_failed_round_trip_is_a_tube_error(monkeypatch):
    monkeypatch.setattr('nodallab.cx.ROUND_TRIP_TOL', -1.0)
    with pytest.raises(TubeChartError) as excinfo:
        complexified_exp(SPHERE, (1.0, 0.5), (0.1, 0.2))
    assert not isinstance(excinfo.value, ArgumentPrincipleError)


def test_tube_function_checks_the_surface():
    with pytest.raises(UnsupportedSurfaceError):
        grauert_rho(SPHERE, CxPoint(TORUS, (0.1, 0.2)))


def test_eval_cx_matches_real_values_and_checks_the_tube():
    fn = EigenFnFactory('sphere', N=3, m=2)
    real = complexified_exp(SPHERE, (1.1, 0.4), (0.0, 0.0))
    assert eval_cx(fn, real) == pytest.approx(complex(fn.value(1.1, 0.4)))
    with pytest.raises(OutsideTubeError):
        eval_cx(fn, complexified_exp(SPHERE, (1.1, 0.4), (1.2, 0.0)))


# ----------------------------------------------------------------------
# Growth
# ----------------------------------------------------------------------


def test_growth_rate_of_a_torus_ray():
    fn = EigenFnFactory('torus', family='torusray', index=8, k=(1, 0))
    z = complexified_exp(TORUS, (0.25, 0.0), (0.2, 0.0))
    rate = growth_rate(fn, z)
    assert rate.rho == pytest.approx(0.2)
    # |φ|² = 2 sinh²(2π·8·0.2) so u = 2√ρ - log 2/λ up to e^{-2b}
    assert rate.deviation == pytest.approx(-math.log(2) / rate.lam, rel=1e-6)
    assert rate.constant == pytest.approx(-math.log(2) / math.log(rate.lam), rel=1e-6)


def test_growth_rate_errors():
    z = complexified_exp(TORUS, (0.25, 0.0), (0.2, 0.0))
    fn = EigenFnFactory('torus', family='torusray', index=8, k=(1, 0))
    with pytest.raises(GrowthBoundError):
        growth_rate(fn, z, envelope=-1.0)
    assert growth_rate(fn, z, envelope=None).u > 0
    with pytest.raises(ValueError):
        constant = EigenFnFactory('sphere', N=0)
        growth_rate(constant, complexified_exp(SPHERE, (1.0, 0.0), (0.1, 0.0)))


# ----------------------------------------------------------------------
# Rectangles
# ----------------------------------------------------------------------


def test_strip_rect_geometry():
    rect = StripRect(0.0, 0.4, -0.1, 0.2, eps=0.3)
    assert rect.diameter == pytest.approx(0.5)
    assert rect.centre == pytest.approx(complex(0.2, 0.05))
    assert rect.corners()[2] == complex(0.4, 0.2)
    assert rect.contains(complex(0.1, 0.0))
    assert not rect.contains(complex(0.5, 0.0))
    grown = rect.expanded(0.2)
    corners = (grown.t0, grown.t1, grown.tau0, grown.tau1)
    assert corners == pytest.approx((-0.2, 0.6, -0.3, 0.3))
    children = rect.split()
    assert len(children) == 4
    area = sum((c.t1 - c.t0) * (c.tau1 - c.tau0) for c in children)
    assert area == pytest.approx(0.12)


def test_strip_rect_validation():
    with pytest.raises(ValueError):
        StripRect(0.5, 0.5, -0.1, 0.1)
    with pytest.raises(OutsideTubeError):
        StripRect(0.0, 1.0, -0.1, 0.5, eps=0.4)
    small = StripRect.around(complex(0.3, 0.39), 0.05, eps=0.4)
    assert small.eps == pytest.approx(0.44)


# ----------------------------------------------------------------------
# Counting and locating zeros
# ----------------------------------------------------------------------


@pytest.mark.parametrize(
    'fn,seg',
    [
        (EigenFnFactory('torus', k=(2, 1)), SEG),
        (EigenFnFactory('sphere', N=5, m=2), GeodesicSegment.equator()),
    ],
)
def test_cauchy_riemann_residual(fn, seg):
    rng = np.random.default_rng(2024)
    t = rng.uniform(0.0, seg.length, 100)
    tau = rng.uniform(-0.4, 0.4, 100)
    assert cauchy_riemann_residual(fn, seg, t + 1j * tau) < 1e-8


def test_restriction_needs_matching_surfaces():
    with pytest.raises(UnsupportedSurfaceError):
        GeodesicRestriction(EigenFnFactory('sphere', N=2), SEG)


def test_argument_count_on_the_strip(mode21):
    result = argument_count(GeodesicRestriction(mode21, SEG), STRIP)
    assert result.count == 4
    assert result.winding == pytest.approx(4.0)
    assert result.residual < 0.1


@pytest.mark.parametrize(
    't0,t1,expected', [(0.0, 1.0, 4), (0.1, 0.3, 0), (0.2, 0.6, 2), (0.5, 2.5, 8)]
)
def test_count_matches_closed_form(mode21, t0, t1, expected):
    mode = TorusMode(2, 1)
    assert closed_form_zero_count(mode, SEG, t0, t1) == expected
    assert count_zeros_rect(mode21, SEG, StripRect(t0, t1, -0.1, 0.1)) == expected


def test_count_is_stable_under_boundary_perturbations(mode21):
    # zeros at -0.163 and 1.087 stay outside every perturbed rectangle
    base = np.array([-0.05, 0.98, -0.1, 0.1])
    scale = np.array([1.03, 1.03, 0.2, 0.2])
    rng = np.random.default_rng(11)
    for _ in range(20):
        t0, t1, tau0, tau1 = base + 0.1 * scale * rng.uniform(-1.0, 1.0, 4)
        assert count_zeros_rect(mode21, SEG, StripRect(t0, t1, tau0, tau1)) == 4


def test_boundary_zero_is_nudged(mode21):
    rect = StripRect(0.25 - 0.163, 0.3, -0.1, 0.1)
    with pytest.raises(BoundaryZeroError):
        argument_count(GeodesicRestriction(mode21, SEG), rect)
    assert count_zeros_rect(mode21, SEG, rect) == 1


def test_zero_locations_are_real(mode21):
    zeros = zero_locations(mode21, SEG, STRIP)
    assert zeros.total == 4
    assert not zeros.partial
    assert [point.t for point, _ in zeros.points] == pytest.approx(ZEROS, abs=1e-9)
    assert all(abs(point.tau) < 1e-9 for point, _ in zeros.points)
    assert [m for _, m in zeros.points] == [1, 1, 1, 1]
    assert len(zeros.rows()) == 4


def test_poincare_lelong_count(mode21):
    assert poincare_lelong_count(mode21, SEG, STRIP) == pytest.approx(4.0, abs=0.1)


def test_intersection_density_of_a_horizontal_ray():
    density = intersection_density((1, 0), SEG, [1, 2])
    assert [record.zeros.total for record in density.records] == [2, 4]
    for record in density.records:
        assert record.t_density == pytest.approx(1 / math.pi)
        assert record.near_real_fraction == 1.0
    assert density.expected == pytest.approx(1 / math.pi)
    assert density.ergodic_prediction == pytest.approx(1 / math.pi)
    assert len(density.rows()) == 2


def test_intersection_density_with_a_zero_at_the_basepoint():
    seg = GeodesicSegment.torus_closed(1, 0)
    density = intersection_density((1, 0), seg, [4])
    record = density.records[0]
    assert record.zeros.total == 8
    assert record.t_density == pytest.approx(1 / math.pi)
    ts = sorted(point.t for point, _ in record.zeros.points)
    assert ts[-1] - ts[0] < seg.length - 0.05


def test_intersection_density_of_a_degenerate_pairing():
    seg = GeodesicSegment.torus_closed(0, 1, basepoint=(0.1234, 0.0))
    density = intersection_density((1, 0), seg, [2])
    assert density.expected == 0.0
    assert density.records[0].zeros.total == 0
    assert density.records[0].t_density == 0.0


def test_period_rect_moves_off_a_zero():
    ray = EigenFnFactory('torus', family='torusray', index=4, k=(1, 0))
    seg = GeodesicSegment.torus_closed(1, 0)
    rect = period_rect(GeodesicRestriction(ray, seg), 0.1)
    assert rect.t1 - rect.t0 == pytest.approx(1.0)
    assert 0.0 < rect.t0 < 1.0
    # an edge that already avoids the zeros stays at t0 = 0
    kept = period_rect(GeodesicRestriction(EigenFnFactory('torus', k=(2, 1)), SEG), 0.1)
    assert kept.t0 == 0.0
    with pytest.raises(ValueError):
        open_segment = GeodesicSegment(TORUS, (0.0, 0.0), (1.0, 0.0), 0.5)
        period_rect(GeodesicRestriction(ray, open_segment), 0.1)


def test_vanishing_restriction_is_rejected():
    # Y_3^2 is odd about the equator, so its continuation vanishes on the whole strip
    fn = EigenFnFactory('sphere', N=3, m=2)
    equator = GeodesicSegment.equator()
    rect = StripRect(0.3, 2.0, -0.1, 0.1)
    with pytest.raises(VanishingRestrictionError):
        count_zeros_rect(fn, equator, rect)
    with pytest.raises(VanishingRestrictionError):
        zero_locations(fn, equator, rect)
    with pytest.raises(VanishingRestrictionError):
        poincare_lelong_count(fn, equator, rect)
    with pytest.raises(VanishingRestrictionError):
        period_rect(GeodesicRestriction(fn, equator), 0.1)


def test_intersection_density_is_a_torus_measurement():
    with pytest.raises(UnsupportedSurfaceError):
        intersection_density((1, 0), GeodesicSegment.equator(), [1])
