"""Tests for restrictions to geodesics, Kuznecov sums and equator mode weights."""

import math

import numpy as np
import pytest

from nodallab.exceptions import (
    AliasingError,
    TruncationError,
    UnsupportedSurfaceError,
    VanishingRestrictionError,
)
from nodallab.factory import EigenFnFactory
from nodallab.geom import TORUS, GeodesicSegment
from nodallab.restrict import (
    arc_samples,
    density_one_fraction,
    kuznecov_sum,
    orbital_fourier,
    qer_mode_profile,
    restrict_eigenfn,
    sample_count,
    sign_changes,
)

HORIZONTAL = GeodesicSegment.torus_closed(1, 0, basepoint=(0.01, 0.3))


@pytest.mark.parametrize(
    'lam,length,expected', [(2 * math.pi, 1.0, 64), (100.0, 2 * math.pi, 1024)]
)
def test_sample_count(lam, length, expected):
    assert sample_count(lam, length) == expected


def test_arc_samples():
    closed = GeodesicSegment.torus_closed(1, 0)
    assert arc_samples(closed, 4).tolist() == [0.0, 0.25, 0.5, 0.75]
    open_segment = GeodesicSegment(TORUS, (0.0, 0.0), (1.0, 0.0), 0.5)
    assert arc_samples(open_segment, 3).tolist() == [0.0, 0.25, 0.5]


def test_restriction_samples():
    fn = EigenFnFactory('torus', k=(1, 0))
    r = restrict_eigenfn(fn, GeodesicSegment.torus_closed(1, 0))
    assert r.count == 64
    assert r.bandwidth == pytest.approx(1.0)
    expected = math.sqrt(2) * np.sin(2 * math.pi * r.t)
    assert r.samples == pytest.approx(expected, abs=1e-12)


def test_restriction_needs_a_geodesic_of_the_same_surface():
    with pytest.raises(UnsupportedSurfaceError):
        restrict_eigenfn(EigenFnFactory('sphere', N=2), HORIZONTAL)


# ----------------------------------------------------------------------
# Fourier coefficients and sign changes
# ----------------------------------------------------------------------


def test_orbital_fourier_of_a_torus_sine():
    fn = EigenFnFactory('torus', k=(1, 0))
    restricted = restrict_eigenfn(fn, GeodesicSegment.torus_closed(1, 0))
    freqs, coefficients = orbital_fourier(restricted)
    by_frequency = dict(zip(freqs.tolist(), coefficients))
    assert by_frequency[1] == pytest.approx(-1j * math.sqrt(2) / 2)
    assert by_frequency[-1] == pytest.approx(1j * math.sqrt(2) / 2)
    assert float(np.sum(np.abs(coefficients) ** 2)) == pytest.approx(1.0)


def test_orbital_fourier_errors():
    fn = EigenFnFactory('torus', k=(1, 0))
    with pytest.raises(AliasingError):
        coarse = restrict_eigenfn(fn, GeodesicSegment.torus_closed(1, 0), count=2)
        orbital_fourier(coarse)
    open_segment = GeodesicSegment(TORUS, (0.0, 0.0), (1.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        orbital_fourier(restrict_eigenfn(fn, open_segment))


@pytest.mark.parametrize(
    'surface,selectors,seg,expected',
    [
        ('torus', {'k': (3, 0)}, HORIZONTAL, 6),
        ('torus', {'k': (0, 1)}, GeodesicSegment.torus_closed(0, 1), 2),
        ('sphere', {'N': 3, 'm': 3}, GeodesicSegment.equator(), 6),
        ('sphere', {'N': 2}, GeodesicSegment.meridian(0.2), 4),
    ],
)
def test_sign_changes(surface, selectors, seg, expected):
    r = restrict_eigenfn(EigenFnFactory(surface, **selectors), seg)
    assert sign_changes(r) == expected


@pytest.mark.parametrize('k', [(1, 0), (2, 0), (3, 1)])
def test_sign_changes_on_a_closed_curve_are_even(k):
    r = restrict_eigenfn(EigenFnFactory('torus', k=k, parity='cos'), HORIZONTAL)
    assert sign_changes(r) % 2 == 0


def test_sign_changes_on_an_open_segment():
    open_segment = GeodesicSegment(TORUS, (0.01, 0.3), (1.0, 0.0), 0.5)
    r = restrict_eigenfn(EigenFnFactory('torus', k=(1, 0)), open_segment)
    assert sign_changes(r) == 1


def test_vanishing_restriction():
    r = restrict_eigenfn(EigenFnFactory('sphere', N=3), GeodesicSegment.equator())
    with pytest.raises(VanishingRestrictionError):
        sign_changes(r)


def test_sign_changes_need_real_samples():
    fn = EigenFnFactory('sphere', family='highestweight', index=3)
    with pytest.raises(ValueError):
        sign_changes(restrict_eigenfn(fn, GeodesicSegment.equator()))


# ----------------------------------------------------------------------
# Kuznecov sums
# ----------------------------------------------------------------------


def test_equator_clusters_match_legendre_values():
    result = kuznecov_sum(GeodesicSegment.equator(), lam=10.0)
    assert result.lams.size == 10
    assert result.clusters[0] == pytest.approx(math.pi)
    assert result.clusters[2] == pytest.approx(5 * math.pi / 4)
    assert np.allclose(result.clusters[1::2], 0.0, atol=1e-12)
    assert result.oracle_deviation < 1e-9
    assert result.kernel_deviation < 1e-9
    assert result.period_lams.size == result.periods.size == 100
    assert np.all(np.diff(result.partial) >= -1e-12)
    assert len(result.rows()) == 10


def test_torus_clusters_along_a_horizontal_circle():
    seg = GeodesicSegment.torus_closed(1, 0, basepoint=(0.0, 0.1))
    result = kuznecov_sum(seg, lam=10.0)
    assert result.lams == pytest.approx([0.0, 2 * math.pi, 2 * math.pi * math.sqrt(2)])
    assert result.clusters == pytest.approx([1.0, 2.0, 0.0], abs=1e-12)
    assert result.kernel_deviation < 1e-12
    assert result.oracle is None
    assert math.isnan(result.oracle_deviation)


def test_weighted_kuznecov_sum_on_the_torus():
    seg = GeodesicSegment.torus_closed(1, 0, basepoint=(0.0, 0.1))
    result = kuznecov_sum(seg, f=lambda t: np.cos(2 * math.pi * t), lam=7.0)
    # only the (1, 0) pair sees the weight: |∫ cos(2πt) √2 cos(2πt) dt|² = 1/2
    assert result.clusters == pytest.approx([0.0, 0.5], abs=1e-12)
    assert result.kernel_deviation < 1e-12


def test_normal_derivative_periods_on_the_equator():
    result = kuznecov_sum(GeodesicSegment.equator(), lam=10.0, normal_derivative=True)
    assert result.normal_derivative
    assert result.kernel is None
    assert math.isnan(result.kernel_deviation)
    # even degrees have vanishing normal derivative along the equator
    assert np.allclose(result.clusters[0::2], 0.0, atol=1e-12)
    assert result.clusters[1] > 0


@pytest.mark.parametrize(
    'kwargs,error',
    [
        ({'lam': 0.0}, ValueError),
        ({'lam': 10.0, 'basis_bound': 5.0}, TruncationError),
    ],
)
def test_kuznecov_argument_errors(kwargs, error):
    with pytest.raises(error):
        kuznecov_sum(GeodesicSegment.equator(), **kwargs)


def test_kuznecov_geometry_errors():
    open_segment = GeodesicSegment(TORUS, (0.0, 0.0), (1.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        kuznecov_sum(open_segment)
    with pytest.raises(UnsupportedSurfaceError):
        kuznecov_sum(HORIZONTAL, normal_derivative=True)
    with pytest.raises(UnsupportedSurfaceError):
        kuznecov_sum(GeodesicSegment.meridian(), normal_derivative=True)


def test_density_one_fraction():
    result = kuznecov_sum(GeodesicSegment.equator(), lam=10.0)
    fraction = density_one_fraction(result, 2.0, 10.0)
    assert 0.0 <= fraction <= 1.0
    with pytest.raises(ValueError):
        density_one_fraction(result, 100.0, 200.0)


# ----------------------------------------------------------------------
# Equator mode weights
# ----------------------------------------------------------------------


def test_mode_profile_weights():
    profile = qer_mode_profile(8)
    assert profile.orders.tolist() == list(range(-8, 9))
    # addition theorem: Σ_m |Y_N^m|² = (2N + 1)/4π at every point
    assert float(np.sum(profile.values)) == pytest.approx(17 / (4 * math.pi))
    # and Σ_m |∂_φ Y_N^m|² = λ²(2N + 1)/8π on the equator
    slopes = profile.partners * (72 - profile.orders**2)
    assert float(np.sum(slopes)) == pytest.approx(72 * 17 / (8 * math.pi))
    assert float(np.sum(profile.weights)) == pytest.approx(1.0)
    assert float(np.sum(profile.arcsine)) == pytest.approx(1.0)
    assert np.allclose(profile.values[1::2], 0.0, atol=1e-15)
    assert np.allclose(profile.partners[0::2], 0.0, atol=1e-15)
    assert np.all(profile.values[0::2] > 0.0)
    assert np.all(profile.partners[1::2] > 0.0)
    assert np.all(profile.raw > 0.0)
    assert profile.weights == pytest.approx(profile.weights[::-1])
    assert 0.0 <= profile.cdf_distance <= 1.0
    assert len(profile.rows()) == 17


def test_mode_profile_approaches_arcsine():
    assert qer_mode_profile(256).cdf_distance <= 0.05


def test_mode_profile_needs_degree_eight():
    with pytest.raises(ValueError):
        qer_mode_profile(7)
