"""Tests for the Legendre recurrences."""

import math

import numpy as np
import pytest

from nodallab.legendre import (
    INV_SQRT_4PI,
    d_value,
    laplace_contour_legendre,
    legendre_at_zero,
    legendre_table,
    normalized_legendre,
)


@pytest.mark.parametrize(
    'degree,expected',
    [(0, 1.0), (1, 0.0), (2, -0.5), (3, 0.0), (4, 0.375), (6, -0.3125)],
)
def test_legendre_at_zero(degree, expected):
    assert legendre_at_zero(degree) == pytest.approx(expected, abs=1e-15)


def test_legendre_table_matches_numpy():
    x = np.linspace(-1.0, 1.0, 11)
    table, slopes = legendre_table(6, x, derivative=True)
    for degree in range(7):
        coefficients = np.zeros(degree + 1)
        coefficients[-1] = 1.0
        series = np.polynomial.legendre.Legendre(coefficients)
        assert np.allclose(table[degree], series(x), atol=1e-13)
        assert np.allclose(slopes[degree], series.deriv()(x), atol=1e-12)
    assert table[3][8] == pytest.approx((5 * 0.6**3 - 3 * 0.6) / 2)


def test_constant_harmonic():
    assert normalized_legendre(0, 0, 0.7) == pytest.approx(INV_SQRT_4PI)


@pytest.mark.parametrize('degree,m', [(0, 0), (3, 1), (5, 2), (8, 8), (12, 5)])
def test_normalization(degree, m):
    x, w = np.polynomial.legendre.leggauss(40)
    values = normalized_legendre(degree, m, np.arccos(x))
    assert np.sum(w * values**2) == pytest.approx(1 / (2 * math.pi), rel=1e-12)


def test_orthogonality_in_degree():
    x, w = np.polynomial.legendre.leggauss(40)
    phi = np.arccos(x)
    product = normalized_legendre(4, 2, phi) * normalized_legendre(6, 2, phi)
    assert abs(np.sum(w * product)) < 1e-14


@pytest.mark.parametrize('degree,m', [(2, 0), (3, 1), (4, 2), (7, 3)])
def test_contour_integral_agrees_with_recurrence(degree, m):
    phi = np.linspace(0.1, 3.0, 9)
    assert np.allclose(
        laplace_contour_legendre(degree, m, phi),
        normalized_legendre(degree, m, phi),
        atol=1e-12,
    )


def test_contour_integral_needs_enough_nodes():
    with pytest.raises(ValueError):
        laplace_contour_legendre(10, 4, 0.5, nodes=14)


def test_slope_matches_difference_quotient():
    x, h = 0.3, 1e-6
    _, slope = d_value(5, 2, x, derivative=True)
    quotient = (d_value(5, 2, x + h) - d_value(5, 2, x - h)) / (2 * h)
    assert slope == pytest.approx(quotient, rel=1e-6)


def test_complex_argument():
    z = np.array([0.5 + 0.5j, 2.0j])
    values = d_value(3, 0, z)
    assert values.dtype.kind == 'c'
    plain = np.polynomial.legendre.legval(z, [0, 0, 0, 1])
    assert np.allclose(values, math.sqrt(7 / (4 * math.pi)) * plain)


def test_bad_order():
    with pytest.raises(ValueError):
        d_value(2, 3, 0.1)
