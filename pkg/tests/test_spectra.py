"""Tests for the spectra, Weyl counts and spectral kernels."""

import math
import warnings

import numpy as np
import pytest

from nodallab.exceptions import SpectrumError, TruncationError
from nodallab.factory import EigenFnFactory
from nodallab.geom import DISC, SPHERE, TORUS, quadrature_grid
from nodallab.modes import DiscMode, SphereMode, TorusConstant
from nodallab.spectra import (
    MODE_COLUMNS,
    _bump_integral,
    POISSON_CONSTANT,
    SpectralFilter,
    apply_rho_filter,
    enumerate_modes,
    evaluate,
    fit_exponent,
    frequencies,
    gradient,
    mode_rows,
    poisson_constant_estimate,
    poisson_kernel_sphere,
    projection_kernel_sphere,
    rho_kernel_gradient_sup,
    spectrum_with_multiplicity,
    weyl_count,
    weyl_remainder_exponent,
    window_projector_diagonal,
)

# ----------------------------------------------------------------------
# Enumeration
# ----------------------------------------------------------------------


def test_sphere_modes_up_to_two():
    modes = enumerate_modes(SPHERE, 2.0)
    assert len(modes) == 4
    assert modes[0] == SphereMode(0, 0)
    assert frequencies(SPHERE, 2.0) == pytest.approx([0.0] + [math.sqrt(2)] * 3)


def test_torus_modes_up_to_two_pi():
    modes = enumerate_modes(TORUS, 2 * math.pi)
    assert len(modes) == 5
    assert modes[0] == TorusConstant()
    assert {(mode.k1, mode.k2, mode.parity) for mode in modes[1:]} == {
        (1, 0, 'sin'),
        (1, 0, 'cos'),
        (0, 1, 'sin'),
        (0, 1, 'cos'),
    }


def test_disc_dirichlet_modes_up_to_three():
    modes = enumerate_modes(DISC, 3.0)
    assert modes == [DiscMode('dirichlet', 0, 1)]
    assert modes[0].frequency == pytest.approx(2.404825558, abs=1e-9)


def test_disc_neumann_modes_up_to_two():
    modes = enumerate_modes(DISC, 2.0, bc='neumann')
    assert [mode.frequency for mode in modes] == pytest.approx(
        [0.0, 1.841183781340659, 1.841183781340659]
    )
    assert {mode.parity for mode in modes[1:]} == {'sin', 'cos'}


@pytest.mark.parametrize('degree', [1, 3, 5, 8])
def test_sphere_cumulative_count(degree):
    lam = math.sqrt(degree * (degree + 1)) + 1e-9
    assert len(enumerate_modes(SPHERE, lam)) == (degree + 1) ** 2


def test_disc_modes_sorted_and_complete():
    modes = enumerate_modes(DISC, 12.0)
    lams = [mode.frequency for mode in modes]
    assert lams == sorted(lams)
    # zeros of J0 below 12: 2.405, 5.520, 8.654, 11.79
    assert len([mode for mode in modes if mode.m == 0]) == 4
    assert all(lam <= 12.0 for lam in lams)


def test_enumerate_rejects_negative_bound():
    with pytest.raises(ValueError):
        enumerate_modes(TORUS, -1.0)


def test_mode_rows():
    rows = mode_rows(TORUS, enumerate_modes(TORUS, 2 * math.pi))
    assert len(rows[0]) == len(MODE_COLUMNS)
    assert rows[0] == ('torus', 'constant', '0', '0', '', '', '', '', '0', '0')
    assert rows[1][-1] == f"{4 * math.pi ** 2:.12g}"


# ----------------------------------------------------------------------
# Evaluation
# ----------------------------------------------------------------------


@pytest.mark.parametrize(
    'surface,selectors,point,expected',
    [
        ('sphere', {'N': 0}, (1.0, 2.0), 0.2820947918),
        ('sphere', {'N': 2}, (math.pi / 2, 0.3), -0.5 * math.sqrt(5 / (4 * math.pi))),
        ('torus', {'k': (1, 0)}, (0.25, 0.0), math.sqrt(2)),
        ('torus', {'k': (1, 0)}, (1.25, 3.0), math.sqrt(2)),
    ],
)
def test_evaluate(surface, selectors, point, expected):
    fn = EigenFnFactory(surface, **selectors)
    assert evaluate(fn, point) == pytest.approx(expected, abs=1e-10)


def test_gradient_is_analytic():
    fn = EigenFnFactory('torus', k=(1, 0))
    assert gradient(fn, (0.0, 0.5)) == pytest.approx([2 * math.pi * math.sqrt(2), 0.0])
    values = gradient(fn, (np.array([0.0, 0.25]), np.array([0.0, 0.0])))
    assert values.shape == (2, 2)


# ----------------------------------------------------------------------
# Weyl law
# ----------------------------------------------------------------------


def test_weyl_count_torus():
    count = weyl_count(TORUS, 2 * math.pi)
    assert count.count == 5
    assert count.main_term == pytest.approx(math.pi)
    assert count.remainder == pytest.approx(1.858, abs=1e-3)


def test_weyl_count_needs_positive_lambda():
    with pytest.raises(ValueError):
        weyl_count(SPHERE, 0.0)


@pytest.mark.parametrize('surface', [TORUS, SPHERE])
def test_weyl_remainder_exponent(surface):
    fit = weyl_remainder_exponent(surface, 10.0, 150.0)
    assert fit.exponent <= 1.1
    assert fit.lams.size == 40


def test_fit_exponent_power_law():
    lams = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_exponent(lams, 3.0 * lams**1.5)
    assert fit.exponent == pytest.approx(1.5)
    assert fit.intercept == pytest.approx(math.log(3.0))
    with pytest.raises(ValueError):
        fit_exponent(lams, np.array([1.0, 0.0, 1.0, 1.0]))


# ----------------------------------------------------------------------
# Kernels
# ----------------------------------------------------------------------


def test_projection_kernel_cross_check():
    x, y = (math.pi / 2, 0.0), (math.pi / 2, math.pi / 3)
    kernel = projection_kernel_sphere(10, x, y)
    assert kernel.discrepancy <= 1e-12
    p10 = np.polynomial.legendre.legval(0.5, [0] * 10 + [1])
    assert kernel.value == pytest.approx(21 / (4 * math.pi) * p10, abs=1e-12)


@pytest.mark.parametrize('degree', [0, 1, 4, 9])
def test_projection_kernel_diagonal(degree):
    x = (0.7, 2.1)
    kernel = projection_kernel_sphere(degree, x, x)
    assert kernel.value == pytest.approx((2 * degree + 1) / (4 * math.pi))
    assert kernel.check == pytest.approx(kernel.value, abs=1e-12)


def test_poisson_kernel_sum_matches_closed_form():
    closed, summed = poisson_kernel_sphere(1.0, math.pi / 2, n_max=200)
    assert float(summed) == pytest.approx(float(closed), abs=1e-10)
    closed, summed = poisson_kernel_sphere(1.0, np.linspace(0, math.pi, 7))
    assert summed is None and closed.shape == (7,)


def test_poisson_kernel_integrates_to_ground_state():
    t = 1.0
    grid = quadrature_grid(SPHERE, 64)
    closed, _ = poisson_kernel_sphere(t, grid.u)
    total = float(np.sum(grid.weights * closed[:, None]))
    assert total == pytest.approx(math.exp(-t / 2), rel=1e-10)


def test_poisson_kernel_large_time():
    t = 30.0
    closed, _ = poisson_kernel_sphere(t, 0.0)
    assert float(closed) == pytest.approx(math.exp(-t / 2) / (4 * math.pi), rel=1e-6)


def test_poisson_constant():
    assert poisson_constant_estimate(2.0) == pytest.approx(POISSON_CONSTANT, rel=1e-10)
    with pytest.raises(ValueError):
        poisson_kernel_sphere(0.0, 1.0)


# ----------------------------------------------------------------------
# Spectral filter
# ----------------------------------------------------------------------


def test_filter_normalization():
    filt = SpectralFilter(1.0)
    assert filt.total_mass() == pytest.approx(1.0, abs=1e-10)
    assert float(filt.rho(0.0)) == pytest.approx(1.0, abs=1e-10)
    assert filt.rho(np.array([-3.0, 3.0])) == pytest.approx([filt.rho(3.0)] * 2)
    assert filt.rho_hat(np.array([0.2, 1.2])) == pytest.approx([0.0, 0.0])
    with pytest.raises(ValueError):
        SpectralFilter(0.0)


def test_bump_integral_is_computed_once_without_warnings():
    _bump_integral.cache_clear()
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        value = _bump_integral()
        SpectralFilter(1.0).rho(0.5)
    assert value > 0.0
    assert _bump_integral() == value
    assert _bump_integral.cache_info().misses == 1


def test_filter_reproduces_eigenfunction():
    fn = EigenFnFactory('sphere', N=3, m=1)
    filt = SpectralFilter(1.0)
    result = apply_rho_filter(filt, fn.frequency, fn, cutoff=fn.frequency + 20.0)
    assert result.error <= 1e-6
    assert result.tail_bound >= 0.0
    point = (0.9, 0.4)
    assert evaluate(result.value, point) == pytest.approx(evaluate(fn, point), abs=1e-6)


def test_filter_cutoff_too_small():
    fn = EigenFnFactory('sphere', N=3)
    with pytest.raises(TruncationError):
        apply_rho_filter(
            SpectralFilter(1.0), fn.frequency, fn, cutoff=fn.frequency + 1.0
        )


def test_filter_kernel_needs_surface():
    with pytest.raises(ValueError):
        points = ((0.1, 0.2), (0.3, 0.4))
        apply_rho_filter(SpectralFilter(1.0), 5.0, points, cutoff=40.0)


def test_torus_filter_kernel_is_symmetric():
    filt = SpectralFilter(1.0)
    x, y = (0.1, 0.2), (0.35, 0.9)
    forward = apply_rho_filter(filt, 20.0, (x, y), surface=TORUS, cutoff=60.0)
    backward = apply_rho_filter(filt, 20.0, (y, x), surface=TORUS, cutoff=60.0)
    assert forward.value == pytest.approx(backward.value, abs=1e-12)
    assert forward.error == 0.0


def test_kernel_gradient_sup_shape():
    sups = rho_kernel_gradient_sup(SpectralFilter(1.0), [20.0, 40.0], samples=200)
    assert sups.shape == (2,)
    assert np.all(sups > 0)


def test_spectrum_with_multiplicity():
    freqs, mult = spectrum_with_multiplicity(TORUS, 2 * math.pi)
    assert freqs == pytest.approx([0.0, 2 * math.pi])
    assert list(mult) == [1, 4]
    freqs, mult = spectrum_with_multiplicity(SPHERE, 3.5)
    assert list(mult) == [1, 3, 5, 7]


def test_window_projector_diagonal():
    assert window_projector_diagonal(SPHERE, 3.0) == pytest.approx(7 / (4 * math.pi))
    assert window_projector_diagonal(TORUS, 2 * math.pi - 0.1) == 4.0
    with pytest.raises(SpectrumError):
        window_projector_diagonal(DISC, 3.0)
    assert window_projector_diagonal(DISC, 2.0, point=(0.0, 0.0)) == pytest.approx(
        float(DiscMode('dirichlet', 0, 1).value(0.0, 0.0)) ** 2
    )
