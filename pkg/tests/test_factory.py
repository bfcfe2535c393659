"""Tests for the eigenfunction factory."""

import math

import pytest

from nodallab.factory import EigenFnFactory, highest_weight, torus_combination
from nodallab.geom import SPHERE
from nodallab.modes import DiscMode, EigenFn, SphereMode, TorusConstant, TorusMode


@pytest.mark.parametrize(
    'surface,selectors,expected_mode,coef',
    [
        ('torus', {'k': (1, 0)}, TorusMode(1, 0, 'sin'), 1.0),
        ('torus', {'k': (-2, 1)}, TorusMode(2, -1, 'sin'), -1.0),
        ('torus', {'k': (0, 3), 'parity': 'cos'}, TorusMode(0, 3, 'cos'), 1.0),
        ('torus', {}, TorusConstant(), 1.0),
        ('sphere', {'N': 3, 'm': -2}, SphereMode(3, -2), 1.0),
        (SPHERE, {'N': 5}, SphereMode(5, 0), 1.0),
        ('disc', {}, DiscMode('dirichlet', 0, 1), 1.0),
        ('disc', {'bc': 'neumann', 'm': 2, 'n': 1}, DiscMode('neumann', 2, 1), 1.0),
    ],
)
def test_factory_single_modes(surface, selectors, expected_mode, coef):
    fn = EigenFnFactory(surface, **selectors)
    assert isinstance(fn, EigenFn)
    assert fn.modes == ((expected_mode, coef),)


def test_factory_disc_kappa():
    fn = EigenFnFactory('disc', bc='neumann', m=2, n=1)
    assert fn.frequency == pytest.approx(3.054236928227140, abs=1e-10)


@pytest.mark.parametrize(
    'family,index,k,expected_mode,coef',
    [
        ('zonal', 5, None, SphereMode(5, 0), 1.0),
        ('torusray', 3, (1, 2), TorusMode(3, 6, 'sin'), 1.0),
        ('torusray', 2, None, TorusMode(2, 0, 'sin'), 1.0),
        ('torusray', 1, (-1, 1), TorusMode(1, -1, 'sin'), -1.0),
        ('discradial', 2, None, DiscMode('dirichlet', 0, 2), 1.0),
    ],
)
def test_factory_families(family, index, k, expected_mode, coef):
    fn = EigenFnFactory('sphere', family=family, index=index, k=k)
    assert fn.modes == ((expected_mode, coef),)


@pytest.mark.parametrize('family', ['highestweight', 'gaussianbeam'])
def test_factory_beam_family(family):
    fn = EigenFnFactory('sphere', family=family, index=4)
    assert not fn.is_real
    assert fn.eigenvalue == pytest.approx(20.0)


def test_factory_unknown_family():
    with pytest.raises(ValueError):
        EigenFnFactory('sphere', family='random', index=3)


def test_highest_weight_degree_zero_is_constant():
    assert highest_weight(0).modes == ((SphereMode(0, 0), 1.0),)


def test_torus_combination():
    fn = torus_combination(
        [((1, 0), 'cos', 1 / math.sqrt(2)), ((0, -1), 'cos', 1 / math.sqrt(2))]
    )
    assert fn.normalized
    assert fn.value(0.0, 0.0) == pytest.approx(2.0)
