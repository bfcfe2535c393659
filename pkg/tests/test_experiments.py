"""Tests for the experiment runners and acceptance helpers."""

import math

import pytest

from nodallab.config import ExperimentConfig
from nodallab.experiments import (
    ACCEPTANCE_SUITE,
    SUBCOMMAND_RUNNERS,
    Criterion,
    ExperimentResult,
    at_most,
    eigenfn_from_config,
    first_disc_modes,
    geodesic_for,
    run_boundary_count,
    run_cx_growth,
    run_cx_zeros,
    run_domains,
    run_kuznecov,
    run_modes,
    run_restrict_profile,
    within,
)
from nodallab.exceptions import ConfigError
from nodallab.geom import SPHERE, TORUS


def _config(**values):
    return ExperimentConfig(values, environ={})


def _criteria(result):
    return {criterion.ident: criterion for criterion in result.criteria}


@pytest.mark.parametrize(
    'measured,expected,tolerance,passed',
    [
        (1.0, 1.0, 0.0, True),
        (1.05, 1.0, 0.1, True),
        (1.2, 1.0, 0.1, False),
        (math.nan, 1.0, 10.0, False),
    ],
)
def test_within(measured, expected, tolerance, passed):
    assert within('x', 'demo', measured, expected, tolerance).passed is passed


def test_at_most_and_as_dict():
    criterion = at_most('13', 'mismatches', 0, 0)
    assert criterion.passed
    assert criterion.as_dict() == {
        'criterion': '13',
        'description': 'mismatches',
        'measured': 0.0,
        'expected': 0.0,
        'tolerance': 0.0,
        'pass': True,
    }
    assert not at_most('13', 'mismatches', math.inf, 1).passed


def test_result_passes_only_when_every_criterion_does():
    result = ExperimentResult('demo')
    assert result.passed
    result.criteria.append(Criterion('a', '', 1.0, 0.0, 0.0, False))
    assert not result.passed


def test_every_subcommand_has_a_runner():
    assert set(SUBCOMMAND_RUNNERS) == {
        'modes',
        'weyl',
        'nodal',
        'domains',
        'identity',
        'norms',
        'kuznecov',
        'restrict-profile',
        'cx-growth',
        'cx-zeros',
        'boundary-count',
        'calibrate-smallball',
    }
    assert len(ACCEPTANCE_SUITE) == 14


def test_eigenfn_and_geodesic_from_config():
    fn = eigenfn_from_config(_config(surface='sphere', N=3, m=-2))
    assert fn.surface == SPHERE
    assert fn.eigenvalue == pytest.approx(12.0)
    assert geodesic_for(SPHERE).closed
    assert geodesic_for(TORUS, (0, 1)).length == pytest.approx(1.0)


def test_first_disc_modes_are_sorted():
    modes = first_disc_modes(10)
    assert len(modes) == 10
    eigenvalues = [mode.eigenvalue for mode in modes]
    assert eigenvalues == sorted(eigenvalues)


# ----------------------------------------------------------------------
# Subcommand runners
# ----------------------------------------------------------------------


def test_run_modes_with_only_the_constant():
    result = run_modes(_config(surface='sphere', lambda_max=0))
    header, rows = result.tables['modes']
    assert len(rows) == 1
    assert result.records['count'] == 1
    assert result.figures['counting'].startswith('<svg')


def test_run_domains_records_the_euler_graph():
    result = run_domains(_config(surface='torus', k=(1, 0), grid=64))
    assert result.records['domain_count'] == 2
    euler = result.records['euler_graph']
    assert euler['parity'] == 'even'
    assert euler['bound'] == 2
    criteria = _criteria(result)
    assert criteria['domains.euler'].passed
    assert 'domains.faber-krahn' in criteria


def test_run_domains_skips_the_euler_graph_without_symmetry():
    result = run_domains(_config(surface='disc', m=1, n=1, grid=64))
    assert 'euler_graph' not in result.records
    assert 'domains.euler' not in _criteria(result)


def test_run_kuznecov_on_the_sphere():
    result = run_kuznecov(_config(surface='sphere', lambda_max=10))
    assert result.records['surface'] == 'sphere'
    assert result.records['oracle_deviation'] < 1e-9
    assert len(result.tables['kuznecov'][1]) == 10


def test_run_restrict_profile():
    result = run_restrict_profile(_config(surface='sphere', N=8, m=2))
    assert result.records['degree'] == 8
    assert result.records['sign_changes'] == 4
    _, rows = result.tables['fourier']
    assert sorted(abs(float(row[0])) for row in rows) == [2.0, 2.0]
    assert len(result.tables['profile'][1]) == 17


def test_run_cx_zeros_matches_the_closed_form():
    result = run_cx_zeros(_config(surface='torus', k=(2, 1), strip_eps=0.1))
    assert result.records['total'] == 4
    assert result.records['vanishing'] is False
    assert not result.records['partial']
    assert result.records['current_mass'] == pytest.approx(4.0, abs=0.1)
    assert _criteria(result)['cx-zeros.count'].passed


def test_run_cx_zeros_on_a_vanishing_restriction():
    # Y_3^2 is odd across the equator
    result = run_cx_zeros(_config(surface='sphere', N=3, m=2, strip_eps=0.1))
    assert result.records['vanishing'] is True
    assert 'total' not in result.records
    assert 'zeros' not in result.tables
    assert not result.criteria


def test_run_cx_growth_stays_under_the_envelope():
    result = run_cx_growth(_config(surface='torus', k=(1, 0), eps=0.4))
    assert result.records['lam'] == pytest.approx(2 * math.pi)
    assert _criteria(result)['cx-growth.bound'].passed
    assert len(result.tables['growth'][1]) == 96 * 33


def test_run_cx_growth_needs_a_frequency_above_one():
    with pytest.raises(ConfigError):
        run_cx_growth(_config(surface='sphere', N=0))


def test_run_boundary_count():
    result = run_boundary_count(_config(surface='disc', bc='neumann', lambda_max=10))
    assert result.records['modes'] == len(result.tables['boundary'][1])
    assert result.passed
