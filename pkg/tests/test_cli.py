"""Tests for the command-line runner."""

import json

from freezegun import freeze_time
import pytest

from nodallab.cli import (
    EXIT_CONFIG,
    EXIT_FAILED,
    EXIT_OK,
    SUMMARY_FILE,
    build_parser,
    experiment_jobs,
    load_config,
    main,
    run,
    summarize,
    write_result,
)
from nodallab.config import OUT_ENV_VAR, ExperimentConfig
from nodallab.exceptions import ConfigError
from nodallab.experiments import ACCEPTANCE_SUITE, ExperimentResult, at_most


def _args(*argv):
    return build_parser().parse_args(list(argv))


def test_flags_override_the_config_file(tmp_path):
    path = tmp_path / 'lab.conf'
    path.write_text('surface=sphere\nN=6\nm=2\ngrid=64\n', encoding='utf-8')
    config = load_config(_args('nodal', '--config', str(path), '--m', '-3'), environ={})
    assert config['surface'] == 'sphere'
    assert (config['N'], config['m'], config['grid']) == (6, -3, 64)
    assert config['experiment'] == 'nodal'


def test_out_directory_from_environment():
    config = load_config(_args('modes'), environ={OUT_ENV_VAR: '/tmp/lab'})
    assert config['out'] == '/tmp/lab'


@pytest.mark.parametrize(
    'argv',
    [
        ('nodal', '--grid', 'many'),
        ('nodal', '--surface', 'sphere', '--N', '2', '--m', '3'),
        ('kuznecov', '--surface', 'disc'),
        ('restrict-profile', '--surface', 'sphere', '--N', '4'),
    ],
)
def test_invalid_configurations(argv):
    with pytest.raises(ConfigError):
        load_config(_args(*argv), environ={})


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match='cannot read'):
        args = _args('modes', '--config', str(tmp_path / 'absent.conf'))
        load_config(args, environ={})


def test_unknown_subcommand_is_an_argparse_error():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(['transmogrify'])
    assert info.value.code == 2


def test_jobs_per_experiment():
    suite = ExperimentConfig({'experiment': 'all'}, environ={})
    assert len(experiment_jobs(suite)) == len(ACCEPTANCE_SUITE)
    single = ExperimentConfig({'experiment': 'modes'}, environ={})
    assert len(experiment_jobs(single)) == 1


# ----------------------------------------------------------------------
# Artifacts
# ----------------------------------------------------------------------


def test_write_result_respects_formats(tmp_path):
    result = ExperimentResult('demo')
    result.tables['numbers'] = (('n',), [(1,), (2,)])
    result.figures['plot'] = '<svg/>\n'
    result.criteria.append(at_most('d', 'demo', 0, 1))
    written = write_result(tmp_path, result, ('csv', 'json'))
    assert sorted(path.name for path in written) == ['demo.json', 'numbers.csv']
    payload = json.loads((tmp_path / 'demo' / 'demo.json').read_text(encoding='utf-8'))
    assert payload['criteria'][0]['pass'] is True
    assert not (tmp_path / 'demo' / 'plot.svg').exists()


@freeze_time('2026-01-02 03:04:05')
def test_summary_contents():
    config = ExperimentConfig({'experiment': 'modes'}, environ={})
    result = ExperimentResult('demo', criteria=[at_most('d', 'demo', 2, 1)])
    summary = summarize(config, [result], [])
    assert summary['generated_at'] == '2026-01-02T03:04:05+00:00'
    assert summary['experiment'] == 'modes'
    assert summary['pass'] is False
    assert 'surface=torus\n' in summary['config']
    assert summarize(config, [], ['ValueError: boom'])['pass'] is False


async def test_run_writes_artifacts_and_summary(tmp_path):
    config = ExperimentConfig(
        {
            'experiment': 'modes',
            'surface': 'sphere',
            'lambda_max': 0,
            'out': str(tmp_path),
        },
        environ={},
    ).validate()
    assert await run(config) == EXIT_OK
    table = (tmp_path / 'modes' / 'modes.csv').read_text(encoding='utf-8')
    assert table.count('\r\n') == 2
    assert (tmp_path / 'modes' / 'counting.svg').exists()
    summary = json.loads((tmp_path / SUMMARY_FILE).read_text(encoding='utf-8'))
    assert summary['pass'] is True
    assert summary['errors'] == []


async def test_run_raises_config_errors_after_the_summary(tmp_path):
    config = ExperimentConfig(
        {'experiment': 'cx-growth', 'surface': 'sphere', 'N': 0, 'out': str(tmp_path)},
        environ={},
    ).validate()
    with pytest.raises(ConfigError):
        await run(config)
    summary = json.loads((tmp_path / SUMMARY_FILE).read_text(encoding='utf-8'))
    assert summary['pass'] is False
    assert summary['errors'][0].startswith('ConfigError')


# ----------------------------------------------------------------------
# Exit codes
# ----------------------------------------------------------------------


def test_main_exit_codes(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV_VAR, str(tmp_path))
    assert main(['modes', '--surface', 'sphere', '--lambda-max', '3']) == EXIT_OK
    assert (tmp_path / SUMMARY_FILE).exists()
    assert main(['nodal', '--grid', '4']) == EXIT_CONFIG
    assert main(['cx-growth', '--surface', 'sphere', '--N', '0']) == EXIT_CONFIG


def test_main_reports_failures(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV_VAR, str(tmp_path))
    monkeypatch.setattr('nodallab.cli.SUBCOMMAND_RUNNERS', {'modes': _failing_runner})
    assert main(['modes']) == EXIT_FAILED


def _failing_runner(config, workers=1):
    return ExperimentResult('broken', criteria=[at_most('x', 'always fails', 1, 0)])
