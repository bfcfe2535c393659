"""Command-line runner: nodallab <subcommand> [flags]."""

import argparse
import asyncio
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from functools import partial
import logging
from pathlib import Path
import sys
from typing import List, Optional

from .config import SUBCOMMANDS, ExperimentConfig
from .exceptions import ConfigError, NodalLabException
from .experiments import ACCEPTANCE_SUITE, SUBCOMMAND_RUNNERS, ExperimentResult
from .export import write_csv, write_json, write_svg

_LOGGER = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

SUMMARY_FILE = 'summary.json'

# flag -> configuration key
FLAGS = {
    '--surface': 'surface',
    '--k': 'k',
    '--N': 'N',
    '--m': 'm',
    '--n': 'n',
    '--bc': 'bc',
    '--parity': 'parity',
    '--grid': 'grid',
    '--lambda-max': 'lambda_max',
    '--eps': 'eps',
    '--strip-eps': 'strip_eps',
    '--filter-eps': 'filter_eps',
    '--out': 'out',
    '--format': 'format',
    '--threads': 'threads',
    '--seed': 'seed',
    '--trials': 'trials',
    '--A': 'A',
    '--M': 'M',
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='nodallab',
        description=(
            "Reproduce spectral-geometry experiments as CSV, JSON and SVG artifacts."
        ),
    )
    parser.add_argument('experiment', choices=SUBCOMMANDS)
    parser.add_argument('--config', type=Path, help="flat key=value configuration file")
    for flag, key in FLAGS.items():
        # values stay text; ExperimentConfig coerces and range-checks them
        parser.add_argument(flag, dest=key, default=None, metavar=key.upper())
    parser.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    return parser


def load_config(args: argparse.Namespace, environ=None) -> ExperimentConfig:
    """Defaults < --config file < flags, validated."""
    text = ''
    if args.config is not None:
        try:
            text = args.config.read_text(encoding='utf-8')
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc}") from exc
    config = ExperimentConfig.from_text(text, environ=environ)
    config.update_from_flags({key: getattr(args, key) for key in FLAGS.values()})
    config['experiment'] = args.experiment
    return config.validate()


def experiment_jobs(config: ExperimentConfig):
    """Callables for the executor, one per experiment or acceptance criterion."""
    if config['experiment'] == 'all':
        return [partial(accept, config) for accept in ACCEPTANCE_SUITE]
    runner = SUBCOMMAND_RUNNERS[config['experiment']]
    return [partial(runner, config, workers=config['threads'])]


def write_result(out: Path, result: ExperimentResult, formats) -> List[Path]:
    folder = out / result.name
    written = []
    if 'csv' in formats:
        for name, (header, rows) in sorted(result.tables.items()):
            written.append(write_csv(folder / f"{name}.csv", header, rows))
    if 'svg' in formats:
        for name, text in sorted(result.figures.items()):
            written.append(write_svg(folder / f"{name}.svg", text))
    if 'json' in formats:
        payload = {
            'records': result.records,
            'criteria': [criterion.as_dict() for criterion in result.criteria],
        }
        written.append(write_json(folder / f"{result.name}.json", payload))
    return written


def summarize(config: ExperimentConfig, results, errors) -> dict:
    criteria = [
        criterion.as_dict() for result in results for criterion in result.criteria
    ]
    return {
        'experiment': config['experiment'],
        'generated_at': datetime.now(timezone.utc).isoformat(),
        'config': config.serialize(),
        'criteria': criteria,
        'errors': errors,
        'pass': not errors and all(item['pass'] for item in criteria),
    }


async def run(config: ExperimentConfig) -> int:
    """Run the configured experiments, write their artifacts, return the exit code."""
    threads = config['threads']
    out = Path(config['out'])
    semaphore = asyncio.Semaphore(threads)
    loop = asyncio.get_running_loop()

    with ThreadPoolExecutor(max_workers=threads) as pool:

        async def run_one(job):
            async with semaphore:
                result = await loop.run_in_executor(pool, job)
            # written from the event loop thread, one result at a time
            write_result(out, result, config['format'])
            _LOGGER.info("Finished %s", result.name)
            return result

        outcomes = await asyncio.gather(
            *(run_one(job) for job in experiment_jobs(config)), return_exceptions=True
        )

    results = [item for item in outcomes if isinstance(item, ExperimentResult)]
    failures = [item for item in outcomes if isinstance(item, BaseException)]
    errors = [f"{type(exc).__name__}: {exc}" for exc in failures]
    summary = summarize(config, results, errors)
    write_json(out / SUMMARY_FILE, summary)

    config_errors = [exc for exc in failures if isinstance(exc, ConfigError)]
    if config_errors:
        raise config_errors[0]
    for exc in failures:
        if not isinstance(exc, NodalLabException):
            _LOGGER.error("Experiment crashed", exc_info=exc)
        else:
            _LOGGER.error("%s", exc)
    for item in summary['criteria']:
        if not item['pass']:
            _LOGGER.warning(
                "Criterion %s failed: measured %s, expected %s (tolerance %s)",
                item['criterion'],
                item['measured'],
                item['expected'],
                item['tolerance'],
            )
    return EXIT_OK if summary['pass'] else EXIT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s: %(message)s',
    )
    try:
        config = load_config(args)
        return asyncio.run(run(config))
    except ConfigError as exc:
        _LOGGER.error("Configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
