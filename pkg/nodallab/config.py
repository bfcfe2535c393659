"""Experiment configuration: flat key=value files and the validated container."""

from collections.abc import MutableMapping
import logging
import math
import os
from typing import Optional

from .exceptions import ConfigError

_LOGGER = logging.getLogger(__name__)

OUT_ENV_VAR = 'NODAL_LAB_OUT'
DEFAULT_OUT = 'nodallab-out'

SURFACES = ('torus', 'sphere', 'disc')
SUBCOMMANDS = (
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
    'all',
)
FORMATS = ('csv', 'json', 'svg')

_CLOSED_ONLY = ('identity', 'kuznecov', 'cx-growth', 'cx-zeros')


def parse_config(text):
    """Parse a flat key=value configuration text.

    Pairs are separated by newlines or commas; '#' starts a comment. A
    segment without '=' is glued back onto the previous value, so
    'k=3,4' keeps the value '3,4'. Values may themselves contain '='.
    """
    pairs = []
    for raw_line in text.splitlines():
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        for segment in line.split(','):
            if '=' in segment:
                key, value = segment.split('=', 1)
                pairs.append((key.strip(), value.strip()))
            elif pairs:
                pairs[-1] = (pairs[-1][0], f"{pairs[-1][1]},{segment.strip()}")
            else:
                _LOGGER.debug("Ignoring malformed leading segment: %r", segment)
    parsed = {}
    for key, value in pairs:
        if key in parsed:
            _LOGGER.debug("Duplicate key %s, keeping last value %r", key, value)
        parsed[key] = value
    return parsed


def _as_int(value):
    if isinstance(value, bool):
        raise ValueError(f"boolean is not an integer: {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return int(str(value).strip())


def _as_float(value):
    if isinstance(value, str):
        value = value.strip().lower()
        if value in ('pi', 'π'):
            return math.pi
    result = float(value)
    if not math.isfinite(result):
        raise ValueError(f"not a finite number: {value!r}")
    return result


def _as_pair(value):
    if isinstance(value, str):
        parts = [part for part in value.replace(' ', '').split(',') if part]
    else:
        parts = list(value)
    if len(parts) != 2:
        raise ValueError(f"expected a pair a,b, got {value!r}")
    return (_as_int(parts[0]), _as_int(parts[1]))


def _as_choice(choices):
    def coerce(value):
        value = str(value).strip().lower()
        if value not in choices:
            raise ValueError(f"{value!r} is not one of {', '.join(choices)}")
        return value

    return coerce


def _as_formats(value):
    if isinstance(value, str):
        items = [item.strip().lower() for item in value.split(',') if item.strip()]
    else:
        items = [str(item).strip().lower() for item in value]
    unknown = [item for item in items if item not in FORMATS]
    if unknown or not items:
        raise ValueError(f"formats must be drawn from {', '.join(FORMATS)}")
    return tuple(item for item in FORMATS if item in items)


def _format_value(value):
    if isinstance(value, tuple):
        return ','.join(str(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ExperimentConfig(MutableMapping):
    """Validated experiment configuration.

    Every key of SCHEMA is always present (missing keys hold their
    default); assignment coerces text to the declared type and unknown
    keys are rejected immediately. Range checks that involve several keys
    run in validate(), which the runner calls before any computation.
    """

    # key -> (coerce, single-value range check, default)
    SCHEMA = {
        'surface': (_as_choice(SURFACES), None, 'torus'),
        'experiment': (_as_choice(SUBCOMMANDS), None, 'all'),
        'k': (_as_pair, lambda k: k != (0, 0), (1, 0)),
        'N': (_as_int, lambda v: v >= 0, 4),
        'm': (_as_int, None, 0),
        'n': (_as_int, lambda v: v >= 1, 1),
        'bc': (_as_choice(('dirichlet', 'neumann')), None, 'dirichlet'),
        'parity': (_as_choice(('sin', 'cos')), None, 'sin'),
        'grid': (_as_int, lambda v: v >= 8, 256),
        'lambda_max': (_as_float, lambda v: v >= 0, 20.0),
        'eps': (_as_float, lambda v: 0 < v <= 1.0, 0.4),
        'strip_eps': (_as_float, lambda v: 0 < v <= 1.0, 0.1),
        'filter_eps': (_as_float, lambda v: v > 0, 1.0),
        'out': (str, lambda v: bool(v.strip()), DEFAULT_OUT),
        'format': (_as_formats, None, FORMATS),
        'threads': (_as_int, lambda v: 1 <= v <= 256, 4),
        'seed': (_as_int, lambda v: v >= 0, 12345),
        'trials': (_as_int, lambda v: v >= 1, 200),
        'A': (_as_float, lambda v: v > 0, math.pi),
        'M': (_as_int, lambda v: v >= 1, 8),
    }

    def __init__(self, values: Optional[dict] = None, *, environ=None):
        environ = os.environ if environ is None else environ
        self._data = {key: spec[2] for key, spec in self.SCHEMA.items()}
        if environ.get(OUT_ENV_VAR):
            self._data['out'] = environ[OUT_ENV_VAR]
        for key, value in (values or {}).items():
            self[key] = value

    # --- Implementation of abstract methods ---

    def __getitem__(self, key):
        return self._data[key]

    def __setitem__(self, key, value):
        if key not in self.SCHEMA:
            raise ConfigError(f"unknown configuration key: {key!r}")
        coerce, check, _ = self.SCHEMA[key]
        try:
            coerced = coerce(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for {key}: {exc}") from exc
        if check is not None and not check(coerced):
            raise ConfigError(f"value out of range for {key}: {value!r}")
        self._data[key] = coerced

    def __delitem__(self, key):
        if key not in self.SCHEMA:
            raise KeyError(key)
        self._data[key] = self.SCHEMA[key][2]

    def __iter__(self):
        return iter(self.SCHEMA)

    def __len__(self):
        return len(self.SCHEMA)

    def __str__(self):
        return f"{self._data}"

    # --- Sources and validation ---

    @classmethod
    def from_text(cls, text, *, environ=None):
        """Build a config from flat key=value text."""
        return cls(parse_config(text), environ=environ)

    def update_from_flags(self, flags: dict):
        """Apply command-line overrides; None means 'flag not given'."""
        for key, value in flags.items():
            if value is not None:
                self[key] = value
        return self

    def validate(self):
        """Check ranges that involve more than one key."""
        if self['surface'] == 'sphere' and abs(self['m']) > self['N']:
            raise ConfigError(f"|m| = {abs(self['m'])} exceeds N = {self['N']}")
        if self['surface'] == 'disc' and self['m'] < 0:
            raise ConfigError("disc angular order m must be >= 0")
        experiment, surface = self['experiment'], self['surface']
        if surface == 'disc' and experiment in _CLOSED_ONLY:
            raise ConfigError(f"{experiment} needs a closed surface, not the disc")
        neumann_disc = (surface, self['bc']) == ('disc', 'neumann')
        if experiment == 'boundary-count' and not neumann_disc:
            raise ConfigError(
                "boundary zeros are counted for Neumann modes of the disc"
            )
        needs_lambda = experiment in ('weyl', 'kuznecov', 'boundary-count')
        if needs_lambda and self['lambda_max'] <= 0:
            raise ConfigError(f"{experiment} needs lambda_max > 0")
        if experiment == 'restrict-profile' and self['N'] < 8:
            raise ConfigError(f"mode profiles need N >= 8, got {self['N']}")
        _LOGGER.debug("Validated configuration %s", self)
        return self

    def serialize(self):
        """Canonical text form, one key=value per line in schema order."""
        return ''.join(f"{key}={_format_value(self[key])}\n" for key in self.SCHEMA)
