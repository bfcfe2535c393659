"""Experiments behind the command-line subcommands and the acceptance suite.

Every runner takes an ExperimentConfig and returns an ExperimentResult:
named tables (header, rows), SVG figures, JSON records and the acceptance
criteria it checked. Nothing here writes files.
"""

from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .bessel import J01
from .config import ExperimentConfig
from .cx import (
    GROWTH_ENVELOPE,
    GeodesicRestriction,
    StripRect,
    complexified_exp,
    count_zeros_rect,
    growth_rate,
    intersection_density,
    period_rect,
    poincare_lelong_count,
    zero_locations,
)
from .exceptions import (
    ConfigError,
    CriticalLevelError,
    GrowthBoundError,
    InsufficientSpanError,
    SubdivisionDepthError,
    SymmetryError,
    VanishingRestrictionError,
)
from .euler import euler_graph
from .export import chart_window, curves_svg, heatmap_svg, lines_svg
from .factory import EigenFnFactory
from .geom import DISC, SPHERE, TORUS, GeodesicSegment, Sphere, Torus, surface_by_name
from .grid import GridField, TestFunction
from .modes import DiscMode, EigenFn, SphereMode, TorusMode
from .nodal import (
    boundary_zero_count,
    count_domains,
    courant_check,
    domain_sweep,
    extract_nodal,
    faber_krahn_check,
    length_convergence,
    nodal_length_sweep,
    pleijel_ratios,
    small_ball_check,
)
from .norms import (
    INF,
    dong_identity,
    family_sweep,
    level_set_identity,
    scaling_fit,
    sogge_delta,
)
from .restrict import (
    PRINTED_KUZNECOV_EXPONENT,
    density_one_fraction,
    kuznecov_sum,
    orbital_fourier,
    qer_mode_profile,
    restrict_eigenfn,
    sign_changes,
)
from .spectra import (
    MODE_COLUMNS,
    SpectralFilter,
    enumerate_modes,
    fit_exponent,
    frequencies,
    mode_rows,
    poisson_kernel_sphere,
    rho_kernel_gradient_sup,
    weyl_remainder_envelope,
    weyl_remainder_exponent,
)

_LOGGER = logging.getLogger(__name__)

# heatmap cells per axis
_HEAT_CELLS = 96

NORM_COLUMNS = ('family', 'index', 'lambda', 'p', 'norm')
BOUNDARY_COLUMNS = ('lambda', 'm', 'n', 'parity', 'zeros', 'ratio')


@dataclass(frozen=True)
class Criterion:
    """One acceptance assertion as it appears in summary.json."""

    ident: str
    description: str
    measured: float
    expected: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return {
            'criterion': self.ident,
            'description': self.description,
            'measured': self.measured,
            'expected': self.expected,
            'tolerance': self.tolerance,
            'pass': bool(self.passed),
        }


def within(ident, description, measured, expected, tolerance) -> Criterion:
    """|measured - expected| <= tolerance."""
    measured = float(measured)
    passed = math.isfinite(measured) and abs(measured - expected) <= tolerance
    return Criterion(
        ident, description, measured, float(expected), float(tolerance), passed
    )


def at_most(ident, description, measured, bound) -> Criterion:
    """measured <= bound; tolerance is reported as 0."""
    measured = float(measured)
    passed = math.isfinite(measured) and measured <= bound
    return Criterion(ident, description, measured, float(bound), 0.0, passed)


@dataclass
class ExperimentResult:
    name: str
    tables: Dict[str, Tuple[Sequence[str], list]] = field(default_factory=dict)
    figures: Dict[str, str] = field(default_factory=dict)
    records: Dict[str, object] = field(default_factory=dict)
    criteria: List[Criterion] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(criterion.passed for criterion in self.criteria)


def eigenfn_from_config(config: ExperimentConfig) -> EigenFn:
    """The single eigenfunction selected by surface, k, parity, N, m, bc and n."""
    return EigenFnFactory(
        config['surface'],
        k=config['k'],
        parity=config['parity'],
        N=config['N'],
        m=config['m'],
        bc=config['bc'],
        n=config['n'],
    )


def geodesic_for(surface, k=(1, 0)) -> GeodesicSegment:
    """Equator on the sphere; the closed torus geodesic along k elsewhere."""
    if isinstance(surface, Sphere):
        return GeodesicSegment.equator()
    return GeodesicSegment.torus_closed(*k, basepoint=(0.1234, 0.0))


def _geometric_indices(lo: int, hi: int, count: int) -> List[int]:
    return sorted({int(round(x)) for x in np.geomspace(lo, hi, count)})


def _fmt(value, digits=12):
    return f"{value:.{digits}g}"


def _coarse(values: np.ndarray) -> np.ndarray:
    step_u = max(1, values.shape[0] // _HEAT_CELLS)
    step_v = max(1, values.shape[1] // _HEAT_CELLS)
    return values[::step_u, ::step_v]


def _log_modulus_grid(g: GeodesicRestriction, rect: StripRect, nt: int, ntau: int):
    t = np.linspace(rect.t0, rect.t1, nt)
    tau = np.linspace(rect.tau0, rect.tau1, ntau)
    values = g(t[:, None] + 1j * tau[None, :])
    return t, tau, np.log(np.maximum(np.abs(values) ** 2, 1e-300))


def closed_form_zero_count(
    mode: TorusMode, seg: GeodesicSegment, t0: float, t1: float
) -> int:
    """Zeros of a torus trig mode along seg with t0 < t < t1.

    The complexified restriction is sin or cos of an affine function of
    w with real coefficients, so every zero in the strip is real.
    """
    k = np.array([mode.k1, mode.k2], dtype=float)
    rate = 2.0 * float(k @ np.asarray(seg.direction))
    if rate == 0.0:
        raise ValueError(f"{mode} is constant along {seg}")
    shift = 0.5 if mode.parity == 'cos' else 0.0
    offset = 2.0 * float(k @ np.asarray(seg.basepoint)) - shift
    lo, hi = sorted((offset + rate * t0, offset + rate * t1))
    return math.floor(hi) - math.floor(lo)


# --- Subcommands ---


def run_modes(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Mode table up to lambda_max."""
    surface = surface_by_name(config['surface'])
    modes = enumerate_modes(surface, config['lambda_max'], config['bc'])
    result = ExperimentResult('modes')
    result.tables['modes'] = (MODE_COLUMNS, mode_rows(surface, modes))
    lams = [mode.frequency for mode in modes]
    result.figures['counting'] = lines_svg(
        [('N(lambda)', lams, np.arange(1, len(lams) + 1))],
        'lambda',
        'N',
        'eigenvalue count',
    )
    result.records.update(
        surface=surface.kind, lambda_max=config['lambda_max'], count=len(modes)
    )
    return result


def run_weyl(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Counting function, main term and remainder envelope."""
    surface = surface_by_name(config['surface'])
    lambda_max = config['lambda_max']
    lams = np.linspace(lambda_max / 50.0, lambda_max, 50)
    freqs = frequencies(surface, lambda_max, config['bc'])
    counts = np.searchsorted(freqs, lams * (1.0 + 1e-12), side='right')
    main = lams**2 * surface.area / (4.0 * math.pi)
    _, envelope = weyl_remainder_envelope(surface, lams, config['bc'])
    result = ExperimentResult('weyl')
    result.tables['weyl'] = (
        ('lambda', 'count', 'main_term', 'remainder', 'envelope'),
        [
            (_fmt(lam), int(count), _fmt(term), _fmt(count - term), _fmt(env))
            for lam, count, term, env in zip(lams, counts, main, envelope)
        ],
    )
    result.figures['weyl'] = lines_svg(
        [('N(lambda)', lams, counts), ('main term', lams, main)], 'lambda', 'count'
    )
    result.records['surface'] = surface.kind
    try:
        fit = weyl_remainder_exponent(
            surface, lambda_max / 10.0, lambda_max, bc=config['bc']
        )
        result.records['remainder_exponent'] = fit.exponent
    except ValueError as exc:
        _LOGGER.debug("No remainder fit: %s", exc)
    return result


def run_nodal(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Nodal curves of the selected eigenfunction."""
    fn = eigenfn_from_config(config)
    field_ = GridField.sample(fn, config['grid'], workers=workers)
    curves = extract_nodal(field_)
    result = ExperimentResult('nodal')
    result.tables['curves'] = (
        ('polyline', 'vertex', 'u', 'v', 'closed'),
        curves.rows(),
    )
    result.figures['curves'] = curves_svg(curves, fn.describe())
    lam = fn.frequency
    ratio = curves.total_length / lam if lam > 0 else math.nan
    result.records.update(
        eigenfunction=fn.describe(),
        lam=lam,
        total_length=curves.total_length,
        components=curves.component_count,
        length_over_lambda=ratio,
    )
    if isinstance(fn.surface, Torus) and lam > 0:
        result.criteria.append(
            within(
                'nodal.length',
                'torus nodal length / lambda = 1/pi',
                ratio,
                1.0 / math.pi,
                0.003,
            )
        )
    _LOGGER.info(
        "Nodal length of %s: %.8g (%.6f λ)", fn.describe(), curves.total_length, ratio
    )
    return result


def run_domains(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Nodal domains with the Faber-Krahn margins."""
    fn = eigenfn_from_config(config)
    field_ = GridField.sample(fn, config['grid'], workers=workers)
    dec = count_domains(field_)
    result = ExperimentResult('domains')
    result.tables['domains'] = (('domain', 'sign', 'area'), dec.rows())
    xlim, ylim, labels = chart_window(fn.surface)
    result.figures['domains'] = heatmap_svg(
        _coarse(field_.values), xlim, ylim, labels, fn.describe()
    )
    result.records.update(eigenfunction=fn.describe(), domain_count=dec.domain_count)
    if fn.frequency > 0:
        fk = faber_krahn_check(dec, fn.frequency)
        result.records.update(faber_krahn_bound=fk.bound, faber_krahn_worst=fk.worst)
        result.criteria.append(
            Criterion(
                'domains.faber-krahn',
                'smallest area margin',
                fk.worst,
                0.0,
                fk.tolerance,
                fk.passed,
            )
        )
    if fn.surface != DISC and fn.frequency > 0:
        _euler_section(result, fn, dec.domain_count, config['grid'])
    return result


def _euler_section(result: ExperimentResult, fn: EigenFn, domains: int, grid: int):
    if isinstance(fn.surface, Sphere):
        gamma = GeodesicSegment.equator()
    else:
        gamma = GeodesicSegment.torus_closed(1, 0)
    try:
        euler = euler_graph(fn, gamma, grid)
    except SymmetryError as exc:
        _LOGGER.info("No Euler graph for %s: %s", fn.describe(), exc)
        return
    graph = euler.graph
    result.records['euler_graph'] = {
        'v': graph.v,
        'e': graph.e,
        'f': graph.f,
        'm': graph.m,
        'parity': euler.parity,
        'intersections': euler.intersections,
        'bound': euler.bound,
    }
    result.criteria.append(
        at_most(
            'domains.euler',
            'Euler-graph lower bound against the counted domains',
            euler.bound,
            domains,
        )
    )


def _identity_tests(surface):
    tests = [TestFunction.constant(surface)]
    if isinstance(surface, Torus):
        tests.append(TestFunction.torus_trig(surface, 1, 0))
    else:
        tests.append(
            TestFunction(
                surface,
                lambda u, v: np.cos(np.asarray(u)) + 0.0 * np.asarray(v),
                lambda u, v: -2.0 * np.cos(np.asarray(u)) + 0.0 * np.asarray(v),
                label='cos(phi)',
            )
        )
    return tests


def run_identity(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Nodal integral identity and the level-set identity at half the maximum."""
    fn = eigenfn_from_config(config)
    field_ = GridField.sample(fn, config['grid'], workers=workers)
    curves = extract_nodal(field_)
    rows = []
    result = ExperimentResult('identity')
    for test in _identity_tests(fn.surface):
        lhs, rhs, residual = dong_identity(fn, test, curves)
        rows.append((test.label, _fmt(lhs), _fmt(rhs), _fmt(residual, 6)))
        result.criteria.append(
            at_most(
                f"identity.{test.label}",
                'relative residual of the nodal identity',
                residual,
                0.01,
            )
        )
    level = 0.5 * field_.sup
    try:
        lhs, rhs, residual = level_set_identity(fn, level, config['grid'])
        rows.append((f"level={level:.6g}", _fmt(lhs), _fmt(rhs), _fmt(residual, 6)))
    except CriticalLevelError as exc:
        _LOGGER.warning("Skipping the level-set identity: %s", exc)
    result.tables['identity'] = (('f', 'lhs', 'rhs', 'residual'), rows)
    result.records['eigenfunction'] = fn.describe()
    return result


def _sweep_plan(surface_kind: str, config: ExperimentConfig):
    if surface_kind == 'sphere':
        indices = _geometric_indices(16, 256, 12)
        return [('zonal', indices, None), ('highestweight', indices, None)]
    if surface_kind == 'torus':
        return [('torusray', list(range(1, max(8, config['M']) + 1)), config['k'])]
    return [('discradial', list(range(1, max(16, 2 * config['M']) + 1)), None)]


def run_norms(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """L^p sweeps over the eigenfunction families of the surface."""
    ps = (2, 4, 6, 8)
    result = ExperimentResult('norms')
    fits = []
    series = []
    for family, indices, direction in _sweep_plan(config['surface'], config):
        sweep = family_sweep(family, indices, ps, direction=direction, workers=workers)
        result.tables[f"norms_{family}"] = (NORM_COLUMNS, sweep.rows())
        for p in (1.0, *ps, INF):
            label = 'inf' if p == INF else f"{p:g}"
            series.append((f"{family} L{label}", sweep.lams, sweep.column(p)))
            try:
                fit = scaling_fit(sweep, p)
            except InsufficientSpanError as exc:
                _LOGGER.debug("No fit for %s L%s: %s", family, label, exc)
                continue
            sharp = _fmt(sogge_delta(p), 6) if p >= 2 else ''
            exponent, stderr = _fmt(fit.exponent, 6), _fmt(fit.stderr, 4)
            fits.append((family, label, exponent, stderr, sharp))
    result.tables['fits'] = (
        ('family', 'p', 'exponent', 'stderr', 'sogge_delta'),
        fits,
    )
    result.figures['norms'] = lines_svg(
        series, 'lambda', 'norm', 'L^p norms', loglog=True
    )
    return result


def run_kuznecov(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Partial sums of squared geodesic periods."""
    surface = surface_by_name(config['surface'])
    seg = geodesic_for(surface, config['k'])
    kz = kuznecov_sum(seg, lam=config['lambda_max'])
    result = ExperimentResult('kuznecov')
    result.tables['kuznecov'] = (('lambda', 'partial_sum', 'exponent'), kz.rows())
    series = [('S(lambda)', kz.lams, kz.partial)]
    if kz.oracle is not None:
        series.append(('Legendre oracle', kz.lams, np.cumsum(kz.oracle)))
    result.figures['kuznecov'] = lines_svg(
        series, 'lambda', 'S', 'Kuznecov sums', loglog=True
    )
    result.records.update(
        surface=surface.kind,
        exponent=kz.fit.exponent if kz.fit else None,
        printed_exponent=PRINTED_KUZNECOV_EXPONENT,
        flagged=kz.flagged,
        kernel_deviation=kz.kernel_deviation,
        oracle_deviation=kz.oracle_deviation,
    )
    return result


def run_restrict_profile(
    config: ExperimentConfig, workers: int = 1
) -> ExperimentResult:
    """Equator mode weights of degree N, and the orbital Fourier data of Y_N^m."""
    degree = config['N']
    profile = qer_mode_profile(degree)
    result = ExperimentResult('restrict-profile')
    result.tables['profile'] = (('sigma', 'weight', 'arcsine'), profile.rows())
    result.figures['profile'] = lines_svg(
        [
            ('W', profile.sigma, profile.weights),
            ('arcsine', profile.sigma, profile.arcsine),
        ],
        'sigma',
        'weight',
        f"equator mode weights, N={degree}",
    )
    order = max(-degree, min(degree, config['m']))
    restricted = restrict_eigenfn(
        EigenFn.single(SphereMode(degree, order)), GeodesicSegment.equator()
    )
    freqs, coefficients = orbital_fourier(restricted)
    keep = np.abs(coefficients) > 1e-12
    result.tables['fourier'] = (
        ('frequency', 'modulus'),
        [(_fmt(f), _fmt(abs(c))) for f, c in zip(freqs[keep], coefficients[keep])],
    )
    result.records.update(degree=degree, cdf_distance=profile.cdf_distance)
    try:
        result.records['sign_changes'] = sign_changes(restricted)
    except VanishingRestrictionError as exc:
        _LOGGER.debug("No sign changes recorded: %s", exc)
    return result


def run_cx_growth(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """(1/λ)log|φ^C|² over the strip |τ| <= eps along a closed geodesic."""
    fn = eigenfn_from_config(config)
    lam = fn.frequency
    if lam <= 1.0:
        raise ConfigError(
            f"growth rates need an eigenfunction with λ > 1, got {lam:.6g}"
        )
    seg = geodesic_for(fn.surface, _primitive(config['k']))
    eps = config['eps']
    rect = StripRect(0.0, seg.length, -eps, eps, eps)
    g = GeodesicRestriction(fn, seg)
    t, tau, log_size = _log_modulus_grid(g, rect, _HEAT_CELLS, 33)
    u = log_size / lam
    excess = (u - 2.0 * np.abs(tau)[None, :]) * lam / math.log(lam)
    result = ExperimentResult('cx-growth')
    result.tables['growth'] = (
        ('t', 'tau', 'u', 'bound'),
        [
            (_fmt(ti), _fmt(tj), _fmt(u[i, j]), _fmt(2.0 * abs(tj)))
            for i, ti in enumerate(t)
            for j, tj in enumerate(tau)
        ],
    )
    result.figures['growth'] = heatmap_svg(
        u, (rect.t0, rect.t1), (rect.tau0, rect.tau1), ('t', 'tau'), 'u'
    )
    worst = float(np.max(excess))
    result.records.update(eigenfunction=fn.describe(), lam=lam, worst_constant=worst)
    result.criteria.append(
        at_most(
            'cx-growth.bound',
            'max C with u = 2 sqrt(rho) + C log(lambda)/lambda',
            worst,
            GROWTH_ENVELOPE,
        )
    )
    return result


def _primitive(k):
    g = math.gcd(*k)
    return (k[0] // g, k[1] // g)


def run_cx_zeros(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Complex zeros of the restriction in the strip |τ| <= strip_eps."""
    fn = eigenfn_from_config(config)
    seg = geodesic_for(fn.surface)
    eps = config['strip_eps']
    g = GeodesicRestriction(fn, seg)
    result = ExperimentResult('cx-zeros')
    try:
        rect = period_rect(g, eps)
    except VanishingRestrictionError as exc:
        _LOGGER.warning("No complex zeros to count: %s", exc)
        result.records.update(eigenfunction=fn.describe(), vanishing=True)
        return result
    try:
        zeros = zero_locations(fn, seg, rect)
    except SubdivisionDepthError as exc:
        zeros = exc.partial
    result.tables['zeros'] = (('t', 'tau', 'multiplicity'), zeros.rows())
    _, _, log_size = _log_modulus_grid(g, rect, _HEAT_CELLS, 33)
    result.figures['zeros'] = heatmap_svg(
        log_size - np.max(log_size),
        (rect.t0, rect.t1),
        (rect.tau0, rect.tau1),
        ('t', 'tau'),
        'log|g|^2',
    )
    result.records.update(
        eigenfunction=fn.describe(),
        vanishing=False,
        t0=rect.t0,
        total=zeros.total,
        partial=zeros.partial,
        current_mass=poincare_lelong_count(fn, seg, rect),
    )
    single = fn.modes[0][0] if len(fn.modes) == 1 else None
    if isinstance(single, TorusMode):
        expected = closed_form_zero_count(single, seg, rect.t0, rect.t1)
        result.criteria.append(
            within(
                'cx-zeros.count',
                'zeros against the closed-form count',
                zeros.total,
                expected,
                0,
            )
        )
    return result


def run_boundary_count(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Boundary sign changes of the Neumann disc modes up to lambda_max."""
    modes = enumerate_modes(DISC, config['lambda_max'], 'neumann')
    rows, mismatches = _boundary_rows(modes)
    result = ExperimentResult('boundary-count')
    result.tables['boundary'] = (BOUNDARY_COLUMNS, rows)
    result.records['modes'] = len(modes)
    result.criteria.append(
        at_most(
            'boundary-count', 'modes violating zeros = 2m <= 2 lambda', mismatches, 0
        )
    )
    return result


def _boundary_rows(modes):
    rows = []
    mismatches = 0
    for mode in modes:
        zeros = boundary_zero_count(EigenFn.single(mode))
        lam = mode.frequency
        ratio = zeros / lam if lam > 0 else 0.0
        if zeros != 2 * mode.m or zeros > 2.0 * lam:
            mismatches += 1
        rows.append((_fmt(lam), mode.m, mode.n, mode.parity, zeros, _fmt(ratio, 6)))
    return rows, mismatches


def run_calibrate_smallball(
    config: ExperimentConfig, workers: int = 1
) -> ExperimentResult:
    """Smallest A for which every sampled ball of radius A/λ meets the nodal set."""
    fn = eigenfn_from_config(config)
    check = small_ball_check(
        fn, config['A'], config['trials'], calibrate=True, seed=config['seed']
    )
    result = ExperimentResult('calibrate-smallball')
    result.tables['smallball'] = (
        ('A', 'trials', 'passed', 'max_distance', 'calibrated_A'),
        [
            (
                _fmt(config['A']),
                config['trials'],
                int(check.passed),
                _fmt(check.max_distance),
                _fmt(check.calibrated_A),
            )
        ],
    )
    result.records.update(
        eigenfunction=fn.describe(),
        passed=check.passed,
        calibrated_A=check.calibrated_A,
        failed_center=check.failed_center,
    )
    return result


SUBCOMMAND_RUNNERS: Dict[str, Callable[..., ExperimentResult]] = {
    'modes': run_modes,
    'weyl': run_weyl,
    'nodal': run_nodal,
    'domains': run_domains,
    'identity': run_identity,
    'norms': run_norms,
    'kuznecov': run_kuznecov,
    'restrict-profile': run_restrict_profile,
    'cx-growth': run_cx_growth,
    'cx-zeros': run_cx_zeros,
    'boundary-count': run_boundary_count,
    'calibrate-smallball': run_calibrate_smallball,
}


# --- Acceptance suite ---


def accept_nodal_length(
    config, multiples=range(1, 9), grid=512, convergence_grids=(64, 128, 256)
) -> ExperimentResult:
    result = ExperimentResult('accept-01-nodal-length')
    fns = [EigenFnFactory(TORUS, k=(3 * j, 4 * j)) for j in multiples]
    records = nodal_length_sweep(fns, grid)
    worst = max(abs(record.ratio * math.pi - 1.0) for record in records)
    result.tables['nodal_length'] = (
        ('M', 'lambda', 'length', 'ratio'),
        [
            (multiple, _fmt(record.lam), _fmt(record.length), _fmt(record.ratio))
            for multiple, record in zip(multiples, records)
        ],
    )
    result.criteria.append(
        within('1', 'torus nodal length / lambda relative to 1/pi', worst, 0.0, 0.01)
    )
    # the zero set of the (3, 4) sine mode is two closed geodesics of length 5
    exact = fns[0].frequency / math.pi
    result.records['length_convergence_order'] = length_convergence(
        fns[0], exact, convergence_grids
    )
    return result


TORUS_IDENTITY_MODES = (
    ((1, 0), 'sin'),
    ((1, 1), 'cos'),
    ((2, 1), 'sin'),
    ((3, 4), 'cos'),
    ((0, 3), 'sin'),
    ((2, 3), 'cos'),
    ((4, 1), 'sin'),
    ((5, 2), 'cos'),
    ((1, 6), 'sin'),
    ((3, 5), 'cos'),
)
ZONAL_IDENTITY_DEGREES = (2, 3, 5, 8, 13)


def _identity_functions(torus_modes, zonal_degrees):
    fns = [EigenFnFactory(TORUS, k=k, parity=parity) for k, parity in torus_modes]
    fns.extend(EigenFn.single(SphereMode(degree, 0)) for degree in zonal_degrees)
    return fns


def accept_dong_identity(
    config,
    torus_modes=TORUS_IDENTITY_MODES,
    zonal_degrees=ZONAL_IDENTITY_DEGREES,
    grid=512,
) -> ExperimentResult:
    result = ExperimentResult('accept-02-dong-identity')
    rows = []
    worst = 0.0
    for fn in _identity_functions(torus_modes, zonal_degrees):
        curves = extract_nodal(GridField.sample(fn, grid))
        for test in _identity_tests(fn.surface):
            lhs, rhs, residual = dong_identity(fn, test, curves)
            worst = max(worst, residual)
            rows.append(
                (fn.describe(), test.label, _fmt(lhs), _fmt(rhs), _fmt(residual, 6))
            )
    result.tables['identity'] = (
        ('eigenfunction', 'f', 'lhs', 'rhs', 'residual'),
        rows,
    )
    result.criteria.append(
        at_most('2', 'worst relative residual of the nodal identity', worst, 0.01)
    )
    return result


def accept_weyl(
    config, torus_range=(10.0, 400.0), sphere_degree=100
) -> ExperimentResult:
    result = ExperimentResult('accept-03-weyl')
    fit = weyl_remainder_exponent(TORUS, *torus_range)
    result.tables['torus_remainder'] = (
        ('lambda', 'envelope'),
        [(_fmt(lam), _fmt(value)) for lam, value in zip(fit.lams, fit.values)],
    )
    result.criteria.append(
        at_most('3.torus', 'torus Weyl remainder exponent', fit.exponent, 1.1)
    )

    degrees = np.arange(sphere_degree + 1)
    lams = np.sqrt(degrees * (degrees + 1.0))
    freqs = frequencies(SPHERE, lams[-1])
    counts = np.searchsorted(freqs, lams * (1.0 + 1e-12), side='right')
    mismatches = int(np.count_nonzero(counts != (degrees + 1) ** 2))
    result.tables['sphere_counts'] = (
        ('K', 'lambda', 'count'),
        [(int(k), _fmt(lam), int(c)) for k, lam, c in zip(degrees, lams, counts)],
    )
    result.criteria.append(
        within('3.sphere', 'degrees K with N(lambda_K) != (K+1)^2', mismatches, 0, 0)
    )
    return result


def accept_sogge(config, lo=16, hi=256, points=12) -> ExperimentResult:
    result = ExperimentResult('accept-04-sogge')
    indices = _geometric_indices(lo, hi, points)
    zonal = family_sweep('zonal', indices)
    beam = family_sweep('highestweight', indices, ps=(6,))
    result.tables['zonal'] = (NORM_COLUMNS, zonal.rows())
    result.tables['highestweight'] = (NORM_COLUMNS, beam.rows())
    checks = (
        ('4.zonal.inf', 'zonal L^inf exponent', zonal, INF, 0.5),
        ('4.beam.6', 'highest weight L^6 exponent', beam, 6, 1.0 / 6.0),
        ('4.beam.1', 'highest weight L^1 exponent', beam, 1, -0.25),
    )
    for ident, description, sweep, p, expected in checks:
        exponent = scaling_fit(sweep, p).exponent
        result.criteria.append(within(ident, description, exponent, expected, 0.02))
    return result


def first_disc_modes(count: int, bc: str = 'dirichlet'):
    """The first `count` disc modes in eigenvalue order."""
    lam = 2.0 * math.sqrt(count) + 4.0
    modes = enumerate_modes(DISC, lam, bc)
    while len(modes) < count:
        lam *= 1.2
        modes = enumerate_modes(DISC, lam, bc)
    return modes[:count]


def accept_courant_pleijel(config, courant=50, pleijel=200) -> ExperimentResult:
    result = ExperimentResult('accept-05-courant-pleijel')
    records = domain_sweep(first_disc_modes(max(courant, pleijel)))
    result.tables['domains'] = (
        ('index', 'lambda', 'm', 'n', 'parity', 'domains', 'ratio'),
        [
            (
                r.index,
                _fmt(r.lam),
                r.mode.m,
                r.mode.n,
                r.mode.parity,
                r.domains,
                _fmt(r.ratio, 6),
            )
            for r in records
        ],
    )
    violations = courant_check(records[:courant])
    worst, constant = pleijel_ratios(records)
    result.records['pleijel_constant'] = constant
    result.criteria.append(
        at_most(
            '5.courant',
            'modes with more domains than their index',
            len(violations),
            0,
        )
    )
    result.criteria.append(
        at_most('5.pleijel', 'max domains/index for index >= 20', worst, 0.70)
    )
    return result


def accept_faber_krahn(
    config,
    torus_multiples=range(1, 9),
    zonal_degrees=ZONAL_IDENTITY_DEGREES,
    disc_count=50,
    torus_grid=512,
    grid=1024,
) -> ExperimentResult:
    result = ExperimentResult('accept-06-faber-krahn')
    cases = [
        (EigenFnFactory(TORUS, k=(3 * m, 4 * m)), torus_grid) for m in torus_multiples
    ]
    cases += [(EigenFn.single(SphereMode(n, 0)), grid) for n in zonal_degrees]
    cases += [(EigenFn.single(mode), grid) for mode in first_disc_modes(disc_count)]
    rows = []
    worst = math.inf
    for fn, resolution in cases:
        dec = count_domains(GridField.sample(fn, resolution))
        fk = faber_krahn_check(dec, fn.frequency)
        worst = min(worst, fk.worst)
        rows.append((fn.describe(), resolution, _fmt(fk.bound), _fmt(fk.worst, 6)))
    result.tables['faber_krahn'] = (
        ('eigenfunction', 'grid', 'bound', 'worst_margin'),
        rows,
    )
    result.criteria.append(
        Criterion(
            '6.bound',
            'smallest relative area margin',
            worst,
            0.0,
            0.02,
            worst >= -0.02,
        )
    )
    ground = EigenFn.single(DiscMode('dirichlet', 0, 1))
    dec = count_domains(GridField.sample(ground, grid))
    equality = faber_krahn_check(dec, ground.frequency)
    result.criteria.append(
        within('6.equality', 'disc (0,1) margin', equality.worst, 0.0, 0.01)
    )
    result.records['j01'] = J01
    return result


def accept_poisson(config, n_max=200) -> ExperimentResult:
    result = ExperimentResult('accept-07-poisson')
    r = np.linspace(0.0, math.pi, 50)
    rows = []
    worst = 0.0
    for t in np.linspace(0.5, 3.0, 6):
        closed, spectral = poisson_kernel_sphere(float(t), r, n_max)
        gap = float(np.max(np.abs(closed - spectral)))
        worst = max(worst, gap)
        rows.append((_fmt(t), _fmt(gap, 4)))
    result.tables['poisson'] = (('t', 'sup_difference'), rows)
    result.criteria.append(
        at_most('7', 'Poisson kernel closed form vs spectral sum', worst, 1e-10)
    )
    return result


def accept_kernel_gradient(
    config, lam_range=(20.0, 200.0), points=12
) -> ExperimentResult:
    result = ExperimentResult('accept-08-kernel-gradient')
    lams = np.geomspace(*lam_range, points)
    sups = rho_kernel_gradient_sup(SpectralFilter(config['filter_eps']), lams)
    fit = fit_exponent(lams, sups)
    result.tables['kernel_gradient'] = (
        ('lambda', 'sup_gradient'),
        [(_fmt(lam), _fmt(value)) for lam, value in zip(lams, sups)],
    )
    result.criteria.append(
        within('8', 'sup |grad K_lambda| exponent', fit.exponent, 1.5, 0.1)
    )
    return result


def accept_kuznecov(config, degree=64) -> ExperimentResult:
    result = ExperimentResult('accept-09-kuznecov')
    lam = math.sqrt(degree * (degree + 1.0))
    kz = kuznecov_sum(GeodesicSegment.equator(), lam=lam)
    result.tables['kuznecov'] = (('lambda', 'partial_sum', 'exponent'), kz.rows())
    result.criteria.append(
        at_most(
            '9.oracle',
            'cluster values against the Legendre oracle',
            kz.oracle_deviation,
            1e-8,
        )
    )
    oracle_partial = np.cumsum(kz.oracle)
    window = (kz.lams >= kz.lams[-1] / 10.0) & (oracle_partial > 0)
    oracle_fit = fit_exponent(kz.lams[window], oracle_partial[window])
    result.criteria.append(
        within(
            '9.exponent',
            'fitted growth exponent',
            kz.fit.exponent,
            oracle_fit.exponent,
            0.05,
        )
    )
    result.records.update(
        exponent=kz.fit.exponent,
        oracle_exponent=oracle_fit.exponent,
        printed_exponent=PRINTED_KUZNECOV_EXPONENT,
        discrepancy=kz.fit.exponent - PRINTED_KUZNECOV_EXPONENT,
        flagged=kz.flagged,
    )
    return result


def accept_density_one(config, lo=50, hi=200) -> ExperimentResult:
    result = ExperimentResult('accept-10-density-one')
    lam_lo, lam_hi = (math.sqrt(n * (n + 1.0)) for n in (lo, hi))
    kz = kuznecov_sum(GeodesicSegment.equator(), lam=lam_hi)
    fraction = density_one_fraction(kz, lam_lo, lam_hi)
    result.records.update(degrees=(lo, hi), fraction=fraction)
    result.criteria.append(
        at_most(
            '10',
            'share of periods above lambda^-1/4 (log lambda)^1/2',
            fraction,
            0.05,
        )
    )
    return result


def accept_cx_growth(
    config, multiple=64, degrees=(16, 32, 64, 128), points=100
) -> ExperimentResult:
    result = ExperimentResult('accept-11-cx-growth')
    ray = EigenFnFactory(TORUS, family='torusray', index=multiple, k=(1, 0))
    z = complexified_exp(TORUS, (0.3, 0.7), (0.1, 0.0))
    ray_rate = growth_rate(ray, z, envelope=None)
    result.criteria.append(
        within(
            '11.torus',
            'torus ray growth rate at xi = (0.1, 0)',
            ray_rate.u,
            0.2,
            1e-2,
        )
    )

    rng = np.random.default_rng(config['seed'])
    rows = []
    worst = -math.inf
    failures = 0
    for index in range(points):
        degree = degrees[index % len(degrees)]
        order = int(rng.integers(-degree, degree + 1))
        fn = EigenFn.single(SphereMode(degree, order))
        xyz = rng.normal(size=3)
        x = tuple(float(c) for c in Sphere.chart_of(xyz / np.linalg.norm(xyz)))
        alpha = 2.0 * math.pi * rng.random()
        size = 0.5 * math.sqrt(rng.random())
        xi = (size * math.cos(alpha), size * math.sin(alpha))
        z = complexified_exp(SPHERE, x, xi)
        try:
            rate = growth_rate(fn, z)
        except GrowthBoundError as exc:
            _LOGGER.warning("%s", exc)
            failures += 1
            rate = growth_rate(fn, z, envelope=None)
        worst = max(worst, rate.constant)
        rows.append(
            (
                degree,
                order,
                _fmt(rate.rho, 8),
                _fmt(rate.u, 8),
                _fmt(rate.constant, 6),
            )
        )
    result.tables['sphere_growth'] = (('N', 'm', 'sqrt_rho', 'u', 'constant'), rows)
    result.records['worst_constant'] = worst
    result.criteria.append(
        at_most('11.sphere', 'tube points above the growth bound', failures, 0)
    )
    return result


_CASE_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2))


def _random_zero_case(rng):
    """A torus mode, closed geodesic and rectangle whose edges avoid zeros."""
    while True:
        k = rng.integers(-4, 5, size=2)
        p, q = _CASE_DIRECTIONS[int(rng.integers(len(_CASE_DIRECTIONS)))]
        if int(k[0]) * p + int(k[1]) * q == 0:
            continue
        parity = ('sin', 'cos')[int(rng.integers(2))]
        mode, _ = TorusMode.canonical(int(k[0]), int(k[1]), parity)
        seg = GeodesicSegment.torus_closed(p, q, basepoint=tuple(rng.random(2)))
        t0, t1 = sorted(rng.uniform(0.0, seg.length, 2))
        if t1 - t0 < 0.1 * seg.length:
            continue
        rate = 2.0 * (mode.k1 * seg.direction[0] + mode.k2 * seg.direction[1])
        offset = 2.0 * (mode.k1 * seg.basepoint[0] + mode.k2 * seg.basepoint[1])
        offset -= 0.5 if parity == 'cos' else 0.0
        edges = np.array([offset + rate * t0, offset + rate * t1])
        if np.min(np.abs(edges - np.round(edges))) < 0.02:
            continue
        half = float(rng.uniform(0.05, 0.3))
        return mode, seg, StripRect(t0, t1, -half, half, half)


def accept_cx_zeros(config, cases=50, multiples=(2, 4, 8)) -> ExperimentResult:
    result = ExperimentResult('accept-12-cx-zeros')
    rng = np.random.default_rng(config['seed'])
    rows = []
    mismatches = 0
    worst_tau = 0.0
    for _ in range(cases):
        mode, seg, rect = _random_zero_case(rng)
        fn = EigenFn.single(mode)
        counted = count_zeros_rect(fn, seg, rect)
        expected = closed_form_zero_count(mode, seg, rect.t0, rect.t1)
        zeros = zero_locations(fn, seg, rect)
        taus = [abs(point.tau) for point, _ in zeros.points]
        worst_tau = max([worst_tau, *taus])
        mismatches += int(counted != expected or zeros.total != expected)
        d1, d2 = seg.direction
        rows.append(
            (
                mode.k1,
                mode.k2,
                mode.parity,
                _fmt(d1, 6),
                _fmt(d2, 6),
                _fmt(rect.t0),
                _fmt(rect.t1),
                counted,
                expected,
            )
        )
    result.tables['zero_counts'] = (
        ('k1', 'k2', 'parity', 'd1', 'd2', 't0', 't1', 'counted', 'expected'),
        rows,
    )
    result.criteria.append(
        at_most(
            '12.count',
            'cases where the count differs from the closed form',
            mismatches,
            0,
        )
    )
    result.criteria.append(
        at_most('12.real', 'max |tau| over located zeros', worst_tau, 1e-8)
    )

    seg = GeodesicSegment.torus_closed(1, 1, basepoint=(0.1234, 0.0))
    density = intersection_density((1, 0), seg, multiples)
    result.tables['density'] = (
        ('M', 'lambda', 'zeros', 'near_real', 't_density', 'expected'),
        density.rows(),
    )
    measured = density.records[-1].t_density
    result.criteria.append(
        within(
            '12.density',
            'normalized t-density',
            measured,
            density.expected,
            0.02 * density.expected,
        )
    )
    result.records['ergodic_prediction'] = density.ergodic_prediction
    return result


def accept_boundary_zeros(config, lambda_max=60.0) -> ExperimentResult:
    result = ExperimentResult('accept-13-boundary-zeros')
    rows, mismatches = _boundary_rows(enumerate_modes(DISC, lambda_max, 'neumann'))
    result.tables['boundary'] = (BOUNDARY_COLUMNS, rows)
    result.criteria.append(
        at_most(
            '13', 'Neumann modes violating zeros = 2m <= 2 lambda', mismatches, 0
        )
    )
    return result


def accept_mode_profile(config, degree=256) -> ExperimentResult:
    result = ExperimentResult('accept-14-mode-profile')
    profile = qer_mode_profile(degree)
    result.tables['profile'] = (('sigma', 'weight', 'arcsine'), profile.rows())
    result.criteria.append(
        at_most(
            '14',
            'equator weight CDF distance to the arcsine law',
            profile.cdf_distance,
            0.05,
        )
    )
    return result


ACCEPTANCE_SUITE: Tuple[Callable[..., ExperimentResult], ...] = (
    accept_nodal_length,
    accept_dong_identity,
    accept_weyl,
    accept_sogge,
    accept_courant_pleijel,
    accept_faber_krahn,
    accept_poisson,
    accept_kernel_gradient,
    accept_kuznecov,
    accept_density_one,
    accept_cx_growth,
    accept_cx_zeros,
    accept_boundary_zeros,
    accept_mode_profile,
)
