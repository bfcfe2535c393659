"""Nodal sets, nodal domains and the local structure of zeros."""

from collections import defaultdict
from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .bessel import J01, PLEIJEL_CONSTANT
from .exceptions import (
    OrderDetectionError,
    UnsupportedSurfaceError,
    VanishingRestrictionError,
)
from .geom import TWO_PI, Disc, Sphere, Surface, Torus
from .grid import GridField
from .modes import EigenFn, check_real
from .unionfind import DisjointSet

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NodalCurveSet:
    """Polylines approximating {f = level}, in reduced chart coordinates.

    A closed polyline repeats its first vertex at the end.
    """

    surface: Surface
    polylines: Tuple[np.ndarray, ...]
    closed: Tuple[bool, ...]
    lengths: Tuple[float, ...]
    resolution: int
    h: float
    fingerprint: tuple
    level: float = 0.0

    @property
    def total_length(self) -> float:
        return float(sum(self.lengths))

    @property
    def component_count(self) -> int:
        return len(self.polylines)

    def segments(self):
        """(start, end) chart arrays of all polyline segments."""
        if not self.polylines:
            empty = np.empty((0, 2))
            return empty, empty
        starts = np.concatenate([line[:-1] for line in self.polylines])
        ends = np.concatenate([line[1:] for line in self.polylines])
        return starts, ends

    def midpoints(self):
        """Chart midpoints and metric lengths of all segments."""
        starts, ends = self.segments()
        return (
            chart_midpoints(self.surface, starts, ends),
            self.surface.segment_lengths(starts, ends),
        )

    def rows(self):
        """(polyline, vertex, u, v, closed) rows for the vertex table."""
        rows = []
        for index, (line, closed) in enumerate(zip(self.polylines, self.closed)):
            for vertex, (u, v) in enumerate(line):
                rows.append((index, vertex, f"{u:.10f}", f"{v:.10f}", int(closed)))
        return rows


def _periods(surface):
    if isinstance(surface, Torus):
        return (1.0, 1.0)
    return (None, TWO_PI)


def chart_midpoints(surface: Surface, starts, ends):
    """Midpoints of short chart segments, unwrapping periodic axes."""
    starts = np.asarray(starts, dtype=float)
    delta = np.asarray(ends, dtype=float) - starts
    for axis, period in enumerate(_periods(surface)):
        if period:
            delta[:, axis] -= period * np.round(delta[:, axis] / period)
    mid = starts + 0.5 * delta
    for axis, period in enumerate(_periods(surface)):
        if period:
            mid[:, axis] = np.mod(mid[:, axis], period)
    return mid


@dataclass(frozen=True)
class _AugmentedGrid:
    u: np.ndarray
    v: np.ndarray
    values: np.ndarray
    u_period: Optional[float]
    v_period: float

    @property
    def cell_rows(self):
        return self.u.size if self.u_period else self.u.size - 1

    def next_u(self):
        nxt = np.roll(self.u, -1)
        if self.u_period:
            nxt[-1] += self.u_period
        return nxt

    def next_v(self):
        nxt = np.roll(self.v, -1)
        nxt[-1] += self.v_period
        return nxt


def _augment(field: GridField) -> _AugmentedGrid:
    """Append the cap rows so that the poles and the centre close the mesh."""
    grid = field.grid
    u_period, v_period = _periods(field.surface)
    u, values = grid.u, field.values
    if isinstance(field.surface, Sphere):
        north, south = field.cap_values
        u = np.concatenate([[0.0], u, [math.pi]])
        values = np.vstack(
            [np.full(grid.v.size, north), values, np.full(grid.v.size, south)]
        )
    elif isinstance(field.surface, Disc):
        (centre,) = field.cap_values
        u = np.concatenate([[0.0], u])
        values = np.vstack([np.full(grid.v.size, centre), values])
    return _AugmentedGrid(u, grid.v, values, u_period, v_period)


def _crossings(values, other):
    """Linear-interpolation parameter of sign changes between two arrays."""
    crossing = (values > 0) != (other > 0)
    with np.errstate(divide='ignore', invalid='ignore'):
        t = np.where(crossing, values / (values - other), np.nan)
    return crossing, t


def extract_nodal(field: GridField) -> NodalCurveSet:
    """Marching squares on the chart grid, linked into polylines."""
    aug = _augment(field)
    nu, nv = aug.values.shape
    rows = aug.cell_rows
    down = (np.arange(rows) + 1) % nu
    right = (np.arange(nv) + 1) % nv
    u_next = aug.next_u()
    v_next = aug.next_v()

    # u-edges join (i, j) and (i+1, j); v-edges join (i, j) and (i, j+1)
    cross_u, t_u = _crossings(aug.values[:rows], aug.values[down])
    cross_v, t_v = _crossings(aug.values, aug.values[:, right])
    n_u_edges = rows * nv
    points = np.full((n_u_edges + nu * nv, 2), np.nan)
    uu = aug.u[:rows, None] + t_u * (u_next[:rows, None] - aug.u[:rows, None])
    points[:n_u_edges, 0] = uu.ravel()
    points[:n_u_edges, 1] = np.broadcast_to(aug.v[None, :], (rows, nv)).ravel()
    vv = aug.v[None, :] + t_v * (v_next - aug.v)[None, :]
    points[n_u_edges:, 0] = np.broadcast_to(aug.u[:, None], (nu, nv)).ravel()
    points[n_u_edges:, 1] = vv.ravel()
    if aug.u_period:
        points[:, 0] = np.mod(points[:, 0], aug.u_period)
    points[:, 1] = np.mod(points[:, 1], aug.v_period)

    cell_i, cell_j = np.meshgrid(np.arange(rows), np.arange(nv), indexing='ij')
    edge_ids = np.stack(
        [
            cell_i * nv + cell_j,
            n_u_edges + down[cell_i] * nv + cell_j,
            cell_i * nv + right[cell_j],
            n_u_edges + cell_i * nv + cell_j,
        ]
    )
    present = np.stack(
        [
            cross_u,
            cross_v[down],
            cross_u[:, right],
            cross_v[:rows],
        ]
    )
    counts = present.sum(axis=0)

    pairs = []
    simple = counts == 2
    if np.any(simple):
        first = np.argmax(present, axis=0)[simple]
        last = 3 - np.argmax(present[::-1], axis=0)[simple]
        ids = edge_ids[:, simple]
        columns = np.arange(ids.shape[1])
        pairs.append(np.stack([ids[first, columns], ids[last, columns]], axis=1))

    saddle = counts == 4
    if np.any(saddle):
        si, sj = cell_i[saddle], cell_j[saddle]
        cu = 0.5 * (aug.u[si] + u_next[si])
        cv = 0.5 * (aug.v[sj] + v_next[sj])
        if aug.u_period:
            cu = np.mod(cu, aug.u_period)
        cv = np.mod(cv, aug.v_period)
        centre = np.real(field.fn.value(cu, cv)) - field.level
        same = (centre > 0) == (aug.values[si, sj] > 0)
        ids = edge_ids[:, saddle]
        # centre sign of corner 0: corners 1 and 3 are cut off
        a = np.where(same, ids[0], ids[3])
        b = np.where(same, ids[1], ids[0])
        c = np.where(same, ids[2], ids[1])
        d = np.where(same, ids[3], ids[2])
        pairs.append(np.stack([a, b], axis=1))
        pairs.append(np.stack([c, d], axis=1))
        _LOGGER.debug(
            "Resolved %d saddle cells by their centre sample", int(saddle.sum())
        )

    segments = np.concatenate(pairs) if pairs else np.empty((0, 2), dtype=np.int64)
    chains = _link(segments)
    polylines, closed, lengths = [], [], []
    for chain in chains:
        line = points[chain]
        polylines.append(line)
        closed.append(len(chain) > 2 and chain[0] == chain[-1])
        pieces = field.surface.segment_lengths(line[:-1], line[1:])
        lengths.append(float(np.sum(pieces)))

    curves = NodalCurveSet(
        field.surface,
        tuple(polylines),
        tuple(closed),
        tuple(lengths),
        field.resolution,
        field.h,
        field.fingerprint,
        field.level,
    )
    _LOGGER.debug(
        "Extracted %d nodal polylines of total length %.6g on the %s",
        curves.component_count,
        curves.total_length,
        field.surface,
    )
    return curves


def _link(segments) -> List[List[int]]:
    """Chain segments sharing an edge point; open chains first."""
    touching = defaultdict(list)
    for index, (a, b) in enumerate(segments.tolist()):
        touching[a].append(index)
        touching[b].append(index)
    used = np.zeros(len(segments), dtype=bool)
    chains = []

    def walk(segment, edge):
        chain = [edge]
        while True:
            used[segment] = True
            a, b = segments[segment]
            edge = int(b) if int(a) == edge else int(a)
            chain.append(edge)
            following = [s for s in touching[edge] if not used[s]]
            if not following:
                return chain
            segment = following[0]

    for edge in sorted(touching):
        if len(touching[edge]) == 1 and not used[touching[edge][0]]:
            chains.append(walk(touching[edge][0], edge))
    for segment in range(len(segments)):
        if not used[segment]:
            chains.append(walk(segment, int(segments[segment][0])))
    return chains


# --- Nodal domains ---


@dataclass(frozen=True, eq=False)
class DomainDecomposition:
    """Nodal domains as labels of the grid nodes."""

    surface: Surface
    labels: np.ndarray
    areas: np.ndarray
    signs: np.ndarray
    resolution: int
    fingerprint: tuple

    @property
    def domain_count(self) -> int:
        return int(self.areas.size)

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))

    def rows(self):
        return [
            (index, int(sign), f"{area:.12g}")
            for index, (sign, area) in enumerate(zip(self.signs, self.areas))
        ]


def label_components(classes, surface: Surface):
    """4-connected components of equal class values, glued across periodic seams.

    The poles and the disc centre do not connect nodes across them.
    Labels are numbered by first appearance in row-major order.
    """
    ids = np.full(classes.shape, -1, dtype=np.int64)
    total = 0
    for value in np.unique(classes):
        labels, count = ndimage.label(classes == value)
        ids = np.where(labels > 0, labels - 1 + total, ids)
        total += count
    forest = DisjointSet(total)
    axes = (0, 1) if isinstance(surface, Torus) else (1,)
    for axis in axes:
        same = np.take(classes, 0, axis=axis) == np.take(classes, -1, axis=axis)
        forest.merge_pairs(
            np.take(ids, 0, axis=axis)[same], np.take(ids, -1, axis=axis)[same]
        )
    roots = forest.roots()[ids]
    _, first_seen, inverse = np.unique(
        roots.ravel(), return_index=True, return_inverse=True
    )
    rank = np.argsort(np.argsort(first_seen))
    return rank[inverse].reshape(classes.shape), int(first_seen.size)


def count_domains(field: GridField) -> DomainDecomposition:
    """Nodal domains: connected components of the positive and negative node sets."""
    positive = field.values > 0
    labels, count = label_components(positive.astype(np.int8), field.surface)
    areas = np.bincount(labels.ravel(), weights=field.weights.ravel(), minlength=count)
    signs = np.zeros(count, dtype=int)
    signs[labels.ravel()] = np.where(positive.ravel(), 1, -1)
    _LOGGER.debug("Counted %d nodal domains on the %s", count, field.surface)
    return DomainDecomposition(
        field.surface, labels, areas, signs, field.resolution, field.fingerprint
    )


@dataclass(frozen=True)
class FaberKrahnResult:
    """Relative margins (area - bound)/bound per domain."""

    bound: float
    margins: np.ndarray
    tolerance: float = 0.02

    @property
    def worst(self) -> float:
        return float(np.min(self.margins))

    @property
    def passed(self) -> bool:
        return self.worst >= -self.tolerance


def faber_krahn_check(dec: DomainDecomposition, lam: float, tolerance: float = 0.02):
    """Compare each domain area with π·j₀₁²/λ².

    That is the area of the disc whose first Dirichlet eigenvalue is λ².
    """
    bound = math.pi * J01**2 / lam**2
    margins = (dec.areas - bound) / bound
    result = FaberKrahnResult(bound, margins, tolerance)
    if not result.passed:
        _LOGGER.warning("Faber-Krahn margin %.4f below -%.2f", result.worst, tolerance)
    return result


# --- Local geometry around a point ---


def normal_coordinates(surface: Surface, centre, x1, x2):
    """Chart points of exp_centre(x1·e1 + x2·e2).

    Sphere: e1, e2 = (e_phi, e_theta) at the centre. Torus and disc:
    the coordinate axes.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if isinstance(surface, Torus):
        return np.mod(centre[0] + x1, 1.0), np.mod(centre[1] + x2, 1.0)
    if isinstance(surface, Disc):
        x, y = Disc.cartesian(*centre)
        px, py = x + x1, y + x2
        return np.hypot(px, py), np.mod(np.arctan2(py, px), TWO_PI)
    if isinstance(surface, Sphere):
        point = Sphere.embed(*centre)
        e_phi, e_theta = Sphere.frame(*centre)
        rho = np.hypot(x1, x2)
        safe = np.where(rho > 0, rho, 1.0)
        direction = (x1 / safe)[..., None] * e_phi + (x2 / safe)[..., None] * e_theta
        xyz = np.cos(rho)[..., None] * point + np.sin(rho)[..., None] * direction
        return Sphere.chart_of(xyz)
    raise UnsupportedSurfaceError(f"no normal coordinates on {surface!r}")


def _uniform_centres(surface, trials, rng, margin=0.0):
    if isinstance(surface, Torus):
        pts = rng.random((trials, 2))
        return pts[:, 0], pts[:, 1]
    if isinstance(surface, Sphere):
        xyz = rng.normal(size=(trials, 3))
        return Sphere.chart_of(xyz / np.linalg.norm(xyz, axis=1, keepdims=True))
    radius = max(0.0, 1.0 - margin)
    r = radius * np.sqrt(rng.random(trials))
    return r, TWO_PI * rng.random(trials)


@dataclass(frozen=True)
class SmallBallResult:
    """Outcome of the small-ball nodal check."""

    passed: bool
    worst_margin: float
    max_distance: float
    calibrated_A: Optional[float] = None  # pylint: disable=invalid-name
    failed_center: Optional[Tuple[float, float]] = None


def _distance_to_sign_change(fn, surface, centre, reach, step, angles):
    """Radius of the first sampled ring carrying a sign change, or inf."""
    sign = np.real(fn.value(*centre)) > 0
    alphas = TWO_PI * np.arange(angles) / angles
    radii = np.arange(1, int(math.ceil(reach / step)) + 1) * step
    x1 = np.outer(radii, np.cos(alphas))
    x2 = np.outer(radii, np.sin(alphas))
    u, v = normal_coordinates(surface, centre, x1, x2)
    if isinstance(surface, Disc):
        inside = u <= 1.0
        values = np.where(inside, np.real(fn.value(np.minimum(u, 1.0), v)), np.nan)
    else:
        values = np.real(fn.value(u, v))
    flipped = np.any(((values > 0) != sign) & ~np.isnan(values), axis=1)
    hits = np.flatnonzero(flipped)
    return float(radii[hits[0]]) if hits.size else math.inf


def small_ball_check(
    fn: EigenFn,
    A: float,  # pylint: disable=invalid-name
    trials: int = 200,
    calibrate: bool = False,
    seed: int = 12345,
    angles: int = 64,
) -> SmallBallResult:
    """Check that balls of radius A/λ around random centres meet the nodal set.

    In calibration mode the search runs past A/λ and calibrated_A is the
    smallest A for which every sampled ball contains a sign change.
    """
    check_real(fn, "small_ball_check")
    lam = fn.frequency
    if lam <= 0 or A <= 0:
        raise ValueError(f"small_ball_check needs lambda > 0 and A > 0, got {lam}, {A}")
    radius = A / lam
    step = 0.02 / lam
    reach = max(4.0 * radius, 10.0 / lam) if calibrate else 2.0 * radius
    if isinstance(fn.surface, Sphere):
        reach = min(reach, math.pi)
    rng = np.random.default_rng(seed)
    us, vs = _uniform_centres(fn.surface, trials, rng, margin=radius)
    distances = np.array(
        [
            _distance_to_sign_change(fn, fn.surface, (u, v), reach, step, angles)
            for u, v in zip(us, vs)
        ]
    )
    worst = int(np.argmax(distances))
    max_distance = float(distances[worst])
    passed = bool(max_distance <= radius)
    margin = radius - max_distance if math.isfinite(max_distance) else -radius
    failed = None if passed else (float(us[worst]), float(vs[worst]))
    calibrated = lam * max_distance if calibrate else None
    _LOGGER.debug(
        "Small-ball check for %s with A=%g: max distance %.4g vs radius %.4g",
        fn.describe(),
        A,
        max_distance,
        radius,
    )
    return SmallBallResult(passed, margin, max_distance, calibrated, failed)


# --- Leading homogeneous polynomial ---

HARMONIC_RTOL = 0.05


@dataclass(frozen=True)
class PolynomialFit:
    """Degree-k fit Σ coefficients[i]·x1^(k-i)·x2^i around a zero."""

    degree: int
    coefficients: np.ndarray
    harmonicity_residual: float
    decay_slope: float

    @property
    def harmonic(self) -> bool:
        return self.harmonicity_residual <= HARMONIC_RTOL

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        k = self.degree
        return sum(c * x1 ** (k - i) * x2**i for i, c in enumerate(self.coefficients))


def _laplacian_coefficients(coefficients):
    k = len(coefficients) - 1
    if k < 2:
        return np.zeros(0)
    a = np.asarray(coefficients, dtype=float)
    j = np.arange(k - 1)
    return a[j] * (k - j) * (k - j - 1) + a[j + 2] * (j + 2) * (j + 1)


def harmonicity_residual(coefficients) -> float:
    """|Δ p| / (k(k-1)|p|) in coefficient norms; 0 for degrees below two."""
    k = len(coefficients) - 1
    norm = float(np.linalg.norm(coefficients))
    if k < 2 or norm == 0:
        return 0.0
    return float(
        np.linalg.norm(_laplacian_coefficients(coefficients)) / (k * (k - 1) * norm)
    )


def leading_polynomial_fit(
    fn: EigenFn, zero, k: int, c: float = 0.25, rings: int = 5
) -> PolynomialFit:
    """Fit the leading homogeneous polynomial of fn at a zero of order k."""
    check_real(fn, "leading_polynomial_fit")
    if k < 1:
        raise ValueError(f"vanishing order must be >= 1, got {k}")
    lam = fn.frequency
    radii = (c / lam) * 2.0 ** -np.arange(rings)
    angles = 4 * k + 16
    alphas = TWO_PI * np.arange(angles) / angles
    x1 = np.outer(radii, np.cos(alphas))
    x2 = np.outer(radii, np.sin(alphas))
    values = np.real(fn.value(*normal_coordinates(fn.surface, zero, x1, x2)))

    averages = np.mean(np.abs(values), axis=1)
    if np.any(averages == 0):
        raise OrderDetectionError(
            f"{fn.describe()} vanishes on a whole circle at {zero}"
        )
    slope = float(np.polyfit(np.log(radii), np.log(averages), 1)[0])
    if abs(slope - k) > 0.25:
        raise OrderDetectionError(
            f"circle averages at {zero} decay like r^{slope:.3f}, not r^{k}"
        )

    design = np.stack([(x1 ** (k - i) * x2**i).ravel() for i in range(k + 1)], axis=1)
    # rescale columns to the outer radius for conditioning
    scale = radii[0] ** k
    coefficients, *_ = np.linalg.lstsq(design / scale, values.ravel(), rcond=None)
    coefficients = coefficients / scale
    fit = PolynomialFit(k, coefficients, harmonicity_residual(coefficients), slope)
    _LOGGER.debug(
        "Leading polynomial of degree %d at %s: slope %.4f, harmonicity residual %.3g",
        k,
        zero,
        slope,
        fit.harmonicity_residual,
    )
    if not fit.harmonic:
        _LOGGER.warning(
            "Leading polynomial of %s at %s is not harmonic: residual %.3g > %.2g",
            fn.describe(),
            zero,
            fit.harmonicity_residual,
            HARMONIC_RTOL,
        )
    return fit


# --- Disc boundary and counting sweeps ---


def boundary_zero_count(fn: EigenFn, samples: Optional[int] = None) -> int:
    """Sign changes of a disc eigenfunction around the boundary circle."""
    check_real(fn, "boundary_zero_count")
    if not isinstance(fn.surface, Disc):
        raise UnsupportedSurfaceError("boundary zeros are counted on the disc")
    top = max(getattr(mode, 'm', 0) for mode, _ in fn.modes)
    samples = samples or max(1024, 32 * top)
    theta = (np.arange(samples) + 0.5) * TWO_PI / samples
    values = np.real(fn.value(np.ones(samples), theta))
    if np.max(np.abs(values)) <= 1e-12 * max(1.0, fn.l2_norm):
        raise VanishingRestrictionError(f"{fn.describe()} vanishes on the boundary")
    positive = values > 0
    return int(np.count_nonzero(positive != np.roll(positive, 1)))


def cluster_indices(modes) -> List[int]:
    """1-based index of the first mode of each eigenvalue cluster, per mode."""
    indices = []
    start = 1
    for position, mode in enumerate(modes, start=1):
        if position == 1 or not math.isclose(
            mode.eigenvalue,
            modes[position - 2].eigenvalue,
            rel_tol=1e-12,
            abs_tol=1e-12,
        ):
            start = position
        indices.append(start)
    return indices


def resolution_for(lam, minimum=64):
    """Power-of-two grid resolution with about six nodes per unit of λ."""
    return max(minimum, int(2 ** math.ceil(math.log2(max(8.0, 6.0 * lam)))))


@dataclass(frozen=True)
class CourantRecord:
    index: int
    mode: object
    lam: float
    domains: int

    @property
    def ratio(self) -> float:
        return self.domains / self.index


def domain_sweep(modes, resolution: Optional[int] = None) -> List[CourantRecord]:
    """Nodal domain counts of each listed mode, indexed by cluster."""
    records = []
    for index, mode in zip(cluster_indices(modes), modes):
        fn = EigenFn.single(mode)
        res = resolution or resolution_for(fn.frequency)
        dec = count_domains(GridField.sample(fn, res))
        records.append(CourantRecord(index, mode, fn.frequency, dec.domain_count))
    return records


def courant_check(records: List[CourantRecord]):
    """Records violating domains <= index (empty when Courant holds)."""
    return [record for record in records if record.domains > record.index]


def pleijel_ratios(records: List[CourantRecord], k_min: int = 20):
    """max of domains/index over records with index >= k_min, and 4/j₁²."""
    window = [record.ratio for record in records if record.index >= k_min]
    return (max(window) if window else math.nan), PLEIJEL_CONSTANT


@dataclass(frozen=True)
class LengthRecord:
    lam: float
    length: float
    resolution: int

    @property
    def ratio(self) -> float:
        return self.length / self.lam


def nodal_length_sweep(fns, resolution: int) -> List[LengthRecord]:
    """Nodal length over a family at one resolution, sorted by λ."""
    records = []
    for fn in sorted(fns, key=lambda item: item.eigenvalue):
        curves = extract_nodal(GridField.sample(fn, resolution))
        records.append(LengthRecord(fn.frequency, curves.total_length, resolution))
    return records


def length_convergence(fn: EigenFn, exact: float, resolutions) -> float:
    """Observed order of the nodal length error under resolution doubling."""
    errors = []
    for resolution in resolutions:
        curves = extract_nodal(GridField.sample(fn, resolution))
        errors.append(abs(curves.total_length - exact))
    errors = np.asarray(errors)
    steps = np.asarray(resolutions, dtype=float)
    ratios = np.log(errors[:-1] / errors[1:]) / np.log(steps[1:] / steps[:-1])
    return float(np.min(ratios))
