"""Holomorphic continuation into Grauert tubes and complex zero counting."""

from collections import deque
from dataclasses import dataclass
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import (
    ArgumentPrincipleError,
    BoundaryZeroError,
    GrowthBoundError,
    OutsideTubeError,
    SubdivisionDepthError,
    TubeChartError,
    UnsupportedSurfaceError,
    VanishingRestrictionError,
)
from .factory import EigenFnFactory
from .geom import (
    STRIP_EPS,
    TORUS,
    CxPoint,
    GeodesicSegment,
    Sphere,
    StripPoint,
    Surface,
    Torus,
)
from .modes import EigenFn

_LOGGER = logging.getLogger(__name__)

TUBE_RADIUS = 1.0
GROWTH_ENVELOPE = 8.0
BOUNDARY_RTOL = 1e-10
# a period start is accepted once |g| on its edge clears this share of the best
PERIOD_EDGE_SHARE = 1e-3
COUNT_RESIDUAL = 0.1
NUDGE_ATTEMPTS = 5
NUDGE_FRACTION = 1e-3
MAX_DEPTH = 40
ROUND_TRIP_TOL = 1e-8
# largest phase step allowed between boundary samples
MAX_PHASE_STEP = math.pi / 4
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
# off-centre split points keep child edges away from symmetric zero rows
_SPLITS = ((0.4871, 0.5371), (0.4413, 0.5779), (0.5523, 0.4627))


# --- The tube ---


def grauert_rho(surface: Surface, z: CxPoint) -> float:
    """√ρ(z): |Im ζ| on the torus, arccosh(Σ|z_i|²)/2 on the sphere."""
    if z.surface != surface:
        raise UnsupportedSurfaceError(
            f"{z} is not a point of the complexified {surface}"
        )
    coords = z.array
    if isinstance(surface, Torus):
        return float(np.linalg.norm(coords.imag))
    if isinstance(surface, Sphere):
        invariant = float(np.sum(np.abs(coords) ** 2))
        return 0.5 * math.acosh(max(invariant, 1.0))
    raise UnsupportedSurfaceError(f"the {surface} has no Grauert tube here")


def complexified_exp(surface: Surface, x, xi) -> CxPoint:
    """exp_x(iξ); ξ in orthonormal-frame components at the chart point x."""
    xi = np.asarray(xi, dtype=float)
    if isinstance(surface, Torus):
        return CxPoint(surface, (x[0] + 1j * xi[0], x[1] + 1j * xi[1]))
    if isinstance(surface, Sphere):
        point = Sphere.embed(*x)
        e_phi, e_theta = Sphere.frame(*x)
        norm = float(np.hypot(*xi))
        if norm == 0.0:
            return CxPoint(surface, tuple(point))
        direction = (xi[0] * e_phi + xi[1] * e_theta) / norm
        coords = math.cosh(norm) * point + 1j * math.sinh(norm) * direction
        z = CxPoint(surface, tuple(coords))
        gap = abs(grauert_rho(surface, z) - norm)
        if gap > ROUND_TRIP_TOL * max(1.0, norm):
            raise TubeChartError(f"√ρ round trip missed |ξ| = {norm} by {gap:.3g}")
        return z
    raise UnsupportedSurfaceError(f"the {surface} is not complexified")


def eval_cx(fn: EigenFn, z: CxPoint, tube: float = TUBE_RADIUS) -> complex:
    """Holomorphic continuation of fn at a point of the tube √ρ <= tube."""
    rho = grauert_rho(fn.surface, z)
    if rho > tube:
        raise OutsideTubeError(f"√ρ = {rho:.6g} lies outside the tube of radius {tube}")
    return complex(fn.value_cx(z.array))


@dataclass(frozen=True)
class GrowthRate:
    """u = (1/λ)·log|φ^C(z)|² against 2√ρ(z)."""

    u: float
    rho: float
    lam: float

    @property
    def deviation(self) -> float:
        return self.u - 2.0 * self.rho

    @property
    def constant(self) -> float:
        """C with u = 2√ρ + C·log(λ)/λ."""
        return self.deviation * self.lam / math.log(self.lam)


def growth_rate(
    fn: EigenFn,
    z: CxPoint,
    envelope: Optional[float] = GROWTH_ENVELOPE,
    tube: float = TUBE_RADIUS,
) -> GrowthRate:
    """Growth exponent of fn at z; envelope=None skips the bound."""
    lam = fn.frequency
    if lam <= 1.0:
        raise ValueError(f"growth rates need λ > 1, got {lam}")
    value = eval_cx(fn, z, tube)
    u = math.log(max(abs(value), 1e-300) ** 2) / lam
    result = GrowthRate(u, grauert_rho(fn.surface, z), lam)
    if envelope is not None and result.constant > envelope:
        raise GrowthBoundError(
            f"u = {u:.6g} exceeds 2√ρ + {envelope}·log λ/λ at √ρ = {result.rho:.6g}, "
            f"λ = {lam:.6g} (C = {result.constant:.4g})"
        )
    return result


# --- Rectangles of the strip ---


@dataclass(frozen=True)
class StripRect:
    """[t0, t1] x [tau0, tau1] inside the strip |tau| <= eps."""

    t0: float
    t1: float
    tau0: float
    tau1: float
    eps: float = STRIP_EPS

    def __post_init__(self):
        if not (self.t1 > self.t0 and self.tau1 > self.tau0):
            raise ValueError(f"rectangle has no area: {self}")
        if max(abs(self.tau0), abs(self.tau1)) > self.eps + 1e-12:
            raise OutsideTubeError(
                f"rectangle leaves the strip |tau| <= {self.eps}: {self}"
            )

    @property
    def diameter(self) -> float:
        return math.hypot(self.t1 - self.t0, self.tau1 - self.tau0)

    @property
    def centre(self) -> complex:
        return complex(0.5 * (self.t0 + self.t1), 0.5 * (self.tau0 + self.tau1))

    def corners(self):
        return (
            complex(self.t0, self.tau0),
            complex(self.t1, self.tau0),
            complex(self.t1, self.tau1),
            complex(self.t0, self.tau1),
        )

    def contains(self, w: complex) -> bool:
        return self.t0 <= w.real <= self.t1 and self.tau0 <= w.imag <= self.tau1

    def expanded(self, delta: float) -> 'StripRect':
        """Grown by delta on every side, clipped to the strip."""
        return StripRect(
            self.t0 - delta,
            self.t1 + delta,
            max(self.tau0 - delta, -self.eps),
            min(self.tau1 + delta, self.eps),
            self.eps,
        )

    def shifted(self, delta: float) -> 'StripRect':
        """Moved by delta along t and grown by delta in tau; the t-width is kept."""
        return StripRect(
            self.t0 + delta,
            self.t1 + delta,
            max(self.tau0 - delta, -self.eps),
            min(self.tau1 + delta, self.eps),
            self.eps,
        )

    def split(self, ft: float = 0.5, ftau: float = 0.5) -> Tuple['StripRect', ...]:
        tm = self.t0 + ft * (self.t1 - self.t0)
        taum = self.tau0 + ftau * (self.tau1 - self.tau0)
        return (
            StripRect(self.t0, tm, self.tau0, taum, self.eps),
            StripRect(tm, self.t1, self.tau0, taum, self.eps),
            StripRect(self.t0, tm, taum, self.tau1, self.eps),
            StripRect(tm, self.t1, taum, self.tau1, self.eps),
        )

    @classmethod
    def around(cls, w: complex, radius: float, eps: float = STRIP_EPS):
        eps = max(eps, abs(w.imag) + radius)
        return cls(
            w.real - radius, w.real + radius, w.imag - radius, w.imag + radius, eps
        )


# --- The restricted holomorphic function ---


class GeodesicRestriction:
    """g(w) = φ^C(γ(w)) along a complexified geodesic, with its derivative."""

    def __init__(self, fn: EigenFn, seg: GeodesicSegment):
        if seg.surface != fn.surface:
            raise UnsupportedSurfaceError(f"{seg} is not on the {fn.surface}")
        self.fn = fn
        self.seg = seg
        self.step = 1e-3 / max(fn.frequency, 1.0)
        # RMS of fn over the surface
        self.scale = fn.l2_norm / math.sqrt(fn.surface.area)

    def __call__(self, w):
        return np.asarray(self.fn.value_cx(self.seg.cx_coordinates(w)), dtype=complex)

    def derivative(self, w):
        """Four-point complex-step derivative, exact through degree four."""
        w = np.asarray(w, dtype=complex)
        h = self.step
        total = 0.0
        for k in range(4):
            direction = 1j**k
            total = total + self(w + h * direction) / direction
        return total / (4.0 * h)

    def centred_difference(self, w, h: Optional[float] = None):
        h = h or 1e-5 / max(self.fn.frequency, 1.0)
        return (self(w + h) - self(w - h)) / (2.0 * h)


def cauchy_riemann_residual(fn: EigenFn, seg: GeodesicSegment, w) -> float:
    """Relative gap between the complex-step and the real finite-difference g'."""
    g = GeodesicRestriction(fn, seg)
    stepped = g.derivative(w)
    centred = g.centred_difference(w)
    scale = max(float(np.max(np.abs(stepped))), 1e-300)
    return float(np.max(np.abs(stepped - centred))) / scale


@dataclass(frozen=True)
class ArgumentCount:
    count: int
    winding: float
    integral: float

    @property
    def residual(self) -> float:
        return abs(self.integral - self.count)


def _edge_points(a: complex, b: complex, n: int):
    return a + (b - a) * np.arange(n) / n


def argument_count(g: GeodesicRestriction, rect: StripRect) -> ArgumentCount:
    """Zeros of g inside rect by the argument principle.

    The boundary is refined until successive phase steps stay below π/4;
    the count is checked against a Gauss-Legendre quadrature of g'/g.
    """
    corners = rect.corners()
    lam = max(g.fn.frequency, 1.0)
    per_edge = [
        max(32, int(16 * lam * abs(b - a)))
        for a, b in zip(corners, corners[1:] + corners[:1])
    ]
    for _ in range(8):
        points = np.concatenate(
            [
                _edge_points(a, b, n)
                for (a, b), n in zip(zip(corners, corners[1:] + corners[:1]), per_edge)
            ]
        )
        values = g(points)
        size = np.abs(values)
        if np.max(size) < BOUNDARY_RTOL * g.scale:
            raise VanishingRestrictionError(
                f"{g.fn.describe()} vanishes along {g.seg} on the boundary of {rect}"
            )
        if np.min(size) < BOUNDARY_RTOL * max(np.max(size), g.scale):
            raise BoundaryZeroError(f"g nearly vanishes on the boundary of {rect}")
        steps = np.angle(np.roll(values, -1) / values)
        if np.max(np.abs(steps)) < MAX_PHASE_STEP:
            break
        per_edge = [2 * n for n in per_edge]
    else:
        raise BoundaryZeroError(
            f"phase of g does not settle along the boundary of {rect}"
        )
    winding = float(np.sum(steps)) / (2.0 * math.pi)

    integral = 0.0
    for (a, b), n in zip(zip(corners, corners[1:] + corners[:1]), per_edge):
        panels = max(1, n // 8)
        width = (b - a) / panels
        mids = a + width * (np.arange(panels) + 0.5)
        nodes = mids[:, None] + 0.5 * width * _GL_NODES[None, :]
        integrand = g.derivative(nodes) / g(nodes)
        integral += complex(np.sum(integrand * _GL_WEIGHTS[None, :]) * 0.5 * width)
    integral = integral / (2j * math.pi)
    count = int(round(winding))
    result = ArgumentCount(count, winding, float(integral.real))
    if result.residual > COUNT_RESIDUAL or abs(integral.imag) > COUNT_RESIDUAL:
        raise ArgumentPrincipleError(
            f"contour integral {integral:.6g} is not close to the winding count {count}"
        )
    return result


def count_zeros_rect(
    fn: EigenFn, seg: GeodesicSegment, rect: StripRect, attempts: int = NUDGE_ATTEMPTS
) -> int:
    """Zeros of φ^C∘γ in rect, counted with multiplicity.

    A zero on the boundary moves the edges outwards by 1e-3 of the
    diameter per attempt.
    """
    g = GeodesicRestriction(fn, seg)
    return _count_with_nudges(g, rect, attempts)[0]


def _is_period(seg: GeodesicSegment, rect: StripRect) -> bool:
    return seg.closed and math.isclose(
        rect.t1 - rect.t0, seg.length, rel_tol=1e-12, abs_tol=1e-12
    )


def _count_with_nudges(g, rect, attempts):
    attempts = max(1, attempts)
    # a full period must not grow, or a zero at its ends is counted twice
    move = rect.shifted if _is_period(g.seg, rect) else rect.expanded
    last_exc = None
    for attempt in range(attempts + 1):
        current = rect if attempt == 0 else move(
            attempt * NUDGE_FRACTION * rect.diameter
        )
        try:
            return argument_count(g, current).count, current
        except BoundaryZeroError as exc:
            last_exc = exc
            if attempt < attempts:
                _LOGGER.debug(
                    "Nudging %s after %r (attempt %d/%d)",
                    rect,
                    exc,
                    attempt + 1,
                    attempts,
                )
    raise last_exc


def period_rect(g: GeodesicRestriction, eps: float, candidates: int = 0) -> StripRect:
    """One period [t0, t0 + L] x [-eps, eps] of a closed geodesic.

    t0 = 0 is kept unless g comes close to zero on that edge; otherwise t0
    moves to the candidate start whose edge stays furthest from the zeros.
    """
    seg = g.seg
    if not seg.closed:
        raise ValueError(f"{seg} is not closed")
    lam = max(g.fn.frequency, 1.0)
    count = candidates or max(64, int(8 * lam * seg.length))
    starts = seg.length * np.arange(count) / count
    tau = np.linspace(-eps, eps, 17)
    edges = np.abs(g(starts[:, None] + 1j * tau[None, :]))
    floors = np.min(edges, axis=1)
    best = int(np.argmax(floors))
    if floors[best] < BOUNDARY_RTOL * g.scale:
        raise VanishingRestrictionError(f"{g.fn.describe()} vanishes along {seg}")
    chosen = 0 if floors[0] >= PERIOD_EDGE_SHARE * floors[best] else best
    t0 = float(starts[chosen])
    if chosen:
        _LOGGER.debug("Period of %s starts at t0 = %.6g", seg, t0)
    return StripRect(t0, t0 + seg.length, -eps, eps, eps)


# --- Zero isolation ---


@dataclass(frozen=True)
class ZeroSet:
    points: Tuple[Tuple[StripPoint, int], ...]
    partial: bool = False

    @property
    def total(self) -> int:
        return sum(multiplicity for _, multiplicity in self.points)

    def rows(self):
        """(t, tau, multiplicity) rows."""
        return [
            (f"{point.t:.12g}", f"{point.tau:.6g}", multiplicity)
            for point, multiplicity in self.points
        ]


def _newton(
    g: GeodesicRestriction, start: complex, multiplicity: int, iterations: int = 60
):
    z = start
    for _ in range(iterations):
        value = complex(g(z))
        if value == 0:
            return z
        slope = complex(g.derivative(z))
        if slope == 0:
            return None
        step = multiplicity * value / slope
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            return z
    return None


def _split_counts(g, cell, count):
    for ft, ftau in _SPLITS:
        children = cell.split(ft, ftau)
        try:
            counts = [argument_count(g, child).count for child in children]
        except BoundaryZeroError:
            continue
        if sum(counts) == count:
            return list(zip(children, counts))
    raise ArgumentPrincipleError(f"could not split {cell} holding {count} zeros")


def zero_locations(
    fn: EigenFn, seg: GeodesicSegment, rect: StripRect, max_depth: int = MAX_DEPTH
) -> ZeroSet:
    """Isolate the zeros in rect by subdivision and polish them by Newton's method."""
    g = GeodesicRestriction(fn, seg)
    total, root = _count_with_nudges(g, rect, NUDGE_ATTEMPTS)
    found: List[Tuple[StripPoint, int]] = []
    queue = deque([(root, total, 0)])
    while queue:
        cell, count, depth = queue.popleft()
        if count == 0:
            continue
        if depth > max_depth:
            partial = ZeroSet(tuple(found), partial=True)
            _LOGGER.warning(
                "Zero isolation stopped at depth %d with %d of %d zeros",
                depth,
                partial.total,
                total,
            )
            raise SubdivisionDepthError(
                f"subdivision deeper than {max_depth} levels in {cell}", partial=partial
            )
        zero = _newton(g, cell.centre, count)
        if zero is not None and cell.contains(zero):
            radius = max(1e-4 * cell.diameter, 1e-9)
            try:
                ball = StripRect.around(zero, radius, rect.eps)
                local = argument_count(g, ball).count
            except (
                BoundaryZeroError,
                ArgumentPrincipleError,
                VanishingRestrictionError,
            ):
                local = -1
            if local == count:
                eps = max(rect.eps, abs(zero.imag))
                found.append((StripPoint(zero.real, zero.imag, eps), count))
                continue
        for child, child_count in _split_counts(g, cell, count):
            if child_count:
                queue.append((child, child_count, depth + 1))
    _LOGGER.debug(
        "Isolated %d zeros (total multiplicity %d) in %s", len(found), total, rect
    )
    found.sort(key=lambda item: (item[0].t, item[0].tau))
    return ZeroSet(tuple(found))


# --- Currents of zeros ---


@dataclass(frozen=True)
class DensityRecord:
    """Normalized zero measure (1/λ)Σδ of one ray member.

    The measure lives on [t0, t0 + L] x [-eps, eps].
    """

    multiple: int
    lam: float
    zeros: ZeroSet
    length: float
    delta: float

    @property
    def near_real_fraction(self) -> float:
        if not self.zeros.total:
            return 1.0
        near = sum(m for point, m in self.zeros.points if abs(point.tau) <= self.delta)
        return near / self.zeros.total

    @property
    def t_density(self) -> float:
        return self.zeros.total / (self.lam * self.length)


@dataclass(frozen=True)
class IntersectionDensity:
    direction: Tuple[int, int]
    xi: Tuple[float, float]
    records: Tuple[DensityRecord, ...]

    @property
    def expected(self) -> float:
        """|<k0/|k0|, ξ0>|/π."""
        k = np.asarray(self.direction, dtype=float)
        return abs(float(np.dot(k / np.linalg.norm(k), self.xi))) / math.pi

    @property
    def ergodic_prediction(self) -> float:
        return 1.0 / math.pi

    def rows(self):
        """(M, lambda, zeros, near_real_fraction, t_density, expected) rows."""
        return [
            (
                record.multiple,
                f"{record.lam:.12g}",
                record.zeros.total,
                f"{record.near_real_fraction:.6g}",
                f"{record.t_density:.8g}",
                f"{self.expected:.8g}",
            )
            for record in self.records
        ]


def intersection_density(
    direction: Tuple[int, int],
    seg: GeodesicSegment,
    multiples: Sequence[int],
    eps: float = 0.1,
    delta: float = 1e-8,
) -> IntersectionDensity:
    """Zeros of the complexified torus ray M·k0 along seg, per unit λ and t."""
    if not isinstance(seg.surface, Torus):
        raise UnsupportedSurfaceError(
            "intersection densities are measured on the torus"
        )
    records = []
    for multiple in multiples:
        fn = EigenFnFactory(TORUS, family='torusray', index=multiple, k=direction)
        if seg.closed:
            rect = period_rect(GeodesicRestriction(fn, seg), eps)
        else:
            rect = StripRect(0.0, seg.length, -eps, eps, eps)
        zeros = zero_locations(fn, seg, rect)
        records.append(DensityRecord(multiple, fn.frequency, zeros, seg.length, delta))
        _LOGGER.debug("Ray multiple %d: %d zeros", multiple, zeros.total)
    return IntersectionDensity(tuple(direction), tuple(seg.direction), tuple(records))


def poincare_lelong_count(
    fn: EigenFn, seg: GeodesicSegment, rect: StripRect, resolution: int = 256
) -> float:
    """(1/4π) Σ Δ_h log|g|² · cell area over the interior nodes of rect."""
    g = GeodesicRestriction(fn, seg)
    nt = max(8, int(resolution))
    ntau = max(8, int(resolution) // 2 * 2)
    ht = (rect.t1 - rect.t0) / nt
    htau = (rect.tau1 - rect.tau0) / ntau
    t = rect.t0 + (np.arange(nt) + 0.5) * ht
    tau = rect.tau0 + (np.arange(ntau) + 0.5) * htau
    values = np.abs(g(t[:, None] + 1j * tau[None, :])) ** 2
    if np.max(values) < (BOUNDARY_RTOL * g.scale) ** 2:
        raise VanishingRestrictionError(
            f"{fn.describe()} vanishes along {seg} in {rect}"
        )
    log_size = np.log(np.maximum(values, 1e-300))
    inner = log_size[1:-1, 1:-1]
    along = (log_size[2:, 1:-1] - 2 * inner + log_size[:-2, 1:-1]) / ht**2
    across = (log_size[1:-1, 2:] - 2 * inner + log_size[1:-1, :-2]) / htau**2
    laplacian = along + across
    return float(np.sum(laplacian) * ht * htau / (4.0 * math.pi))
