"""Model surfaces: the flat torus, the round sphere and the unit disc."""

from dataclasses import dataclass, field
import logging
import math
from typing import Optional, Tuple

import numpy as np

from .exceptions import ChartRangeError, UnsupportedSurfaceError

_LOGGER = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
STRIP_EPS = 0.4
MIN_RESOLUTION = 8

# Slack for chart bounds produced by floating point arithmetic.
_CHART_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Tensor quadrature nodes on a chart.

    u runs along the first array axis, v along the second. cap_points are
    chart points that stand for a whole degenerate row of the chart (the
    sphere's poles, the disc's centre); they carry no weight.
    """

    surface: 'Surface'
    resolution: int
    u: np.ndarray
    v: np.ndarray
    weights: np.ndarray
    h: float
    cap_points: Tuple[Tuple[float, float], ...] = ()

    @property
    def shape(self):
        return self.weights.shape

    @property
    def total_weight(self):
        return float(np.sum(self.weights))


@dataclass(frozen=True)
class Surface:
    """Base surface; subclasses fix the chart and the metric."""

    KIND = None
    GENUS = 0
    AREA = None
    # periodicity of the (u, v) chart axes
    PERIODIC = (False, True)
    U_RANGE = (0.0, 1.0)
    V_RANGE = (0.0, TWO_PI)

    @property
    def kind(self):
        return self.KIND

    @property
    def genus(self):
        return self.GENUS

    @property
    def area(self):
        return self.AREA

    def __str__(self):
        return self.KIND

    def check_chart(self, u, v):
        """Return (u, v) as float arrays, rejecting out-of-range coordinates."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ChartRangeError(f"non-finite chart coordinates on the {self.KIND}")
        for values, (low, high), name in (
            (u, self.U_RANGE, 'u'),
            (v, self.V_RANGE, 'v'),
        ):
            if np.any(values < low - _CHART_SLACK) or np.any(
                values > high + _CHART_SLACK
            ):
                raise ChartRangeError(
                    f"{self.KIND} chart coordinate {name} outside [{low}, {high}]: "
                    f"{values.min()}..{values.max()}"
                )
        return u, v

    def distance(self, p, q):
        """Riemannian distance between chart points p and q."""
        raise NotImplementedError

    def quadrature_grid(self, resolution: int) -> QuadratureGrid:
        """Quadrature nodes and weights summing to the surface area."""
        raise NotImplementedError

    def segment_lengths(self, pa, pb):
        """Metric lengths of the short segments pa[i] -> pb[i] (arrays (n, 2))."""
        pa = np.asarray(pa, dtype=float)
        pb = np.asarray(pb, dtype=float)
        return self.distance((pa[:, 0], pa[:, 1]), (pb[:, 0], pb[:, 1]))

    @staticmethod
    def _check_resolution(resolution):
        if int(resolution) < MIN_RESOLUTION:
            raise ValueError(
                f"quadrature resolution must be >= {MIN_RESOLUTION}, got {resolution}"
            )
        return int(resolution)


@dataclass(frozen=True)
class Torus(Surface):
    """Unit flat torus R^2/Z^2 with chart [0,1)^2."""

    KIND = 'torus'
    GENUS = 1
    AREA = 1.0
    PERIODIC = (True, True)

    def check_chart(self, u, v):
        # any finite point is a valid chart point; reduce modulo the lattice
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ChartRangeError("non-finite chart coordinates on the torus")
        return np.mod(u, 1.0), np.mod(v, 1.0)

    def distance(self, p, q):
        pu, pv = self.check_chart(*p)
        qu, qv = self.check_chart(*q)
        du = pu - qu
        dv = pv - qv
        du = du - np.round(du)
        dv = dv - np.round(dv)
        return np.hypot(du, dv)

    def quadrature_grid(self, resolution):
        n = self._check_resolution(resolution)
        nodes = (np.arange(n) + 0.5) / n
        weights = np.full((n, n), 1.0 / (n * n))
        return QuadratureGrid(self, n, nodes, nodes.copy(), weights, 1.0 / n)


@dataclass(frozen=True)
class Sphere(Surface):
    """Round unit sphere with chart (phi, theta), phi the polar angle."""

    KIND = 'sphere'
    GENUS = 0
    AREA = 4.0 * math.pi
    U_RANGE = (0.0, math.pi)

    @staticmethod
    def embed(phi, theta):
        """Chart -> R^3, stacked on the last axis."""
        phi = np.asarray(phi, dtype=float)
        theta = np.asarray(theta, dtype=float)
        sin_phi = np.sin(phi)
        return np.stack(
            np.broadcast_arrays(
                sin_phi * np.cos(theta), sin_phi * np.sin(theta), np.cos(phi)
            ),
            axis=-1,
        )

    @staticmethod
    def chart_of(xyz):
        """R^3 (last axis) -> chart (phi, theta) with theta in [0, 2pi)."""
        xyz = np.asarray(xyz, dtype=float)
        norm = np.linalg.norm(xyz, axis=-1)
        phi = np.arccos(np.clip(xyz[..., 2] / norm, -1.0, 1.0))
        theta = np.mod(np.arctan2(xyz[..., 1], xyz[..., 0]), TWO_PI)
        return phi, theta

    @staticmethod
    def frame(phi, theta):
        """Orthonormal tangent frame (e_phi, e_theta) at a chart point.

        At the poles this is the limit along the chart meridian theta.
        """
        phi = np.asarray(phi, dtype=float)
        theta = np.asarray(theta, dtype=float)
        e_phi = np.stack(
            np.broadcast_arrays(
                np.cos(phi) * np.cos(theta), np.cos(phi) * np.sin(theta), -np.sin(phi)
            ),
            axis=-1,
        )
        e_theta = np.stack(
            np.broadcast_arrays(-np.sin(theta), np.cos(theta), np.zeros_like(phi)),
            axis=-1,
        )
        return e_phi, e_theta

    def distance(self, p, q):
        a = self.embed(*self.check_chart(*p))
        b = self.embed(*self.check_chart(*q))
        cross = np.linalg.norm(np.cross(a, b), axis=-1)
        return np.arctan2(cross, np.sum(a * b, axis=-1))

    def quadrature_grid(self, resolution):
        n = self._check_resolution(resolution)
        x, w = np.polynomial.legendre.leggauss(n)
        # ascending phi
        phi = np.arccos(x[::-1])
        w_phi = w[::-1]
        theta = (np.arange(2 * n) + 0.5) * (math.pi / n)
        weights = np.outer(w_phi, np.full(2 * n, math.pi / n))
        return QuadratureGrid(
            self,
            n,
            phi,
            theta,
            weights,
            math.pi / n,
            cap_points=((0.0, 0.0), (math.pi, 0.0)),
        )


@dataclass(frozen=True)
class Disc(Surface):
    """Unit disc with polar chart (r, theta)."""

    KIND = 'disc'
    GENUS = 0
    AREA = math.pi

    @staticmethod
    def cartesian(r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return np.stack(np.broadcast_arrays(r * np.cos(theta), r * np.sin(theta)), -1)

    def distance(self, p, q):
        a = self.cartesian(*self.check_chart(*p))
        b = self.cartesian(*self.check_chart(*q))
        return np.linalg.norm(a - b, axis=-1)

    def quadrature_grid(self, resolution):
        n = self._check_resolution(resolution)
        x, w = np.polynomial.legendre.leggauss(n)
        r = 0.5 * (x + 1.0)
        theta = (np.arange(2 * n) + 0.5) * (math.pi / n)
        weights = np.outer(0.5 * w * r, np.full(2 * n, math.pi / n))
        return QuadratureGrid(
            self, n, r, theta, weights, 1.0 / n, cap_points=((0.0, 0.0),)
        )


TORUS = Torus()
SPHERE = Sphere()
DISC = Disc()

_SURFACES = {surface.KIND: surface for surface in (TORUS, SPHERE, DISC)}


def surface_by_name(name: str) -> Surface:
    """Return the surface singleton for a kind name."""
    try:
        return _SURFACES[name.lower()]
    except KeyError as exc:
        raise UnsupportedSurfaceError(f"unknown surface: {name!r}") from exc


def distance(surface: Surface, p, q):
    """Riemannian distance between two chart points."""
    result = surface.distance(p, q)
    return float(result) if np.ndim(result) == 0 else result


def quadrature_grid(surface: Surface, resolution: int) -> QuadratureGrid:
    """Quadrature grid on the surface at the given resolution."""
    grid = surface.quadrature_grid(resolution)
    _LOGGER.debug(
        "Quadrature grid on %s: shape %s, total weight %.15g",
        surface,
        grid.shape,
        grid.total_weight,
    )
    return grid


@dataclass(frozen=True)
class StripPoint:
    """Point t + i*tau of the strip |tau| <= eps."""

    t: float
    tau: float
    eps: float = STRIP_EPS

    def __post_init__(self):
        if abs(self.tau) > self.eps + _CHART_SLACK:
            raise ChartRangeError(
                f"strip point tau={self.tau} outside |tau| <= {self.eps}"
            )

    @property
    def w(self):
        return complex(self.t, self.tau)


@dataclass(frozen=True)
class CxPoint:
    """Point of the complexified surface.

    Torus: zeta in C^2 (mod Z^2). Sphere: (z1, z2, z3) on the quadric
    z1^2 + z2^2 + z3^2 = 1.
    """

    surface: Surface
    coords: Tuple[complex, ...]

    def __post_init__(self):
        coords = tuple(complex(c) for c in self.coords)
        object.__setattr__(self, 'coords', coords)
        if isinstance(self.surface, Torus):
            if len(coords) != 2:
                raise ChartRangeError("complexified torus points have 2 coordinates")
        elif isinstance(self.surface, Sphere):
            if len(coords) != 3:
                raise ChartRangeError("complexified sphere points have 3 coordinates")
            residual = abs(sum(c * c for c in coords) - 1.0)
            if residual > 1e-10:
                raise ChartRangeError(f"point off the complex quadric: {residual:.3g}")
        else:
            raise UnsupportedSurfaceError(f"the {self.surface} is not complexified")

    @property
    def array(self):
        return np.array(self.coords, dtype=complex)


@dataclass(frozen=True)
class GeodesicSegment:
    """Unit-speed geodesic t -> gamma(t), 0 <= t <= length.

    Torus: basepoint in the chart, direction a unit vector of R^2.
    Sphere: basepoint (phi, theta), direction a unit tangent vector of R^3
    orthogonal to the embedded basepoint; the great circle is
    cos(t)*p + sin(t)*direction.
    """

    surface: Surface
    basepoint: Tuple[float, float]
    direction: Tuple[float, ...]
    length: float
    closed: bool = False
    _frame: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.surface, Disc):
            raise UnsupportedSurfaceError("the disc carries no geodesic flow here")
        direction = np.asarray(self.direction, dtype=float)
        if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
            raise ValueError(f"geodesic direction is not unit: {self.direction}")
        if self.length <= 0:
            raise ValueError(f"geodesic length must be positive, got {self.length}")
        u, v = self.surface.check_chart(*self.basepoint)
        object.__setattr__(self, 'basepoint', (float(u), float(v)))
        object.__setattr__(self, 'direction', tuple(float(x) for x in direction))
        if isinstance(self.surface, Sphere):
            if direction.shape != (3,):
                raise ValueError("sphere geodesic directions are vectors of R^3")
            point = Sphere.embed(*self.basepoint)
            if abs(float(point @ direction)) > 1e-10:
                raise ValueError("sphere geodesic direction is not tangent")
            object.__setattr__(self, '_frame', np.stack([point, direction]))
        elif direction.shape != (2,):
            raise ValueError("torus geodesic directions are vectors of R^2")
        if self.closed:
            end = self.point_at(self.length)
            gap = float(self.surface.distance(end, self.basepoint))
            if gap > 1e-10:
                raise ValueError(
                    f"geodesic marked closed does not close: gap {gap:.3g}"
                )

    # --- Constructors ---

    @classmethod
    def torus_closed(cls, p: int, q: int, basepoint=(0.0, 0.0)):
        """Shortest closed torus geodesic in the rational direction (p, q)."""
        if (p, q) == (0, 0):
            raise ValueError("direction (0, 0) is not a geodesic direction")
        g = math.gcd(p, q)
        p, q = p // g, q // g
        length = math.hypot(p, q)
        return cls(TORUS, basepoint, (p / length, q / length), length, closed=True)

    @classmethod
    def great_circle(cls, basepoint, tangent, length=TWO_PI):
        """Great circle through a chart point along an R^3 tangent vector."""
        tangent = np.asarray(tangent, dtype=float)
        tangent = tangent / np.linalg.norm(tangent)
        closed = math.isclose(length, TWO_PI, rel_tol=0, abs_tol=1e-12)
        return cls(SPHERE, basepoint, tuple(tangent), length, closed=closed)

    @classmethod
    def equator(cls):
        """Equator phi = pi/2 traversed in increasing theta."""
        return cls.great_circle((math.pi / 2, 0.0), (0.0, 1.0, 0.0))

    @classmethod
    def meridian(cls, theta: float = 0.0):
        """Meridian great circle through theta and theta + pi, via the north pole."""
        return cls.great_circle((math.pi / 2, theta), (0.0, 0.0, 1.0))

    # --- Evaluation ---

    @property
    def normal(self):
        """Unit normal of the great circle plane (sphere only)."""
        if self._frame is None:
            raise UnsupportedSurfaceError("only sphere geodesics have a plane normal")
        return np.cross(self._frame[0], self._frame[1])

    def embedded(self, t):
        """Points of R^3 (sphere) at arc parameters t, stacked on the last axis."""
        t = np.asarray(t)
        t = t[..., None]
        return np.cos(t) * self._frame[0] + np.sin(t) * self._frame[1]

    def point_at(self, t):
        """Chart point at arc parameter t (no range check)."""
        t = np.asarray(t, dtype=float)
        if isinstance(self.surface, Torus):
            u = np.mod(self.basepoint[0] + t * self.direction[0], 1.0)
            v = np.mod(self.basepoint[1] + t * self.direction[1], 1.0)
            return u, v
        return Sphere.chart_of(self.embedded(t))

    def tangent_at(self, t):
        """Unit tangent at t: R^2 for the torus, R^3 for the sphere."""
        t = np.asarray(t, dtype=float)
        if isinstance(self.surface, Torus):
            return np.broadcast_to(np.asarray(self.direction), t.shape + (2,))
        t = t[..., None]
        return -np.sin(t) * self._frame[0] + np.cos(t) * self._frame[1]

    def cx_coordinates(self, w):
        """Complexified path at complex parameters w.

        Returns a complex array with the coordinate axis first: (2, ...)
        on the torus, (3, ...) on the sphere.
        """
        w = np.asarray(w, dtype=complex)
        if isinstance(self.surface, Torus):
            return np.stack(
                [
                    self.basepoint[0] + w * self.direction[0],
                    self.basepoint[1] + w * self.direction[1],
                ]
            )
        p, d = self._frame
        return np.cos(w)[None, ...] * p.reshape((3,) + (1,) * w.ndim) + np.sin(w)[
            None, ...
        ] * d.reshape((3,) + (1,) * w.ndim)


def geodesic_point(seg: GeodesicSegment, t):
    """Chart point of the geodesic at arc parameter 0 <= t <= length."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -_CHART_SLACK) or np.any(t_arr > seg.length + _CHART_SLACK):
        raise ChartRangeError(f"arc parameter outside [0, {seg.length}]: {t}")
    u, v = seg.point_at(t_arr)
    if np.ndim(u) == 0:
        return float(u), float(v)
    return u, v


def complexified_geodesic_point(seg: GeodesicSegment, s: StripPoint) -> CxPoint:
    """Analytic continuation of the geodesic to the strip point s."""
    coords = seg.cx_coordinates(s.w)
    return CxPoint(seg.surface, tuple(coords.ravel()))


def clairaut_integral(seg: GeodesicSegment, t):
    """Clairaut integral sin(phi)*sin(psi) of a sphere geodesic at t.

    psi is the angle between the geodesic and the meridian; the value
    equals the third component of the great circle normal.
    """
    if not isinstance(seg.surface, Sphere):
        raise UnsupportedSurfaceError("the Clairaut integral is a sphere quantity")
    phi, theta = seg.point_at(t)
    _, e_theta = Sphere.frame(phi, theta)
    tangent = seg.tangent_at(t)
    return np.sin(phi) * np.sum(tangent * e_theta, axis=-1)
