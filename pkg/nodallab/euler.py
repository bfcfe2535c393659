"""Nodal sets as embedded graphs: singular points and Euler's inequality."""

from dataclasses import dataclass
import logging
import math
from typing import List, Tuple

import numpy as np
from scipy.optimize import least_squares

from .exceptions import NodalGraphError, SymmetryError, UnsupportedSurfaceError
from .geom import TWO_PI, GeodesicSegment, Sphere, Surface, Torus
from .grid import GridField
from .modes import EigenFn, check_real
from .nodal import (
    NodalCurveSet,
    extract_nodal,
    label_components,
    normal_coordinates,
)
from .unionfind import DisjointSet

_LOGGER = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-8
# |f| and |∇f| thresholds, relative to sup|f| and λ·sup|f|
SINGULAR_VALUE_TOL = 1e-6
SINGULAR_GRADIENT_TOL = 1e-4
CANDIDATE_LEVEL = 0.05


@dataclass(frozen=True)
class Reflection:
    """The isometric reflection whose fixed set contains a closed geodesic."""

    surface: Surface
    segment: GeodesicSegment

    def __post_init__(self):
        if isinstance(self.surface, Torus):
            direction = np.asarray(self.segment.direction)
            size = np.abs(direction)
            if not np.allclose(size, np.round(size), atol=1e-12):
                raise SymmetryError(
                    "the fixed set of the reflection across direction "
                    f"{tuple(direction)} does not split the torus; "
                    "use an axis geodesic"
                )
        elif not isinstance(self.surface, Sphere):
            raise UnsupportedSurfaceError(
                "reflections are built on the torus and the sphere"
            )

    @property
    def integer_normal(self):
        """Primitive integer normal of a torus geodesic."""
        direction = np.asarray(self.segment.direction) * self.segment.length
        p, q = (int(round(x)) for x in direction)
        return np.array([-q, p])

    def __call__(self, u, v):
        if isinstance(self.surface, Sphere):
            xyz = Sphere.embed(u, v)
            normal = self.segment.normal
            mirrored = xyz - 2.0 * (xyz @ normal)[..., None] * normal
            return Sphere.chart_of(mirrored)
        base = np.asarray(self.segment.basepoint)
        direction = np.asarray(self.segment.direction)
        matrix = np.round(2.0 * np.outer(direction, direction) - np.eye(2))
        du = np.asarray(u) - base[0]
        dv = np.asarray(v) - base[1]
        return (
            np.mod(base[0] + matrix[0, 0] * du + matrix[0, 1] * dv, 1.0),
            np.mod(base[1] + matrix[1, 0] * du + matrix[1, 1] * dv, 1.0),
        )

    def side(self, u, v):
        """Function changing sign exactly across the fixed set."""
        if isinstance(self.surface, Sphere):
            return Sphere.embed(u, v) @ self.segment.normal
        base = self.segment.basepoint
        nu = self.integer_normal
        du = np.asarray(u) - base[0]
        dv = np.asarray(v) - base[1]
        return np.sin(TWO_PI * (nu[0] * du + nu[1] * dv))

    def fixed_circles(self) -> List[GeodesicSegment]:
        """Closed geodesics making up the fixed set.

        The torus has two parallel circles, the sphere one great circle.
        """
        if isinstance(self.surface, Sphere):
            return [self.segment]
        seg = self.segment
        shift = (0.0, 0.5) if self.integer_normal[0] == 0 else (0.5, 0.0)
        twin = GeodesicSegment(
            seg.surface,
            (seg.basepoint[0] + shift[0], seg.basepoint[1] + shift[1]),
            seg.direction,
            seg.length,
            closed=True,
        )
        return [seg, twin]


def symmetry_parity(
    fn: EigenFn, reflection: Reflection, samples: int = 64, seed: int = 0
) -> str:
    """'even' or 'odd' under the reflection, checked on random points."""
    rng = np.random.default_rng(seed)
    if isinstance(fn.surface, Torus):
        u, v = rng.random(samples), rng.random(samples)
    else:
        u, v = Sphere.chart_of(rng.normal(size=(samples, 3)))
    values = np.real(fn.value(u, v))
    mirrored = np.real(fn.value(*reflection(u, v)))
    scale = max(float(np.max(np.abs(values))), 1e-300)
    even = float(np.max(np.abs(mirrored - values))) / scale
    odd = float(np.max(np.abs(mirrored + values))) / scale
    if even <= SYMMETRY_TOL:
        return 'even'
    if odd <= SYMMETRY_TOL:
        return 'odd'
    raise SymmetryError(
        f"{fn.describe()} fails the even test (deviation {even:.3g}) "
        f"and the odd test (deviation {odd:.3g}) "
        "for the reflection fixing the geodesic"
    )


# --- Singular points ---


@dataclass(frozen=True)
class SingularPoint:
    point: Tuple[float, float]
    degree: int


def _gradient_norm(fn, u, v):
    first, second = fn.gradient(u, v)
    return np.hypot(np.real(first), np.real(second))


def ring_degree(fn: EigenFn, point, radius: float, samples: int = 256) -> int:
    """Sign changes of fn on a small ring around point."""
    alphas = TWO_PI * (np.arange(samples) + 0.5) / samples
    ring = normal_coordinates(
        fn.surface, point, radius * np.cos(alphas), radius * np.sin(alphas)
    )
    values = np.real(fn.value(*ring))
    positive = values > 0
    return int(np.count_nonzero(positive != np.roll(positive, 1)))


def singular_points(field: GridField) -> List[SingularPoint]:
    """Points where fn and its gradient both vanish, with their degrees."""
    fn = field.fn
    lam = fn.frequency
    grid = field.grid
    sup = field.sup
    uu, vv = np.meshgrid(grid.u, grid.v, indexing='ij')
    slopes = _gradient_norm(fn, uu, vv) / (lam * sup)
    indicator = (field.values / sup) ** 2 + slopes**2
    candidates = indicator < CANDIDATE_LEVEL
    labels, count = label_components(
        np.where(candidates, 1, 0).astype(np.int8), field.surface
    )
    starts = list(grid.cap_points)
    for label in range(count):
        mask = (labels == label) & candidates
        if not np.any(mask):
            continue
        flat = np.flatnonzero(mask.ravel())
        best = flat[np.argmin(indicator.ravel()[flat])]
        starts.append((float(uu.ravel()[best]), float(vv.ravel()[best])))

    lower, upper = (-np.inf, -np.inf), (np.inf, np.inf)
    if isinstance(field.surface, Sphere):
        lower, upper = (0.0, -np.inf), (math.pi, np.inf)

    def residual(x):
        grad = fn.gradient(x[0], x[1])
        return np.array(
            [
                float(np.real(fn.value(x[0], x[1]))) / sup,
                float(np.real(grad[0])) / (lam * sup),
                float(np.real(grad[1])) / (lam * sup),
            ]
        )

    found: List[SingularPoint] = []
    for start in starts:
        point = start
        if start not in grid.cap_points:
            result = least_squares(
                residual,
                np.array(start),
                bounds=(lower, upper),
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
            )
            point = (float(result.x[0]), float(result.x[1]))
            if isinstance(field.surface, Torus):
                point = (point[0] % 1.0, point[1] % 1.0)
            else:
                point = (point[0], point[1] % TWO_PI)
        value = abs(float(np.real(fn.value(*point))))
        slope = float(_gradient_norm(fn, *point))
        if value >= SINGULAR_VALUE_TOL * sup:
            continue
        if slope >= SINGULAR_GRADIENT_TOL * lam * sup:
            continue
        distance = field.surface.distance
        if any(distance(point, other.point) < 0.25 / lam for other in found):
            continue
        found.append(SingularPoint(point, ring_degree(fn, point, 0.3 / lam)))
    _LOGGER.debug("Found %d singular points of %s", len(found), fn.describe())
    return found


# --- The graph ---


@dataclass(frozen=True)
class NodalGraph:
    """Vertex, edge, face and component counts of an embedded graph."""

    v: int
    e: int
    f: int
    m: int
    genus: int

    @property
    def euler_gap(self) -> int:
        """v - e + f - m - (1 - 2g), nonnegative for graphs on the surface."""
        return self.v - self.e + self.f - self.m - (1 - 2 * self.genus)


@dataclass(frozen=True)
class EulerGraphResult:
    graph: NodalGraph
    parity: str
    intersections: int
    bound: int
    vertices: Tuple[SingularPoint, ...]


def _circle_crossings(fn, circle: GeodesicSegment, samples: int):
    t = (np.arange(samples) + 0.5) * circle.length / samples
    values = np.real(fn.value(*circle.point_at(t)))
    positive = values > 0
    changes = np.flatnonzero(positive != np.roll(positive, 1))
    # crossing between samples k-1 and k
    return [circle.point_at(0.5 * (t[k] + t[k - 1]) if k else 0.0) for k in changes]


def _near(surface, polyline, point, radius):
    distances = surface.distance((polyline[:, 0], polyline[:, 1]), point)
    return bool(np.min(distances) < radius)


def _on_circle(surface, circle: GeodesicSegment, point, radius):
    t = np.linspace(0.0, circle.length, 2048, endpoint=False)
    distances = surface.distance(circle.point_at(t), point)
    return bool(np.min(distances) < radius)


def euler_graph(
    fn: EigenFn, gamma: GeodesicSegment, resolution: int = 256
) -> EulerGraphResult:
    """Build the graph of the nodal set (plus the fixed set when fn is even).

    Odd fn: the fixed set lies in the nodal set; the bound on the number
    of nodal domains is n + 2 - 2g with n the singular points on it.
    Even fn: vertices include the crossings of the nodal set with the
    fixed set; the bound is n/2 + 1 - g with n those crossings.
    """
    check_real(fn, "euler_graph")
    if not gamma.closed:
        raise ValueError("euler_graph needs a closed geodesic")
    surface = fn.surface
    reflection = Reflection(surface, gamma)
    parity = symmetry_parity(fn, reflection)
    lam = fn.frequency
    genus = surface.genus

    field = GridField.sample(fn, resolution)
    curves: NodalCurveSet = extract_nodal(field)
    singular = singular_points(field)
    vertices = list(singular)
    join_radius = max(0.5 / lam, 2.0 * field.h)

    circles = reflection.fixed_circles() if parity == 'even' else []
    crossing_owner = []
    for index, circle in enumerate(circles):
        samples = max(4096, int(64 * lam * circle.length))
        for point in _circle_crossings(fn, circle, samples):
            point = (float(point[0]), float(point[1]))
            if any(
                surface.distance(point, vertex.point) < join_radius
                for vertex in vertices
            ):
                continue
            vertices.append(SingularPoint(point, 4))
            crossing_owner.append(index)
    intersections = len(crossing_owner)

    # elements: polylines, then vertices, then fixed circles
    n_lines = curves.component_count
    n_vertices = len(vertices)
    forest = DisjointSet(n_lines + n_vertices + len(circles))
    loops = 0
    for line_index, line in enumerate(curves.polylines):
        attached = False
        for vertex_index, vertex in enumerate(vertices):
            if _near(surface, line, vertex.point, join_radius):
                forest.merge(line_index, n_lines + vertex_index)
                attached = True
        if not attached:
            loops += 1
    degree_total = sum(vertex.degree for vertex in vertices)
    for circle_index, circle in enumerate(circles):
        carried = 0
        for vertex_index, vertex in enumerate(vertices):
            if _on_circle(surface, circle, vertex.point, join_radius):
                forest.merge(
                    n_lines + vertex_index, n_lines + n_vertices + circle_index
                )
                carried += 1
                if vertex_index < len(singular):
                    # ring degree only sees the nodal branches
                    degree_total += 2
        if not carried:
            loops += 1

    v = n_vertices + loops
    e = (degree_total + 2 * loops) // 2
    if parity == 'even':
        classes = (field.values > 0).astype(np.int8) * 2 + (
            reflection.side(field.grid.u[:, None], field.grid.v[None, :]) > 0
        ).astype(np.int8)
    else:
        classes = (field.values > 0).astype(np.int8)
    _, f = label_components(classes, surface)
    m = forest.count()
    graph = NodalGraph(v, e, f, m, genus)
    if graph.euler_gap < 0:
        raise NodalGraphError(
            f"graph of {fn.describe()} violates v - e + f - m >= 1 - 2g: {graph}"
        )

    if parity == 'odd':
        intersections = sum(
            1
            for vertex in singular
            if any(
                _on_circle(surface, circle, vertex.point, join_radius)
                for circle in reflection.fixed_circles()
            )
        )
        bound = intersections + 2 - 2 * genus
    else:
        bound = intersections // 2 + 1 - genus
    _LOGGER.debug(
        "Euler graph of %s (%s): v=%d e=%d f=%d m=%d, bound %d",
        fn.describe(),
        parity,
        v,
        e,
        f,
        m,
        bound,
    )
    return EulerGraphResult(graph, parity, intersections, bound, tuple(vertices))
