"""Eigenfunction samples on quadrature grids and chart Laplacians."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .exceptions import UnsupportedSurfaceError, ZeroFieldError
from .geom import Disc, QuadratureGrid, Sphere, Surface, Torus, quadrature_grid
from .modes import EigenFn, check_real

_LOGGER = logging.getLogger(__name__)

# relative size of the shift applied to grid values that are exactly zero
ZERO_NUDGE = 1e-14


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of f - level on a quadrature grid.

    values[i, j] is taken at (u[i], v[j]); cap_values holds the samples at
    the grid's cap points (sphere poles, disc centre).
    """

    grid: QuadratureGrid
    values: np.ndarray
    cap_values: Tuple[float, ...]
    fn: EigenFn
    level: float = 0.0

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} "
                f"does not match the grid {self.grid.shape}"
            )

    @classmethod
    def sample(cls, fn: EigenFn, resolution: int, level: float = 0.0, workers: int = 1):
        """Sample a real eigenfunction; rows are split across `workers` threads."""
        check_real(fn, "grid sampling")
        grid = quadrature_grid(fn.surface, resolution)
        if workers > 1:
            blocks = np.array_split(np.arange(grid.u.size), workers)

            def rows_of(rows):
                return np.real(fn.value(grid.u[rows][:, None], grid.v[None, :]))

            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(rows_of, blocks))
            values = np.concatenate(parts, axis=0)
        else:
            values = np.real(fn.value(grid.u[:, None], grid.v[None, :]))
        values = np.asarray(values, dtype=float) - level
        caps = tuple(
            float(np.real(fn.value(*point))) - level for point in grid.cap_points
        )

        scale = max(np.max(np.abs(values)), max((abs(c) for c in caps), default=0.0))
        if scale == 0.0:
            raise ZeroFieldError(
                f"{fn.describe()} - {level} vanishes on the whole grid"
            )
        nudge = ZERO_NUDGE * scale
        zeros = values == 0.0
        if np.any(zeros):
            _LOGGER.debug(
                "Nudging %d zero grid values by %.3g", int(zeros.sum()), nudge
            )
            values = np.where(zeros, nudge, values)
        caps = tuple(nudge if c == 0.0 else c for c in caps)
        return cls(grid, values, caps, fn, float(level))

    @property
    def surface(self) -> Surface:
        return self.grid.surface

    @property
    def resolution(self) -> int:
        return self.grid.resolution

    @property
    def weights(self):
        return self.grid.weights

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def fingerprint(self):
        return self.fn.fingerprint

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integrate(self, values=None) -> float:
        """Quadrature of values (default: the field itself) over the surface."""
        values = self.values if values is None else values
        return float(np.sum(self.weights * values))


def _first_derivatives(func, u, v, h, order):
    if order == 2:
        du = (func(u + h, v) - func(u - h, v)) / (2 * h)
        dv = (func(u, v + h) - func(u, v - h)) / (2 * h)
    else:
        du = (
            -func(u + 2 * h, v)
            + 8 * func(u + h, v)
            - 8 * func(u - h, v)
            + func(u - 2 * h, v)
        ) / (12 * h)
        dv = (
            -func(u, v + 2 * h)
            + 8 * func(u, v + h)
            - 8 * func(u, v - h)
            + func(u, v - 2 * h)
        ) / (12 * h)
    return du, dv


def _second_derivatives(func, u, v, h, order):
    centre = func(u, v)
    if order == 2:
        duu = (func(u + h, v) - 2 * centre + func(u - h, v)) / h**2
        dvv = (func(u, v + h) - 2 * centre + func(u, v - h)) / h**2
    else:
        duu = (
            -func(u + 2 * h, v)
            + 16 * func(u + h, v)
            - 30 * centre
            + 16 * func(u - h, v)
            - func(u - 2 * h, v)
        ) / (12 * h**2)
        dvv = (
            -func(u, v + 2 * h)
            + 16 * func(u, v + h)
            - 30 * centre
            + 16 * func(u, v - h)
            - func(u, v - 2 * h)
        ) / (12 * h**2)
    return duu, dvv


def chart_laplacian(surface: Surface, func: Callable, u, v, h: float, order: int = 2):
    """Laplace-Beltrami operator of func at chart points by finite differences.

    Sign convention: the operator has nonpositive spectrum, so an
    eigenfunction satisfies chart_laplacian(φ) ≈ -λ²φ. Points must stay
    at least 2h away from the sphere poles and the disc centre.
    """
    if order not in (2, 4):
        raise ValueError(f"finite difference order must be 2 or 4, got {order}")
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    duu, dvv = _second_derivatives(func, u, v, h, order)
    if isinstance(surface, Torus):
        return duu + dvv
    du, _ = _first_derivatives(func, u, v, h, order)
    if isinstance(surface, Sphere):
        sin_u = np.sin(u)
        return duu + np.cos(u) / sin_u * du + dvv / sin_u**2
    if isinstance(surface, Disc):
        return duu + du / u + dvv / u**2
    raise UnsupportedSurfaceError(f"no chart Laplacian on {surface!r}")


@dataclass(frozen=True)
class TestFunction:
    """Smooth test function f for the nodal identities.

    laplacian, when given, is the analytic Laplace-Beltrami operator of
    value; otherwise order-4 finite differences are used.
    """

    __test__ = False

    surface: Surface
    value: Callable
    laplacian: Optional[Callable] = None
    label: str = 'f'

    def __call__(self, u, v):
        return self.value(u, v)

    def apply_laplacian(self, u, v, h: float = 1e-3):
        if self.laplacian is not None:
            return self.laplacian(u, v)
        return chart_laplacian(self.surface, self.value, u, v, h, order=4)

    @classmethod
    def constant(cls, surface: Surface, c: float = 1.0):
        def shape(u, v):
            return np.broadcast(np.asarray(u), np.asarray(v)).shape

        return cls(
            surface,
            lambda u, v: np.full(shape(u, v), float(c)),
            lambda u, v: np.zeros(shape(u, v)),
            label=f'{c:g}',
        )

    @classmethod
    def torus_trig(cls, surface: Surface, k1: int, k2: int, kind: str = 'cos'):
        """cos or sin of 2π(k1·x1 + k2·x2), with its exact Laplacian."""
        trig = np.cos if kind == 'cos' else np.sin
        scale = -4.0 * math.pi**2 * (k1 * k1 + k2 * k2)

        def value(u, v):
            return trig(2.0 * math.pi * (k1 * np.asarray(u) + k2 * np.asarray(v)))

        return cls(
            surface,
            value,
            lambda u, v: scale * value(u, v),
            label=f'{kind}2pi({k1}x1+{k2}x2)',
        )
