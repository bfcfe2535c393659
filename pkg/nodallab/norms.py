"""L^p norms, Sogge exponents, family sweeps and the nodal integral identities."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import math
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import (
    CriticalLevelError,
    CurveMismatchError,
    InsufficientSpanError,
    UnsupportedSurfaceError,
)
from .factory import EigenFnFactory
from .geom import DISC, SPHERE, TORUS, Sphere, quadrature_grid
from .grid import GridField, TestFunction
from .modes import EigenFn
from .nodal import NodalCurveSet, extract_nodal, resolution_for
from .spectra import ExponentFit, fit_exponent

_LOGGER = logging.getLogger(__name__)

INF = math.inf
# dimension of every surface handled here
DIM = 2
MIN_FIT_POINTS = 8
MIN_FIT_SPAN = 8.0
SOGGE_ENVELOPE = 10.0
HOLDER_RTOL = 1e-8
# |∇φ| below this fraction of λ·sup on a level curve marks a critical level
CRITICAL_GRADIENT = 1e-2

FAMILY_SURFACES = {
    'zonal': SPHERE,
    'highestweight': SPHERE,
    'gaussianbeam': SPHERE,
    'torusray': TORUS,
    'discradial': DISC,
}


def check_exponent(p) -> float:
    """p as a float in [1, inf]; 'inf' and 'infinity' are accepted."""
    if isinstance(p, str):
        p = INF if p.strip().lower() in ('inf', 'infinity', '∞') else float(p)
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"L^p norms need p >= 1, got {p}")
    return p


def _axisymmetric(fn: EigenFn) -> bool:
    """True when |fn| on the sphere does not depend on θ."""
    if not isinstance(fn.surface, Sphere):
        return False
    phi = np.array([0.3, 1.0, 1.9])[:, None]
    theta = np.linspace(0.0, 2.0 * math.pi, 5, endpoint=False)[None, :]
    values = np.abs(fn.value(phi, theta))
    spread = np.max(values, axis=1) - np.min(values, axis=1)
    return bool(np.all(spread <= 1e-12 * max(float(np.max(values)), 1e-300)))


def _sample_abs(fn: EigenFn, resolution: int):
    """|fn| and weights on the quadrature grid, plus |fn| at the cap points."""
    grid = quadrature_grid(fn.surface, resolution)
    caps = tuple(float(abs(fn.value(*point))) for point in grid.cap_points)
    if _axisymmetric(fn):
        values = np.abs(fn.value(grid.u, np.zeros_like(grid.u)))[:, None]
        weights = np.sum(grid.weights, axis=1, keepdims=True)
        return grid, values, weights, caps
    values = np.abs(fn.value(grid.u[:, None], grid.v[None, :]))
    return grid, values, grid.weights, caps


def _polish_max(fn: EigenFn, point, h: float) -> float:
    """Bounded Brent refinement of a grid maximum of |fn|, one axis at a time."""
    u, v = point
    best = float(abs(fn.value(u, v)))
    # radial and polar chart coordinates stay inside their ranges
    top = math.pi if isinstance(fn.surface, Sphere) else 1.0
    for _ in range(2):
        for axis in (0, 1):

            def negative(x, axis=axis):
                args = (x, v) if axis == 0 else (u, x)
                return -float(abs(fn.value(*args)))

            centre = u if axis == 0 else v
            lo, hi = centre - h, centre + h
            if fn.surface != TORUS and axis == 0:
                lo, hi = max(lo, 0.0), min(hi, top)
            result = minimize_scalar(
                negative, bounds=(lo, hi), method='bounded', options={'xatol': 1e-12}
            )
            candidate = float(result.x)
            if -result.fun > best:
                best = -float(result.fun)
                if axis == 0:
                    u = candidate
                else:
                    v = candidate
    return best


def lp_norm(fn: EigenFn, p, resolution: Optional[int] = None) -> float:
    """‖fn‖_p by quadrature; p = inf is the polished grid maximum."""
    p = check_exponent(p)
    resolution = resolution or resolution_for(fn.frequency)
    grid, values, weights, caps = _sample_abs(fn, resolution)
    if p == INF:
        flat = int(np.argmax(values))
        i, j = np.unravel_index(flat, values.shape)
        point = (float(grid.u[i]), float(grid.v[j]) if values.shape[1] > 1 else 0.0)
        top = max(float(values[i, j]), *caps) if caps else float(values[i, j])
        return max(top, _polish_max(fn, point, grid.h))
    return float(np.sum(weights * values**p) ** (1.0 / p))


def sogge_delta(p, n: int = DIM) -> float:
    """Sogge's sharp L^p growth exponent on an n-manifold."""
    p = check_exponent(p)
    if p < 2.0:
        raise ValueError(f"the Sogge exponent is defined for p >= 2, got {p}")
    inv = 0.0 if p == INF else 1.0 / p
    critical = 2.0 * (n + 1) / (n - 1)
    if p >= critical:
        return n * (0.5 - inv) - 0.5
    return (n - 1) / 2.0 * (0.5 - inv)


# --- Family sweeps ---


@dataclass(frozen=True)
class SweepRecord:
    index: int
    lam: float
    norms: Dict[float, float]
    sup: float
    l1: float


@dataclass(frozen=True)
class FamilySweep:
    """Norms of a family of eigenfunctions at one quadrature resolution."""

    family: str
    resolution: int
    records: Tuple[SweepRecord, ...]
    direction: Optional[Tuple[int, int]] = None
    ps: Tuple[float, ...] = field(default=())

    @property
    def lams(self):
        return np.array([record.lam for record in self.records])

    def column(self, p) -> np.ndarray:
        p = check_exponent(p)
        if p == INF:
            return np.array([record.sup for record in self.records])
        if p == 1.0:
            return np.array([record.l1 for record in self.records])
        if p not in self.ps:
            raise KeyError(f"the {self.family} sweep carries no L^{p:g} column")
        return np.array([record.norms[p] for record in self.records])

    def rows(self):
        """(family, index, lambda, p, norm) rows."""
        rows = []
        for record in self.records:
            columns = {1.0: record.l1, INF: record.sup, **record.norms}
            for p in sorted(columns):
                rows.append(
                    (
                        self.family,
                        record.index,
                        f"{record.lam:.12g}",
                        'inf' if p == INF else f"{p:g}",
                        f"{columns[p]:.12g}",
                    )
                )
        return rows


def family_surface(family: str):
    try:
        return FAMILY_SURFACES[family.lower()]
    except KeyError as err:
        raise ValueError(f"unknown eigenfunction family {family!r}") from err


def default_sweep_resolution(family: str, indices, direction=None) -> int:
    """One grid for the whole sweep, fine enough for its largest member."""
    top = max(indices)
    family = family.lower()
    if family == 'torusray':
        reach = max(abs(x) for x in (direction or (1, 0)))
        return max(64, 16 * top * reach)
    if family == 'discradial':
        return max(64, 8 * top)
    return max(64, 4 * top)


def family_sweep(
    family: str,
    indices: Sequence[int],
    ps: Sequence = (),
    resolution: Optional[int] = None,
    direction: Optional[Tuple[int, int]] = None,
    workers: int = 1,
) -> FamilySweep:
    """L^1, L^∞ and the requested L^p norms over a family, sorted by λ."""
    surface = family_surface(family)
    ps = tuple(sorted({check_exponent(p) for p in ps} - {1.0, INF}))
    indices = list(indices)
    if not indices:
        raise ValueError("a family sweep needs at least one index")
    resolution = resolution or default_sweep_resolution(family, indices, direction)

    def measure(index):
        fn = EigenFnFactory(surface, family=family, index=index, k=direction)
        norms = {p: lp_norm(fn, p, resolution) for p in ps}
        return SweepRecord(
            index,
            fn.frequency,
            norms,
            lp_norm(fn, INF, resolution),
            lp_norm(fn, 1.0, resolution),
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(measure, indices))
    else:
        records = [measure(index) for index in indices]
    records.sort(key=lambda record: (record.lam, record.index))
    _LOGGER.debug(
        "Swept %d members of the %s family at resolution %d",
        len(records),
        family,
        resolution,
    )
    return FamilySweep(family.lower(), resolution, tuple(records), direction, ps)


def scaling_fit(sweep: FamilySweep, p) -> ExponentFit:
    """Slope of log‖φ‖_p against log λ over the sweep."""
    lams = sweep.lams
    values = sweep.column(p)
    keep = lams > 0
    lams, values = lams[keep], values[keep]
    if lams.size < MIN_FIT_POINTS:
        raise InsufficientSpanError(
            f"{sweep.family} sweep has {lams.size} positive eigenvalues, "
            f"a fit needs {MIN_FIT_POINTS}"
        )
    span = float(lams.max() / lams.min())
    if span < MIN_FIT_SPAN:
        raise InsufficientSpanError(
            f"{sweep.family} sweep spans a factor {span:.3g} in λ, "
            f"a fit needs {MIN_FIT_SPAN:g}"
        )
    return fit_exponent(lams, values)


def l1_lower_check(sweep: FamilySweep) -> float:
    """min over the sweep of ‖φ‖₁·λ^{(n-1)/4}."""
    lams = sweep.lams
    products = sweep.column(1.0) * lams ** ((DIM - 1) / 4.0)
    keep = lams > 0
    if not np.any(keep):
        raise InsufficientSpanError(f"{sweep.family} sweep has no positive eigenvalue")
    return float(np.min(products[keep]))


def holder_check(fn: EigenFn, p, q, r, resolution: Optional[int] = None):
    """(‖φ‖_q, ‖φ‖_p^{1-θ}‖φ‖_r^θ, holds) for p < q < r."""
    p, q, r = (check_exponent(x) for x in (p, q, r))
    if not p < q < r:
        raise ValueError(f"Hölder interpolation needs p < q < r, got {p}, {q}, {r}")
    inv = [0.0 if x == INF else 1.0 / x for x in (p, q, r)]
    theta = (inv[0] - inv[1]) / (inv[0] - inv[2])
    middle = lp_norm(fn, q, resolution)
    low = lp_norm(fn, p, resolution)
    high = lp_norm(fn, r, resolution)
    bound = low ** (1.0 - theta) * high**theta
    return middle, bound, middle <= bound * (1.0 + HOLDER_RTOL)


def sogge_envelope(fn: EigenFn, ps=(4, 6, 8, INF), resolution: Optional[int] = None):
    """‖φ‖_p / λ^{δ(p)} for each p; each ratio should stay below 10."""
    lam = fn.frequency
    if lam <= 0:
        raise ValueError("the Sogge envelope needs a nonconstant eigenfunction")
    return {
        check_exponent(p): lp_norm(fn, p, resolution) / lam ** sogge_delta(p)
        for p in ps
    }


def hezari_sogge_ratio(length: float, lam: float, l1: float) -> float:
    """Nodal length over λ‖φ‖₁²."""
    return length / (lam * l1**2)


# --- Nodal identities ---


@dataclass(frozen=True)
class IdentityResult:
    lhs: float
    rhs: float

    @property
    def residual(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale else 0.0

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.residual))


def _curve_integral(fn: EigenFn, curves: NodalCurveSet, weight=None) -> float:
    """∫ |∇φ|·weight over the curves by the segment midpoint rule."""
    mid, lengths = curves.midpoints()
    if not lengths.size:
        return 0.0
    first, second = fn.gradient(mid[:, 0], mid[:, 1])
    slope = np.hypot(np.real(first), np.real(second))
    if weight is not None:
        slope = slope * weight(mid[:, 0], mid[:, 1])
    return float(np.sum(slope * lengths))


def dong_identity(
    fn: EigenFn, f: TestFunction, curves: NodalCurveSet
) -> IdentityResult:
    """∫|φ|(Δ+λ²)f dV against 2∫_N |∇φ| f dS."""
    if curves.fingerprint != fn.fingerprint or curves.level != 0.0:
        raise CurveMismatchError(
            f"nodal curves at level {curves.level} do not belong to {fn.describe()}"
        )
    if f.surface != fn.surface:
        raise UnsupportedSurfaceError(
            f"test function {f.label} lives on the {f.surface}"
        )
    grid = quadrature_grid(fn.surface, curves.resolution)
    u, v = grid.u[:, None], grid.v[None, :]
    lam_sq = fn.eigenvalue
    source = np.broadcast_to(f.apply_laplacian(u, v) + lam_sq * f(u, v), grid.shape)
    lhs = float(np.sum(grid.weights * np.abs(np.real(fn.value(u, v))) * source))
    rhs = 2.0 * _curve_integral(fn, curves, f)
    result = IdentityResult(lhs, rhs)
    _LOGGER.debug(
        "Nodal identity for %s with f=%s: %.10g vs %.10g",
        fn.describe(),
        f.label,
        lhs,
        rhs,
    )
    return result


def level_set_identity(fn: EigenFn, c: float, resolution: Optional[int] = None):
    """λ²∫_{φ≥c} φ dV against ∫_{φ=c} |∇φ| dS."""
    resolution = resolution or resolution_for(fn.frequency)
    field = GridField.sample(fn, resolution, level=c)
    phi = field.values + c
    if c >= float(np.max(phi)):
        return IdentityResult(0.0, 0.0)
    curves = extract_nodal(field)
    mid, _ = curves.midpoints()
    if mid.size:
        first, second = fn.gradient(mid[:, 0], mid[:, 1])
        slope = np.hypot(np.real(first), np.real(second))
        scale = fn.frequency * float(np.max(np.abs(phi)))
        worst = int(np.argmin(slope))
        if slope[worst] < CRITICAL_GRADIENT * scale:
            critical = float(np.real(fn.value(*mid[worst])))
            raise CriticalLevelError(
                f"level {c} is close to the critical value {critical:.6g} "
                f"(|∇φ| = {slope[worst]:.3g} on the level curve)"
            )
    lhs = fn.eigenvalue * field.integrate(np.where(phi >= c, phi, 0.0))
    rhs = _curve_integral(fn, curves)
    return IdentityResult(lhs, rhs)
