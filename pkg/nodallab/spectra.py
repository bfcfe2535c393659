"""Spectra of the model surfaces, Weyl counts and spectral kernels."""

from dataclasses import dataclass
from functools import lru_cache
import logging
import math
from typing import List, Optional

import numpy as np
from scipy.integrate import quad
from scipy.stats import linregress

from .bessel import bessel_zeros, check_interlacing, max_order
from .exceptions import SpectrumError, TruncationError, UnsupportedSurfaceError
from .geom import SPHERE, Disc, Sphere, Surface, Torus
from .legendre import legendre_table
from .modes import DiscMode, EigenFn, ModeIndex, SphereMode, TorusConstant, TorusMode

_LOGGER = logging.getLogger(__name__)

FOUR_PI = 4.0 * math.pi

# inclusive comparisons of frequencies against user bounds
_BOUND_RTOL = 1e-12

MODE_COLUMNS = (
    'surface',
    'variant',
    'k1',
    'k2',
    'N',
    'm',
    'n',
    'parity',
    'lambda',
    'lambda_sq',
)


def _check_lambda(lambda_max):
    lambda_max = float(lambda_max)
    if not math.isfinite(lambda_max) or lambda_max < 0:
        raise ValueError(f"lambda_max must be a finite number >= 0, got {lambda_max}")
    return lambda_max * (1.0 + _BOUND_RTOL)


def _tie_key(mode: ModeIndex):
    if isinstance(mode, TorusMode):
        return (mode.k1, mode.k2, mode.parity)
    if isinstance(mode, SphereMode):
        return (mode.N, mode.m)
    if isinstance(mode, DiscMode):
        return (mode.m, mode.n, mode.parity)
    return ()


def _torus_modes(bound):
    radius = bound / (2.0 * math.pi)
    kmax = int(math.floor(radius))
    modes = [TorusConstant()]
    for k1 in range(0, kmax + 1):
        for k2 in range(-kmax, kmax + 1):
            if not (k1 > 0 or (k1 == 0 and k2 > 0)):
                continue
            if 2.0 * math.pi * math.hypot(k1, k2) > bound:
                continue
            modes.append(TorusMode(k1, k2, 'cos'))
            modes.append(TorusMode(k1, k2, 'sin'))
    return modes


def _sphere_modes(bound):
    modes = []
    degree = 0
    while math.sqrt(degree * (degree + 1)) <= bound:
        modes.extend(SphereMode(degree, m) for m in range(-degree, degree + 1))
        degree += 1
    return modes


def _disc_modes(bound, bc):
    if bc not in ('dirichlet', 'neumann'):
        raise ValueError(f"boundary condition must be dirichlet or neumann: {bc!r}")
    modes = []
    if bc == 'neumann':
        modes.append(DiscMode('neumann', 0, 1, 'cos', kappa=0.0))
    for m in range(0, max_order(bound) + 1):
        if bc == 'dirichlet':
            zeros = bessel_zeros(m, bound)
            if zeros:
                check_interlacing(m, bound)
            offset = 1
        else:
            zeros = bessel_zeros(m, bound, derivative=True)
            # n = 1 of order 0 is the constant mode
            offset = 2 if m == 0 else 1
        for index, kappa in enumerate(zeros):
            n = index + offset
            modes.append(DiscMode(bc, m, n, 'cos', kappa=kappa))
            if m > 0:
                modes.append(DiscMode(bc, m, n, 'sin', kappa=kappa))
    return modes


def enumerate_modes(
    surface: Surface, lambda_max: float, bc: str = 'dirichlet'
) -> List[ModeIndex]:
    """All modes with frequency λ <= lambda_max, sorted by eigenvalue.

    Multiple eigenvalues are repeated once per basis element. bc only
    applies to the disc.
    """
    bound = _check_lambda(lambda_max)
    if isinstance(surface, Torus):
        modes = _torus_modes(bound)
    elif isinstance(surface, Sphere):
        modes = _sphere_modes(bound)
    elif isinstance(surface, Disc):
        modes = _disc_modes(bound, bc)
    else:
        raise UnsupportedSurfaceError(f"no spectrum for {surface!r}")
    modes.sort(key=lambda mode: (mode.eigenvalue, _tie_key(mode)))
    _LOGGER.debug(
        "Enumerated %d modes on the %s up to lambda=%.6g",
        len(modes),
        surface,
        lambda_max,
    )
    return modes


def frequencies(surface: Surface, lambda_max: float, bc: str = 'dirichlet'):
    """Sorted frequencies λ_j <= lambda_max, with multiplicity."""
    return np.array(
        [mode.frequency for mode in enumerate_modes(surface, lambda_max, bc)]
    )


def mode_rows(surface: Surface, modes):
    """Rows for the mode table, columns as in MODE_COLUMNS."""
    rows = []
    for mode in modes:
        rows.append(
            (
                surface.kind,
                mode.variant,
                *mode.label_fields(),
                f"{mode.frequency:.12g}",
                f"{mode.eigenvalue:.12g}",
            )
        )
    return rows


# --- Evaluation ---


def evaluate(fn: EigenFn, p):
    """Value of fn at the chart point p = (u, v)."""
    u, v = fn.surface.check_chart(*p)
    value = fn.value(u, v)
    return value.item() if np.ndim(value) == 0 else value


def gradient(fn: EigenFn, p):
    """Analytic gradient of fn at p in orthonormal-frame components.

    At the sphere poles and the disc centre the angular component is the
    limit along the chart meridian.
    """
    u, v = fn.surface.check_chart(*p)
    first, second = fn.gradient(u, v)
    if np.ndim(first) == 0:
        return np.array([first.item(), second.item()])
    return np.stack([first, second], axis=-1)


# --- Weyl law ---


@dataclass(frozen=True)
class WeylCount:
    """N(λ), the main term λ²·area/4π and the remainder."""

    lam: float
    count: int
    main_term: float

    @property
    def remainder(self) -> float:
        return self.count - self.main_term


def _main_term(surface, lam):
    return lam * lam * surface.area / FOUR_PI


def weyl_count(surface: Surface, lam: float, bc: str = 'dirichlet') -> WeylCount:
    """Exact eigenvalue count N(λ) = #{j: λ_j <= λ} from the enumeration."""
    if lam <= 0:
        raise ValueError(f"Weyl counts need lambda > 0, got {lam}")
    count = len(enumerate_modes(surface, lam, bc))
    return WeylCount(float(lam), count, _main_term(surface, lam))


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares slope of log(values) against log(lams)."""

    lams: np.ndarray
    values: np.ndarray
    exponent: float
    stderr: float
    intercept: float


def fit_exponent(lams, values) -> ExponentFit:
    """Fit values ~ C·lams^exponent on a log-log scale."""
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or np.any(lams <= 0):
        raise ValueError("exponent fits need positive samples")
    fit = linregress(np.log(lams), np.log(values))
    return ExponentFit(
        lams, values, float(fit.slope), float(fit.stderr), float(fit.intercept)
    )


def weyl_remainder_envelope(surface: Surface, lams, bc: str = 'dirichlet'):
    """sup over 0 < λ' <= λ of |R(λ')| at each requested λ.

    R is piecewise decreasing between jumps, so the supremum is attained
    at a jump, either from the left or from the right.
    """
    lams = np.sort(np.asarray(lams, dtype=float))
    freqs = frequencies(surface, lams[-1], bc)
    jumps, counts = np.unique(freqs, return_counts=True)
    right = np.cumsum(counts)
    left = right - counts
    main = _main_term(surface, jumps)
    at_jump = np.maximum(np.abs(right - main), np.abs(left - main))
    running = np.maximum.accumulate(at_jump)
    envelope = np.empty_like(lams)
    for index, lam in enumerate(lams):
        last = np.searchsorted(jumps, lam, side='right') - 1
        current = abs((right[last] if last >= 0 else 0) - _main_term(surface, lam))
        envelope[index] = max(current, running[last] if last >= 0 else 0.0)
    return lams, envelope


def weyl_remainder_exponent(
    surface: Surface,
    lam_lo: float,
    lam_hi: float,
    points: int = 40,
    bc: str = 'dirichlet',
) -> ExponentFit:
    """Growth exponent of the Weyl remainder envelope on [lam_lo, lam_hi]."""
    if not 0 < lam_lo < lam_hi:
        raise ValueError(f"need 0 < lam_lo < lam_hi, got {lam_lo}, {lam_hi}")
    lams, envelope = weyl_remainder_envelope(
        surface, np.geomspace(lam_lo, lam_hi, points), bc
    )
    fit = fit_exponent(lams, envelope)
    _LOGGER.debug(
        "Weyl remainder exponent on the %s over [%g, %g]: %.4f",
        surface,
        lam_lo,
        lam_hi,
        fit.exponent,
    )
    return fit


# --- Sphere kernels ---


@dataclass(frozen=True)
class KernelValue:
    """A kernel value computed two independent ways."""

    value: float
    check: float

    @property
    def discrepancy(self) -> float:
        return abs(self.value - self.check)


def projection_kernel_sphere(degree: int, x, y) -> KernelValue:
    """Π_N(x, y): addition theorem (value) and the direct m-sum (check)."""
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    r = SPHERE.distance(x, y)
    addition = (2 * degree + 1) / FOUR_PI * legendre_table(degree, np.cos(r))[-1]
    direct = sum(
        SphereMode(degree, m).value(*x) * SphereMode(degree, m).value(*y)
        for m in range(-degree, degree + 1)
    )
    return KernelValue(float(addition), float(direct))


POISSON_CONSTANT = 1.0 / (FOUR_PI * math.sqrt(2.0))


def poisson_kernel_closed(t: float, r):
    """C·sinh t·(cosh t − cos r)^{-3/2}, the kernel of e^{-t(√Δ+1/4)} on S²."""
    if t <= 0:
        raise ValueError(f"the Poisson kernel needs t > 0, got {t}")
    r = np.asarray(r, dtype=float)
    return POISSON_CONSTANT * math.sinh(t) * (math.cosh(t) - np.cos(r)) ** -1.5


def poisson_kernel_sum(t: float, r, n_max: int):
    """Σ_{N <= n_max} e^{-(N+1/2)t}(2N+1)/4π·P_N(cos r)."""
    if t <= 0:
        raise ValueError(f"the Poisson kernel needs t > 0, got {t}")
    r = np.asarray(r, dtype=float)
    degrees = np.arange(n_max + 1)
    weights = np.exp(-(degrees + 0.5) * t) * (2 * degrees + 1) / FOUR_PI
    table = legendre_table(n_max, np.cos(r))
    return np.tensordot(weights, table, axes=1)


def poisson_kernel_sphere(t: float, r, n_max: Optional[int] = None):
    """Closed form and, when n_max is given, the truncated spectral sum."""
    closed = poisson_kernel_closed(t, r)
    if n_max is None:
        return closed, None
    return closed, poisson_kernel_sum(t, r, n_max)


def poisson_constant_estimate(t: float) -> float:
    """Recover C from the spectral sum at r = 0."""
    n_max = int(math.ceil(40.0 / t)) + 10
    total = float(poisson_kernel_sum(t, 0.0, n_max))
    return total * (math.cosh(t) - 1.0) ** 1.5 / math.sinh(t)


# --- Spectral filter ρ(λ − √Δ) ---


def _bump(u):
    u = np.asarray(u, dtype=float)
    inside = np.abs(u) < 1.0
    safe = np.where(inside, u, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


@lru_cache(maxsize=1)
def _bump_integral() -> float:
    value, error = quad(
        lambda u: float(_bump(u)), -1.0, 1.0, epsabs=0, epsrel=1e-10, limit=200
    )
    _LOGGER.debug("Bump integral %.15g (error estimate %.2g)", value, error)
    return value


_FILTER_NODES = 400
_FILTER_CHUNK = 512


@lru_cache(maxsize=32)
def _decay_window(epsilon: float, tol: float) -> float:
    filt = SpectralFilter(epsilon)
    step = 0.5 / epsilon
    reach = 50.0 / epsilon
    while reach < 1e5 / epsilon:
        mus = np.arange(0.0, reach, step)
        above = np.flatnonzero(np.abs(filt.rho(mus)) >= tol)
        if above.size == 0:
            return 0.0
        if above[-1] < 0.75 * mus.size:
            return float(mus[above[-1] + 1])
        reach *= 2.0
    raise TruncationError(f"rho does not decay below {tol} within {reach:g}")


@dataclass(frozen=True)
class SpectralFilter:
    """ρ with ρ̂ a smooth bump supported in ε/2 <= |t| <= ε and ρ(0) = 1."""

    epsilon: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"filter epsilon must be positive, got {self.epsilon}")

    def rho_hat(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        quarter = self.epsilon / 4.0
        return _bump((t - 3.0 * quarter) / quarter) / (2.0 * quarter * _bump_integral())

    def rho(self, mu):
        """ρ(μ) = ∫ρ̂(t)e^{-itμ} dt, real and even."""
        mu = np.asarray(mu, dtype=float)
        reach = float(np.max(np.abs(mu))) if mu.size else 0.0
        nodes, weights = np.polynomial.legendre.leggauss(
            _FILTER_NODES + int(math.ceil(0.5 * self.epsilon * reach))
        )
        quarter = self.epsilon / 4.0
        t = 3.0 * quarter + quarter * nodes
        weights = weights * _bump(nodes) / _bump_integral()
        flat = mu.ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, _FILTER_CHUNK):
            chunk = flat[start : start + _FILTER_CHUNK]
            phases = np.multiply.outer(chunk, t)
            out[start : start + _FILTER_CHUNK] = np.cos(phases) @ weights
        return out.reshape(mu.shape) if mu.ndim else out[0]

    def total_mass(self) -> float:
        """∫ρ̂ dt by adaptive quadrature, which must equal ρ(0) = 1."""
        lo, hi = self.epsilon / 2.0, self.epsilon
        half = quad(
            lambda t: float(self.rho_hat(t)), lo, hi, epsabs=1e-15, epsrel=1e-14
        )[0]
        return 2.0 * half

    def decay_window(self, tol: float = 1e-10) -> float:
        """Smallest μ beyond which |ρ| < tol."""
        return _decay_window(self.epsilon, tol)


@dataclass(frozen=True)
class FilterResult:
    """Filtered value with the spectral tail it neglects."""

    value: object
    error: float
    tail_bound: float
    cutoff: float


def _check_cutoff(filt, lam, cutoff):
    minimum = lam + 10.0 / filt.epsilon
    if cutoff is None:
        cutoff = max(minimum, lam + filt.decay_window())
    if cutoff < minimum:
        raise TruncationError(
            f"spectrum cutoff {cutoff:g} is below lambda + 10/eps = {minimum:g}"
        )
    return cutoff


def _torus_lattice(bound):
    kmax = int(math.floor(bound / (2.0 * math.pi)))
    axis = np.arange(-kmax, kmax + 1)
    k1, k2 = np.meshgrid(axis, axis, indexing='ij')
    freqs = 2.0 * math.pi * np.hypot(k1, k2)
    inside = freqs <= bound
    return k1[inside], k2[inside], freqs[inside]


def _sphere_degrees(bound):
    degree_max = 0
    while math.sqrt((degree_max + 1) * (degree_max + 2)) <= bound:
        degree_max += 1
    degrees = np.arange(degree_max + 1)
    return degrees, np.sqrt(degrees * (degrees + 1.0))


def spectrum_with_multiplicity(
    surface: Surface, lambda_max: float, bc: str = 'dirichlet'
):
    """Distinct frequencies up to lambda_max and their multiplicities."""
    bound = _check_lambda(lambda_max)
    if isinstance(surface, Sphere):
        degrees, freqs = _sphere_degrees(bound)
        return freqs, 2 * degrees + 1
    if isinstance(surface, Torus):
        _, _, freqs = _torus_lattice(bound)
    else:
        freqs = frequencies(surface, lambda_max, bc)
    return np.unique(freqs, return_counts=True)


def apply_rho_filter(
    filt: SpectralFilter,
    lam: float,
    target,
    surface: Optional[Surface] = None,
    cutoff: Optional[float] = None,
    bc: str = 'dirichlet',
) -> FilterResult:
    """Apply Σ_j ρ(λ − λ_j)E_j to an eigenfunction or evaluate its kernel.

    target is an EigenFn or a pair of chart points (x, y) on `surface`.
    For an eigenfunction the operator acts by ρ(λ − λ_φ); the reported
    error is ‖ρ(λ − √Δ)φ − φ‖₂ and tail_bound sums |ρ(λ − λ_j)| over the
    basis elements outside φ's cluster up to the cutoff. For a point pair
    the value is K_λ(x, y) and tail_bound is |ρ| at the cutoff.
    """
    cutoff = _check_cutoff(filt, lam, cutoff)

    if isinstance(target, EigenFn):
        freqs, mult = spectrum_with_multiplicity(target.surface, cutoff, bc)
        weights = np.abs(filt.rho(lam - freqs)) * mult
        in_cluster = np.isclose(freqs, target.frequency, rtol=1e-12, atol=1e-12)
        factor = float(filt.rho(lam - target.frequency))
        error = abs(factor - 1.0) * target.l2_norm
        tail = float(np.sum(weights[~in_cluster]))
        _LOGGER.debug(
            "rho filter at lambda=%.6g: reproduction error %.3g, tail %.3g",
            lam,
            error,
            tail,
        )
        return FilterResult(target.scaled(factor), error, tail, cutoff)

    if surface is None:
        raise ValueError("kernel values need the surface of the point pair")
    x, y = target
    edge = abs(float(filt.rho(cutoff - lam)))
    if isinstance(surface, Sphere):
        value = float(rho_kernel_sphere(filt, lam, surface.distance(x, y), cutoff))
    elif isinstance(surface, Torus):
        k1, k2, freqs = _torus_lattice(_check_lambda(cutoff))
        xu, xv = surface.check_chart(*x)
        yu, yv = surface.check_chart(*y)
        phase = 2.0 * math.pi * (k1 * (xu - yu) + k2 * (xv - yv))
        value = float(np.sum(filt.rho(lam - freqs) * np.cos(phase)))
    else:
        modes = enumerate_modes(surface, cutoff, bc)
        weights = filt.rho(lam - np.array([mode.frequency for mode in modes]))
        values_x = np.array([float(mode.value(*x)) for mode in modes])
        values_y = np.array([float(mode.value(*y)) for mode in modes])
        value = float(np.sum(weights * values_x * values_y))
    return FilterResult(value, 0.0, edge, cutoff)


def rho_kernel_sphere(
    filt: SpectralFilter, lam: float, r, cutoff: Optional[float] = None
):
    """K_λ(r) = Σ_N ρ(λ − λ_N)(2N+1)/4π·P_N(cos r)."""
    cutoff = _check_cutoff(filt, lam, cutoff)
    degrees, freqs = _sphere_degrees(cutoff)
    weights = filt.rho(lam - freqs) * (2 * degrees + 1) / FOUR_PI
    table = legendre_table(int(degrees[-1]), np.cos(np.asarray(r, dtype=float)))
    return np.tensordot(weights, table, axes=1)


def rho_kernel_gradient_sup(filt: SpectralFilter, lams, samples: int = 2000):
    """sup over r of |dK_λ/dr| on the sphere for each λ in lams.

    |∇_x K_λ(x, y)| = |K_λ'(r)| since the distance has unit gradient.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    top = _check_cutoff(filt, float(np.max(lams)), None)
    degrees, freqs = _sphere_degrees(top)
    r = np.linspace(0.0, math.pi, samples)
    _, slopes = legendre_table(int(degrees[-1]), np.cos(r), derivative=True)
    radial = -np.sin(r) * slopes
    sups = []
    for lam in lams:
        weights = filt.rho(lam - freqs) * (2 * degrees + 1) / FOUR_PI
        sups.append(float(np.max(np.abs(weights @ radial))))
    return np.array(sups)


def window_projector_diagonal(
    surface: Surface, lam: float, point=None, width: float = 1.0, bc='dirichlet'
):
    """Σ_{λ <= λ_j < λ + width} φ_j(x)².

    Basis independent; on the torus and the sphere it does not depend on x.
    """
    if isinstance(surface, Sphere):
        degrees = np.arange(int(lam + width) + 2)
        freqs = np.sqrt(degrees * (degrees + 1.0))
        inside = (freqs >= lam) & (freqs < lam + width)
        return float(np.sum((2 * degrees[inside] + 1) / FOUR_PI))
    if isinstance(surface, Torus):
        freqs = frequencies(surface, lam + width)
        return float(np.count_nonzero((freqs >= lam) & (freqs < lam + width)))
    if point is None:
        raise SpectrumError("the disc window projector depends on the point")
    total = 0.0
    for mode in enumerate_modes(surface, lam + width, bc):
        if lam <= mode.frequency < lam + width:
            total += float(mode.value(*point)) ** 2
    return total
