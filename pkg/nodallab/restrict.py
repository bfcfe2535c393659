"""Restrictions of eigenfunctions to closed geodesics."""

from dataclasses import dataclass
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .exceptions import (
    AliasingError,
    TruncationError,
    UnsupportedSurfaceError,
    VanishingRestrictionError,
)
from .geom import TWO_PI, GeodesicSegment, Sphere, Torus
from .legendre import d_column, legendre_at_zero
from .modes import EigenFn, TorusMode
from .spectra import ExponentFit, enumerate_modes, fit_exponent

_LOGGER = logging.getLogger(__name__)

MIN_SAMPLES = 64
# samples per unit of the restricted bandwidth λL/2π
OVERSAMPLING = 8
ALIASING_GUARD = 4
VANISHING_RTOL = 1e-12
KERNEL_CHECK_DEGREE = 64
# Theorem-style growth c·|∫f|²·√λ
PRINTED_KUZNECOV_EXPONENT = 0.5
DISCREPANCY_TOL = 0.1


def _power_of_two(n: float) -> int:
    return int(2 ** math.ceil(math.log2(max(1.0, n))))


def _bandwidth(lam: float, length: float) -> float:
    return lam * length / TWO_PI


def sample_count(lam: float, length: float) -> int:
    """Power of two >= max(64, 8·λL/2π)."""
    return max(MIN_SAMPLES, _power_of_two(OVERSAMPLING * _bandwidth(lam, length)))


def arc_samples(seg: GeodesicSegment, count: int):
    """Equispaced arc parameters.

    Periodic for closed curves, endpoints included otherwise.
    """
    if seg.closed:
        return seg.length * np.arange(count) / count
    return np.linspace(0.0, seg.length, count)


@dataclass(frozen=True, eq=False)
class RestrictedFn:
    """Samples of an eigenfunction along a geodesic."""

    geodesic: GeodesicSegment
    t: np.ndarray
    samples: np.ndarray
    lam: float
    label: str

    @property
    def count(self) -> int:
        return self.samples.size

    @property
    def length(self) -> float:
        return self.geodesic.length

    @property
    def bandwidth(self) -> float:
        return _bandwidth(self.lam, self.length)


def restrict_eigenfn(
    fn: EigenFn, seg: GeodesicSegment, count: Optional[int] = None
) -> RestrictedFn:
    """Evaluate fn at equispaced arc points of seg."""
    if seg.surface != fn.surface or not isinstance(seg.surface, (Torus, Sphere)):
        raise UnsupportedSurfaceError(
            f"restrictions need a torus or sphere geodesic on the {fn.surface}"
        )
    count = count or sample_count(fn.frequency, seg.length)
    t = arc_samples(seg, count)
    samples = np.asarray(fn.value(*seg.point_at(t)))
    if not np.iscomplexobj(samples):
        samples = samples.astype(float)
    return RestrictedFn(seg, t, samples, fn.frequency, fn.describe())


def orbital_fourier(r: RestrictedFn) -> Tuple[np.ndarray, np.ndarray]:
    """Frequencies n in [-count/2, count/2) and coefficients ν(n).

    Normalized so that Σ|ν(n)|² is the arc average of |φ∘γ|².
    """
    if not r.geodesic.closed:
        raise ValueError("Fourier coefficients need a closed geodesic")
    if r.count < ALIASING_GUARD * r.bandwidth:
        raise AliasingError(
            f"{r.count} samples do not resolve bandwidth {r.bandwidth:.4g} "
            f"(need at least {ALIASING_GUARD}x)"
        )
    coefficients = np.fft.fftshift(np.fft.fft(r.samples)) / r.count
    freqs = np.fft.fftshift(np.fft.fftfreq(r.count, d=1.0 / r.count)).astype(int)
    return freqs, coefficients


def sign_changes(r: RestrictedFn) -> int:
    """Strict sign alternations along the samples, cyclic on closed curves."""
    if np.iscomplexobj(r.samples):
        raise ValueError(f"sign changes need a real restriction, got {r.label}")
    scale = float(np.max(np.abs(r.samples)))
    if scale <= VANISHING_RTOL:
        raise VanishingRestrictionError(
            f"{r.label} vanishes along the geodesic (max {scale:.3g})"
        )
    positive = r.samples > 0
    if r.geodesic.closed:
        return int(np.count_nonzero(positive != np.roll(positive, 1)))
    return int(np.count_nonzero(positive[1:] != positive[:-1]))


# --- Kuznecov sums ---


@dataclass(frozen=True)
class KuznecovResult:
    """Cluster contributions and partial sums of squared periods."""

    lams: np.ndarray
    clusters: np.ndarray
    partial: np.ndarray
    kernel: Optional[np.ndarray]
    oracle: Optional[np.ndarray]
    fit: Optional[ExponentFit]
    period_lams: np.ndarray
    periods: np.ndarray
    normal_derivative: bool = False

    @property
    def kernel_deviation(self) -> float:
        """Worst basis-against-kernel cluster gap over the largest kernel value."""
        if self.kernel is None:
            return math.nan
        n = self.kernel.size
        scale = max(float(np.max(np.abs(self.kernel))), 1e-300)
        return float(np.max(np.abs(self.clusters[:n] - self.kernel))) / scale

    @property
    def oracle_deviation(self) -> float:
        if self.oracle is None:
            return math.nan
        return float(np.max(np.abs(self.clusters - self.oracle)))

    @property
    def flagged(self) -> bool:
        """Fitted growth disagrees with the √λ law."""
        return self.fit is not None and (
            abs(self.fit.exponent - PRINTED_KUZNECOV_EXPONENT) > DISCREPANCY_TOL
        )

    def rows(self):
        """(lambda, S, fitted exponent) rows."""
        exponent = f"{self.fit.exponent:.6g}" if self.fit else ''
        return [
            (f"{lam:.12g}", f"{value:.12g}", exponent)
            for lam, value in zip(self.lams, self.partial)
        ]


def _sphere_basis_periods(seg, weights, t, n_max, normal_derivative):
    """Periods of every real Y_N^m, N <= n_max, grouped as [N][m + N]."""
    phi, theta = seg.point_at(t)
    cos_phi, sin_phi = np.cos(phi), np.sin(phi)
    periods = [np.zeros(2 * degree + 1) for degree in range(n_max + 1)]
    for m in range(n_max + 1):
        if normal_derivative:
            d, dd = d_column(m, n_max, cos_phi, derivative=True)
            # ∂_φ of sin^m φ·D(cos φ)
            radial = -(sin_phi ** (m + 1)) * dd
            if m:
                radial = radial + m * sin_phi ** (m - 1) * cos_phi * d
        else:
            radial = sin_phi**m * d_column(m, n_max, cos_phi)
        if m == 0:
            angular = [(0, np.ones_like(theta))]
        else:
            angular = [
                (m, math.sqrt(2.0) * np.cos(m * theta)),
                (-m, math.sqrt(2.0) * np.sin(m * theta)),
            ]
        for order, factor in angular:
            values = radial @ (weights * factor)
            for offset, value in enumerate(values):
                degree = m + offset
                periods[degree][order + degree] = value
    return periods


def _sphere_kernel_clusters(seg, f, n_max):
    """∫∫ f(s) f(s') Π_N(γ(s), γ(s')) ds ds' for N <= n_max."""
    count = max(256, _power_of_two(4 * (n_max + 1)))
    t = arc_samples(seg, count)
    weights = (seg.length / count) * f(t)
    xyz = seg.embedded(t)
    cosines = np.clip(xyz @ xyz.T, -1.0, 1.0)
    outer = np.outer(weights, weights)
    values = np.empty(n_max + 1)
    prev2, prev = None, np.ones_like(cosines)
    for degree in range(n_max + 1):
        if degree == 1:
            prev2, prev = prev, cosines
        elif degree > 1:
            current = (
                (2 * degree - 1) * cosines * prev - (degree - 1) * prev2
            ) / degree
            prev2, prev = prev, current
        values[degree] = (2 * degree + 1) / (4.0 * math.pi) * np.sum(outer * prev)
    return values


def _is_great_circle(seg) -> bool:
    return isinstance(seg.surface, Sphere) and seg.closed


def _sphere_kuznecov(seg, f, lam, normal_derivative):
    if normal_derivative and abs(abs(seg.normal[2]) - 1.0) > 1e-12:
        raise UnsupportedSurfaceError(
            "normal-derivative periods are taken along the equator"
        )
    n_max = 0
    while math.sqrt((n_max + 1) * (n_max + 2)) <= lam * (1.0 + 1e-12):
        n_max += 1
    count = sample_count(lam, seg.length)
    t = arc_samples(seg, count)
    weights = (seg.length / count) * f(t)
    periods = _sphere_basis_periods(seg, weights, t, n_max, normal_derivative)
    lams = np.sqrt(np.arange(n_max + 1) * (np.arange(n_max + 1) + 1.0))
    scale = np.ones(n_max + 1)
    if normal_derivative:
        scale[1:] = 1.0 / lams[1:]
    clusters = np.array([np.sum(p**2) for p in periods]) * scale
    kernel = oracle = None
    if not normal_derivative:
        kernel = _sphere_kernel_clusters(seg, f, min(n_max, KERNEL_CHECK_DEGREE))
    if not normal_derivative and f is _unit and _is_great_circle(seg):
        degrees = np.arange(n_max + 1)
        oracle = math.pi * (2 * degrees + 1) * np.array(
            [legendre_at_zero(int(degree)) ** 2 for degree in degrees]
        )
    period_lams = np.concatenate(
        [np.full(2 * degree + 1, lams[degree]) for degree in range(n_max + 1)]
    )
    scaled = np.concatenate(
        [p * math.sqrt(s) for p, s in zip(periods, scale)]
    )
    return lams, clusters, kernel, oracle, period_lams, scaled


def _torus_kuznecov(seg, f, lam):
    modes = enumerate_modes(seg.surface, lam)
    count = sample_count(lam, seg.length)
    t = arc_samples(seg, count)
    weights = (seg.length / count) * f(t)
    u, v = seg.point_at(t)
    periods = np.array([float(np.dot(weights, mode.value(u, v))) for mode in modes])
    period_lams = np.array([mode.frequency for mode in modes])
    lams, inverse = np.unique(np.round(period_lams, 12), return_inverse=True)
    clusters = np.bincount(inverse, weights=periods**2, minlength=lams.size)
    # basis-free check: Σ over ±k of |∫ f e^{2πi<k,γ>}|²
    kernel = np.zeros(lams.size)
    for index, mode in enumerate(modes):
        if isinstance(mode, TorusMode):
            if mode.parity == 'cos':
                phase = TWO_PI * (mode.k1 * u + mode.k2 * v)
                period = np.dot(weights, np.exp(1j * phase))
                kernel[inverse[index]] += 2.0 * abs(period) ** 2
        else:
            kernel[inverse[index]] += float(np.sum(weights)) ** 2
    return lams, clusters, kernel, None, period_lams, periods


def _unit(t):
    return np.ones_like(np.asarray(t, dtype=float))


def kuznecov_sum(
    seg: GeodesicSegment,
    f: Optional[Callable] = None,
    lam: float = 20.0,
    normal_derivative: bool = False,
    fit_from: Optional[float] = None,
    basis_bound: Optional[float] = None,
) -> KuznecovResult:
    """Partial sums S(λ') = Σ_{λ_j <= λ'} |∫_γ f φ_j ds|² up to λ.

    f is a function of the arc parameter (default 1). Cluster values
    come from the explicit basis and, independently, from the projection
    kernel; basis_bound is the frequency up to which a caller-supplied
    basis is complete and must reach λ.
    """
    if not seg.closed:
        raise ValueError("Kuznecov sums run over closed geodesics")
    if not math.isfinite(lam) or lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if basis_bound is not None and basis_bound < lam:
        raise TruncationError(f"basis stops at λ = {basis_bound}, below {lam}")
    f = f or _unit
    if isinstance(seg.surface, Sphere):
        parts = _sphere_kuznecov(seg, f, lam, normal_derivative)
    else:
        if normal_derivative:
            raise UnsupportedSurfaceError(
                "normal-derivative periods are taken on the sphere"
            )
        parts = _torus_kuznecov(seg, f, lam)
    lams, clusters, kernel, oracle, period_lams, periods = parts
    partial = np.cumsum(clusters)

    fit_from = lam / 10.0 if fit_from is None else fit_from
    window = (lams >= fit_from) & (partial > 0)
    fit = None
    if np.count_nonzero(window) >= 3:
        fit = fit_exponent(lams[window], partial[window])
    result = KuznecovResult(
        lams,
        clusters,
        partial,
        kernel,
        oracle,
        fit,
        period_lams,
        periods,
        normal_derivative,
    )
    if result.flagged:
        _LOGGER.warning(
            "Kuznecov growth exponent %.4f on the %s differs from the sqrt(lambda) law",
            fit.exponent,
            seg.surface,
        )
    return result


def density_one_fraction(result: KuznecovResult, lam_lo: float, lam_hi: float) -> float:
    """Share of basis periods in [lam_lo, lam_hi] above λ^{-1/4}(log λ)^{1/2}."""
    keep = (result.period_lams >= lam_lo) & (result.period_lams <= lam_hi) & (
        result.period_lams > 1.0
    )
    if not np.any(keep):
        raise ValueError(f"no basis element with λ in [{lam_lo}, {lam_hi}]")
    lams = result.period_lams[keep]
    threshold = lams**-0.25 * np.sqrt(np.log(lams))
    return float(np.mean(np.abs(result.periods[keep]) > threshold))


# --- Equator mode weights ---


@dataclass(frozen=True)
class ModeProfile:
    """Equator weights of the degree-N harmonics against the arcsine law.

    values holds |Y_N^m|² at the equator and partners the normalized
    φ-derivative |∂_φ Y_N^m|²/(λ² - m²); exactly one of the two vanishes
    for each order.
    """

    degree: int
    orders: np.ndarray
    values: np.ndarray
    partners: np.ndarray

    @property
    def raw(self):
        return self.values + self.partners

    @property
    def weights(self):
        return self.raw / np.sum(self.raw)

    @property
    def sigma(self):
        return self.orders / self.degree

    @property
    def arcsine(self):
        """Arcsine mass of the bin around each order."""
        half = self.degree + 0.5
        edges = (np.arange(-self.degree, self.degree + 2) - 0.5) / half
        edges = np.clip(edges, -1.0, 1.0)
        cdf = 0.5 + np.arcsin(edges) / math.pi
        return np.diff(cdf)

    @property
    def cdf_distance(self) -> float:
        """sup |F_W - F_arcsine| at σ = (m + 1/2)/(N + 1/2)."""
        empirical = np.cumsum(self.weights)
        sigma = np.clip((self.orders + 0.5) / (self.degree + 0.5), -1.0, 1.0)
        return float(np.max(np.abs(empirical - (0.5 + np.arcsin(sigma) / math.pi))))

    def rows(self):
        """(sigma, W, arcsine) rows."""
        return [
            (f"{s:.12g}", f"{w:.12g}", f"{a:.12g}")
            for s, w, a in zip(self.sigma, self.weights, self.arcsine)
        ]


def qer_mode_profile(degree: int) -> ModeProfile:
    """W(m) = |Y_N^m(π/2, 0)|² + |∂_φ Y_N^m(π/2, 0)|²/(λ² - m²), m = -N..N."""
    if degree < 8:
        raise ValueError(f"mode profiles need N >= 8, got {degree}")
    values = np.empty(degree + 1)
    slopes = np.empty(degree + 1)
    for order in range(degree + 1):
        column, derivative = d_column(order, degree, 0.0, derivative=True)
        values[order] = float(column[-1])
        # ∂_φ P̄_N^m = -dD/dx on the equator
        slopes[order] = float(derivative[-1])
    orders = np.arange(-degree, degree + 1)
    m = np.abs(orders)
    lam2 = degree * (degree + 1.0)
    return ModeProfile(
        degree, orders, values[m] ** 2, slopes[m] ** 2 / (lam2 - m.astype(float) ** 2)
    )
