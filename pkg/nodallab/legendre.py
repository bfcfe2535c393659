"""Normalized associated Legendre functions by three-term recurrence.

The sphere basis uses P̄_N^m(cos φ) = sin^m φ · D_N^m(cos φ) with D a
polynomial in cos φ. D obeys a recurrence in N that is valid at complex
arguments, which gives the holomorphic continuation for free.
"""

import logging
import math

import numpy as np
from scipy.special import gammaln

_LOGGER = logging.getLogger(__name__)

INV_SQRT_4PI = 1.0 / math.sqrt(4.0 * math.pi)


def _diagonal(m):
    """D_m^m, the x-independent start of the recurrence."""
    value = INV_SQRT_4PI
    for k in range(1, m + 1):
        value *= math.sqrt((2 * k + 1) / (2 * k))
    return value


def d_column(m: int, n_max: int, x, derivative: bool = False):
    """D_N^m(x) for N = m..n_max, stacked on a new first axis.

    x may be real or complex. With derivative=True also returns dD/dx.
    """
    if m < 0 or n_max < m:
        raise ValueError(f"need 0 <= m <= n_max, got m={m}, n_max={n_max}")
    x = np.asarray(x)
    dtype = np.result_type(x.dtype, float)
    values = np.empty((n_max - m + 1,) + x.shape, dtype=dtype)
    slopes = np.empty_like(values) if derivative else None
    prev2 = np.zeros(x.shape, dtype=dtype)
    prev = np.full(x.shape, _diagonal(m), dtype=dtype)
    dprev2 = np.zeros(x.shape, dtype=dtype)
    dprev = np.zeros(x.shape, dtype=dtype)
    values[0] = prev
    if derivative:
        slopes[0] = dprev
    for index, degree in enumerate(range(m + 1, n_max + 1), start=1):
        a = math.sqrt((4 * degree * degree - 1) / (degree * degree - m * m))
        b = math.sqrt(
            ((degree - 1) ** 2 - m * m) / (4 * (degree - 1) ** 2 - 1)
        )
        current = a * (x * prev - b * prev2)
        if derivative:
            dcurrent = a * (prev + x * dprev - b * dprev2)
            dprev2, dprev = dprev, dcurrent
            slopes[index] = dcurrent
        prev2, prev = prev, current
        values[index] = current
    if derivative:
        return values, slopes
    return values


def d_value(degree: int, m: int, x, derivative: bool = False):
    """D_N^m(x) for a single degree (and dD/dx when asked)."""
    result = d_column(m, degree, x, derivative=derivative)
    if derivative:
        return result[0][-1], result[1][-1]
    return result[-1]


def normalized_legendre(degree: int, m: int, phi):
    """P̄_N^m(cos φ), normalized so that ∫ P̄² sin φ dφ = 1/(2π)."""
    phi = np.asarray(phi, dtype=float)
    return np.sin(phi) ** m * d_value(degree, m, np.cos(phi))


def legendre_table(n_max: int, x, derivative: bool = False):
    """Unnormalized Legendre polynomials P_0..P_{n_max} at x (Bonnet recurrence)."""
    x = np.asarray(x)
    dtype = np.result_type(x.dtype, float)
    table = np.empty((n_max + 1,) + x.shape, dtype=dtype)
    table[0] = 1.0
    if n_max >= 1:
        table[1] = x
    for degree in range(1, n_max):
        table[degree + 1] = (
            (2 * degree + 1) * x * table[degree] - degree * table[degree - 1]
        ) / (degree + 1)
    if not derivative:
        return table
    slopes = np.zeros_like(table)
    if n_max >= 1:
        slopes[1] = 1.0
    for degree in range(1, n_max):
        slopes[degree + 1] = slopes[degree - 1] + (2 * degree + 1) * table[degree]
    return table, slopes


def legendre_at_zero(degree: int) -> float:
    """P_N(0) in closed form: zero for odd N."""
    if degree % 2:
        return 0.0
    half = degree // 2
    log_value = gammaln(degree + 1) - degree * math.log(2) - 2 * gammaln(half + 1)
    return (-1) ** half * math.exp(log_value)


def laplace_contour_legendre(degree: int, m: int, phi, nodes: int = 256):
    """P̄_N^m(cos φ) from the contour integral of (cos φ + i sin φ cos s)^N.

    (1/2π)∫(cos φ + i sin φ cos s)^N e^{-ims} ds = i^m N!/(N+m)! P_N^m(cos φ),
    evaluated with the trapezoid rule, which is exact for these
    trigonometric polynomials once nodes > N + m. Low-degree oracle only.
    """
    if nodes <= degree + m:
        raise ValueError(f"need more than {degree + m} nodes, got {nodes}")
    phi = np.asarray(phi, dtype=float)
    s = 2.0 * math.pi * np.arange(nodes) / nodes
    base = np.cos(phi)[..., None] + 1j * np.sin(phi)[..., None] * np.cos(s)
    integral = np.mean(base**degree * np.exp(-1j * m * s), axis=-1)
    log_ratio = gammaln(degree + m + 1) - gammaln(degree + 1)
    plain = (integral / (1j**m)).real * math.exp(log_ratio)
    log_norm = 0.5 * (
        math.log((2 * degree + 1) / (4 * math.pi))
        + gammaln(degree - m + 1)
        - gammaln(degree + m + 1)
    )
    return plain * math.exp(log_norm)
