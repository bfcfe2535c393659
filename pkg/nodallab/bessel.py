"""Bessel zeros for the disc spectrum.

Zeros are bracketed on a fine grid, polished with Brent's method and then
cross-checked against scipy's tabulated zeros and the interlacing
j'_{m,n} < j_{m,n} < j'_{m,n+1}, j_{m,n} < j_{m+1,n} < j_{m,n+1}.
"""

from functools import lru_cache
import logging
import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import jn_zeros, jnp_zeros, jv, jvp

from .exceptions import SpectrumError

_LOGGER = logging.getLogger(__name__)

# consecutive zeros of J_m and J'_m are more than 2 apart
_BRACKET_STEP = 0.05

J01 = float(jn_zeros(0, 1)[0])
PLEIJEL_CONSTANT = 4.0 / J01**2


@lru_cache(maxsize=512)
def bessel_zeros(m: int, upper: float, derivative: bool = False):
    """Positive zeros of J_m (or J'_m) not exceeding upper, ascending.

    The zero of J'_0 at the origin is not included.
    """
    if m < 0:
        raise ValueError(f"Bessel order must be >= 0, got {m}")
    func = (lambda x: jvp(m, x)) if derivative else (lambda x: jv(m, x))
    start = max(float(m), 1e-3)
    if upper <= start:
        return ()
    grid = np.arange(start, upper + 2 * _BRACKET_STEP, _BRACKET_STEP)
    values = func(grid)
    zeros = []
    for index in np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0):
        root = brentq(func, grid[index], grid[index + 1], xtol=1e-14, rtol=1e-15)
        if root <= upper:
            zeros.append(root)
    zeros = tuple(zeros)
    _validate_against_table(m, zeros, derivative)
    _LOGGER.debug(
        "Found %d zeros of J%s_%d below %.6g",
        len(zeros),
        "'" if derivative else '',
        m,
        upper,
    )
    return zeros


def _validate_against_table(m, zeros, derivative):
    if not zeros:
        return
    table = jnp_zeros(m, len(zeros)) if derivative else jn_zeros(m, len(zeros))
    if not np.allclose(zeros, table, rtol=1e-10, atol=0):
        raise SpectrumError(
            f"bracketed zeros of order {m} disagree with the tabulated zeros"
        )


def check_interlacing(m: int, upper: float):
    """Check the interlacing properties of the zeros of orders m and m + 1."""
    j_m = bessel_zeros(m, upper)
    j_next = bessel_zeros(m + 1, upper)
    dj_m = bessel_zeros(m, upper, derivative=True)
    for n, root in enumerate(j_next):
        if not j_m[n] < root:
            raise SpectrumError(f"j_({m + 1},{n + 1}) does not exceed j_({m},{n + 1})")
        if n + 1 < len(j_m) and not root < j_m[n + 1]:
            raise SpectrumError(f"j_({m + 1},{n + 1}) exceeds j_({m},{n + 2})")
    if m >= 1:
        for n, root in enumerate(j_m):
            if not dj_m[n] < root:
                raise SpectrumError(
                    f"j'_({m},{n + 1}) does not precede j_({m},{n + 1})"
                )
            if n + 1 < len(dj_m) and not root < dj_m[n + 1]:
                raise SpectrumError(f"j_({m},{n + 1}) exceeds j'_({m},{n + 2})")
    return True


def bessel_zero(m: int, n: int, derivative: bool = False) -> float:
    """The n-th positive zero of J_m (or J'_m)."""
    if n < 1:
        raise ValueError(f"zero index must be >= 1, got {n}")
    table = jnp_zeros(m, n) if derivative else jn_zeros(m, n)
    return float(table[-1])


def max_order(upper: float) -> int:
    """Largest order whose first zero can lie below upper."""
    return int(math.floor(upper))
