"""Exact eigenmodes of the model surfaces and their finite combinations."""

from dataclasses import dataclass, field
import logging
import math
from typing import ClassVar, Tuple

import numpy as np
from scipy.special import jv, jvp

from .bessel import bessel_zero
from .exceptions import MixedEigenvalueError, UnsupportedSurfaceError
from .geom import DISC, SPHERE, TORUS, Surface
from .legendre import d_value

_LOGGER = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

# relative tolerance for "these modes share one eigenvalue"
_EIGENVALUE_RTOL = 1e-12


@dataclass(frozen=True)
class ModeIndex:
    """Label of one exact L²-normalized eigenfunction."""

    SURFACE: ClassVar[Surface] = None
    VARIANT: ClassVar[str] = None

    @property
    def surface(self):
        return self.SURFACE

    @property
    def eigenvalue(self) -> float:
        """λ², the Laplace eigenvalue."""
        raise NotImplementedError

    @property
    def frequency(self) -> float:
        """λ = sqrt(eigenvalue)."""
        return math.sqrt(self.eigenvalue)

    def value(self, u, v):
        raise NotImplementedError

    def gradient(self, u, v):
        """Orthonormal-frame components of the gradient."""
        raise NotImplementedError

    def value_cx(self, coords):
        raise UnsupportedSurfaceError(
            f"{self.VARIANT} modes have no holomorphic continuation here"
        )

    @property
    def variant(self) -> str:
        return self.VARIANT

    def label_fields(self):
        """(k1, k2, N, m, n, parity) table columns; blank where not applicable."""
        raise NotImplementedError


@dataclass(frozen=True)
class TorusConstant(ModeIndex):
    """Constant mode 1 on the unit torus."""

    SURFACE: ClassVar[Surface] = TORUS
    VARIANT: ClassVar[str] = 'constant'

    @property
    def eigenvalue(self):
        return 0.0

    def value(self, u, v):
        return np.ones(np.broadcast(np.asarray(u), np.asarray(v)).shape)

    def gradient(self, u, v):
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        return np.zeros(shape), np.zeros(shape)

    def value_cx(self, coords):
        return np.ones(np.asarray(coords).shape[1:], dtype=complex)

    def label_fields(self):
        return ('0', '0', '', '', '', '')


@dataclass(frozen=True)
class TorusMode(ModeIndex):
    """sqrt(2)·sin or sqrt(2)·cos of 2π<k, x>, k on the half-lattice."""

    SURFACE: ClassVar[Surface] = TORUS
    VARIANT: ClassVar[str] = 'trig'

    k1: int
    k2: int
    parity: str = 'sin'

    def __post_init__(self):
        if not (self.k1 > 0 or (self.k1 == 0 and self.k2 > 0)):
            raise ValueError(
                f"wavevector ({self.k1},{self.k2}) is not on the half-lattice"
            )
        if self.parity not in ('sin', 'cos'):
            raise ValueError(f"torus parity must be sin or cos, got {self.parity!r}")

    @classmethod
    def canonical(cls, k1: int, k2: int, parity: str = 'sin'):
        """Mode for an arbitrary nonzero k, with the sign absorbed for -k.

        Returns (mode, sign) so that the trig function of k equals sign * mode.
        """
        if (k1, k2) == (0, 0):
            raise ValueError("k = (0, 0) is the constant mode")
        if k1 > 0 or (k1 == 0 and k2 > 0):
            return cls(k1, k2, parity), 1.0
        return cls(-k1, -k2, parity), (-1.0 if parity == 'sin' else 1.0)

    @property
    def eigenvalue(self):
        return 4.0 * math.pi**2 * (self.k1**2 + self.k2**2)

    def _phase(self, u, v):
        return TWO_PI * (self.k1 * np.asarray(u) + self.k2 * np.asarray(v))

    def value(self, u, v):
        phase = self._phase(u, v)
        return SQRT2 * (np.sin(phase) if self.parity == 'sin' else np.cos(phase))

    def gradient(self, u, v):
        phase = self._phase(u, v)
        wave = np.cos(phase) if self.parity == 'sin' else -np.sin(phase)
        slope = SQRT2 * TWO_PI * wave
        return self.k1 * slope, self.k2 * slope

    def value_cx(self, coords):
        coords = np.asarray(coords, dtype=complex)
        phase = TWO_PI * (self.k1 * coords[0] + self.k2 * coords[1])
        return SQRT2 * (np.sin(phase) if self.parity == 'sin' else np.cos(phase))

    def label_fields(self):
        return (str(self.k1), str(self.k2), '', '', '', self.parity)


@dataclass(frozen=True)
class SphereMode(ModeIndex):
    """Real spherical harmonic of degree N and order m.

    m > 0 uses sqrt(2)·cos(mθ), m < 0 uses sqrt(2)·sin(|m|θ), m = 0 is
    zonal; no Condon-Shortley phase.
    """

    SURFACE: ClassVar[Surface] = SPHERE
    VARIANT: ClassVar[str] = 'harmonic'

    N: int
    m: int = 0

    def __post_init__(self):
        if self.N < 0 or abs(self.m) > self.N:
            raise ValueError(
                f"invalid spherical harmonic index (N={self.N}, m={self.m})"
            )

    @property
    def order(self):
        return abs(self.m)

    @property
    def eigenvalue(self):
        return float(self.N * (self.N + 1))

    def _angular(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.m == 0:
            return np.ones_like(theta)
        if self.m > 0:
            return SQRT2 * np.cos(self.m * theta)
        return SQRT2 * np.sin(self.order * theta)

    def _angular_slope(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.m == 0:
            return np.zeros_like(theta)
        if self.m > 0:
            return -SQRT2 * self.m * np.sin(self.m * theta)
        return SQRT2 * self.order * np.cos(self.order * theta)

    def polar(self, phi):
        """P̄_N^|m|(cos φ)."""
        phi = np.asarray(phi, dtype=float)
        return np.sin(phi) ** self.order * d_value(self.N, self.order, np.cos(phi))

    def value(self, u, v):
        return self.polar(u) * self._angular(v)

    def gradient(self, u, v):
        phi = np.asarray(u, dtype=float)
        x = np.cos(phi)
        s = np.sin(phi)
        d, dd = d_value(self.N, self.order, x, derivative=True)
        m = self.order
        dpolar = -(s ** (m + 1)) * dd
        if m:
            dpolar = dpolar + m * s ** (m - 1) * x * d
            polar_over_sin = s ** (m - 1) * d
        else:
            polar_over_sin = np.zeros_like(d)
        return dpolar * self._angular(v), polar_over_sin * self._angular_slope(v)

    def value_cx(self, coords):
        z1, z2, z3 = np.asarray(coords, dtype=complex)
        m = self.order
        if m == 0:
            angular = np.ones_like(z3)
        else:
            plus = (z1 + 1j * z2) ** m
            minus = (z1 - 1j * z2) ** m
            if self.m > 0:
                angular = SQRT2 * (plus + minus) / 2.0
            else:
                angular = SQRT2 * (plus - minus) / 2j
        return d_value(self.N, m, z3) * angular

    def label_fields(self):
        return ('', '', str(self.N), str(self.m), '', '')


@dataclass(frozen=True)
class DiscMode(ModeIndex):
    """Dirichlet or Neumann eigenfunction c·J_m(κr)·cos|sin(mθ) of the unit disc."""

    SURFACE: ClassVar[Surface] = DISC
    VARIANT: ClassVar[str] = 'bessel'

    bc: str
    m: int
    n: int
    parity: str = 'cos'
    kappa: float = field(default=None, compare=False)

    def __post_init__(self):
        if self.bc not in ('dirichlet', 'neumann'):
            raise ValueError(
                f"boundary condition must be dirichlet or neumann: {self.bc!r}"
            )
        if self.m < 0 or self.n < 1:
            raise ValueError(f"invalid disc mode index (m={self.m}, n={self.n})")
        if self.parity not in ('sin', 'cos') or (self.m == 0 and self.parity == 'sin'):
            raise ValueError(f"invalid parity {self.parity!r} for m={self.m}")
        if self.kappa is None:
            object.__setattr__(self, 'kappa', self._find_kappa())

    @property
    def variant(self):
        return f'bessel-{self.bc}'

    def _find_kappa(self):
        if self.bc == 'dirichlet':
            return bessel_zero(self.m, self.n)
        if self.m == 0:
            # J'_0 vanishes at the origin: n = 1 is the constant mode
            return 0.0 if self.n == 1 else bessel_zero(0, self.n - 1, derivative=True)
        return bessel_zero(self.m, self.n, derivative=True)

    @property
    def eigenvalue(self):
        return self.kappa**2

    @property
    def amplitude(self):
        """Normalization constant c with ∫|φ|² dA = 1."""
        kappa = self.kappa
        if kappa == 0.0:
            return 1.0 / math.sqrt(math.pi)
        if self.bc == 'dirichlet':
            radial = 0.5 * jv(self.m + 1, kappa) ** 2
        else:
            radial = 0.5 * (1.0 - (self.m / kappa) ** 2) * jv(self.m, kappa) ** 2
        angular = 2.0 * math.pi if self.m == 0 else math.pi
        return 1.0 / math.sqrt(radial * angular)

    def _angular(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.m == 0:
            return np.ones_like(theta)
        if self.parity == 'cos':
            return np.cos(self.m * theta)
        return np.sin(self.m * theta)

    def _angular_slope(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.m == 0:
            return np.zeros_like(theta)
        if self.parity == 'cos':
            return -self.m * np.sin(self.m * theta)
        return self.m * np.cos(self.m * theta)

    def value(self, u, v):
        r = np.asarray(u, dtype=float)
        return self.amplitude * jv(self.m, self.kappa * r) * self._angular(v)

    def gradient(self, u, v):
        r = np.asarray(u, dtype=float)
        c = self.amplitude
        radial = c * self.kappa * jvp(self.m, self.kappa * r) * self._angular(v)
        safe_r = np.where(r > 1e-12, r, 1.0)
        over_r = np.where(
            r > 1e-12,
            jv(self.m, self.kappa * r) / safe_r,
            0.5 * self.kappa if self.m == 1 else 0.0,
        )
        return radial, c * over_r * self._angular_slope(v)

    def label_fields(self):
        return ('', '', '', str(self.m), str(self.n), self.parity)


@dataclass(frozen=True, eq=False)
class EigenFn:
    """A single mode or a finite combination of modes of one eigenvalue.

    Coefficients may be complex (e.g. the complex highest weight
    (Y_cos + i Y_sin)/sqrt(2)); nodal operations need a real function.
    """

    surface: Surface
    modes: Tuple[Tuple[ModeIndex, complex], ...]
    eigenvalue: float = field(init=False)

    def __post_init__(self):
        modes = tuple((mode, coef) for mode, coef in self.modes)
        if not modes:
            raise ValueError("an eigenfunction needs at least one mode")
        object.__setattr__(self, 'modes', modes)
        for mode, _ in modes:
            if mode.surface != self.surface:
                raise UnsupportedSurfaceError(
                    f"{mode} does not live on the {self.surface}"
                )
        eigenvalues = [mode.eigenvalue for mode, _ in modes]
        first = eigenvalues[0]
        for other in eigenvalues[1:]:
            if not math.isclose(other, first, rel_tol=_EIGENVALUE_RTOL, abs_tol=1e-12):
                raise MixedEigenvalueError(
                    f"modes with eigenvalues {first} and {other} cannot be combined"
                )
        object.__setattr__(self, 'eigenvalue', float(first))

    @classmethod
    def single(cls, mode: ModeIndex, coefficient: complex = 1.0):
        return cls(mode.surface, ((mode, coefficient),))

    @property
    def frequency(self) -> float:
        return math.sqrt(self.eigenvalue)

    @property
    def is_real(self) -> bool:
        return all(np.imag(coef) == 0 for _, coef in self.modes)

    @property
    def l2_norm(self) -> float:
        """Exact L² norm, from the orthonormality of distinct modes."""
        merged = {}
        for mode, coef in self.modes:
            merged[mode] = merged.get(mode, 0.0) + coef
        return math.sqrt(sum(abs(coef) ** 2 for coef in merged.values()))

    @property
    def normalized(self) -> bool:
        return math.isclose(self.l2_norm, 1.0, rel_tol=1e-12)

    @property
    def fingerprint(self):
        """Hashable identity used to match derived objects to their source."""
        return (
            self.surface.kind,
            tuple((mode, complex(coef)) for mode, coef in self.modes),
        )

    def _combine(self, pieces):
        total = None
        for (_, coef), piece in zip(self.modes, pieces):
            term = coef * piece if np.imag(coef) != 0 else np.real(coef) * piece
            total = term if total is None else total + term
        return total

    def value(self, u, v):
        return self._combine(mode.value(u, v) for mode, _ in self.modes)

    def gradient(self, u, v):
        pairs = [mode.gradient(u, v) for mode, _ in self.modes]
        return (
            self._combine(pair[0] for pair in pairs),
            self._combine(pair[1] for pair in pairs),
        )

    def value_cx(self, coords):
        return self._combine(
            np.asarray(mode.value_cx(coords), dtype=complex) for mode, _ in self.modes
        )

    def scaled(self, factor: complex) -> 'EigenFn':
        return EigenFn(
            self.surface, tuple((mode, coef * factor) for mode, coef in self.modes)
        )

    def negated(self) -> 'EigenFn':
        return self.scaled(-1.0)

    def describe(self) -> str:
        parts = [f"{coef:+.4g}*{mode}" for mode, coef in self.modes]
        return f"{self.surface}: " + ' '.join(parts)


def check_real(fn: EigenFn, operation: str):
    """Reject complex combinations for operations on real zero sets."""
    if not fn.is_real:
        raise ValueError(f"{operation} needs a real eigenfunction, got {fn.describe()}")
