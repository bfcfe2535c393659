"Factory to build EigenFn objects from experiment selectors"

import logging
import math
from typing import Optional, Tuple

from .geom import SPHERE, TORUS, Disc, Sphere, Surface, Torus, surface_by_name
from .modes import DiscMode, EigenFn, SphereMode, TorusConstant, TorusMode

_LOGGER = logging.getLogger(__name__)

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class EigenFnFactory:  # pylint: disable=too-few-public-methods
    "Factory object generating the EigenFn described by selectors"

    _generated_object: EigenFn

    def __new__(cls, *a, **kw):
        "Return not itself, but the EigenFn built by __init__"
        instance = super().__new__(cls)
        instance.__init__(*a, **kw)
        return instance._generated_object

    def __init__(
        self,
        surface,
        *,
        k: Optional[Tuple[int, int]] = None,
        parity: Optional[str] = None,
        N: Optional[int] = None,  # pylint: disable=invalid-name
        m: Optional[int] = None,
        bc: Optional[str] = None,
        n: Optional[int] = None,
        family: Optional[str] = None,
        index: Optional[int] = None,
    ) -> None:
        """Pick the mode class from the surface and the selectors given."""
        if isinstance(surface, str):
            surface = surface_by_name(surface)

        if family is not None:
            self._generated_object = self._family_member(surface, family, index, k)
        elif isinstance(surface, Torus):
            if k is None or tuple(k) == (0, 0):
                mode, sign = TorusConstant(), 1.0
            else:
                mode, sign = TorusMode.canonical(*k, parity=parity or 'sin')
            self._generated_object = EigenFn.single(mode, sign)
        elif isinstance(surface, Sphere):
            self._generated_object = EigenFn.single(SphereMode(N or 0, m or 0))
        elif isinstance(surface, Disc):
            self._generated_object = EigenFn.single(
                DiscMode(bc or 'dirichlet', m or 0, n or 1, parity or 'cos')
            )
        else:
            raise ValueError(f"no eigenfunctions for surface {surface!r}")

        _LOGGER.debug("Generated eigenfunction: %s", self._generated_object.describe())

    @staticmethod
    def _family_member(surface: Surface, family, index, k):
        """Member `index` of a named family (degree, ray multiple or radial index)."""
        family = family.lower()
        if family == 'zonal':
            return EigenFn.single(SphereMode(index, 0))
        if family in ('highestweight', 'highest_weight', 'gaussianbeam'):
            return highest_weight(index)
        if family == 'torusray':
            direction = k or (1, 0)
            mode, sign = TorusMode.canonical(
                index * direction[0], index * direction[1], parity='sin'
            )
            return EigenFn.single(mode, sign)
        if family == 'discradial':
            return EigenFn.single(DiscMode('dirichlet', 0, index))
        raise ValueError(f"unknown family {family!r} on the {surface}")


def highest_weight(degree: int) -> EigenFn:
    """Complex highest weight harmonic, proportional to (x1 + i x2)^N."""
    if degree == 0:
        return EigenFn.single(SphereMode(0, 0))
    return EigenFn(
        SPHERE,
        (
            (SphereMode(degree, degree), INV_SQRT2),
            (SphereMode(degree, -degree), 1j * INV_SQRT2),
        ),
    )


def torus_combination(terms) -> EigenFn:
    """Real combination of torus trig modes given as ((k1, k2), parity, coef)."""
    pieces = []
    for (k1, k2), parity, coef in terms:
        mode, sign = TorusMode.canonical(k1, k2, parity)
        pieces.append((mode, sign * coef))
    return EigenFn(TORUS, tuple(pieces))
