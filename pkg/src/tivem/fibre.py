"""Fibre-direction fields and element-level averaging of them."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constitutive import FibreDirection
from .errors import VanishingAverageWarning

D_CRIT_DEFAULT = 10.0


class Strategy(str, Enum):
    CENTROID = "centroid"
    NODAL = "nodal"
    EQUAL = "equal"
    VARYING = "varying"


def _cook_quartic_slope(x):
    # d/dx [(x-24)^2 (x-12)(x-36)] with w = x - 24: d/dw [w^4 - 144 w^2]
    w = x - 24.0
    return 4.0 * w**3 - 288.0 * w


def _beam_quartic_slope(x):
    # d/dx [(x-5)^2 (x-2.5)(x-7.5)] with w = x - 5: d/dw [w^4 - 6.25 w^2]
    w = x - 5.0
    return 4.0 * w**3 - 12.5 * w


def _sinusoidal_slope(x):
    return 2.0 * np.cos(x)


_SLOPES = {
    "quartic-cook": _cook_quartic_slope,
    "quartic-beam": _beam_quartic_slope,
    "sinusoidal": _sinusoidal_slope,
}


@dataclass(frozen=True)
class FibreField:
    """Analytic fibre distribution.

    ``kind`` is ``"constant"`` (uses ``angle``), ``"quartic-cook"``,
    ``"quartic-beam"`` or ``"sinusoidal"``.  Curve families give the unit
    tangent of the level curves y = c + f(x).
    """

    kind: str = "constant"
    angle: float = 0.0
    d_crit: float = D_CRIT_DEFAULT

    def __post_init__(self):
        if self.kind != "constant" and self.kind not in _SLOPES:
            raise ValueError(f"unknown fibre field kind {self.kind!r}")

    @classmethod
    def constant(cls, angle: float, d_crit: float = D_CRIT_DEFAULT) -> "FibreField":
        return cls("constant", angle, d_crit)

    def vectors(self, points: np.ndarray) -> np.ndarray:
        """Unit fibre vectors at an (n, 2) array of points."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "constant":
            a = np.array([math.cos(self.angle), math.sin(self.angle)])
            return np.tile(a, (len(points), 1))
        slope = _SLOPES[self.kind](points[:, 0])
        t = np.column_stack([np.ones_like(slope), slope])
        return t / np.hypot(t[:, 0], t[:, 1])[:, None]

    def direction_at(self, point) -> FibreDirection:
        a = self.vectors(np.asarray(point, dtype=float)[None, :])[0]
        return FibreDirection(float(a[0]), float(a[1]))


def weight(d: float, d_crit: float = D_CRIT_DEFAULT) -> float:
    """Centroidal weight (pi/2 + arctan(d_crit - d)) / (2 pi)."""
    return (0.5 * math.pi + math.atan(d_crit - d)) / (2.0 * math.pi)


def element_direction(
    field: FibreField,
    strategy: Strategy | str,
    centroid,
    vertices,
    d: float,
) -> FibreDirection:
    """Element-level fibre direction for one of the averaging strategies.

    Nodal vectors are flipped onto the half-plane of the centroid direction
    before averaging, since a and -a are the same fibre.  The result is
    normalised.  If the average cancels out, the centroid value is used and
    a :class:`VanishingAverageWarning` is emitted.
    """
    strategy = Strategy(strategy)
    if field.kind == "constant":
        return FibreDirection.from_angle(field.angle)
    ac = field.vectors(np.asarray(centroid, dtype=float)[None, :])[0]
    if strategy is Strategy.CENTROID:
        return FibreDirection(float(ac[0]), float(ac[1]))

    an = field.vectors(np.asarray(vertices, dtype=float))
    signs = np.where(an @ ac < 0.0, -1.0, 1.0)
    nodal = (an * signs[:, None]).mean(axis=0)
    if strategy is Strategy.NODAL:
        avg = nodal
    else:
        w = 0.5 if strategy is Strategy.EQUAL else weight(d, field.d_crit)
        avg = w * ac + (1.0 - w) * nodal

    n = math.hypot(avg[0], avg[1])
    if n < 1e-8:
        warnings.warn(
            "element fibre average vanished; using centroid direction",
            VanishingAverageWarning,
            stacklevel=2,
        )
        return FibreDirection(float(ac[0]), float(ac[1]))
    return FibreDirection(float(avg[0] / n), float(avg[1] / n))
