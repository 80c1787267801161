"""Relative height error caused by sloping terrain under the shadow."""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Sequence

from .errors import DomainError

SUPPORTED_MAX_SLOPE_DEG = 10.0

# Slopes and solar elevations of the reference error grids.
POSITIVE_GRID_SLOPES = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5)
NEGATIVE_GRID_SLOPES = (1.0, 1.5, 2.0, 2.5, 3.0)
GRID_ELEVATIONS = (20.0, 30.0, 40.0, 50.0, 60.0, 70.0)


class SlopeSign(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class SlopeSpec:
    angle_deg: float
    sign: SlopeSign = SlopeSign.POSITIVE

    def __post_init__(self):
        if not 0.0 <= self.angle_deg <= SUPPORTED_MAX_SLOPE_DEG:
            raise DomainError(f"slope {self.angle_deg} outside [0, {SUPPORTED_MAX_SLOPE_DEG}]")
        if not isinstance(self.sign, SlopeSign):
            object.__setattr__(self, "sign", SlopeSign(self.sign))


@dataclass(frozen=True)
class SlopeErrorGate:
    """Largest admissible positive and negative slopes for a target error."""

    target_rel_error: float
    max_pos_slope_deg: float
    max_neg_slope_deg: float

    def __post_init__(self):
        if self.max_pos_slope_deg <= 0.0 or self.max_neg_slope_deg <= 0.0:
            raise DomainError("gate slopes must be positive")

    @classmethod
    def rule_of_thumb(cls) -> SlopeErrorGate:
        """Fixed 3.0 / 2.5 degree gate for a roughly 5 % height error."""
        return cls(0.05, 3.0, 2.5)

    @classmethod
    def for_elevation(cls, target_rel_error: float, solar_elevation_deg: float) -> SlopeErrorGate:
        return cls(
            target_rel_error,
            max_admissible_slope(target_rel_error, solar_elevation_deg, SlopeSign.POSITIVE),
            max_admissible_slope(target_rel_error, solar_elevation_deg, SlopeSign.NEGATIVE),
        )

    def limit(self, sign: SlopeSign) -> float:
        return self.max_pos_slope_deg if SlopeSign(sign) is SlopeSign.POSITIVE else self.max_neg_slope_deg

    def margin(self, slope: SlopeSpec) -> float:
        """Gate limit minus the slope; negative when the gate fails."""
        return self.limit(slope.sign) - slope.angle_deg

    def admits(self, slope: SlopeSpec) -> bool:
        return self.margin(slope) >= 0.0


def relative_error(solar_elevation_deg: float, slope: SlopeSpec) -> float:
    """Relative height error ``tan(h) |1 - sin(h) / sin(h +/- theta)|``."""
    if not 0.0 < solar_elevation_deg < 90.0:
        raise DomainError(f"solar elevation {solar_elevation_deg} outside (0, 90)")
    theta = slope.angle_deg if slope.sign is SlopeSign.POSITIVE else -slope.angle_deg
    shifted = solar_elevation_deg + theta
    if shifted <= 0.0:
        raise DomainError(
            f"negative slope {slope.angle_deg} is not below the solar elevation {solar_elevation_deg}"
        )
    h = math.radians(solar_elevation_deg)
    return math.tan(h) * abs(1.0 - math.sin(h) / math.sin(math.radians(shifted)))


def error_table(
    slopes: Sequence[float],
    elevations: Sequence[float],
    sign: SlopeSign | str,
) -> list[list[float]]:
    """Grid of relative errors, one row per slope and one column per elevation."""
    sign = SlopeSign(sign)
    return [[relative_error(h, SlopeSpec(t, sign)) for h in elevations] for t in slopes]


def round_half_up(value: float, places: int = 2) -> Decimal:
    """Half-up rounding of the shortest decimal form of ``value``."""
    return Decimal(repr(float(value))).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)


def _search_limit(solar_elevation_deg: float, sign: SlopeSign) -> float:
    # The error grows monotonically only while sin(h + theta) rises, i.e. theta <= 90 - h.
    if sign is SlopeSign.POSITIVE:
        return min(SUPPORTED_MAX_SLOPE_DEG, 90.0 - solar_elevation_deg)
    return min(SUPPORTED_MAX_SLOPE_DEG, solar_elevation_deg * (1.0 - 1e-9))


def max_admissible_slope(
    target_rel_error: float,
    solar_elevation_deg: float,
    sign: SlopeSign | str,
    tol_deg: float = 1e-6,
) -> float:
    """Largest slope whose relative error stays at or below the target.

    Bisection over the monotone part of the supported band. Raises DomainError
    when the target is not reached anywhere inside that band.
    """
    sign = SlopeSign(sign)
    if not 0.0 < target_rel_error <= 0.2:
        raise DomainError(f"target relative error {target_rel_error} outside (0, 0.2]")
    if not 5.0 < solar_elevation_deg < 85.0:
        raise DomainError(f"solar elevation {solar_elevation_deg} outside (5, 85)")

    def err(theta):
        return relative_error(solar_elevation_deg, SlopeSpec(theta, sign))

    lo, hi = 0.0, _search_limit(solar_elevation_deg, sign)
    if err(hi) <= target_rel_error:
        raise DomainError(
            f"target {target_rel_error} not reached for slopes up to {hi:.4g} deg "
            f"at elevation {solar_elevation_deg}"
        )
    while hi - lo > tol_deg:
        mid = 0.5 * (lo + hi)
        if err(mid) <= target_rel_error:
            lo = mid
        else:
            hi = mid
    return lo
