"""Structure height from a shadow segment and an off-nadir edge displacement.

Geometry (plan view, all lengths on the ground in metres):

* ``B``  foot of the vertical edge,
* ``A1`` tip of the cast shadow, so ``|A1 B| = H / tan(solar elevation)``,
* ``A2`` roof corner as displaced by off-nadir viewing, ``|A2 B| = H / tan(satellite elevation)``.

The image shows ``|A1 A2|`` (shadow segment) and ``|A2 B|`` (edge displacement).
The angle at ``B`` is the solar/satellite azimuth difference, so the cosine
rule links the three sides and can be inverted for the full ground shadow.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError, InfeasibleGeometryError, InfeasibleMeasurementError

DISCRIMINANT_TOL = 1e-9


@dataclass(frozen=True)
class SatelliteGeometry:
    azimuth_deg: float
    elevation_deg: float | None = None

    def __post_init__(self):
        if self.elevation_deg is not None and not 0.0 < self.elevation_deg <= 90.0:
            raise DomainError(f"satellite elevation {self.elevation_deg} outside (0, 90]")


@dataclass(frozen=True)
class ShadowMeasurements:
    shadow_len_m: float
    edge_len_m: float

    def __post_init__(self):
        if not (math.isfinite(self.shadow_len_m) and self.shadow_len_m > 0.0):
            raise DomainError(f"shadow length must be positive and finite, got {self.shadow_len_m}")
        if not (math.isfinite(self.edge_len_m) and self.edge_len_m >= 0.0):
            raise DomainError(f"edge length must be non-negative and finite, got {self.edge_len_m}")


@dataclass(frozen=True)
class HeightEstimate:
    """Recovered height with the intermediates of the inversion.

    ``discriminant_clamped`` is set when a tiny negative discriminant was
    rounded up to zero. ``ambiguous`` is set when the cosine rule also admits a
    second, shorter positive ground shadow (the closed form always takes the
    longer one).
    """

    height_m: float
    ground_shadow_m: float
    ratio_cs: float
    ratio_hs: float | None
    discriminant: float
    discriminant_clamped: bool = False
    ambiguous: bool = False


@dataclass(frozen=True)
class RatioAggregate:
    mean_ratio: float
    std_dev: float
    count: int


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be positive and finite, got {value}")


def shadow_discriminant(measurements: ShadowMeasurements, delta_azimuth_deg: float) -> float:
    s = math.sin(math.radians(delta_azimuth_deg))
    return measurements.shadow_len_m**2 - (measurements.edge_len_m * s) ** 2


def estimate_height(
    measurements: ShadowMeasurements,
    solar_elevation_deg: float,
    solar_azimuth_deg: float,
    satellite_azimuth_deg: float,
) -> HeightEstimate:
    """Invert the shadow/satellite triangle for the structure height.

    ``H = tan(h_s) * (L_A2B cos(da) + sqrt(L_A1A2^2 - L_A2B^2 sin^2(da)))`` with
    ``da`` the solar minus satellite azimuth.
    """
    if not 0.0 < solar_elevation_deg < 90.0:
        raise DomainError(f"solar elevation {solar_elevation_deg} outside (0, 90)")
    d_alpha = math.radians(solar_azimuth_deg - satellite_azimuth_deg)
    edge = measurements.edge_len_m
    shadow = measurements.shadow_len_m

    disc = shadow**2 - (edge * math.sin(d_alpha)) ** 2
    clamped = False
    if disc < 0.0:
        if disc < -DISCRIMINANT_TOL:
            raise InfeasibleMeasurementError(
                f"negative discriminant {disc:.6g} m^2: shadow segment {shadow} m is shorter than "
                f"the edge displacement's cross-track component {abs(edge * math.sin(d_alpha)):.6g} m",
                disc,
            )
        disc, clamped = 0.0, True

    along = edge * math.cos(d_alpha)
    root = math.sqrt(disc)
    if along >= 0.0:
        ground = along + root
    else:
        # Conjugate form: the product of the two roots is edge^2 - shadow^2, no cancellation.
        ground = (shadow - edge) * (shadow + edge) / (root - along)
    if ground <= 0.0:
        raise InfeasibleGeometryError(
            f"ground shadow {ground:.6g} m is not positive; the sun lies behind the measured segment"
        )
    height = math.tan(math.radians(solar_elevation_deg)) * ground
    return HeightEstimate(
        height_m=height,
        ground_shadow_m=ground,
        ratio_cs=height / shadow,
        ratio_hs=height / edge if edge > 0.0 else None,
        discriminant=disc,
        discriminant_clamped=clamped,
        ambiguous=along - root > 0.0 and root > 0.0,
    )


def corner_shadow_ratio(height_m: float, shadow_len_m: float) -> float:
    """Height divided by the measured shadow segment."""
    _positive("height", height_m)
    _positive("shadow length", shadow_len_m)
    return height_m / shadow_len_m


def propagate_by_shadow(ratio_cs: float, neighbor_shadow_len_m: float) -> float:
    _positive("ratio", ratio_cs)
    _positive("neighbour shadow length", neighbor_shadow_len_m)
    return ratio_cs * neighbor_shadow_len_m


def edge_height_ratio(height_m: float, edge_len_m: float) -> float:
    """Height divided by the displaced vertical-edge length."""
    _positive("height", height_m)
    _positive("edge length", edge_len_m)
    return height_m / edge_len_m


def propagate_by_edge(ratio_hs: float, neighbor_edge_len_m: float) -> float:
    _positive("ratio", ratio_hs)
    _positive("neighbour edge length", neighbor_edge_len_m)
    return ratio_hs * neighbor_edge_len_m


def aggregate_ratios(ratios: Iterable[float]) -> RatioAggregate:
    """Mean and sample (n-1) standard deviation of a set of ratios.

    A single ratio has zero spread.
    """
    values = list(ratios)
    if not values:
        raise DomainError("cannot aggregate an empty set of ratios")
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return RatioAggregate(statistics.fmean(values), std, len(values))


def aggregate_ratio(estimates: Sequence[HeightEstimate]) -> RatioAggregate:
    """Signifier ratio of a scene: aggregate of the corner-shadow ratios."""
    if not estimates:
        raise DomainError("cannot aggregate an empty list of estimates")
    return aggregate_ratios(e.ratio_cs for e in estimates)
