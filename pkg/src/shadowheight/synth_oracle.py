"""Forward model: exact shadow measurements from a known height and geometry.

The generator draws a full acquisition (date, latitude, hour angle) so that a
synthetic scene exercises the ephemeris, the azimuth inversion and the height
inversion end to end once written out as a scene file.
"""
from __future__ import annotations

import calendar
import math
from dataclasses import dataclass, field
from datetime import date, time, timedelta

import numpy as np

from . import shadow_geometry as sg
from . import solar_ephemeris as se
from .errors import DomainError, ShadowHeightError
from .scene_model import (
    Acquisition,
    NeighborMeasurement,
    Reference,
    SceneObservation,
    Structure,
    ValidationFlags,
)
from .slope_error import SlopeSpec


@dataclass(frozen=True)
class ForwardMeasurements:
    """Noiseless image measurements implied by a height and a sun/satellite geometry."""

    shadow_len_m: float
    edge_len_m: float
    ground_shadow_m: float

    @property
    def invertible(self) -> bool:
        return self.shadow_len_m > 0.0

    @property
    def measurements(self) -> sg.ShadowMeasurements:
        if not self.invertible:
            raise DomainError("sun and satellite coincide: zero shadow segment is not invertible")
        return sg.ShadowMeasurements(self.shadow_len_m, self.edge_len_m)


def forward_measurements(
    height_m: float,
    solar_elevation_deg: float,
    satellite_elevation_deg: float,
    solar_azimuth_deg: float,
    satellite_azimuth_deg: float,
) -> ForwardMeasurements:
    if not height_m > 0.0:
        raise DomainError(f"height must be positive, got {height_m}")
    for name, v in (("solar", solar_elevation_deg), ("satellite", satellite_elevation_deg)):
        if not 0.0 < v < 90.0:
            raise DomainError(f"{name} elevation {v} outside (0, 90)")
    ground = height_m / math.tan(math.radians(solar_elevation_deg))
    edge = height_m / math.tan(math.radians(satellite_elevation_deg))
    half = 0.5 * math.radians(solar_azimuth_deg - satellite_azimuth_deg)
    # Cosine rule rewritten as a sum of squares: no cancellation near coincidence.
    shadow = math.sqrt((ground - edge) ** 2 + 4.0 * ground * edge * math.sin(half) ** 2)
    return ForwardMeasurements(shadow, edge, ground)


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian perturbation of measured lengths and azimuths.

    Lengths are redrawn until positive (truncated Gaussian).
    """

    length_sigma_m: float = 0.0
    angle_sigma_deg: float = 0.0

    def __post_init__(self):
        if self.length_sigma_m < 0.0 or self.angle_sigma_deg < 0.0:
            raise DomainError("noise sigmas must be non-negative")

    def perturb_length(self, rng: np.random.Generator, value: float) -> float:
        if self.length_sigma_m == 0.0:
            return value
        while True:
            out = value + rng.normal(0.0, self.length_sigma_m)
            if out > 0.0:
                return float(out)

    def perturb_angle(self, rng: np.random.Generator, value: float) -> float:
        if self.angle_sigma_deg == 0.0:
            return value
        return float(value + rng.normal(0.0, self.angle_sigma_deg))


@dataclass(frozen=True)
class SceneRanges:
    """Sampling domain of :func:`generate_scene`. Latitudes are absolute values."""

    latitude_deg: tuple[float, float] = (25.0, 60.0)
    solar_elevation_deg: tuple[float, float] = (5.0, 85.0)
    satellite_elevation_deg: tuple[float, float] = (5.0, 85.0)
    max_delta_azimuth_deg: float = 175.0
    height_m: tuple[float, float] = (3.0, 60.0)
    years: tuple[int, int] = (2000, 2030)
    # Reject L_A1A2 < min_shadow_fraction * H (sun and satellite nearly coincide).
    min_shadow_fraction: float = 1e-6
    # Reject L_A1B - L_A2B cos(da) < min_branch_margin * H: there the closed form
    # picks the other cosine-rule root, or the two roots nearly merge.
    min_branch_margin: float = 1e-3

    def __post_init__(self):
        checks = [
            0.0 <= self.latitude_deg[0] < self.latitude_deg[1] < 90.0,
            0.0 < self.solar_elevation_deg[0] < self.solar_elevation_deg[1] < 90.0,
            0.0 < self.satellite_elevation_deg[0] < self.satellite_elevation_deg[1] < 90.0,
            0.0 <= self.max_delta_azimuth_deg < 180.0,
            0.0 < self.height_m[0] <= self.height_m[1],
            se.MIN_YEAR <= self.years[0] <= self.years[1] <= se.MAX_YEAR,
            self.min_shadow_fraction > 0.0,
        ]
        if not all(checks):
            raise DomainError(f"impossible sampling ranges: {self}")


@dataclass(frozen=True)
class SyntheticStructure:
    id: str
    height_m: float
    truth: ForwardMeasurements
    measured: sg.ShadowMeasurements


@dataclass(frozen=True)
class SyntheticScene:
    seed: int
    acquired: Acquisition
    latitude_deg: float
    solar: se.SolarState
    satellite: sg.SatelliteGeometry
    structures: tuple[SyntheticStructure, ...]
    neighbors: tuple[SyntheticStructure, ...] = ()
    noise: NoiseModel = NoiseModel()
    measured_solar_azimuth_deg: float | None = None
    measured_satellite_azimuth_deg: float | None = None
    rejections: int = 0

    @property
    def delta_azimuth_deg(self) -> float:
        return self.solar.azimuth_deg - self.satellite.azimuth_deg

    def truth_ratio_cs(self) -> float:
        s = self.structures[0]
        return s.height_m / s.truth.shadow_len_m

    def truth_ratio_hs(self) -> float:
        s = self.structures[0]
        return s.height_m / s.truth.edge_len_m

    def to_observation(self) -> tuple[SceneObservation, list[NeighborMeasurement]]:
        """Scene-file form: measured values only, ground truth as structure references.

        Even-indexed neighbours carry a shadow length, odd-indexed ones an edge length.
        """
        structures = tuple(
            Structure(s.id, s.measured, Reference(height_m=s.height_m, source="synthetic truth"))
            for s in self.structures
        )
        neighbors = [
            NeighborMeasurement(n.id, shadow_len_m=n.measured.shadow_len_m) if i % 2 == 0
            else NeighborMeasurement(n.id, edge_len_m=n.measured.edge_len_m)
            for i, n in enumerate(self.neighbors)
        ]
        obs = SceneObservation(
            id=f"synthetic-{self.seed}",
            acquired=self.acquired,
            latitude_deg=self.latitude_deg,
            solar_azimuth_deg=self.measured_solar_azimuth_deg
            if self.measured_solar_azimuth_deg is not None else self.solar.azimuth_deg,
            satellite=sg.SatelliteGeometry(
                self.measured_satellite_azimuth_deg
                if self.measured_satellite_azimuth_deg is not None else self.satellite.azimuth_deg,
                self.satellite.elevation_deg,
            ),
            structures=structures,
            slope=SlopeSpec(0.0),
            validation=ValidationFlags(),
        )
        return obs, neighbors


def _uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(rng.uniform(lo, hi))


def _draw_geometry(rng: np.random.Generator, ranges: SceneRanges):
    """One acquisition and sun/satellite geometry; None when it falls outside the domain."""
    year = int(rng.integers(ranges.years[0], ranges.years[1] + 1))
    days = 366 if calendar.isleap(year) else 365
    day = date(year, 1, 1) + timedelta(days=int(rng.integers(0, days)))
    seconds = int(rng.integers(0, 86400))
    clock = time(seconds // 3600, seconds % 3600 // 60, seconds % 60)
    lat = _uniform(rng, *ranges.latitude_deg) * (1.0 if rng.random() < 0.5 else -1.0)
    omega = _uniform(rng, -180.0, 180.0)
    half = se.HalfDay.MORNING if omega > 0 else se.HalfDay.AFTERNOON
    acquired = Acquisition(day, clock, 0.0, half)
    delta = se.declination_at(acquired.instant)
    h = se.elevation(lat, delta, omega)
    if not ranges.solar_elevation_deg[0] <= h <= ranges.solar_elevation_deg[1]:
        return None
    solar = se.SolarState(delta, omega, h, se.solar_azimuth(lat, delta, omega, h))
    h_sa = _uniform(rng, *ranges.satellite_elevation_deg)
    d_alpha = _uniform(rng, -ranges.max_delta_azimuth_deg, ranges.max_delta_azimuth_deg)
    satellite = sg.SatelliteGeometry((solar.azimuth_deg - d_alpha) % 360.0, h_sa)

    unit = forward_measurements(1.0, h, h_sa, solar.azimuth_deg, satellite.azimuth_deg)
    if unit.shadow_len_m < ranges.min_shadow_fraction:
        return None
    if unit.ground_shadow_m - unit.edge_len_m * math.cos(math.radians(d_alpha)) < ranges.min_branch_margin:
        return None
    return acquired, lat, solar, satellite


def _structure(rng, ident, height, solar, satellite, noise) -> SyntheticStructure:
    truth = forward_measurements(height, solar.elevation_deg, satellite.elevation_deg,
                                 solar.azimuth_deg, satellite.azimuth_deg)
    measured = sg.ShadowMeasurements(noise.perturb_length(rng, truth.shadow_len_m),
                                     noise.perturb_length(rng, truth.edge_len_m))
    return SyntheticStructure(ident, height, truth, measured)


def generate_scene(
    seed: int,
    n_structures: int = 5,
    n_neighbors: int = 0,
    ranges: SceneRanges | None = None,
    noise: NoiseModel | None = None,
    max_attempts: int = 100_000,
) -> SyntheticScene:
    """Seeded synthetic scene whose structures share one sun/satellite geometry."""
    if n_structures < 1 or n_neighbors < 0:
        raise DomainError("need at least one structure and a non-negative neighbour count")
    ranges = ranges or SceneRanges()
    noise = noise or NoiseModel()
    rng = np.random.default_rng(seed)
    for attempt in range(max_attempts):
        drawn = _draw_geometry(rng, ranges)
        if drawn is not None:
            break
    else:
        raise DomainError(f"no admissible geometry in {max_attempts} draws for {ranges}")
    acquired, lat, solar, satellite = drawn

    heights = rng.uniform(ranges.height_m[0], ranges.height_m[1], size=n_structures + n_neighbors)
    items = [_structure(rng, f"s{i + 1}", float(heights[i]), solar, satellite, noise) for i in range(n_structures)]
    nbs = [
        _structure(rng, f"n{i + 1}", float(heights[n_structures + i]), solar, satellite, noise)
        for i in range(n_neighbors)
    ]
    return SyntheticScene(
        seed=seed,
        acquired=acquired,
        latitude_deg=lat,
        solar=solar,
        satellite=satellite,
        structures=tuple(items),
        neighbors=tuple(nbs),
        noise=noise,
        measured_solar_azimuth_deg=noise.perturb_angle(rng, solar.azimuth_deg) % 360.0,
        measured_satellite_azimuth_deg=noise.perturb_angle(rng, satellite.azimuth_deg) % 360.0,
        rejections=attempt,
    )


@dataclass
class RoundTripSummary:
    scenes: int = 0
    structures: int = 0
    rejections: int = 0
    worst_height_rel_error: float = 0.0
    worst_ratio_std: float = 0.0
    failures: list[str] = field(default_factory=list)

    def passed(self, height_tol: float = 1e-9, std_tol: float = 1e-12) -> bool:
        return (not self.failures and self.worst_height_rel_error < height_tol
                and self.worst_ratio_std < std_tol)


def round_trip(seeds, n_structures: int = 5, ranges: SceneRanges | None = None) -> RoundTripSummary:
    """Invert noiseless scenes with their true solar elevation and compare to ground truth."""
    summary = RoundTripSummary()
    for seed in seeds:
        scene = generate_scene(int(seed), n_structures, ranges=ranges)
        summary.scenes += 1
        summary.rejections += scene.rejections
        estimates = []
        for s in scene.structures:
            try:
                est = sg.estimate_height(s.measured, scene.solar.elevation_deg, scene.solar.azimuth_deg,
                                         scene.satellite.azimuth_deg)
            except ShadowHeightError as exc:
                summary.failures.append(f"seed {seed} {s.id}: {exc}")
                continue
            estimates.append(est)
            summary.structures += 1
            rel = abs(est.height_m - s.height_m) / s.height_m
            summary.worst_height_rel_error = max(summary.worst_height_rel_error, rel)
        if len(estimates) > 1:
            summary.worst_ratio_std = max(summary.worst_ratio_std, sg.aggregate_ratio(estimates).std_dev)
    return summary


def height_spread(
    sigmas,
    trials: int = 1000,
    seed: int = 0,
    height_m: float = 20.0,
    solar_elevation_deg: float = 45.0,
    satellite_elevation_deg: float = 70.0,
    delta_azimuth_deg: float = 60.0,
) -> dict[float, tuple[float, int]]:
    """Monte-Carlo spread of recovered height under length noise.

    Returns ``{sigma: (sample std of recovered heights, infeasible trials)}``.
    Each trial draws from its own child of ``SeedSequence(seed)``.
    """
    solar_az, sat_az = 180.0, 180.0 - delta_azimuth_deg
    truth = forward_measurements(height_m, solar_elevation_deg, satellite_elevation_deg, solar_az, sat_az)
    out = {}
    for sigma in sigmas:
        noise = NoiseModel(length_sigma_m=sigma)
        children = np.random.SeedSequence(seed).spawn(trials)
        heights, failed = [], 0
        for child in children:
            rng = np.random.default_rng(child)
            m = sg.ShadowMeasurements(noise.perturb_length(rng, truth.shadow_len_m),
                                      noise.perturb_length(rng, truth.edge_len_m))
            try:
                heights.append(sg.estimate_height(m, solar_elevation_deg, solar_az, sat_az).height_m)
            except ShadowHeightError:
                failed += 1
        out[sigma] = (float(np.std(heights, ddof=1)), failed)
    return out
