"""Structure heights from the shadows and displaced edges seen in one satellite image."""
from .errors import (
    DomainError,
    InfeasibleGeometryError,
    InfeasibleMeasurementError,
    SchemaError,
    ShadowHeightError,
)
from .scene_model import (
    NeighborMeasurement,
    SceneObservation,
    SceneReport,
    format_report,
    loads_scene,
    process_scene,
    read_scene_file,
    validate_scene,
    write_scene_file,
)
from .shadow_geometry import (
    HeightEstimate,
    SatelliteGeometry,
    ShadowMeasurements,
    aggregate_ratios,
    estimate_height,
    propagate_by_edge,
    propagate_by_shadow,
)
from .slope_error import SlopeErrorGate, SlopeSign, SlopeSpec, max_admissible_slope, relative_error
from .solar_ephemeris import (
    CivilInstant,
    HalfDay,
    SolarState,
    declination,
    declination_at,
    elevation,
    hour_angle,
    solar_azimuth,
    solar_state,
)
from .synth_oracle import NoiseModel, generate_scene, round_trip

__version__ = "0.1.0"

__all__ = [
    "CivilInstant", "DomainError", "HalfDay", "HeightEstimate", "InfeasibleGeometryError",
    "InfeasibleMeasurementError", "NeighborMeasurement", "NoiseModel", "SatelliteGeometry",
    "SceneObservation", "SceneReport", "SchemaError", "ShadowHeightError", "ShadowMeasurements",
    "SlopeErrorGate", "SlopeSign", "SlopeSpec", "SolarState", "aggregate_ratios", "declination",
    "declination_at", "elevation", "estimate_height", "format_report", "generate_scene", "hour_angle",
    "loads_scene", "max_admissible_slope", "process_scene", "propagate_by_edge", "propagate_by_shadow",
    "read_scene_file", "relative_error", "round_trip", "solar_azimuth", "solar_state", "validate_scene",
    "write_scene_file",
]
