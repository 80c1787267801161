"""Scene data model, validation, the end-to-end pipeline and file I/O.

A scene is one geo-tagged image: a single acquisition instant and sun/satellite
geometry shared by every structure measured in it. Scene files are UTF-8 YAML
documents with units in the field names; see ``docs/scene_schema.md``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, time
from pathlib import Path
from typing import Any, Iterable, Sequence

import yaml

from . import shadow_geometry as sg
from . import solar_ephemeris as se
from .errors import (
    DomainError,
    InfeasibleGeometryError,
    InfeasibleMeasurementError,
    SchemaError,
    ShadowHeightError,
)
from .slope_error import SlopeErrorGate, SlopeSign, SlopeSpec

SCHEMA_VERSION = 1
PUBLISHED_ANGLE_TOL_DEG = 0.05
PUBLISHED_HEIGHT_TOL_M = 0.005
PUBLISHED_RATIO_TOL = 0.01

REPORT_CSV_COLUMNS = ("structure_id", "L_A2B_m", "L_A1A2_m", "H_m", "R_CS", "R_HS", "flags")


class SceneValidationError(ShadowHeightError):
    """Raised by :func:`process_scene` when validation fails and ``force`` is off."""

    def __init__(self, outcome: ValidationOutcome):
        codes = ", ".join(v.code for v in outcome.violations)
        super().__init__(f"scene failed validation: {codes}")
        self.outcome = outcome


# ---------------------------------------------------------------------------
# Data model


@dataclass(frozen=True)
class ValidationFlags:
    vertical_edge_visible: bool = True
    shadow_unambiguous: bool = True


@dataclass(frozen=True)
class Acquisition:
    """Local acquisition date and clock time, with the UTC offset of that clock."""

    date: date
    time: time
    utc_offset_hours: float = 0.0
    half_day: se.HalfDay | None = None

    @property
    def instant(self) -> se.CivilInstant:
        hour = self.time.hour + self.time.minute / 60 + (self.time.second + self.time.microsecond / 1e6) / 3600
        return se.CivilInstant.from_local(self.date, hour, self.utc_offset_hours, self.half_day)


@dataclass(frozen=True)
class Reference:
    """Independently known values for a structure (published or ground truth)."""

    height_m: float | None = None
    ratio_cs: float | None = None
    source: str | None = None


@dataclass(frozen=True)
class Structure:
    id: str
    measurements: sg.ShadowMeasurements
    reference: Reference | None = None


@dataclass(frozen=True)
class PublishedSolar:
    declination_deg: float | None = None
    hour_angle_deg: float | None = None
    elevation_deg: float | None = None


@dataclass(frozen=True)
class SceneObservation:
    id: str
    acquired: Acquisition
    latitude_deg: float
    solar_azimuth_deg: float
    satellite: sg.SatelliteGeometry
    structures: tuple[Structure, ...]
    slope: SlopeSpec = SlopeSpec(0.0)
    validation: ValidationFlags = ValidationFlags()
    hour_angle_override_deg: float | None = None
    declination_override_deg: float | None = None
    published_solar: PublishedSolar | None = None
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if not -90.0 < self.latitude_deg < 90.0:
            raise DomainError(f"latitude {self.latitude_deg} outside (-90, 90)")
        if not self.structures:
            raise DomainError("a scene needs at least one measured structure")
        object.__setattr__(self, "structures", tuple(self.structures))
        object.__setattr__(self, "notes", tuple(self.notes))


@dataclass(frozen=True)
class NeighborMeasurement:
    """A structure whose height is inferred from the scene ratios.

    Carrying neither length is allowed here; :func:`process_scene` reports it
    as a per-neighbour error.
    """

    id: str
    shadow_len_m: float | None = None
    edge_len_m: float | None = None

    def __post_init__(self):
        for name in ("shadow_len_m", "edge_len_m"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"neighbour {self.id}: {name} must be positive, got {v}")


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationOutcome:
    violations: tuple[Violation, ...] = ()

    @property
    def passed(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Diagnostic:
    code: str
    subject: str
    message: str
    values: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class StructureResult:
    id: str
    measurements: sg.ShadowMeasurements
    estimate: sg.HeightEstimate | None
    error: str | None = None
    reference: Reference | None = None

    @property
    def flags(self) -> tuple[str, ...]:
        out = []
        if self.estimate is not None:
            if self.estimate.discriminant_clamped:
                out.append("discriminant_clamped")
            if self.estimate.ambiguous:
                out.append("ambiguous_root")
        if self.error is not None:
            out.append(self.error)
        return tuple(out)


@dataclass(frozen=True)
class NeighborResult:
    id: str
    method: str | None
    height_m: float | None
    ratio: float | None = None
    error: str | None = None


@dataclass(frozen=True)
class SceneReport:
    scene_id: str
    solar: se.SolarState | None
    gate: SlopeErrorGate
    validation: ValidationOutcome
    forced: bool
    structures: tuple[StructureResult, ...]
    aggregate: sg.RatioAggregate | None
    mean_ratio_hs: float | None
    reference_aggregate: sg.RatioAggregate | None
    signifier_ratio_cs: float | None
    signifier_ratio_hs: float | None
    signifier_source: str | None
    neighbors: tuple[NeighborResult, ...]
    diagnostics: tuple[Diagnostic, ...]

    def diagnostics_with(self, code: str) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.code == code]


# ---------------------------------------------------------------------------
# Validation and solar state


def _solve_solar(obs: SceneObservation) -> tuple[se.SolarState, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    if obs.declination_override_deg is not None:
        delta = obs.declination_override_deg
    else:
        delta = se.declination_at(obs.acquired.instant)
    if obs.hour_angle_override_deg is not None:
        omega = obs.hour_angle_override_deg
    else:
        if obs.acquired.half_day is None:
            raise DomainError("acquired.half_day is required to invert the solar azimuth")
        sol = se.solve_hour_angle(obs.solar_azimuth_deg, obs.latitude_deg, delta, obs.acquired.half_day)
        omega = sol.hour_angle_deg
        if sol.clamped:
            diags.append(Diagnostic("HOUR_ANGLE_CLAMPED", "solar",
                                    "hour-angle root rounded onto the [-1, 1] cosine range or zero discriminant",
                                    {"discriminant": sol.discriminant}))
    h = se.elevation(obs.latitude_deg, delta, omega)
    if h <= 0.0:
        raise InfeasibleGeometryError(f"sun below the horizon (elevation {h:.4f} deg)")
    return se.SolarState(delta, omega, h, obs.solar_azimuth_deg % 360.0), diags


def resolve_solar_state(obs: SceneObservation) -> se.SolarState:
    """Declination, hour angle and elevation for a scene.

    Overrides in the observation take precedence over the ephemeris and the
    azimuth inversion.
    """
    return _solve_solar(obs)[0]


def gate_for_scene(obs: SceneObservation, target_rel_error: float) -> SlopeErrorGate:
    """Slope gate at the scene's solar elevation, or the fixed rule of thumb if that fails."""
    try:
        h = resolve_solar_state(obs).elevation_deg
        return SlopeErrorGate.for_elevation(target_rel_error, h)
    except ShadowHeightError:
        return SlopeErrorGate.rule_of_thumb()


def validate_scene(obs: SceneObservation, gate: SlopeErrorGate | None = None) -> ValidationOutcome:
    """Collect every validation violation of a scene."""
    gate = gate or SlopeErrorGate.rule_of_thumb()
    out = []
    if not obs.validation.vertical_edge_visible:
        out.append(Violation("EDGE_NOT_VISIBLE", "no distinctly visible vertical edge"))
    if not obs.validation.shadow_unambiguous:
        out.append(Violation("SHADOW_AMBIGUOUS", "shadow is not clear enough to avoid ambiguity"))
    if not gate.admits(obs.slope):
        code = "POSITIVE_SLOPE_EXCEEDS_GATE" if obs.slope.sign is SlopeSign.POSITIVE else "NEGATIVE_SLOPE_EXCEEDS_GATE"
        out.append(
            Violation(code, f"{obs.slope.sign.value} slope {obs.slope.angle_deg:g} deg exceeds "
                            f"{gate.limit(obs.slope.sign):.1f} deg")
        )
    try:
        _solve_solar(obs)
    except InfeasibleGeometryError as exc:
        code = "SUN_BELOW_HORIZON" if "horizon" in str(exc) else "SOLAR_STATE_INFEASIBLE"
        out.append(Violation(code, str(exc)))
    except DomainError as exc:
        out.append(Violation("SOLAR_STATE_INFEASIBLE", str(exc)))
    return ValidationOutcome(tuple(out))


# ---------------------------------------------------------------------------
# Pipeline


def reconciling_latitude(declination_deg: float, hour_angle_deg: float, elevation_deg: float,
                         hemisphere: float = 1.0) -> float | None:
    """Latitude at which the given declination and hour angle produce ``elevation_deg``.

    Searched on one hemisphere by bisection on a 0.5 degree scan; None when no
    root exists there.
    """
    def f(phi):
        return se.elevation(phi, declination_deg, hour_angle_deg) - elevation_deg

    sign = 1.0 if hemisphere >= 0 else -1.0
    grid = [sign * 0.5 * k for k in range(0, 180)]
    for a, b in zip(grid, grid[1:]):
        fa, fb = f(a), f(b)
        if fa == 0.0:
            return a
        if fa * fb < 0.0:
            for _ in range(80):
                m = 0.5 * (a + b)
                if f(a) * f(m) <= 0.0:
                    b = m
                else:
                    a = m
            return 0.5 * (a + b)
    return None


def _published_checks(obs: SceneObservation, solar: se.SolarState | None) -> list[Diagnostic]:
    diags = []
    pub = obs.published_solar
    ephem = se.declination_at(obs.acquired.instant)
    used_delta = solar.declination_deg if solar else ephem
    if obs.declination_override_deg is not None and abs(obs.declination_override_deg - ephem) > PUBLISHED_ANGLE_TOL_DEG:
        diags.append(Diagnostic(
            "DECLINATION_MISMATCH", "solar",
            f"declination override {obs.declination_override_deg:g} deg differs from the ephemeris value "
            f"{ephem:.4f} deg for {obs.acquired.date.isoformat()}",
            {"override_deg": obs.declination_override_deg, "ephemeris_deg": ephem},
        ))
    if pub is None:
        return diags
    if pub.declination_deg is not None and abs(pub.declination_deg - ephem) > PUBLISHED_ANGLE_TOL_DEG \
            and obs.declination_override_deg != pub.declination_deg:
        diags.append(Diagnostic(
            "DECLINATION_MISMATCH", "solar",
            f"published declination {pub.declination_deg:g} deg differs from the ephemeris value {ephem:.4f} deg",
            {"published_deg": pub.declination_deg, "ephemeris_deg": ephem},
        ))
    if pub.hour_angle_deg is not None and obs.acquired.half_day is not None:
        try:
            inverted = se.hour_angle(obs.solar_azimuth_deg, obs.latitude_deg, used_delta, obs.acquired.half_day)
        except ShadowHeightError as exc:
            diags.append(Diagnostic("HOUR_ANGLE_MISMATCH", "solar",
                                    f"published hour angle {pub.hour_angle_deg:g} deg cannot be checked: {exc}",
                                    {"published_deg": pub.hour_angle_deg}))
        else:
            if abs(inverted - pub.hour_angle_deg) > PUBLISHED_ANGLE_TOL_DEG:
                diags.append(Diagnostic(
                    "HOUR_ANGLE_MISMATCH", "solar",
                    f"azimuth {obs.solar_azimuth_deg:g} deg inverts to hour angle {inverted:.4f} deg, "
                    f"published {pub.hour_angle_deg:g} deg",
                    {"published_deg": pub.hour_angle_deg, "inverted_deg": inverted},
                ))
    if pub.elevation_deg is not None and solar is not None:
        if abs(solar.elevation_deg - pub.elevation_deg) > PUBLISHED_ANGLE_TOL_DEG:
            phi = reconciling_latitude(solar.declination_deg, solar.hour_angle_deg, pub.elevation_deg,
                                       obs.latitude_deg)
            msg = (f"solar elevation {solar.elevation_deg:.4f} deg at latitude {obs.latitude_deg:g} deg "
                   f"differs from published {pub.elevation_deg:g} deg")
            if phi is not None:
                msg += f"; latitude {phi:.2f} deg would reproduce it"
            diags.append(Diagnostic("ELEVATION_MISMATCH", "solar", msg, {
                "published_deg": pub.elevation_deg, "computed_deg": solar.elevation_deg,
                "reconciling_latitude_deg": phi,
            }))
    return diags


def _estimate_structure(s: Structure, solar: se.SolarState, obs: SceneObservation,
                        diags: list[Diagnostic]) -> StructureResult:
    try:
        est = sg.estimate_height(s.measurements, solar.elevation_deg, obs.solar_azimuth_deg,
                                 obs.satellite.azimuth_deg)
    except InfeasibleMeasurementError as exc:
        diags.append(Diagnostic("NEGATIVE_DISCRIMINANT", s.id, str(exc), {"discriminant": exc.discriminant}))
        return StructureResult(s.id, s.measurements, None, "negative_discriminant", s.reference)
    except InfeasibleGeometryError as exc:
        diags.append(Diagnostic("GROUND_SHADOW_NONPOSITIVE", s.id, str(exc)))
        return StructureResult(s.id, s.measurements, None, "ground_shadow_nonpositive", s.reference)
    if est.discriminant_clamped:
        diags.append(Diagnostic("DISCRIMINANT_CLAMPED", s.id, "tiny negative discriminant rounded to zero",
                                {"discriminant": est.discriminant}))
    if est.ambiguous:
        diags.append(Diagnostic("AMBIGUOUS_ROOT", s.id,
                                "the cosine rule also admits a shorter ground shadow; the longer one was used",
                                {"ground_shadow_m": est.ground_shadow_m}))
    ref = s.reference
    if ref is not None and ref.height_m is not None and abs(est.height_m - ref.height_m) > PUBLISHED_HEIGHT_TOL_M:
        diags.append(Diagnostic("HEIGHT_MISMATCH", s.id,
                                f"estimated height {est.height_m:.4f} m differs from reference {ref.height_m:g} m",
                                {"estimated_m": est.height_m, "reference_m": ref.height_m}))
    return StructureResult(s.id, s.measurements, est, None, s.reference)


def _reference_checks(s: Structure) -> list[Diagnostic]:
    ref = s.reference
    if ref is None or ref.height_m is None or ref.ratio_cs is None:
        return []
    implied = ref.height_m / s.measurements.shadow_len_m
    if abs(implied - ref.ratio_cs) <= PUBLISHED_RATIO_TOL:
        return []
    return [Diagnostic(
        "RATIO_MISMATCH", s.id,
        f"reference height / shadow = {ref.height_m:g} / {s.measurements.shadow_len_m:g} = {implied:.4f}, "
        f"but the reference ratio is {ref.ratio_cs:g}",
        {"implied_ratio": implied, "reference_ratio": ref.ratio_cs},
    )]


def process_scene(
    obs: SceneObservation,
    neighbors: Sequence[NeighborMeasurement] = (),
    gate: SlopeErrorGate | None = None,
    force: bool = False,
) -> SceneReport:
    """Run validation, solar resolution, height inversion and propagation.

    Per-structure and per-neighbour failures become report entries and
    diagnostics. Only a failed validation without ``force`` raises.
    """
    gate = gate or SlopeErrorGate.rule_of_thumb()
    outcome = validate_scene(obs, gate)
    if not outcome.passed and not force:
        raise SceneValidationError(outcome)

    diags: list[Diagnostic] = [Diagnostic("NOTE", "scene", note) for note in obs.notes]
    if not outcome.passed:
        diags.append(Diagnostic("VALIDATION_FORCED", "scene", "processed despite validation violations",
                                {"violations": [v.code for v in outcome.violations]}))
    diags.append(Diagnostic("SLOPE_GATE_MARGIN", "scene",
                            f"{obs.slope.sign.value} slope {obs.slope.angle_deg:g} deg against limit "
                            f"{gate.limit(obs.slope.sign):.4f} deg",
                            {"margin_deg": gate.margin(obs.slope)}))

    solar = None
    try:
        solar, solar_diags = _solve_solar(obs)
        diags.extend(solar_diags)
    except ShadowHeightError as exc:
        diags.append(Diagnostic("SOLAR_STATE_FAILED", "solar", str(exc)))
    diags.extend(_published_checks(obs, solar))

    results = []
    for s in obs.structures:
        diags.extend(_reference_checks(s))
        if solar is None:
            results.append(StructureResult(s.id, s.measurements, None, "no_solar_state", s.reference))
        else:
            results.append(_estimate_structure(s, solar, obs, diags))

    estimates = [r.estimate for r in results if r.estimate is not None]
    aggregate = sg.aggregate_ratio(estimates) if estimates else None
    hs = [e.ratio_hs for e in estimates if e.ratio_hs is not None]
    mean_hs = math.fsum(hs) / len(hs) if hs else None

    ref_cs = [s.reference.ratio_cs for s in obs.structures if s.reference and s.reference.ratio_cs is not None]
    ref_aggregate = sg.aggregate_ratios(ref_cs) if ref_cs else None
    ref_hs = [s.reference.height_m / s.measurements.edge_len_m for s in obs.structures
              if s.reference and s.reference.height_m is not None and s.measurements.edge_len_m > 0]

    if aggregate is not None:
        sig_cs, sig_hs, source = aggregate.mean_ratio, mean_hs, "estimated"
    elif ref_aggregate is not None or ref_hs:
        sig_cs = ref_aggregate.mean_ratio if ref_aggregate else None
        sig_hs = math.fsum(ref_hs) / len(ref_hs) if ref_hs else None
        source = "reference"
        diags.append(Diagnostic("SIGNIFIER_FROM_REFERENCE", "scene",
                                "no structure could be estimated; neighbour ratios come from reference values",
                                {"ratio_cs": sig_cs, "ratio_hs": sig_hs}))
    else:
        sig_cs = sig_hs = source = None
    if aggregate is not None and ref_aggregate is not None \
            and abs(aggregate.mean_ratio - ref_aggregate.mean_ratio) > PUBLISHED_RATIO_TOL:
        diags.append(Diagnostic(
            "SIGNIFIER_MISMATCH", "scene",
            f"estimated R_CS {aggregate.mean_ratio:.4f} (n={aggregate.count}) differs from the reference "
            f"mean {ref_aggregate.mean_ratio:.4f} (n={ref_aggregate.count})",
            {"estimated": aggregate.mean_ratio, "reference": ref_aggregate.mean_ratio},
        ))

    nb_results = tuple(_propagate(n, sig_cs, sig_hs) for n in neighbors)
    return SceneReport(
        scene_id=obs.id, solar=solar, gate=gate, validation=outcome, forced=not outcome.passed,
        structures=tuple(results), aggregate=aggregate, mean_ratio_hs=mean_hs,
        reference_aggregate=ref_aggregate, signifier_ratio_cs=sig_cs, signifier_ratio_hs=sig_hs,
        signifier_source=source, neighbors=nb_results, diagnostics=tuple(diags),
    )


def _propagate(n: NeighborMeasurement, ratio_cs: float | None, ratio_hs: float | None) -> NeighborResult:
    if n.shadow_len_m is None and n.edge_len_m is None:
        return NeighborResult(n.id, None, None, None, "no shadow or edge length")
    if n.shadow_len_m is not None and ratio_cs is not None:
        return NeighborResult(n.id, "shadow", sg.propagate_by_shadow(ratio_cs, n.shadow_len_m), ratio_cs)
    if n.edge_len_m is not None and ratio_hs is not None:
        return NeighborResult(n.id, "edge", sg.propagate_by_edge(ratio_hs, n.edge_len_m), ratio_hs)
    return NeighborResult(n.id, None, None, None, "no scene ratio available for the measured length")


# ---------------------------------------------------------------------------
# Scene files


_TOP_KEYS = {
    "schema_version", "id", "acquired", "latitude_deg", "solar_azimuth_deg", "satellite", "slope",
    "validation", "hour_angle_override_deg", "declination_override_deg", "published_solar", "notes",
    "structures", "neighbors",
}
_REQUIRED_TOP = ("schema_version", "id", "acquired", "latitude_deg", "solar_azimuth_deg", "satellite",
                 "slope", "validation", "structures")


def _line_map(node, path=(), out=None) -> dict[tuple, int]:
    out = {} if out is None else out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = k.value
            _line_map(v, path + (key,), out)
            out[path + (key,)] = k.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_map(v, path + (i,), out)
    return out


class _Reader:
    def __init__(self, lines: dict[tuple, int], strict: bool):
        self.lines = lines
        self.strict = strict

    def fail(self, path: tuple, msg: str):
        line = None
        p = path
        while line is None and p is not None:
            line = self.lines.get(p)
            p = p[:-1] if p else None
        raise SchemaError(msg, ".".join(str(x) for x in path), line)

    def mapping(self, value, path, allowed, required=()):
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        for k in value:
            if k not in allowed:
                if self.strict:
                    self.fail(path + (k,), "unknown field")
                warnings.warn(f"ignoring unknown field {'.'.join(map(str, path + (k,)))}", stacklevel=4)
        for k in required:
            if k not in value or value[k] is None:
                self.fail(path + (k,), "required field missing")
        return value

    def number(self, value, path, optional=False):
        if value is None and optional:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            self.fail(path, f"expected a finite number, got {value!r}")
        return float(value)

    def string(self, value, path):
        if not isinstance(value, str) or not value:
            self.fail(path, f"expected a non-empty string, got {value!r}")
        return value

    def boolean(self, value, path):
        if not isinstance(value, bool):
            self.fail(path, f"expected true or false, got {value!r}")
        return value

    def enum(self, cls, value, path):
        try:
            return cls(value)
        except ValueError:
            self.fail(path, f"expected one of {[m.value for m in cls]}, got {value!r}")

    def build(self, fn, path, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DomainError as exc:
            self.fail(path, str(exc))


def _parse_acquired(r: _Reader, raw, path) -> Acquisition:
    r.mapping(raw, path, {"date", "time", "utc_offset_hours", "half_day"}, ("date", "time"))
    d = raw["date"]
    if isinstance(d, str):
        try:
            d = date.fromisoformat(d)
        except ValueError:
            r.fail(path + ("date",), f"expected YYYY-MM-DD, got {d!r}")
    elif isinstance(d, datetime) or not isinstance(d, date):
        r.fail(path + ("date",), f"expected YYYY-MM-DD, got {d!r}")
    t = raw["time"]
    if not isinstance(t, str):
        r.fail(path + ("time",), f"expected a quoted 'HH:MM[:SS]' string, got {t!r}")
    try:
        t = time.fromisoformat(t)
    except ValueError:
        r.fail(path + ("time",), f"expected 'HH:MM[:SS]', got {t!r}")
    offset = r.number(raw.get("utc_offset_hours", 0.0), path + ("utc_offset_hours",))
    if not -14.0 <= offset <= 14.0:
        r.fail(path + ("utc_offset_hours",), f"offset {offset} outside [-14, 14]")
    half = raw.get("half_day")
    half = None if half is None else r.enum(se.HalfDay, half, path + ("half_day",))
    acq = Acquisition(d, t, offset, half)
    r.build(lambda: acq.instant, path)
    return acq


def _parse_structure(r: _Reader, raw, path) -> Structure:
    r.mapping(raw, path, {"id", "shadow_len_m", "edge_len_m", "reference"}, ("id", "shadow_len_m", "edge_len_m"))
    shadow = r.number(raw["shadow_len_m"], path + ("shadow_len_m",))
    edge = r.number(raw["edge_len_m"], path + ("edge_len_m",))
    if shadow <= 0.0:
        r.fail(path + ("shadow_len_m",), f"shadow length must be positive, got {shadow}")
    if edge < 0.0:
        r.fail(path + ("edge_len_m",), f"edge length must be non-negative, got {edge}")
    m = r.build(sg.ShadowMeasurements, path, shadow, edge)
    ref = None
    if raw.get("reference") is not None:
        rp = path + ("reference",)
        rr = r.mapping(raw["reference"], rp, {"height_m", "ratio_cs", "source"})
        src = rr.get("source")
        ref = Reference(r.number(rr.get("height_m"), rp + ("height_m",), optional=True),
                        r.number(rr.get("ratio_cs"), rp + ("ratio_cs",), optional=True),
                        None if src is None else r.string(src, rp + ("source",)))
    return Structure(r.string(raw["id"], path + ("id",)), m, ref)


def _parse_neighbor(r: _Reader, raw, path) -> NeighborMeasurement:
    r.mapping(raw, path, {"id", "shadow_len_m", "edge_len_m"}, ("id",))
    return r.build(NeighborMeasurement, path, r.string(raw["id"], path + ("id",)),
                   r.number(raw.get("shadow_len_m"), path + ("shadow_len_m",), optional=True),
                   r.number(raw.get("edge_len_m"), path + ("edge_len_m",), optional=True))


def loads_scene(text: str, strict: bool = True) -> tuple[SceneObservation, list[NeighborMeasurement]]:
    """Parse scene-file text. ``strict=False`` downgrades unknown fields to warnings."""
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise SchemaError("empty document")
        data = loader.construct_document(node)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"not valid YAML: {exc}", line=mark.line + 1 if mark else None) from None
    finally:
        loader.dispose()

    r = _Reader(_line_map(node), strict)
    r.mapping(data, (), _TOP_KEYS, _REQUIRED_TOP)
    version = data["schema_version"]
    if version != SCHEMA_VERSION:
        r.fail(("schema_version",), f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})")

    sat_raw = r.mapping(data["satellite"], ("satellite",), {"azimuth_deg", "elevation_deg"}, ("azimuth_deg",))
    satellite = r.build(sg.SatelliteGeometry, ("satellite",),
                        r.number(sat_raw["azimuth_deg"], ("satellite", "azimuth_deg")),
                        r.number(sat_raw.get("elevation_deg"), ("satellite", "elevation_deg"), optional=True))
    sl = r.mapping(data["slope"], ("slope",), {"angle_deg", "sign"}, ("angle_deg",))
    slope = r.build(SlopeSpec, ("slope",), r.number(sl["angle_deg"], ("slope", "angle_deg")),
                    r.enum(SlopeSign, sl.get("sign", "positive"), ("slope", "sign")))
    vf = r.mapping(data["validation"], ("validation",), {"vertical_edge_visible", "shadow_unambiguous"},
                   ("vertical_edge_visible", "shadow_unambiguous"))
    flags = ValidationFlags(r.boolean(vf["vertical_edge_visible"], ("validation", "vertical_edge_visible")),
                            r.boolean(vf["shadow_unambiguous"], ("validation", "shadow_unambiguous")))
    published = None
    if data.get("published_solar") is not None:
        pp = ("published_solar",)
        ps = r.mapping(data["published_solar"], pp, {"declination_deg", "hour_angle_deg", "elevation_deg"})
        published = PublishedSolar(*(r.number(ps.get(k), pp + (k,), optional=True)
                                     for k in ("declination_deg", "hour_angle_deg", "elevation_deg")))
    notes = data.get("notes") or []
    if not isinstance(notes, list):
        r.fail(("notes",), "expected a list of strings")
    notes = tuple(r.string(n, ("notes", i)) for i, n in enumerate(notes))

    structures = data["structures"]
    if not isinstance(structures, list) or not structures:
        r.fail(("structures",), "expected a non-empty list")
    structures = tuple(_parse_structure(r, s, ("structures", i)) for i, s in enumerate(structures))
    neighbors = data.get("neighbors") or []
    if not isinstance(neighbors, list):
        r.fail(("neighbors",), "expected a list")
    neighbors = [_parse_neighbor(r, n, ("neighbors", i)) for i, n in enumerate(neighbors)]
    for label, items in (("structures", structures), ("neighbors", neighbors)):
        ids = [x.id for x in items]
        for i, x in enumerate(ids):
            if x in ids[:i]:
                r.fail((label, i, "id"), f"duplicate id {x!r}")

    obs = r.build(
        SceneObservation, (),
        id=r.string(str(data["id"]) if isinstance(data["id"], (int, float)) else data["id"], ("id",)),
        acquired=_parse_acquired(r, data["acquired"], ("acquired",)),
        latitude_deg=r.number(data["latitude_deg"], ("latitude_deg",)),
        solar_azimuth_deg=r.number(data["solar_azimuth_deg"], ("solar_azimuth_deg",)),
        satellite=satellite,
        structures=structures,
        slope=slope,
        validation=flags,
        hour_angle_override_deg=r.number(data.get("hour_angle_override_deg"), ("hour_angle_override_deg",),
                                          optional=True),
        declination_override_deg=r.number(data.get("declination_override_deg"), ("declination_override_deg",),
                                          optional=True),
        published_solar=published,
        notes=notes,
    )
    return obs, neighbors


def case_study_path() -> Path:
    """Location of the shipped single-image case study scene file."""
    return Path(__file__).with_name("data") / "cairo_case_study.yaml"


def read_scene_file(path: str | Path, strict: bool = True) -> tuple[SceneObservation, list[NeighborMeasurement]]:
    return loads_scene(Path(path).read_text(encoding="utf-8"), strict=strict)


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def scene_to_document(obs: SceneObservation, neighbors: Iterable[NeighborMeasurement] = ()) -> dict:
    """Canonical document form of a scene (field order fixed, absent values omitted)."""
    acq = obs.acquired
    doc = {
        "schema_version": SCHEMA_VERSION,
        "id": obs.id,
        "acquired": _drop_none({
            "date": acq.date.isoformat(),
            "time": acq.time.isoformat(),
            "utc_offset_hours": float(acq.utc_offset_hours),
            "half_day": acq.half_day.value if acq.half_day else None,
        }),
        "latitude_deg": obs.latitude_deg,
        "solar_azimuth_deg": obs.solar_azimuth_deg,
        "satellite": _drop_none({"azimuth_deg": obs.satellite.azimuth_deg,
                                 "elevation_deg": obs.satellite.elevation_deg}),
        "hour_angle_override_deg": obs.hour_angle_override_deg,
        "declination_override_deg": obs.declination_override_deg,
        "slope": {"angle_deg": obs.slope.angle_deg, "sign": obs.slope.sign.value},
        "validation": {"vertical_edge_visible": obs.validation.vertical_edge_visible,
                       "shadow_unambiguous": obs.validation.shadow_unambiguous},
        "published_solar": _drop_none(asdict(obs.published_solar)) if obs.published_solar else None,
        "notes": list(obs.notes) or None,
        "structures": [
            _drop_none({
                "id": s.id,
                "shadow_len_m": s.measurements.shadow_len_m,
                "edge_len_m": s.measurements.edge_len_m,
                "reference": _drop_none(asdict(s.reference)) if s.reference else None,
            })
            for s in obs.structures
        ],
        "neighbors": [_drop_none(asdict(n)) for n in neighbors],
    }
    return _drop_none(doc)


def dumps_scene(obs: SceneObservation, neighbors: Iterable[NeighborMeasurement] = ()) -> str:
    return yaml.safe_dump(scene_to_document(obs, neighbors), sort_keys=False, allow_unicode=True,
                          default_flow_style=False, width=100)


def write_scene_file(path: str | Path, obs: SceneObservation,
                     neighbors: Iterable[NeighborMeasurement] = ()) -> None:
    Path(path).write_text(dumps_scene(obs, neighbors), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# Reports


def _g4(v: float | None) -> str:
    return "" if v is None else f"{v:.4f}"


def _full(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def report_to_dict(report: SceneReport) -> dict:
    """Machine-readable report with full-precision floats."""
    return {
        "scene_id": report.scene_id,
        "solar": asdict(report.solar) if report.solar else None,
        "gate": asdict(report.gate),
        "validation": [asdict(v) for v in report.validation.violations],
        "forced": report.forced,
        "structures": [
            {
                "id": r.id,
                "edge_len_m": r.measurements.edge_len_m,
                "shadow_len_m": r.measurements.shadow_len_m,
                "estimate": asdict(r.estimate) if r.estimate else None,
                "error": r.error,
                "reference": asdict(r.reference) if r.reference else None,
                "flags": list(r.flags),
            }
            for r in report.structures
        ],
        "aggregate": asdict(report.aggregate) if report.aggregate else None,
        "mean_ratio_hs": report.mean_ratio_hs,
        "reference_aggregate": asdict(report.reference_aggregate) if report.reference_aggregate else None,
        "signifier": {"ratio_cs": report.signifier_ratio_cs, "ratio_hs": report.signifier_ratio_hs,
                      "source": report.signifier_source},
        "neighbors": [asdict(n) for n in report.neighbors],
        "diagnostics": [asdict(d) for d in report.diagnostics],
    }


def report_to_json(report: SceneReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=False) + "\n"


def report_to_csv(report: SceneReport) -> str:
    """One row per structure, then one per neighbour (flag ``neighbor:<method>``)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_CSV_COLUMNS)
    for r in report.structures:
        e = r.estimate
        w.writerow([r.id, _full(r.measurements.edge_len_m), _full(r.measurements.shadow_len_m),
                    _full(e.height_m if e else None), _full(e.ratio_cs if e else None),
                    _full(e.ratio_hs if e else None), ";".join(r.flags)])
    for n in report.neighbors:
        flags = [f"neighbor:{n.method}" if n.method else "neighbor"]
        if n.error:
            flags.append(n.error.replace(" ", "_"))
        w.writerow([n.id, "", "", _full(n.height_m), "", "", ";".join(flags)])
    return buf.getvalue()


def report_to_text(report: SceneReport) -> str:
    """Human-readable report, 4 decimal places."""
    out = [f"scene: {report.scene_id}"]
    if report.solar:
        s = report.solar
        out.append(f"solar: declination={_g4(s.declination_deg)} hour_angle={_g4(s.hour_angle_deg)} "
                   f"elevation={_g4(s.elevation_deg)} azimuth={_g4(s.azimuth_deg)}")
    else:
        out.append("solar: unresolved")
    g = report.gate
    out.append(f"slope gate: target={_g4(g.target_rel_error)} max_pos={_g4(g.max_pos_slope_deg)} "
               f"max_neg={_g4(g.max_neg_slope_deg)}")
    out.append("validation: " + ("pass" if report.validation.passed else
                                 ", ".join(v.code for v in report.validation.violations)
                                 + (" (forced)" if report.forced else "")))
    out.append("structures:")
    for r in report.structures:
        e = r.estimate
        line = (f"  {r.id}: L_A2B={_g4(r.measurements.edge_len_m)} L_A1A2={_g4(r.measurements.shadow_len_m)}")
        if e:
            line += f" H={_g4(e.height_m)} R_CS={_g4(e.ratio_cs)} R_HS={_g4(e.ratio_hs)}"
        if r.flags:
            line += " [" + ", ".join(r.flags) + "]"
        out.append(line)

    def agg(label, a):
        if a is not None:
            out.append(f"{label}: mean={_g4(a.mean_ratio)} std={_g4(a.std_dev)} n={a.count}")

    agg("R_CS aggregate", report.aggregate)
    if report.mean_ratio_hs is not None:
        out.append(f"R_HS mean: {_g4(report.mean_ratio_hs)}")
    agg("reference R_CS aggregate", report.reference_aggregate)
    if report.signifier_source:
        out.append(f"signifier ({report.signifier_source}): R_CS={_g4(report.signifier_ratio_cs)} "
                   f"R_HS={_g4(report.signifier_ratio_hs)}")
    out.append("neighbors:" + ("" if report.neighbors else " none"))
    for n in report.neighbors:
        if n.error:
            out.append(f"  {n.id}: error: {n.error}")
        else:
            out.append(f"  {n.id}: H={_g4(n.height_m)} via {n.method} (ratio {_g4(n.ratio)})")
    out.append("diagnostics:" + ("" if report.diagnostics else " none"))
    for d in report.diagnostics:
        out.append(f"  [{d.code}] {d.subject}: {d.message}")
    return "\n".join(out) + "\n"


REPORT_FORMATS = {"csv": report_to_csv, "text": report_to_text, "json": report_to_json}


def format_report(report: SceneReport, fmt: str = "text") -> str:
    try:
        return REPORT_FORMATS[fmt](report)
    except KeyError:
        raise DomainError(f"unknown report format {fmt!r}; choose from {sorted(REPORT_FORMATS)}") from None


def write_report(report: SceneReport, path: str | Path, fmt: str = "text") -> None:
    Path(path).write_text(format_report(report, fmt), encoding="utf-8", newline="\n")
