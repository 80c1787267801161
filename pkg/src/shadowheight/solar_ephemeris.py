"""Low-cost solar ephemeris: declination, hour angle, elevation and azimuth.

Declination uses a seven-term Fourier series in the day angle.
The hour angle is recovered from a *measured* solar azimuth by solving a
quadratic in cos(hour angle). Conventions used throughout:

* all public angles are in degrees;
* azimuths are measured clockwise from true north, in [0, 360);
* the hour angle is positive in the morning and negative in the afternoon.
"""
from __future__ import annotations

import calendar
import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from enum import Enum

from .errors import DomainError, InfeasibleGeometryError

MIN_YEAR = 1970
MAX_YEAR = 2100
TROPICAL_YEAR_DAYS = 365.2422
MAX_DECLINATION_DEG = 23.6

# (constant, sin w, sin 2w, sin 3w, cos w, cos 2w, cos 3w)
DECLINATION_COEFFS = (0.3723, 23.2567, 0.1149, -0.1712, -0.7580, 0.3656, 0.0201)

# Root tolerances of the hour-angle quadratic.
_COS_BOUND_TOL = 1e-9
_DISC_REL_TOL = 1e-12


class HalfDay(str, Enum):
    MORNING = "morning"
    AFTERNOON = "afternoon"

    @property
    def sign(self) -> float:
        return 1.0 if self is HalfDay.MORNING else -1.0


@dataclass(frozen=True)
class CivilInstant:
    """A moment of the year used by the declination series.

    ``day_of_year`` counts fractional days since Jan 1 00:00 UT, so Jan 1 noon
    is 0.5 and Jan 15 noon is 14.5.
    """

    year: int
    day_of_year: float
    half_day: HalfDay | None = None

    def __post_init__(self):
        if not MIN_YEAR <= self.year <= MAX_YEAR:
            raise DomainError(f"year {self.year} outside supported band [{MIN_YEAR}, {MAX_YEAR}]")
        days = 366 if calendar.isleap(self.year) else 365
        if not 0.0 <= self.day_of_year < days:
            raise DomainError(f"day_of_year {self.day_of_year} outside [0, {days})")
        if self.half_day is not None and not isinstance(self.half_day, HalfDay):
            object.__setattr__(self, "half_day", HalfDay(self.half_day))

    @classmethod
    def from_datetime(cls, when: datetime, half_day: HalfDay | str | None = None) -> CivilInstant:
        """Build from a datetime. Naive datetimes are taken as UT."""
        if when.tzinfo is not None:
            when = when.astimezone(timezone.utc)
        start = datetime(when.year, 1, 1, tzinfo=when.tzinfo)
        n = (when - start).total_seconds() / 86400.0
        return cls(when.year, n, HalfDay(half_day) if half_day is not None else None)

    @classmethod
    def from_local(
        cls,
        day: date,
        hour: float = 12.0,
        utc_offset_hours: float = 0.0,
        half_day: HalfDay | str | None = None,
    ) -> CivilInstant:
        """Build from a local calendar date, clock hour and UTC offset."""
        tz = timezone(timedelta(hours=utc_offset_hours))
        local = datetime(day.year, day.month, day.day, tzinfo=tz) + timedelta(hours=hour)
        return cls.from_datetime(local, half_day)


@dataclass(frozen=True)
class DayAngleContext:
    w_deg: float
    n0: float


@dataclass(frozen=True)
class SolarState:
    declination_deg: float
    hour_angle_deg: float
    elevation_deg: float
    azimuth_deg: float | None = None


@dataclass(frozen=True)
class HourAngleQuadratic:
    """Coefficients of ``a x^2 + b x + c = 0`` with ``x = cos(hour angle)``."""

    a: float
    b: float
    c: float

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c


@dataclass(frozen=True)
class DeclinationSpread:
    """Intra-day spread of declination sampled at 09:00, 12:00 and 15:00."""

    samples_deg: tuple[float, float, float]
    max_abs_delta_deg: float
    max_abs_delta_sin: float
    max_abs_delta_cos: float


def spring_equinox_day(year: int) -> float:
    """Fractional day number of the March equinox for ``year``."""
    if not MIN_YEAR <= year <= MAX_YEAR:
        raise DomainError(f"year {year} outside supported band [{MIN_YEAR}, {MAX_YEAR}]")
    k = year - 1969
    # int() truncates toward zero; k > 0 here so this equals floor.
    return 78.801 + 0.2422 * k - int(0.25 * k)


def day_angle_context(instant: CivilInstant) -> DayAngleContext:
    n0 = spring_equinox_day(instant.year)
    w = 360.0 * (instant.day_of_year - n0 - 0.5) / TROPICAL_YEAR_DAYS
    return DayAngleContext(w, n0)


def day_angle(instant: CivilInstant) -> float:
    """Day angle in degrees. Not wrapped; may be negative."""
    return day_angle_context(instant).w_deg


def declination(w_deg: float) -> float:
    """Solar declination in degrees for day angle ``w_deg``."""
    w = math.radians(w_deg)
    k0, s1, s2, s3, c1, c2, c3 = DECLINATION_COEFFS
    return (
        k0
        + s1 * math.sin(w)
        + s2 * math.sin(2 * w)
        + s3 * math.sin(3 * w)
        + c1 * math.cos(w)
        + c2 * math.cos(2 * w)
        + c3 * math.cos(3 * w)
    )


def declination_at(instant: CivilInstant) -> float:
    return declination(day_angle(instant))


def declination_daily_spread(day: date, utc_offset_hours: float = 0.0) -> DeclinationSpread:
    """Spread statistics of |delta|, |sin delta| and |cos delta| over 09:00/12:00/15:00."""
    samples = tuple(
        declination_at(CivilInstant.from_local(day, hour, utc_offset_hours)) for hour in (9.0, 12.0, 15.0)
    )
    rad = [math.radians(d) for d in samples]

    def spread(values):
        values = [abs(v) for v in values]
        return max(values) - min(values)

    return DeclinationSpread(
        samples_deg=samples,
        max_abs_delta_deg=spread(samples),
        max_abs_delta_sin=spread(math.sin(r) for r in rad),
        max_abs_delta_cos=spread(math.cos(r) for r in rad),
    )


def hour_angle_quadratic(solar_azimuth_deg: float, latitude_deg: float, declination_deg: float) -> HourAngleQuadratic:
    """The quadratic in cos(hour angle) as written with tan^2 of the azimuth.

    Singular when the azimuth is due east or west; :func:`hour_angle` solves an
    equivalent form scaled by cos^2 of the azimuth instead.
    """
    t2 = math.tan(math.radians(solar_azimuth_deg)) ** 2
    phi = math.radians(latitude_deg)
    tan_d = math.tan(math.radians(declination_deg))
    return HourAngleQuadratic(
        a=t2 * math.sin(phi) ** 2 + 1.0,
        b=-math.sin(2 * phi) * tan_d * t2,
        c=t2 * math.cos(phi) ** 2 * tan_d**2 - 1.0,
    )


def _check_ranges(latitude_deg: float, declination_deg: float) -> None:
    if not -90.0 < latitude_deg < 90.0:
        raise DomainError(f"latitude {latitude_deg} outside (-90, 90)")
    if abs(declination_deg) > MAX_DECLINATION_DEG:
        raise DomainError(f"declination {declination_deg} outside [-{MAX_DECLINATION_DEG}, {MAX_DECLINATION_DEG}]")


@dataclass(frozen=True)
class HourAngleSolution:
    hour_angle_deg: float
    candidates_deg: tuple[float, ...]
    discriminant: float
    clamped: bool


def hour_angle(
    solar_azimuth_deg: float,
    latitude_deg: float,
    declination_deg: float,
    half_day: HalfDay | str,
) -> float:
    """Hour angle in degrees recovered from a measured solar azimuth.

    See :func:`solve_hour_angle` for the root selection.
    """
    return solve_hour_angle(solar_azimuth_deg, latitude_deg, declination_deg, half_day).hour_angle_deg


def solve_hour_angle(
    solar_azimuth_deg: float,
    latitude_deg: float,
    declination_deg: float,
    half_day: HalfDay | str,
) -> HourAngleSolution:
    """Solve for the hour angle and keep the inversion diagnostics.

    Both roots of the cos(hour angle) quadratic are evaluated. Roots outside
    [-1, 1] are discarded, as are roots introduced by squaring that would put
    the sun on the wrong side of the east-west line for the measured azimuth.
    The smallest remaining angle wins and takes its sign from ``half_day``.

    Raises InfeasibleGeometryError when no admissible root exists.
    """
    _check_ranges(latitude_deg, declination_deg)
    if half_day is None:
        raise DomainError("half_day is required to sign the hour angle")
    half_day = HalfDay(half_day)

    alpha = math.radians(solar_azimuth_deg)
    phi = math.radians(latitude_deg)
    sin_a, cos_a = math.sin(alpha), math.cos(alpha)
    sin_p, cos_p = math.sin(phi), math.cos(phi)
    tan_d = math.tan(math.radians(declination_deg))

    # Same roots as hour_angle_quadratic(), multiplied through by cos^2(alpha).
    s2, c2 = sin_a * sin_a, cos_a * cos_a
    a = s2 * sin_p * sin_p + c2
    b = -2.0 * s2 * sin_p * cos_p * tan_d
    c = s2 * cos_p * cos_p * tan_d * tan_d - c2
    if a < 1e-15:
        raise DomainError("hour angle indeterminate: equatorial observer with the sun due east/west")

    disc = raw_disc = b * b - 4.0 * a * c
    clamped = False
    if disc < 0.0:
        if disc < -_DISC_REL_TOL * max(1.0, b * b, abs(4.0 * a * c)):
            raise InfeasibleGeometryError(
                f"hour-angle quadratic has negative discriminant {disc:.3e} "
                f"(azimuth={solar_azimuth_deg}, latitude={latitude_deg}, declination={declination_deg})"
            )
        disc, clamped = 0.0, True
    root = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(root, b))
    roots = [q / a, c / q] if q != 0.0 else [0.0, 0.0]

    # Sun south of the east-west line (cos alpha < 0) needs sin(phi) x > cos(phi) tan(delta).
    side = -cos_a
    candidates = []
    for x in roots:
        if abs(x) > 1.0 + _COS_BOUND_TOL:
            continue
        if abs(x) > 1.0:
            x, clamped = math.copysign(1.0, x), True
        g = sin_p * x - cos_p * tan_d
        if g * side < -1e-9 * max(1.0, abs(tan_d)):
            continue
        if abs(cos_a) >= 0.5:
            sin_omega = abs(sin_a / cos_a * g)
        else:
            sin_omega = math.sqrt(max(0.0, 1.0 - x * x))
        candidates.append(math.degrees(math.atan2(sin_omega, x)))
    if not candidates:
        raise InfeasibleGeometryError(
            f"no hour angle is consistent with azimuth {solar_azimuth_deg} at latitude "
            f"{latitude_deg} and declination {declination_deg}"
        )
    return HourAngleSolution(half_day.sign * min(candidates), tuple(candidates), raw_disc, clamped)


def elevation(latitude_deg: float, declination_deg: float, hour_angle_deg: float) -> float:
    """Solar elevation in degrees, in [-90, 90]. Negative means below the horizon."""
    phi, delta, omega = (math.radians(v) for v in (latitude_deg, declination_deg, hour_angle_deg))
    s = math.sin(phi) * math.sin(delta) + math.cos(phi) * math.cos(delta) * math.cos(omega)
    return math.degrees(math.asin(min(1.0, max(-1.0, s))))


def solar_azimuth(
    latitude_deg: float,
    declination_deg: float,
    hour_angle_deg: float,
    elevation_deg: float | None = None,
) -> float:
    """Solar azimuth clockwise from north, in [0, 360).

    Morning hour angles (positive) fall in the eastern half, afternoon ones in
    the western half.
    """
    if not -90.0 < latitude_deg < 90.0:
        raise DomainError(f"latitude {latitude_deg} outside (-90, 90)")
    if elevation_deg is None:
        elevation_deg = elevation(latitude_deg, declination_deg, hour_angle_deg)
    phi, delta, omega, h = (
        math.radians(v) for v in (latitude_deg, declination_deg, hour_angle_deg, elevation_deg)
    )
    # Horizontal components of the sun vector; asin() cannot resolve the zenith this finely.
    east = math.cos(delta) * math.sin(omega)
    north = math.cos(phi) * math.sin(delta) - math.sin(phi) * math.cos(delta) * math.cos(omega)
    if elevation_deg >= 90.0 - 1e-9 or math.hypot(east, north) < 1e-12:
        raise DomainError("azimuth undefined with the sun at the zenith")
    # Azimuth from south, positive toward west; both terms carry the factor cos(h) cos(phi).
    south_y = -math.cos(delta) * math.sin(omega) * math.cos(phi)
    south_x = math.sin(h) * math.sin(phi) - math.sin(delta)
    az = (180.0 + math.degrees(math.atan2(south_y, south_x))) % 360.0
    return 0.0 if az == 360.0 else az


def solar_state(latitude_deg: float, declination_deg: float, hour_angle_deg: float) -> SolarState:
    h = elevation(latitude_deg, declination_deg, hour_angle_deg)
    try:
        az = solar_azimuth(latitude_deg, declination_deg, hour_angle_deg, h)
    except DomainError:
        az = None
    return SolarState(declination_deg, hour_angle_deg, h, az)
