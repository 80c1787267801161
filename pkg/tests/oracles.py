"""Independent reference computations used as test oracles.

None of these share code with the package under test.
"""
import math
from datetime import datetime, timezone


def julian_day(when: datetime) -> float:
    """Julian day of an aware or UT-naive datetime."""
    if when.tzinfo is not None:
        when = when.astimezone(timezone.utc).replace(tzinfo=None)
    epoch = datetime(2000, 1, 1, 12, 0, 0)
    return 2451545.0 + (when - epoch).total_seconds() / 86400.0


def almanac_declination(when: datetime) -> float:
    """Low-precision apparent solar declination (about 0.01 deg), astronomical-almanac style."""
    t = (julian_day(when) - 2451545.0) / 36525.0
    l0 = 280.46646 + 36000.76983 * t + 0.0003032 * t * t
    m = math.radians(357.52911 + 35999.05029 * t - 0.0001537 * t * t)
    c = ((1.914602 - 0.004817 * t - 0.000014 * t * t) * math.sin(m)
         + (0.019993 - 0.000101 * t) * math.sin(2 * m) + 0.000289 * math.sin(3 * m))
    node = math.radians(125.04 - 1934.136 * t)
    lam = math.radians(l0 + c - 0.00569 - 0.00478 * math.sin(node))
    eps0 = 23.0 + 26.0 / 60.0 + 21.448 / 3600.0 - (46.8150 * t) / 3600.0
    eps = math.radians(eps0 + 0.00256 * math.cos(node))
    return math.degrees(math.asin(math.sin(eps) * math.sin(lam)))


def enu_sun(latitude_deg: float, declination_deg: float, hour_angle_deg: float):
    """Sun unit vector (east, north, up); hour angle positive before noon."""
    phi, dec, om = (math.radians(v) for v in (latitude_deg, declination_deg, hour_angle_deg))
    east = math.cos(dec) * math.sin(om)
    north = math.cos(phi) * math.sin(dec) - math.sin(phi) * math.cos(dec) * math.cos(om)
    up = math.sin(phi) * math.sin(dec) + math.cos(phi) * math.cos(dec) * math.cos(om)
    return east, north, up


def vector_azimuth(latitude_deg: float, declination_deg: float, hour_angle_deg: float) -> float:
    e, n, _ = enu_sun(latitude_deg, declination_deg, hour_angle_deg)
    return math.degrees(math.atan2(e, n)) % 360.0


def vector_elevation(latitude_deg: float, declination_deg: float, hour_angle_deg: float) -> float:
    e, n, u = enu_sun(latitude_deg, declination_deg, hour_angle_deg)
    return math.degrees(math.atan2(u, math.hypot(e, n)))


def cosine_rule_ground_shadow(shadow: float, edge: float, delta_az_deg: float) -> float:
    """Longer ground shadow satisfying the cosine rule, by bisection."""
    from scipy.optimize import bisect

    c = math.cos(math.radians(delta_az_deg))

    def f(x):
        return x * (x - 2.0 * edge * c) + (edge - shadow) * (edge + shadow)

    lo = max(0.0, edge * c)
    hi = lo + shadow + edge + 1.0
    return bisect(f, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=400)


def grid_max_slope(err, target: float, upper: float, step: float = 0.001) -> float:
    """Largest grid slope with err(slope) <= target, scanning upward from zero."""
    best, k = 0.0, 0
    while k * step <= upper:
        if err(k * step) <= target:
            best = k * step
        else:
            break
        k += 1
    return best
