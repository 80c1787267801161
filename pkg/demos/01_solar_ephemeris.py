"""Where is the sun? Declination, hour angle, elevation and azimuth.

Run with: python demos/01_solar_ephemeris.py
"""
from datetime import date

from shadowheight import solar_ephemeris as se

# Declination through the year at local noon in Cairo (UTC+2).
for month in (1, 3, 5, 7, 9, 11):
    inst = se.CivilInstant.from_local(date(2017, month, 15), hour=12.0, utc_offset_hours=2.0)
    print(f"2017-{month:02d}-15 noon  declination {se.declination_at(inst):8.4f} deg")

# Over a 09:00-15:00 imaging window the declination barely moves.
spread = se.declination_daily_spread(date(2017, 3, 15), utc_offset_hours=2.0)
print(f"\nMarch 15 spread over 09-15h: {spread.max_abs_delta_deg:.4f} deg")

# Forward: a mid-afternoon sun at 45 N on the equinox.
state = se.solar_state(latitude_deg=45.0, declination_deg=0.0, hour_angle_deg=-30.0)
print(f"\nelevation {state.elevation_deg:.4f} deg, azimuth {state.azimuth_deg:.4f} deg")

# Inverse: recover the hour angle from the azimuth seen in an image.
omega = se.hour_angle(state.azimuth_deg, 45.0, 0.0, se.HalfDay.AFTERNOON)
print(f"recovered hour angle {omega:.6f} deg")

# Both roots of the quadratic, before the morning/afternoon sign is applied.
sol = se.solve_hour_angle(state.azimuth_deg, 45.0, 0.0, "afternoon")
print(f"admissible |hour angle| candidates: {[round(c, 4) for c in sol.candidates_deg]}")
