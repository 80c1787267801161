import math
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowheight import solar_ephemeris as se
from shadowheight.errors import DomainError, InfeasibleGeometryError

from oracles import almanac_declination, vector_azimuth, vector_elevation

# Printed noon declinations and intra-day spreads, Jan..Nov 15.
PRINTED_NOON_DECLINATION = {1: -21.13, 3: -2.19, 5: 18.84, 7: 21.54, 9: 3.07, 11: -18.44}
PRINTED_DAILY_SPREAD = {1: 0.04, 3: 0.1, 5: 0.06, 7: 0.04, 9: 0.1, 11: 0.07}
CAIRO = 2.0


class TestSpringEquinox:
    def test_2017(self):
        assert se.spring_equinox_day(2017) == pytest.approx(78.4266, abs=1e-9)

    @pytest.mark.parametrize("year", [1969, 2101])
    def test_outside_band(self, year):
        with pytest.raises(DomainError):
            se.spring_equinox_day(year)

    def test_1970(self):
        assert se.spring_equinox_day(1970) == pytest.approx(79.0432, abs=1e-9)

    def test_sanity_band(self):
        assert all(78.0 <= se.spring_equinox_day(y) <= 80.0 for y in range(1970, 2073))

    def test_late_century_drift(self):
        # 0.2422 per year against a 0.25 leap step: leap years after 2072 dip below 78.
        low = [y for y in range(1970, 2101) if se.spring_equinox_day(y) < 78.0]
        assert low == list(range(2073, 2101, 4))
        assert se.spring_equinox_day(2097) == pytest.approx(77.8026, abs=1e-9)


class TestCivilInstant:
    def test_counts_from_new_year_midnight(self):
        assert se.CivilInstant.from_datetime(datetime(2017, 1, 1, 12)).day_of_year == 0.5

    def test_local_offset_moves_to_ut(self):
        inst = se.CivilInstant.from_local(date(2017, 1, 15), 12.0, utc_offset_hours=2.0)
        assert inst.day_of_year == pytest.approx(14 + 10 / 24)

    def test_aware_datetime(self):
        when = datetime(2017, 7, 15, 14, tzinfo=timezone(timedelta(hours=2)))
        assert se.CivilInstant.from_datetime(when).day_of_year == pytest.approx(195.5)

    @pytest.mark.parametrize("year", [1969, 2101])
    def test_year_band(self, year):
        with pytest.raises(DomainError):
            se.CivilInstant(year, 10.0)

    def test_day_beyond_year(self):
        with pytest.raises(DomainError):
            se.CivilInstant(2017, 365.0)
        se.CivilInstant(2016, 365.5)

    def test_half_day_coerced(self):
        assert se.CivilInstant(2017, 3.0, "morning").half_day is se.HalfDay.MORNING


class TestDayAngle:
    def test_zero_at_equinox_offset(self):
        n0 = se.spring_equinox_day(2017)
        assert se.day_angle(se.CivilInstant(2017, n0 + 0.5)) == pytest.approx(0.0, abs=1e-12)

    def test_hand_arithmetic(self):
        assert se.day_angle(se.CivilInstant(2017, 8.0)) == pytest.approx(-69.909, abs=1e-3)

    def test_context_exposes_n0(self):
        ctx = se.day_angle_context(se.CivilInstant(2017, 8.0))
        assert ctx.n0 == pytest.approx(78.4266)


class TestDeclination:
    @pytest.mark.parametrize("month", sorted(PRINTED_NOON_DECLINATION))
    def test_table_noon(self, month):
        inst = se.CivilInstant.from_local(date(2017, month, 15), 12.0, CAIRO)
        assert se.declination_at(inst) == pytest.approx(PRINTED_NOON_DECLINATION[month], abs=0.05)

    def test_jan8_midnight_against_almanac(self):
        ours = se.declination_at(se.CivilInstant.from_datetime(datetime(2017, 1, 8)))
        assert ours == pytest.approx(almanac_declination(datetime(2017, 1, 8)), abs=0.1)

    def test_tracks_almanac_all_year(self):
        start = datetime(2017, 1, 1, 12)
        worst = max(
            abs(se.declination_at(se.CivilInstant.from_datetime(start + timedelta(days=d)))
                - almanac_declination(start + timedelta(days=d)))
            for d in range(0, 365, 3)
        )
        assert worst < 0.5

    def test_bounded(self):
        values = [se.declination(w) for w in np.linspace(-180, 180, 721)]
        assert max(values) < se.MAX_DECLINATION_DEG
        assert min(values) > -se.MAX_DECLINATION_DEG

    def test_periodic(self):
        assert se.declination(10.0) == pytest.approx(se.declination(370.0), abs=1e-12)


class TestDailySpread:
    @pytest.mark.parametrize("month", sorted(PRINTED_DAILY_SPREAD))
    def test_table_spread(self, month):
        spread = se.declination_daily_spread(date(2017, month, 15), CAIRO)
        assert spread.max_abs_delta_deg == pytest.approx(PRINTED_DAILY_SPREAD[month], abs=0.03)

    def test_samples_are_nine_noon_three(self):
        sp = se.declination_daily_spread(date(2017, 3, 15), CAIRO)
        expected = [se.declination_at(se.CivilInstant.from_local(date(2017, 3, 15), h, CAIRO))
                    for h in (9, 12, 15)]
        assert list(sp.samples_deg) == expected

    def test_trig_spreads_small(self):
        sp = se.declination_daily_spread(date(2017, 3, 15), CAIRO)
        assert 0 <= sp.max_abs_delta_sin < 3e-3
        assert 0 <= sp.max_abs_delta_cos < 1e-3


class TestHourAngle:
    def test_due_south_is_noon(self):
        q = se.hour_angle_quadratic(180.0, 40.0, 10.0)
        assert (q.a, q.c) == pytest.approx((1.0, -1.0), abs=1e-15)
        assert q.b == pytest.approx(0.0, abs=1e-15)
        assert se.hour_angle(180.0, 40.0, 10.0, "afternoon") == pytest.approx(0.0, abs=1e-6)

    def test_afternoon_round_trip(self):
        az = se.solar_azimuth(45.0, 0.0, -30.0)
        assert se.hour_angle(az, 45.0, 0.0, se.HalfDay.AFTERNOON) == pytest.approx(-30.0, abs=1e-6)

    def test_scaled_and_printed_quadratics_share_roots(self):
        q = se.hour_angle_quadratic(130.0, 35.0, 12.0)
        roots = np.roots([q.a, q.b, q.c])
        sol = se.solve_hour_angle(130.0, 35.0, 12.0, "morning")
        cosines = [math.cos(math.radians(c)) for c in sol.candidates_deg]
        for c in cosines:
            assert min(abs(r - c) for r in roots) < 1e-9

    def test_spurious_root_rejected(self):
        # A plain minimum over both roots would return the spurious one here.
        lat, dec, omega = 40.0, 20.0, 75.0
        az = se.solar_azimuth(lat, dec, omega)
        assert se.hour_angle(az, lat, dec, "morning") == pytest.approx(omega, abs=1e-6)

    def test_published_case_does_not_give_printed_angle(self):
        for lat in np.arange(30.0, 45.01, 0.5):
            omega = se.hour_angle(142.69, float(lat), 4.42, "afternoon")
            assert abs(omega + 16.67) > 1.0

    def test_half_day_required(self):
        with pytest.raises(DomainError):
            se.hour_angle(150.0, 40.0, 5.0, None)

    def test_declination_out_of_range(self):
        with pytest.raises(DomainError):
            se.hour_angle(150.0, 40.0, 30.0, "morning")

    def test_infeasible_azimuth(self):
        # Near the tropics the sun never bears this close to due east.
        with pytest.raises(InfeasibleGeometryError):
            se.hour_angle(80.0, 10.0, 20.0, "morning")

    @settings(max_examples=300, deadline=None)
    @given(
        lat=st.floats(25.0, 66.0),
        south=st.booleans(),
        dec=st.floats(-23.44, 23.44),
        omega=st.floats(0.5, 150.0),
        morning=st.booleans(),
    )
    def test_round_trip_property(self, lat, south, dec, omega, morning):
        lat = -lat if south else lat
        omega = omega if morning else -omega
        if se.elevation(lat, dec, omega) <= 5.0:
            return
        az = se.solar_azimuth(lat, dec, omega)
        half = se.HalfDay.MORNING if morning else se.HalfDay.AFTERNOON
        assert se.hour_angle(az, lat, dec, half) == pytest.approx(omega, abs=1e-6)


class TestElevation:
    def test_zenith(self):
        assert se.elevation(17.0, 17.0, 0.0) == pytest.approx(90.0, abs=1e-9)

    def test_winter_afternoon(self):
        expected = vector_elevation(30.0, -22.18, -16.67)
        assert se.elevation(30.0, -22.18, -16.67) == pytest.approx(expected, abs=1e-9)
        assert se.elevation(30.0, -22.18, -16.67) == pytest.approx(35.42, abs=0.05)

    def test_reconciling_latitude(self):
        assert se.elevation(31.28, 4.42, -16.67) == pytest.approx(58.92, abs=0.1)

    def test_below_horizon_negative(self):
        assert se.elevation(45.0, -20.0, 120.0) < 0.0


class TestAzimuth:
    def test_meridian(self):
        assert se.solar_azimuth(40.0, 10.0, 0.0) == pytest.approx(180.0, abs=1e-12)

    def test_afternoon_west_of_south(self):
        az = se.solar_azimuth(45.0, 0.0, -30.0)
        assert az == pytest.approx(vector_azimuth(45.0, 0.0, -30.0), abs=1e-9)
        assert 180.0 < az < 270.0

    def test_southern_observer_sun_north(self):
        assert se.solar_azimuth(-35.0, 5.0, 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_zenith_undefined(self):
        with pytest.raises(DomainError):
            se.solar_azimuth(10.0, 10.0, 0.0)

    @settings(max_examples=300, deadline=None)
    @given(lat=st.floats(-66.0, 66.0), dec=st.floats(-23.44, 23.44), omega=st.floats(-179.0, 179.0))
    def test_matches_vector_oracle(self, lat, dec, omega):
        h = se.elevation(lat, dec, omega)
        if h > 89.0 or h < -89.0:
            return
        diff = (se.solar_azimuth(lat, dec, omega) - vector_azimuth(lat, dec, omega) + 180.0) % 360.0 - 180.0
        assert abs(diff) < 1e-7

    def test_solar_state_bundle(self):
        state = se.solar_state(45.0, 0.0, -30.0)
        assert state.elevation_deg == pytest.approx(se.elevation(45.0, 0.0, -30.0))
        assert state.azimuth_deg == pytest.approx(se.solar_azimuth(45.0, 0.0, -30.0))
