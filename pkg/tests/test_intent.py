import math

import pytest

from ctafsim.dynamics import AircraftState, ControlLimits, DEFAULT_LIMITS
from ctafsim.geo import (
    LocalPoint,
    PatternLeg,
    WindState,
    labeled_pattern_waypoints,
    leg_headings,
)
from ctafsim.intent import (
    AgentBelief,
    ForecastMode,
    predict,
    predict_declared,
    predict_linear,
    predict_pattern,
)
from ctafsim.radio import IntentKind, PilotIntent

WIND = WindState(260.0, 12.0)


@pytest.fixture
def limits():
    return ControlLimits(max_turn_rate_dps=6.0)


def downwind_state(airfield, runway="26", speed=40.0):
    rwy = airfield.runway(runway)
    pt = [p for leg, p in labeled_pattern_waypoints(airfield, rwy)
          if leg is PatternLeg.DOWNWIND][0]
    heading = leg_headings(rwy)[PatternLeg.DOWNWIND]
    return AircraftState(LocalPoint(pt.x, pt.y, 300.0), heading, speed)


class TestLinear:
    def test_constant_velocity_samples(self):
        st = AircraftState(LocalPoint(0, 0, 300.0), 90.0, 50.0)
        fc = predict_linear(st, horizon_s=20.0, stride_s=5.0)
        assert [round(p.x) for _, p in fc.samples] == [250, 500, 750, 1000]
        assert all(p.y == pytest.approx(0.0, abs=1e-9) for _, p in fc.samples)
        assert all(p.z == 300.0 for _, p in fc.samples)
        assert fc.mode == ForecastMode.LINEAR
        assert fc.confidence == 0.5

    def test_zero_speed_stays_put(self):
        st = AircraftState(LocalPoint(5, 6, 300.0), 90.0, 0.0)
        fc = predict_linear(st)
        assert all((p.x, p.y) == (5, 6) for _, p in fc.samples)

    def test_climb_rate_carries(self):
        st = AircraftState(LocalPoint(0, 0, 300.0), 90.0, 50.0, vertical_rate_mps=3.0)
        fc = predict_linear(st, horizon_s=20.0, stride_s=5.0)
        assert [p.z for _, p in fc.samples] == [315.0, 330.0, 345.0, 360.0]

    def test_stride_must_divide_horizon(self):
        st = AircraftState(LocalPoint(0, 0, 300.0), 90.0, 50.0)
        with pytest.raises(ValueError):
            predict_linear(st, horizon_s=17.0, stride_s=5.0)

    def test_times_strictly_increasing(self):
        st = AircraftState(LocalPoint(0, 0, 300.0), 90.0, 50.0, time_s=42.0)
        fc = predict_linear(st)
        fc.validate()
        assert fc.samples[0][0] == 47.0


class TestDeclared:
    def test_landing_forecast_descends_toward_threshold(self, airfield, limits):
        rwy = airfield.runway("26")
        base_pt = [p for leg, p in labeled_pattern_waypoints(airfield, rwy)
                   if leg is PatternLeg.BASE][0]
        st = AircraftState(LocalPoint(base_pt.x, base_pt.y, 300.0),
                           leg_headings(rwy)[PatternLeg.BASE], 40.0)
        belief = AgentBelief("a1", st)
        belief.heard(PilotIntent(IntentKind.LANDING, "26"), 0.0)
        fc = predict_declared(belief, airfield, WIND, horizon_s=120.0,
                              stride_s=5.0, limits=limits)
        assert fc.mode == ForecastMode.DECLARED
        assert fc.confidence == 0.9
        threshold = rwy.threshold
        start_d = st.position.horizontal_to(threshold)
        end = fc.samples[-1][1]
        assert end.horizontal_to(threshold) < start_d
        assert end.z < 300.0

    def test_heading_away_turns_toward_declared_runway(self, airfield, limits):
        st = AircraftState(LocalPoint(4000.0, 2500.0, 300.0), 40.0, 40.0)
        belief = AgentBelief("a2", st)
        belief.heard(PilotIntent(IntentKind.LANDING, "08"), 0.0)
        fc = predict_declared(belief, airfield, WIND, horizon_s=120.0,
                              stride_s=5.0, limits=limits)
        t08 = airfield.runway("08").threshold
        first = fc.samples[0][1]
        last = fc.samples[-1][1]
        assert last.horizontal_to(t08) < first.horizontal_to(t08)

    def test_no_intent_falls_back_to_pattern(self, airfield, limits):
        st = downwind_state(airfield)
        belief = AgentBelief("a3", st)
        declared = predict_declared(belief, airfield, WIND, limits=limits)
        pattern = predict_pattern(belief, airfield, WIND, limits=limits)
        assert declared.mode == pattern.mode
        assert [p for _, p in declared.samples] == [p for _, p in pattern.samples]


class TestPattern:
    def test_base_continues_to_final(self, airfield, limits):
        rwy = airfield.runway("26")
        base_pt = [p for leg, p in labeled_pattern_waypoints(airfield, rwy)
                   if leg is PatternLeg.BASE][0]
        heading = leg_headings(rwy)[PatternLeg.BASE]
        st = AircraftState(LocalPoint(base_pt.x, base_pt.y, 300.0), heading, 40.0)
        belief = AgentBelief("a4", st, assumed_runway="26")
        fc = predict_pattern(belief, airfield, WIND, horizon_s=60.0,
                             stride_s=5.0, limits=limits)
        assert fc.mode == ForecastMode.PATTERN
        assert fc.confidence == 0.7
        # samples head toward the final course (x decreasing toward threshold)
        threshold = rwy.threshold
        d_first = fc.samples[0][1].horizontal_to(threshold)
        d_last = fc.samples[-1][1].horizontal_to(threshold)
        assert d_last < d_first

    def test_outside_pattern_equals_linear(self, airfield, limits):
        st = AircraftState(LocalPoint(12_000.0, -9_000.0, 300.0), 45.0, 50.0)
        belief = AgentBelief("a5", st)
        fc = predict_pattern(belief, airfield, WIND, limits=limits)
        lin = predict_linear(st)
        assert fc.mode == ForecastMode.LINEAR
        assert [p for _, p in fc.samples] == [p for _, p in lin.samples]

    def test_wind_selects_runway_when_unassumed(self, airfield, limits):
        st = downwind_state(airfield)  # downwind for 26
        belief = AgentBelief("a6", st)
        fc = predict_pattern(belief, airfield, WindState(260.0, 12.0), limits=limits)
        assert fc.mode == ForecastMode.PATTERN


class TestForecastProperties:
    def test_first_sample_within_reach(self, airfield, limits):
        st = downwind_state(airfield)
        belief = AgentBelief("a7", st)
        belief.heard(PilotIntent(IntentKind.LANDING, "26"), 0.0)
        for fc in (
            predict_linear(st),
            predict_pattern(belief, airfield, WIND, limits=limits),
            predict_declared(belief, airfield, WIND, limits=limits),
        ):
            gap = st.position.horizontal_to(fc.samples[0][1])
            assert gap <= limits.max_speed_mps * 5.0 + 1e-6

    def test_consecutive_samples_respect_speed_limit(self, airfield, limits):
        st = downwind_state(airfield)
        belief = AgentBelief("a8", st)
        belief.heard(PilotIntent(IntentKind.LANDING, "26"), 0.0)
        fc = predict_declared(belief, airfield, WIND, horizon_s=120.0,
                              stride_s=5.0, limits=limits)
        pts = [p for _, p in fc.samples]
        for a, b in zip(pts, pts[1:]):
            assert a.horizontal_to(b) <= limits.max_speed_mps * 5.0 + 1.0

    def test_landing_forecast_reaches_threshold_given_horizon(self, airfield, limits):
        st = downwind_state(airfield)
        belief = AgentBelief("a9", st)
        belief.heard(PilotIntent(IntentKind.LANDING, "26"), 0.0)
        fc = predict_declared(belief, airfield, WIND, horizon_s=120.0,
                              stride_s=5.0, limits=limits)
        fc.validate()

    def test_belief_updates_monotone(self, airfield):
        st = downwind_state(airfield)
        belief = AgentBelief("b1", st)
        belief.heard(PilotIntent(IntentKind.LANDING, "26"), 10.0)
        belief.heard(PilotIntent(IntentKind.LANDING, "08"), 5.0)  # stale
        assert belief.declared_intent.runway == "26"

    def test_dispatch(self, airfield, limits):
        st = downwind_state(airfield)
        with_intent = AgentBelief("c1", st)
        with_intent.heard(PilotIntent(IntentKind.LANDING, "26"), 0.0)
        assert predict(with_intent, airfield, WIND, limits=limits).mode == ForecastMode.DECLARED
        without = AgentBelief("c2", st)
        assert predict(without, airfield, WIND, limits=limits).mode == ForecastMode.PATTERN
