import math
from dataclasses import replace

import pytest

from tiltrotor.aero import AircraftParams
from tiltrotor.dynamics import LongitudinalState
from tiltrotor.errors import ConfigValidationError
from tiltrotor.mission import (MissionPlan, Segment, TrajectoryRecord, find_touchdown,
                               impact_speed, run_mission, step_count, summarize)
from tiltrotor.mission import _shaped_ramp
from tiltrotor.sensing import NoiseModel

P = AircraftParams()
QUIET = NoiseModel(0.0, 0.0, 0.0)
HOVER_ONLY = MissionPlan((Segment("hover", Z_d=50.0, z_rate=2.0),))


@pytest.fixture(scope="module")
def default_run():
    return run_mission(MissionPlan(), P, noise=QUIET)


def record(k, Z, Z_d, mode="hover", Z_dot=0.0, T=(100.0, 96.2), dt=0.1):
    return TrajectoryRecord(k, k * dt, Z, Z_dot, 0, 0, 0, 0, 0, Z, 0, 0, Z, 0, 0, Z_d, 0, 0,
                            T[0], T[1], 0, 0, mode, "")


def test_zero_duration():
    log, summary = run_mission(HOVER_ONLY, P, duration=0.0)
    assert log == [] and summary.status == "completed" and summary.steps == 0


def test_step_count():
    assert step_count(250.0, 0.1) == 2500
    with pytest.raises(ValueError):
        step_count(1.05, 0.1)


def test_hover_only_plan_settles():
    log, summary = run_mission(HOVER_ONLY, P, noise=QUIET, duration=100.0)
    assert summary.status == "completed"
    assert abs(log[-1].Z - 50.0) < 0.1
    assert abs(log[-1].X_dot) < 0.05


def test_hover_hold_thrust_matches_weight():
    log, summary = run_mission(HOVER_ONLY, P, noise=QUIET, duration=100.0)
    assert summary.thrust_mean["hover"] == pytest.approx(P.m * P.g, rel=0.01)


def test_log_completeness(default_run):
    log, summary = default_run
    assert len(log) == summary.steps == 2500
    for i, rec in enumerate(log):
        assert rec.k == i
        assert rec.t == i * 0.1


def test_mode_timestamps_match_log(default_run):
    log, summary = default_run
    for t, mode in summary.mode_switches:
        first = next(r for r in log if r.mode == mode and r.t >= t)
        assert first.t == t
        prev = log[first.k - 1]
        assert prev.mode != mode


def test_mode_sequence(default_run):
    _, summary = default_run
    assert [m for _, m in summary.mode_switches] == [
        "transition_forward", "forward", "transition_reverse", "hover"]


def test_forward_switch_at_first_fast_sample(default_run):
    log, summary = default_run
    t_fwd = dict((m, t) for t, m in summary.mode_switches)["forward"]
    # the switch acts within the first sample whose filtered speed exceeds 57 m/s
    first_fast = next(r for r in log if r.t >= 40.0 and r.Xdot_f > 57.0)
    assert t_fwd == first_fast.t
    assert first_fast.mode == "forward" and log[first_fast.k - 1].mode == "transition_forward"


def test_default_mission_lands(default_run):
    _, summary = default_run
    assert summary.status == "completed"
    assert summary.touchdown_time is not None
    assert summary.touchdown_sink_rate < 0.2
    assert max(summary.transition_deviation.values()) <= 5.0


def test_summary_constant_altitude_has_no_deviation():
    log = [record(k, 50.0, 50.0, "transition_forward") for k in range(20)]
    assert summarize(log).transition_deviation["transition_forward"] == 0.0


def test_summary_reports_injected_excursion():
    log = [record(k, 50.0, 50.0, "transition_reverse") for k in range(20)]
    log[7] = record(7, 47.0, 50.0, "transition_reverse")
    log[9] = record(9, 52.5, 50.0, "transition_reverse")
    assert summarize(log).transition_deviation["transition_reverse"] == pytest.approx(3.0)


def test_summary_requires_records():
    with pytest.raises(ValueError):
        summarize([])


def test_touchdown_requires_airborne_then_rest():
    log = [record(0, 0.0, 0.0), record(1, 2.0, 0.0, Z_dot=-1.0),
           record(2, 0.0, 0.0, Z_dot=-0.5), record(3, 0.0, 0.0, Z_dot=0.0)]
    td = find_touchdown(log)
    assert td.k == 3
    assert impact_speed(log) == 1.0
    assert find_touchdown(log[:1]) is None


def test_shaped_ramp_limits_speed_and_acceleration():
    value, speed, dt = 0.0, 0.0, 0.1
    speeds = []
    for _ in range(500):
        value, speed = _shaped_ramp(value, speed, 20.0, 2.0, 0.25, dt)
        speeds.append(speed)
        assert abs(speed) <= 2.0 + 1e-12
    assert value == 20.0
    for a, b in zip(speeds, speeds[1:]):
        assert abs(b - a) <= 0.25 * dt + 1e-12 or b == 0.0


def test_segment_validation():
    with pytest.raises(ConfigValidationError):
        Segment("x", directive="sideways")
    with pytest.raises(ConfigValidationError):
        Segment("x", Z_d=-1.0)
    with pytest.raises(ConfigValidationError):
        Segment("x", X_dot_d=80.0)
    with pytest.raises(ConfigValidationError):
        Segment("x", time=None)
    with pytest.raises(ConfigValidationError):
        MissionPlan((Segment("a", time=5.0),))


def test_control_fault_returns_partial_log():
    # Start already tilted in hover: the vertical-thrust guard trips at once.
    start = LongitudinalState(Z=50, beta=math.radians(89))
    log, summary = run_mission(HOVER_ONLY, P, noise=QUIET, duration=10.0, initial_state=start)
    assert summary.status == "failed"
    assert summary.failure_step == 0 and "ControlFault" in summary.failure
    assert summary.failure_code == 4
    assert log == []


def test_deterministic_runs():
    a, _ = run_mission(MissionPlan(), P, noise=NoiseModel(seed=5), duration=60.0)
    b, _ = run_mission(MissionPlan(), P, noise=NoiseModel(seed=5), duration=60.0)
    c, _ = run_mission(MissionPlan(), P, noise=NoiseModel(seed=6), duration=60.0)
    assert a == b
    assert a != c


def test_hover_hold_rejects_disturbance():
    plan = MissionPlan((Segment("hold", Z_d=50.0),))
    start = replace(LongitudinalState(Z=50.0), X_dot=1.0)
    log, _ = run_mission(plan, P, noise=QUIET, duration=60.0, initial_state=start)
    assert abs(log[-1].Z - 50.0) < 0.1 and abs(log[-1].X_dot) < 0.05
