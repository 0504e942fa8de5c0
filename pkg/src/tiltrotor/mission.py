"""Closed-loop mission runner, trajectory log and summary metrics."""

import math
from dataclasses import dataclass, field

from . import sensing
from .control import DIRECTIVES, Controller, ControlSettings, FlightMode, GainSet
from .dynamics import ControlCommand, LongitudinalState, step
from .errors import ConfigValidationError, DomainError, TiltrotorError
from .sensing import FilterState, GaussianStream, NoiseModel

MAX_CRUISE_SPEED = 70.0
# Touchdown: below this height and sink rate after having been airborne.
TOUCHDOWN_HEIGHT = 0.05
TOUCHDOWN_SINK_RATE = 0.2
AIRBORNE_HEIGHT = 1.0
# Settling bands used by the summary.
SETTLE_Z = 0.5
SETTLE_X_DOT = 0.5

ENTRY_EVENTS = ("hover_capture",)


@dataclass(frozen=True)
class Segment:
    """One leg of the flight plan.

    A segment becomes active when its entry condition is met: either the
    mission clock reaching ``time`` or ``event`` having happened ``delay``
    seconds ago. Setpoints move toward their targets at the given ramp rates
    (m/s for altitude, m/s^2 for speed); a rate of None steps immediately.
    The altitude ramp also limits its own acceleration to ``z_accel`` so the
    climb-rate setpoint never jumps.
    ``theta_d`` is the pitch setpoint flown during conversions.
    """

    name: str
    directive: str = "hover"
    Z_d: float = 50.0
    X_dot_d: float = 0.0
    time: float | None = 0.0
    event: str | None = None
    delay: float = 0.0
    z_rate: float | None = None
    z_accel: float = 0.25
    x_rate: float | None = None
    theta_d: float = 0.0

    def __post_init__(self):
        where = f"mission.segments[{self.name}]"
        if self.directive not in DIRECTIVES:
            raise ConfigValidationError(f"{where}.directive", f"must be one of {DIRECTIVES}")
        if (self.time is None) == (self.event is None):
            raise ConfigValidationError(where, "exactly one of time/event must be given")
        if self.event is not None and self.event not in ENTRY_EVENTS:
            raise ConfigValidationError(f"{where}.event", f"must be one of {ENTRY_EVENTS}")
        if self.Z_d < 0:
            raise ConfigValidationError(f"{where}.Z_d", "must be >= 0")
        if not 0 <= self.X_dot_d <= MAX_CRUISE_SPEED:
            raise ConfigValidationError(f"{where}.X_dot_d", f"must lie in [0, {MAX_CRUISE_SPEED}]")
        for name in ("z_rate", "x_rate"):
            rate = getattr(self, name)
            if rate is not None and not rate > 0:
                raise ConfigValidationError(f"{where}.{name}", "must be > 0")
        if not self.z_accel > 0:
            raise ConfigValidationError(f"{where}.z_accel", "must be > 0")
        if self.delay < 0 or (self.time is not None and self.time < 0):
            raise ConfigValidationError(where, "entry times must be >= 0")


def default_segments():
    revert_pitch = math.radians(7.0)
    return (
        Segment("takeoff", "hover", Z_d=50.0, X_dot_d=0.0, time=0.0, z_rate=2.0),
        Segment("convert", "forward", Z_d=50.0, X_dot_d=57.0, time=40.0, theta_d=0.0),
        Segment("decelerate", "forward", Z_d=50.0, X_dot_d=27.0, time=100.0, x_rate=1.0),
        Segment("revert", "reverse", Z_d=50.0, X_dot_d=0.0, time=150.0, theta_d=revert_pitch),
        Segment("descend", "hover", Z_d=1.0, X_dot_d=0.0, time=None, event="hover_capture",
                delay=5.0, z_rate=1.5, theta_d=revert_pitch),
        Segment("flare", "hover", Z_d=0.0, X_dot_d=0.0, time=None, event="hover_capture",
                delay=38.0, z_rate=0.1, theta_d=revert_pitch),
    )


@dataclass(frozen=True)
class MissionPlan:
    segments: tuple = field(default_factory=default_segments)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ConfigValidationError("mission.segments", "at least one segment is required")
        first = self.segments[0]
        if first.time != 0.0:
            raise ConfigValidationError("mission.segments[0].time", "first segment must start at 0")
        last_time = 0.0
        for seg in self.segments:
            if seg.time is not None:
                if seg.time < last_time:
                    raise ConfigValidationError(f"mission.segments[{seg.name}].time",
                                                "segment start times must be non-decreasing")
                last_time = seg.time

    @property
    def lands(self):
        return self.segments[-1].Z_d == 0.0


@dataclass
class TrajectoryRecord:
    k: int
    t: float
    Z: float
    Z_dot: float
    X: float
    X_dot: float
    theta: float
    theta_dot: float
    beta: float
    Z_m: float
    Xdot_m: float
    theta_m: float
    Z_f: float
    Xdot_f: float
    theta_f: float
    Z_d: float
    Xdot_d: float
    theta_d: float
    T1: float
    T2: float
    delta_e: float
    beta_dot: float
    mode: str
    sat_flags: str


@dataclass
class MissionSummary:
    status: str
    steps: int
    failure_step: int | None = None
    failure: str | None = None
    failure_code: int | None = None   # exit code of the error class that stopped the run
    mode_switches: list = field(default_factory=list)      # [(t, mode)]
    transition_deviation: dict = field(default_factory=dict)  # mode -> max |Z - Z_d|
    settling_times: list = field(default_factory=list)     # [(mode, start, settle time or None)]
    thrust_mean: dict = field(default_factory=dict)
    thrust_peak: dict = field(default_factory=dict)
    touchdown_time: float | None = None
    touchdown_sink_rate: float | None = None
    impact_speed: float | None = None


def _ramp(current, target, rate, dt):
    if rate is None:
        return target
    limit = rate * dt
    return current + min(max(target - current, -limit), limit)


def _shaped_ramp(current, speed, target, rate, accel, dt):
    """Move toward target with bounded speed and acceleration; returns (value, speed)."""
    if rate is None:
        return target, 0.0
    remaining = target - current
    # Fastest speed from which the ramp can still stop at the target.
    cap = min(rate, math.sqrt(2.0 * accel * abs(remaining)))
    wanted = math.copysign(cap, remaining)
    speed += min(max(wanted - speed, -accel * dt), accel * dt)
    if abs(remaining) <= abs(speed) * dt or remaining * speed < 0 and abs(remaining) < 1e-9:
        return target, 0.0
    return current + speed * dt, speed


def _mode_windows(log):
    """Maximal runs of records in a single mode: [(mode, first, last_inclusive)]."""
    windows = []
    start = 0
    for i in range(1, len(log) + 1):
        if i == len(log) or log[i].mode != log[start].mode:
            windows.append((log[start].mode, start, i - 1))
            start = i
    return windows


def find_touchdown(log):
    """First record at rest on the ground after having been airborne, or None.

    Rest means below TOUCHDOWN_HEIGHT with |Z_dot| under TOUCHDOWN_SINK_RATE;
    earlier ground contacts that bounce back up do not count.
    """
    airborne = False
    for rec in log:
        if rec.Z > AIRBORNE_HEIGHT:
            airborne = True
        elif airborne and rec.Z < TOUCHDOWN_HEIGHT and abs(rec.Z_dot) < TOUCHDOWN_SINK_RATE:
            return rec
    return None


def impact_speed(log):
    """Sink rate carried into the first ground contact after having been airborne.

    The gear zeroes the climb rate on contact, so this is |Z_dot| of the sample
    just before it. None if the vehicle never came back down.
    """
    airborne = False
    for i, rec in enumerate(log):
        if rec.Z > AIRBORNE_HEIGHT:
            airborne = True
        elif airborne and rec.Z < TOUCHDOWN_HEIGHT:
            return abs(log[i - 1].Z_dot)
    return None


def summarize(log, status="completed", failure_step=None, failure=None):
    if not log:
        raise ValueError("cannot summarise an empty log")
    summary = MissionSummary(status=status, steps=len(log), failure_step=failure_step,
                             failure=failure)
    windows = _mode_windows(log)
    summary.mode_switches = [(log[first].t, mode) for mode, first, _ in windows[1:]]

    transitions = (FlightMode.TRANSITION_FORWARD.value, FlightMode.TRANSITION_REVERSE.value)
    thrust = {}
    for mode, first, last in windows:
        records = log[first:last + 1]
        if mode in transitions:
            dev = max(abs(r.Z - r.Z_d) for r in records)
            summary.transition_deviation[mode] = max(dev, summary.transition_deviation.get(mode, 0.0))
        thrust.setdefault(mode, []).extend(r.T1 + r.T2 for r in records)

        controls_x = mode in (FlightMode.HOVER.value, FlightMode.FORWARD.value)
        settled_at = None
        for r in reversed(records):
            ok = abs(r.Z - r.Z_d) <= SETTLE_Z
            if controls_x:
                ok = ok and abs(r.X_dot - r.Xdot_d) <= SETTLE_X_DOT
            if not ok:
                break
            settled_at = r.t
        start = records[0].t
        summary.settling_times.append(
            (mode, start, None if settled_at is None else settled_at - start))

    for mode, values in thrust.items():
        summary.thrust_mean[mode] = math.fsum(values) / len(values)
        summary.thrust_peak[mode] = max(values)

    touchdown = find_touchdown(log)
    if touchdown is not None:
        summary.touchdown_time = touchdown.t
        summary.touchdown_sink_rate = abs(touchdown.Z_dot)
    summary.impact_speed = impact_speed(log)
    return summary


def step_count(duration, dt):
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration!r}")
    ratio = duration / dt
    n = round(ratio)
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ValueError(f"duration {duration} is not an integer number of {dt} s steps")
    return n


def run_mission(plan, params, gains=None, noise=None, dt=0.1, duration=250.0,
                settings=None, initial_state=None, flags=None):
    """Fly the plan closed-loop for ``duration`` seconds.

    Each sample: measure, filter, switch mode, run the PIDs and the active
    allocation law, saturate, and integrate one step. Returns (log, summary);
    on a control fault or solver failure the partial log is returned with a
    failed summary naming the step.
    """
    gains = gains or GainSet()
    noise = noise or NoiseModel()
    settings = settings or ControlSettings()
    n_steps = step_count(duration, dt)
    state = initial_state or LongitudinalState()

    controller = Controller(params, gains, settings, dt)
    rng = GaussianStream(noise.seed)
    filt = FilterState(cutoffs=dict(gains.for_mode(controller.mode).cutoffs))

    segments = plan.segments
    seg_index = 0
    seg = segments[0]
    Z_d, X_dot_d = state.Z, state.X_dot
    Z_d_rate = 0.0
    capture_time = None
    airborne = False
    landed = False

    log = []
    failure_step = failure = failure_code = None
    for k in range(n_steps):
        t = k * dt
        while seg_index + 1 < len(segments):
            nxt = segments[seg_index + 1]
            if nxt.time is not None:
                ready = t >= nxt.time - 1e-9
            else:
                ready = capture_time is not None and t >= capture_time + nxt.delay - 1e-9
            if not ready:
                break
            seg_index += 1
            seg = nxt
        Z_d, Z_d_rate = _shaped_ramp(Z_d, Z_d_rate, seg.Z_d, seg.z_rate, seg.z_accel, dt)
        X_dot_d = _ramp(X_dot_d, seg.X_dot_d, seg.x_rate, dt)

        measured = sensing.measure(state, noise, rng)
        filt.cutoffs = dict(controller.mode_gains.cutoffs)
        filtered = tuple(sensing.filter_step(filt, axis, value, dt)
                         for axis, value in zip(sensing.AXES, measured))

        if state.Z > AIRBORNE_HEIGHT:
            airborne = True
        # Motors are cut at touchdown once the landing has been commanded.
        if (airborne and not landed and Z_d == 0.0 and state.Z < TOUCHDOWN_HEIGHT
                and abs(state.Z_dot) < TOUCHDOWN_SINK_RATE):
            landed = True

        try:
            if controller.switch(filtered[1], state.beta, seg.directive):
                if (controller.mode is FlightMode.HOVER and capture_time is None
                        and k > 0):
                    capture_time = t
            if landed:
                cmd = ControlCommand()
                theta_d = 0.0
                sat = ""
            else:
                out = controller.update(filtered, measured, state, Z_d, X_dot_d, seg.theta_d)
                cmd, theta_d, sat = out.command, out.theta_d, "+".join(out.flags.names())
        except (TiltrotorError, DomainError) as exc:
            failure_step, failure = k, f"{type(exc).__name__}: {exc}"
            failure_code = exc.exit_code
            break

        log.append(TrajectoryRecord(
            k, t, state.Z, state.Z_dot, state.X, state.X_dot, state.theta,
            state.theta_dot, state.beta, *measured, *filtered, Z_d, X_dot_d, theta_d,
            cmd.T1, cmd.T2, cmd.delta_e, cmd.beta_dot, controller.mode.value, sat))

        try:
            state = step(state, cmd, dt, params, flags=flags)
        except TiltrotorError as exc:
            failure_step, failure = k, f"{type(exc).__name__}: {exc}"
            failure_code = exc.exit_code
            break

    if failure_step is not None:
        status = "failed"
    else:
        status = "completed"
    if not log:
        summary = MissionSummary(status=status, steps=0, failure_step=failure_step,
                                 failure=failure)
    else:
        summary = summarize(log, status, failure_step, failure)
    summary.failure_code = failure_code
    return log, summary
