"""Digital PID, mode-specific control allocation, saturation and mode switching."""

import enum
import math
from dataclasses import dataclass, field, fields

from . import aero
from .dynamics import ControlCommand
from .errors import ConfigValidationError, ControlFault

__all__ = [
    "AirData", "ControlCommand", "ControlSettings", "Controller", "FlightMode",
    "GainSet", "ModeGains", "PidGains", "PidState", "SaturationFlags", "allocate",
    "elevator_for_moment", "forward_law", "hover_law", "hover_pitch_setpoint",
    "forward_pitch_setpoint", "mode_switch", "pid_step", "saturate",
    "transition_law", "virtual_force",
]


class FlightMode(enum.Enum):
    HOVER = "hover"
    TRANSITION_FORWARD = "transition_forward"
    FORWARD = "forward"
    TRANSITION_REVERSE = "transition_reverse"

    @property
    def gain_key(self):
        if self in (FlightMode.TRANSITION_FORWARD, FlightMode.TRANSITION_REVERSE):
            return "transition"
        return self.value


NEXT_MODE = {
    FlightMode.HOVER: FlightMode.TRANSITION_FORWARD,
    FlightMode.TRANSITION_FORWARD: FlightMode.FORWARD,
    FlightMode.FORWARD: FlightMode.TRANSITION_REVERSE,
    FlightMode.TRANSITION_REVERSE: FlightMode.HOVER,
}

DIRECTIVES = ("hover", "forward", "reverse")


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigValidationError(f.name, "gains must be finite and >= 0")


@dataclass(frozen=True)
class ModeGains:
    """PID gains and filter cut-offs (rad/s) for one flight mode.

    ``x`` and ``omega_x`` are None where the x-velocity is left uncontrolled.
    """

    z: PidGains
    x: PidGains | None
    theta: PidGains
    omega_z: float
    omega_x: float | None
    omega_theta: float

    def __post_init__(self):
        if (self.x is None) != (self.omega_x is None):
            raise ConfigValidationError("x", "x gains and omega_x must be given together")
        for name in ("omega_z", "omega_x", "omega_theta"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigValidationError(name, "cut-off frequency must be > 0")

    @property
    def cutoffs(self):
        return {"Z": self.omega_z, "X_dot": self.omega_x, "theta": self.omega_theta}


def _table_hover():
    return ModeGains(PidGains(2.0, 0.05, 8.0), PidGains(0.6, 0.02, 2.0),
                     PidGains(7.0, 0.5, 7.0), 3.0, 3.5, 1.0)


def _table_transition():
    return ModeGains(PidGains(2.4, 0.02, 3.0), None, PidGains(9.0, 0.085, 9.0),
                     3.0, None, 1.0)


def _table_forward():
    return ModeGains(PidGains(0.94, 0.03, 3.0), PidGains(1.4, 0.3, 2.0),
                     PidGains(1.75, 0.01, 2.5), 3.25, 1.0, 6.2)


@dataclass(frozen=True)
class GainSet:
    hover: ModeGains = field(default_factory=_table_hover)
    transition: ModeGains = field(default_factory=_table_transition)
    forward: ModeGains = field(default_factory=_table_forward)

    def __post_init__(self):
        if self.transition.x is not None:
            raise ConfigValidationError("gains.transition.x",
                                        "x-velocity is not controlled during transition")
        for name in ("hover", "forward"):
            if getattr(self, name).x is None:
                raise ConfigValidationError(f"gains.{name}.x", "x gains are required")

    def for_mode(self, mode):
        return getattr(self, mode.gain_key)


@dataclass(frozen=True)
class ControlSettings:
    """Limits, guards and switching thresholds for the controller."""

    # Anti-windup clamp on each integral accumulator (error * s).
    integral_limit_z: float = 98.1
    integral_limit_x: float = 16.35
    integral_limit_theta: float = 9.81
    # Differentiate the raw measurement instead of the filtered one.
    derivative_on_measurement_z: bool = False
    derivative_on_measurement_x: bool = False
    derivative_on_measurement_theta: bool = True
    trig_guard: float = 0.05
    min_flap_airspeed: float = 1.0          # m/s
    min_dynamic_pressure: float = 50.0      # Pa
    alpha_d_limit: float = math.radians(10.0)
    theta_d_limit: float = math.radians(25.0)
    forward_switch_speed: float = 57.0      # m/s
    hover_capture_speed: float = 5.0        # m/s
    literal_eq36: bool = False
    # Subtract the fixed-wing vertical force from the conversion thrust demand.
    transition_lift_compensation: bool = True
    # Floor on cos(beta) when dividing the conversion demands; bounds how far a
    # small vertical demand is amplified while the rotors are nearly horizontal.
    transition_cos_floor: float = 0.3

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                continue
            if not (math.isfinite(value) and value > 0):
                raise ConfigValidationError(f"control.{f.name}", "must be finite and > 0")
        if self.trig_guard >= 1:
            raise ConfigValidationError("control.trig_guard", "must be < 1")

    def integral_limit(self, axis):
        return getattr(self, f"integral_limit_{axis}")

    def derivative_on_measurement(self, axis):
        return getattr(self, f"derivative_on_measurement_{axis}")


@dataclass
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    prev_measurement: float | None = None

    def reset(self):
        self.integral = 0.0
        self.prev_error = 0.0
        self.prev_measurement = None


def pid_step(ps, r_desired, r_actual, gains, dt, i_max=math.inf, r_derivative=None):
    """One sample of the discrete PID; returns the commanded acceleration.

    The derivative is a backward difference of the error. When ``r_derivative``
    is given (typically the unfiltered measurement) the derivative acts on that
    signal alone, so setpoint steps cause no kick; its first sample after a
    reset contributes no derivative.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    error = r_desired - r_actual
    if r_derivative is None:
        derivative = (error - ps.prev_error) / dt
    else:
        prev = r_derivative if ps.prev_measurement is None else ps.prev_measurement
        derivative = -(r_derivative - prev) / dt
        ps.prev_measurement = r_derivative
    ps.prev_error = error
    ps.integral = min(max(ps.integral + error * dt, -i_max), i_max)
    return gains.kp * error + gains.ki * ps.integral + gains.kd * derivative


def virtual_force(accel, axis, params):
    """Scale a PID acceleration into a force or torque demand.

    The z channel carries gravity feedforward so zero PID output holds hover.
    """
    if axis == "z":
        return params.m * (accel + params.g)
    if axis == "x":
        return params.m * accel
    if axis == "theta":
        return params.J_y * accel
    raise ValueError(f"unknown axis {axis!r}")


def allocate(T_total, u_theta, beta, params):
    """Split total thrust between the pairs so the rotor pitch moment equals u_theta."""
    T2 = (T_total * params.l1 - u_theta / math.cos(beta)) / params.delta_x
    return T_total - T2, T2


def limit_collective(T_total, u_theta, beta, params):
    """Clip total thrust into the range where ``allocate`` keeps both pairs
    within [0, T_max], so saturation never costs pitch authority. If no such
    range exists the moment demand is infeasible and T_total is only clipped
    to [0, 2 T_max]."""
    M = u_theta / math.cos(beta)
    lo = max(M / params.l1 if params.l1 > 0 else -math.inf,
             -M / params.l2 if params.l2 > 0 else -math.inf, 0.0)
    span = params.T_max * params.delta_x
    hi = min((span + M) / params.l1 if params.l1 > 0 else math.inf,
             (span - M) / params.l2 if params.l2 > 0 else math.inf, 2 * params.T_max)
    if lo > hi:
        return min(max(T_total, 0.0), 2 * params.T_max)
    return min(max(T_total, lo), hi)


@dataclass(frozen=True)
class AirData:
    """Earth-frame velocities the allocation laws need for the free-wing model."""

    Z_dot: float
    X_dot: float


def _vertical_thrust(u_z, theta, beta, settings):
    denom = math.cos(theta) * math.cos(beta)
    if denom <= settings.trig_guard:
        raise ControlFault(f"cos(theta)cos(beta) = {denom:.4f} below guard "
                           f"{settings.trig_guard} (theta={theta:.4f}, beta={beta:.4f})")
    return u_z / denom


def hover_pitch_setpoint(u_z, u_x, theta, beta, params, settings):
    T_total = _vertical_thrust(u_z, theta, beta, settings)
    if T_total <= 0:
        return 0.0
    theta_d = math.asin(min(max(-u_x / T_total, -1.0), 1.0))
    return min(max(theta_d, -settings.theta_d_limit), settings.theta_d_limit)


def hover_law(u_z, u_x, u_theta, theta, beta, params, settings):
    """Rotor-only allocation for hover; returns (command, pitch setpoint)."""
    T_total = _vertical_thrust(u_z, theta, beta, settings)
    theta_d = hover_pitch_setpoint(u_z, u_x, theta, beta, params, settings)
    T_total = limit_collective(T_total, u_theta, beta, params)
    T1, T2 = allocate(T_total, u_theta, beta, params)
    return ControlCommand(T1=T1, T2=T2, delta_e=0.0, beta_dot=0.0), theta_d


def _pair_flows(T1, T2, air, beta, params):
    # Flows are evaluated at the thrust that survives saturation.
    T1 = min(max(T1, 0.0), params.T_max)
    T2 = min(max(T2, 0.0), params.T_max)
    return (aero.free_wing_local_flow(air.Z_dot, air.X_dot, beta, T1, params),
            aero.free_wing_local_flow(air.Z_dot, air.X_dot, beta, T2, params))


def elevator_for_moment(flow1, flow2, beta, params, settings, moment=0.0):
    """Aft-flap deflection giving the free wings a net pitch moment of ``moment``.

    With ``moment`` zero the fore and aft free-wing moments cancel. The aft
    induced drag depends on the flap through C_L, so the balance is a quadratic
    in the aft lift coefficient; the root continuous with the drag-free solution
    is taken. Falls back to zero deflection where the flap has no authority.
    """
    s, c = math.sin(beta), math.cos(beta)
    if s <= settings.trig_guard or flow2.V_r <= settings.min_flap_airspeed:
        return 0.0
    L1, D1 = aero.free_wing_lift_drag(flow1, 0.0, params)
    q_S = 0.5 * params.rho * flow2.V_r ** 2 * params.S_f
    needed = (params.l4 * (L1 * s + D1 * c) - moment) / (params.l3 * q_S)
    # c*k*x^2 + s*x + (c*C_D0 - needed) = 0, x = aft lift coefficient
    a = c * params.induced_drag_factor
    c0 = c * params.C_D0 - needed
    disc = s * s - 4.0 * a * c0
    if disc >= 0.0:
        C_L2 = -2.0 * c0 / (s + math.sqrt(disc))
    else:
        C_L2 = -s / (2.0 * a)
    base = params.C_L0 + params.C_Lalpha * flow2.alpha_f
    delta_e = (C_L2 - base) / params.C_Ldelta_e
    return min(max(delta_e, -params.delta_e_max), params.delta_e_max)


def wing_vertical_force(theta, air, params):
    """Earth-vertical component of the fixed-wing force at the current air data."""
    wing = aero.fixed_wing_forces(air.Z_dot, air.X_dot, theta, params)
    return math.cos(theta) * wing.F_za + math.sin(theta) * wing.F_xa


def transition_law(u_z, u_theta, theta, beta, air, params, settings, beta_dot):
    """Conversion allocation: rotors hold altitude and pitch, the flap nulls the
    free-wing moment. ``beta_dot`` is the constant tilt-rate command.

    Near beta = pi/2 the rotors lose vertical and pitch authority; both
    divisions then use cos(beta) floored at ``transition_cos_floor`` so the
    demand stays bounded while the wing carries the aircraft.
    """
    demand = u_z
    if settings.transition_lift_compensation:
        demand -= wing_vertical_force(theta, air, params)
    cos_theta = math.cos(theta)
    if cos_theta <= settings.trig_guard:
        raise ControlFault(f"cos(theta) = {cos_theta:.4f} below guard {settings.trig_guard}")
    cos_beta = max(math.cos(beta), settings.transition_cos_floor)
    T_total = max(demand, 0.0) / (cos_theta * cos_beta)
    moment = u_theta * math.cos(beta) / cos_beta
    T_total = limit_collective(T_total, moment, beta, params) if math.cos(beta) > 0 else \
        min(T_total, 2 * params.T_max)
    T1, T2 = allocate(T_total, moment, beta, params) if math.cos(beta) > 0 else \
        (0.5 * T_total, 0.5 * T_total)
    flow1, flow2 = _pair_flows(T1, T2, air, beta, params)
    delta_e = elevator_for_moment(flow1, flow2, beta, params, settings)
    return ControlCommand(T1=T1, T2=T2, delta_e=delta_e, beta_dot=beta_dot)


def _forward_checks(u_x, theta, beta, air, params, settings):
    V2 = air.Z_dot ** 2 + air.X_dot ** 2
    q = 0.5 * params.rho * V2
    if q <= settings.min_dynamic_pressure:
        raise ControlFault(f"dynamic pressure {q:.1f} Pa below {settings.min_dynamic_pressure}")
    denom = math.cos(theta) * math.sin(beta)
    if denom <= settings.trig_guard:
        raise ControlFault(f"cos(theta)sin(beta) = {denom:.4f} below guard {settings.trig_guard}")
    T_total = min(max(u_x / denom, 0.0), 2 * params.T_max)
    return q, T_total


def forward_pitch_setpoint(u_z, u_x, theta, beta, air, params, settings):
    q, T_total = _forward_checks(u_x, theta, beta, air, params, settings)
    _, gamma, alpha = aero.flight_path(air.Z_dot, air.X_dot, theta)
    lift_needed = u_z - T_total * math.sin(theta) * math.sin(beta)
    if settings.literal_eq36:
        if alpha == 0.0:
            raise ControlFault("literal angle-of-attack law undefined at alpha = 0")
        alpha_d = lift_needed / (q * params.S_w * params.C_Lalpha * alpha)
    else:
        alpha_d = (lift_needed - q * params.S_w * params.C_L0) / (q * params.S_w * params.C_Lalpha)
    alpha_d = min(max(alpha_d, -settings.alpha_d_limit), settings.alpha_d_limit)
    return alpha_d + gamma


def forward_law(u_z, u_x, u_theta, theta, beta, air, params, settings):
    """Aeroplane-mode allocation: equal pair thrust for speed, wing incidence for
    altitude, flap for pitch. Returns (command, pitch setpoint)."""
    _, T_total = _forward_checks(u_x, theta, beta, air, params, settings)
    theta_d = forward_pitch_setpoint(u_z, u_x, theta, beta, air, params, settings)
    T1 = T2 = 0.5 * T_total
    flow1, flow2 = _pair_flows(T1, T2, air, beta, params)
    delta_e = elevator_for_moment(flow1, flow2, beta, params, settings, moment=u_theta)
    beta_dot = params.beta_rate if beta < math.pi / 2 else 0.0
    return ControlCommand(T1=T1, T2=T2, delta_e=delta_e, beta_dot=beta_dot), theta_d


def mode_switch(mode, X_dot_filtered, beta, directive, settings):
    if directive not in DIRECTIVES:
        raise ValueError(f"unknown plan directive {directive!r}")
    if mode is FlightMode.HOVER and directive == "forward":
        return FlightMode.TRANSITION_FORWARD
    if mode is FlightMode.TRANSITION_FORWARD and X_dot_filtered > settings.forward_switch_speed:
        return FlightMode.FORWARD
    if mode is FlightMode.FORWARD and directive == "reverse":
        return FlightMode.TRANSITION_REVERSE
    if (mode is FlightMode.TRANSITION_REVERSE and beta == 0.0
            and X_dot_filtered < settings.hover_capture_speed):
        return FlightMode.HOVER
    return mode


@dataclass(frozen=True)
class SaturationFlags:
    T1: bool = False
    T2: bool = False
    delta_e: bool = False
    beta_dot: bool = False

    def __bool__(self):
        return self.T1 or self.T2 or self.delta_e or self.beta_dot

    def names(self):
        return [f.name for f in fields(self) if getattr(self, f.name)]


def _clamp(value, lo, hi):
    clipped = min(max(value, lo), hi)
    return clipped, clipped != value


def saturate(cmd, params):
    T1, f1 = _clamp(cmd.T1, 0.0, params.T_max)
    T2, f2 = _clamp(cmd.T2, 0.0, params.T_max)
    de, f3 = _clamp(cmd.delta_e, -params.delta_e_max, params.delta_e_max)
    bd, f4 = _clamp(cmd.beta_dot, -params.beta_rate, params.beta_rate)
    return ControlCommand(T1, T2, de, bd), SaturationFlags(f1, f2, f3, f4)


@dataclass
class ControlOutput:
    command: ControlCommand
    flags: SaturationFlags
    theta_d: float
    mode: FlightMode


class Controller:
    """Per-axis PIDs plus the active allocation law.

    Owns the PID memories and the flight mode; every mode change clears the
    integrators and stored errors.
    """

    def __init__(self, params, gains, settings, dt, mode=FlightMode.HOVER):
        self.params = params
        self.gains = gains
        self.settings = settings
        self.dt = dt
        self.mode = mode
        self.pids = {axis: PidState() for axis in ("z", "x", "theta")}

    @property
    def mode_gains(self):
        return self.gains.for_mode(self.mode)

    def switch(self, X_dot_filtered, beta, directive):
        new = mode_switch(self.mode, X_dot_filtered, beta, directive, self.settings)
        if new is not self.mode:
            self.mode = new
            for ps in self.pids.values():
                ps.reset()
            return True
        return False

    def _pid(self, axis, desired, filtered, measured):
        gains = getattr(self.mode_gains, axis)
        raw = measured if self.settings.derivative_on_measurement(axis) else None
        accel = pid_step(self.pids[axis], desired, filtered, gains, self.dt,
                         self.settings.integral_limit(axis), raw)
        return virtual_force(accel, axis, self.params)

    def update(self, filtered, measured, state, Z_d, X_dot_d, theta_schedule):
        """Compute the saturated actuator command for one sample.

        ``filtered`` and ``measured`` are (Z, X_dot, theta) triples. The
        unmeasured quantities (climb rate, tilt, airspeed) come from ``state``.
        """
        p, s = self.params, self.settings
        Z_f, Xd_f, th_f = filtered
        Z_m, Xd_m, th_m = measured
        beta = state.beta
        air = AirData(state.Z_dot, state.X_dot)
        u_z = self._pid("z", Z_d, Z_f, Z_m)

        if self.mode is FlightMode.HOVER:
            u_x = self._pid("x", X_dot_d, Xd_f, Xd_m)
            theta_d = hover_pitch_setpoint(u_z, u_x, th_f, beta, p, s)
            u_th = self._pid("theta", theta_d, th_f, th_m)
            cmd, _ = hover_law(u_z, u_x, u_th, th_f, beta, p, s)
        elif self.mode is FlightMode.FORWARD:
            u_x = self._pid("x", X_dot_d, Xd_f, Xd_m)
            theta_d = forward_pitch_setpoint(u_z, u_x, th_f, beta, air, p, s)
            u_th = self._pid("theta", theta_d, th_f, th_m)
            cmd, _ = forward_law(u_z, u_x, u_th, th_f, beta, air, p, s)
        else:
            theta_d = theta_schedule
            u_th = self._pid("theta", theta_d, th_f, th_m)
            if self.mode is FlightMode.TRANSITION_FORWARD:
                rate = p.beta_rate if beta < math.pi / 2 else 0.0
            else:
                rate = -p.beta_rate if beta > 0.0 else 0.0
            cmd = transition_law(u_z, u_th, th_f, beta, air, p, s, rate)
        cmd, flags = saturate(cmd, p)
        return ControlOutput(cmd, flags, theta_d, self.mode)
