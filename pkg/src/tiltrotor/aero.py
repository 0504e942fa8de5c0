"""Body-frame forces and moments: rotor thrust, fixed wing, free wings, tilt reaction.

Sign conventions: body z is up along the rotor axis at zero tilt, body x points
through the nose, pitch moments are positive nose-up. Tilt ``beta`` is zero with
the rotors vertical and pi/2 with them horizontal.
"""

import math
from dataclasses import dataclass, fields

from .errors import ConfigValidationError, DomainError, SolverError

NEWTON_TOL = 1e-3
NEWTON_MAX_ITER = 100
# Below this airspeed the flight-path angle is undefined; alpha is reported as 0.
MIN_AIRSPEED = 0.1


@dataclass(frozen=True)
class AircraftParams:
    """Physical and aerodynamic constants of the quad tilt-rotor.

    The numbers below are engineering placeholders for a ~20 kg vehicle that
    cruises near 57 m/s; only their relationships (geometry, T_max margin)
    are constrained.
    """

    m: float = 20.0                 # kg
    J_y: float = 1.5                # kg m^2
    J_r: float = 0.002              # kg m^2, one rotor disc
    rotor_speeds: tuple = (600.0, 600.0, 600.0, 600.0)  # rad/s, sign via (-1)^(j+1)
    l1: float = 0.45                # m, CoG to fore rotors
    l2: float = 0.55                # m, CoG to aft rotors
    l3: float = 0.55                # m, CoG to aft free-wing lift centre
    l4: float = 0.45                # m, CoG to fore free-wing lift centre
    delta_x: float = 1.0            # m, fore-aft rotor spacing
    S_w: float = 0.6                # m^2
    S_f: float = 0.0015             # m^2, per free-wing pair
    R: float = 0.25                 # m
    C_L0: float = 0.1
    C_Lalpha: float = 5.0           # 1/rad
    C_Ldelta_e: float = 2.0         # 1/rad
    C_D0: float = 0.03
    AR: float = 8.0
    e_oswald: float = 0.8
    rho: float = 1.225              # kg/m^3
    g: float = 9.81                 # m/s^2
    T_max: float = 250.0            # N, per rotor pair
    delta_e_max: float = 0.35       # rad
    beta_rate: float = math.radians(8.0)  # rad/s

    def __post_init__(self):
        object.__setattr__(self, "rotor_speeds", tuple(float(w) for w in self.rotor_speeds))
        for f in fields(self):
            if f.name == "rotor_speeds":
                continue
            if not math.isfinite(getattr(self, f.name)):
                raise ConfigValidationError(f"aircraft.{f.name}", "must be finite")
        if len(self.rotor_speeds) != 4:
            raise ConfigValidationError("aircraft.rotor_speeds", "must have exactly 4 entries")
        for name in ("m", "J_y", "S_w", "S_f", "R", "rho", "AR", "g", "delta_e_max", "beta_rate"):
            if getattr(self, name) <= 0:
                raise ConfigValidationError(f"aircraft.{name}", "must be > 0")
        for name in ("J_r", "l1", "l2", "l3", "l4", "C_D0"):
            if getattr(self, name) < 0:
                raise ConfigValidationError(f"aircraft.{name}", "must be >= 0")
        if not 0 < self.e_oswald <= 1:
            raise ConfigValidationError("aircraft.e_oswald", "must lie in (0, 1]")
        if not math.isclose(self.delta_x, self.l1 + self.l2, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigValidationError(
                "aircraft.delta_x", f"geometry constraint delta_x = l1 + l2 violated "
                f"({self.delta_x} != {self.l1} + {self.l2})")
        if self.T_max <= self.m * self.g / 2:
            raise ConfigValidationError("aircraft.T_max", "must exceed m*g/2")

    @property
    def disc_area(self):
        return math.pi * self.R ** 2

    @property
    def induced_drag_factor(self):
        return 1.0 / (math.pi * self.AR * self.e_oswald)


@dataclass(frozen=True)
class ModelFlags:
    """Switches back to the printed form of equations that were corrected."""

    literal_eq8: bool = False
    literal_eq9: bool = False
    literal_eq10: bool = False


@dataclass(frozen=True)
class BodyForces:
    F_za: float = 0.0
    F_xa: float = 0.0
    tau_theta: float = 0.0

    def __add__(self, other):
        return BodyForces(self.F_za + other.F_za, self.F_xa + other.F_xa,
                          self.tau_theta + other.tau_theta)


@dataclass(frozen=True)
class FreeWingLocalFlow:
    V_beta_z: float
    V_beta_x: float
    v_induced: float
    V_r: float
    alpha_f: float


def _check_tilt(beta):
    if not 0.0 <= beta <= math.pi / 2:
        raise DomainError(f"tilt angle {beta!r} outside [0, pi/2]")


def rotor_thrust_forces(T1, T2, beta, params):
    """Map the fore/aft pair thrusts to body-frame force and pitch moment."""
    if T1 < 0 or T2 < 0:
        raise DomainError(f"negative pair thrust (T1={T1!r}, T2={T2!r})")
    _check_tilt(beta)
    c, s = math.cos(beta), math.sin(beta)
    return BodyForces(
        F_za=(T1 + T2) * c,
        F_xa=(T1 + T2) * s,
        tau_theta=(T1 * params.l1 - T2 * params.l2) * c,
    )


def flight_path(Z_dot, X_dot, theta):
    """Return (airspeed, flight-path angle, angle of attack)."""
    V = math.hypot(Z_dot, X_dot)
    if V < MIN_AIRSPEED:
        return V, 0.0, 0.0
    gamma = math.atan2(Z_dot, X_dot)
    return V, gamma, theta - gamma


def fixed_wing_forces(Z_dot, X_dot, theta, params, literal_eq8=False):
    """Fixed-wing lift and drag resolved on the body axes.

    Lift acts normal and drag opposite to the relative wind, which meets the
    body at angle of attack alpha; nose-up alpha tilts lift forward and drag
    upward in body axes. ``literal_eq8`` flips both sin(alpha) projections,
    which is equivalent to measuring alpha nose-down.
    """
    V, _, alpha = flight_path(Z_dot, X_dot, theta)
    if V == 0.0:
        return BodyForces()
    q = 0.5 * params.rho * V * V
    C_L = params.C_L0 + params.C_Lalpha * alpha
    lift = q * params.S_w * C_L
    drag = q * params.S_w * (params.C_D0 + C_L * C_L * params.induced_drag_factor)
    ca, sa = math.cos(alpha), math.sin(alpha)
    if literal_eq8:
        sa = -sa
    return BodyForces(
        F_za=lift * ca + drag * sa,
        F_xa=lift * sa - drag * ca,
        tau_theta=0.0,
    )


def rotor_frame_velocities(Z_dot, X_dot, beta, literal_eq9=False):
    """Resolve earth-frame velocities on the rotor axes: (cross-flow, axial).

    The axial component is the inflow the vehicle's motion drives through the
    disc, so climbing at zero tilt adds to the induced flow; the map preserves
    speed. ``literal_eq9`` negates the climb term of the axial row, which no
    longer preserves speed.
    """
    _check_tilt(beta)
    c, s = math.cos(beta), math.sin(beta)
    axial = c * Z_dot + s * X_dot
    if literal_eq9:
        axial = -c * Z_dot + s * X_dot
    return -s * Z_dot + c * X_dot, axial


def induced_velocity_residual(v, T_pair, V_beta_z, V_beta_x, params, literal_eq10=False):
    rhs = 0.5 * T_pair / (2.0 * params.rho * params.disc_area)
    if not literal_eq10:
        rhs = rhs * rhs
    return v ** 4 + 2.0 * V_beta_z * v ** 3 + (V_beta_x ** 2 + V_beta_z ** 2) * v ** 2 - rhs


def induced_velocity(T_pair, V_beta_z, V_beta_x, params, literal_eq10=False):
    """Solve the momentum-theory quartic for one rotor of a pair by Newton-Raphson.

    The per-rotor thrust is half of the pair thrust. Iteration starts from the
    hover solution (shifted up by any reverse cross-flow so it lies above the
    largest root) and stops once the relative update falls below 1e-3. Steps
    that would leave the bracket [0, v0] are replaced by bisection. A zero
    thrust short-circuits to 0.
    """
    if T_pair < 0:
        raise DomainError(f"negative pair thrust {T_pair!r}")
    if T_pair == 0:
        return 0.0
    hover_rhs = 0.5 * T_pair / (2.0 * params.rho * params.disc_area)
    if literal_eq10:
        rhs = hover_rhs
        v = hover_rhs ** 0.25
    else:
        rhs = hover_rhs * hover_rhs
        v = math.sqrt(hover_rhs)
    v += max(0.0, -V_beta_z)
    a3 = 2.0 * V_beta_z
    a2 = V_beta_x * V_beta_x + V_beta_z * V_beta_z
    lo, hi = 0.0, v
    for _ in range(NEWTON_MAX_ITER):
        f = ((v + a3) * v + a2) * v * v - rhs
        if f == 0.0 and v > 0.0:
            return v
        if f > 0.0:
            hi = v
        else:
            lo = v
        df = ((4.0 * v + 3.0 * a3) * v + 2.0 * a2) * v
        new = v - f / df if df != 0.0 else math.nan
        newton = lo <= new <= hi
        if not newton:
            new = 0.5 * (lo + hi)
        step = new - v
        v = new
        # A bisection step only counts as converged once the bracket is tight.
        if v > 0.0 and abs(step) < NEWTON_TOL * v and (newton or hi - lo < NEWTON_TOL * v):
            return v
    raise SolverError("induced velocity did not converge", v,
                      ((v + a3) * v + a2) * v * v - rhs)


def free_wing_local_flow(Z_dot, X_dot, beta, T_pair, params, literal_eq10=False,
                         literal_eq9=False):
    V_bz, V_bx = rotor_frame_velocities(Z_dot, X_dot, beta, literal_eq9)
    v_i = induced_velocity(T_pair, V_bz, V_bx, params, literal_eq10)
    axial = V_bx + v_i
    V_r = math.hypot(axial, V_bz)
    alpha_f = math.atan2(V_bz, axial) if V_r > 0.0 else 0.0
    return FreeWingLocalFlow(V_bz, V_bx, v_i, V_r, alpha_f)


def free_wing_lift_coefficient(alpha_f, delta_e, params):
    return params.C_L0 + params.C_Lalpha * alpha_f + params.C_Ldelta_e * delta_e


def free_wing_lift_drag(flow, delta_e, params):
    if abs(delta_e) > params.delta_e_max:
        raise DomainError(f"elevator deflection {delta_e!r} beyond +/-{params.delta_e_max}")
    q_S = 0.5 * params.rho * flow.V_r * flow.V_r * params.S_f
    C_L = free_wing_lift_coefficient(flow.alpha_f, delta_e, params)
    return q_S * C_L, q_S * (params.C_D0 + C_L * C_L * params.induced_drag_factor)


def free_wing_pitch_moment(L_f1, D_f1, L_f2, D_f2, beta, params):
    """Net pitch moment of the free wings; fore wings nose-up, aft wings nose-down."""
    s, c = math.sin(beta), math.cos(beta)
    return params.l4 * (L_f1 * s + D_f1 * c) - params.l3 * (L_f2 * s + D_f2 * c)


def free_wing_forces(flow1, flow2, delta_e, beta, params):
    """Project fore (1) and aft (2) free-wing lift and drag onto the body axes.

    Only the aft pair carries the elevator flap.
    """
    _check_tilt(beta)
    L1, D1 = free_wing_lift_drag(flow1, 0.0, params)
    L2, D2 = free_wing_lift_drag(flow2, delta_e, params)
    s, c = math.sin(beta), math.cos(beta)
    a1, a2 = flow1.alpha_f, flow2.alpha_f
    F_za = (s * math.cos(a1) * L1 + s * math.cos(a2) * L2
            + c * math.sin(a1) * D1 + c * math.sin(a2) * D2)
    F_xa = (c * math.sin(a1) * L1 + c * math.sin(a2) * L2
            + s * math.cos(a1) * D1 + s * math.cos(a2) * D2)
    return BodyForces(F_za, F_xa, free_wing_pitch_moment(L1, D1, L2, D2, beta, params))


def tilt_reaction_moment(beta_dot, params):
    """Gyroscopic pitch moment from tilting the spinning rotors."""
    total = 0.0
    for j, omega in enumerate(params.rotor_speeds, start=1):
        total += (-1) ** (j + 1) * params.J_r * omega * beta_dot
    return total
