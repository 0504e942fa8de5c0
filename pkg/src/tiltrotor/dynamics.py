"""Longitudinal rigid-body dynamics and the fixed-step explicit Euler update."""

import math
from dataclasses import dataclass, replace

from . import aero
from .errors import SimulationFailure


@dataclass(frozen=True)
class LongitudinalState:
    Z: float = 0.0          # m, up positive
    Z_dot: float = 0.0      # m/s
    X: float = 0.0          # m
    X_dot: float = 0.0      # m/s
    theta: float = 0.0      # rad
    theta_dot: float = 0.0  # rad/s
    beta: float = 0.0       # rad


@dataclass(frozen=True)
class ControlCommand:
    T1: float = 0.0         # N, fore pair
    T2: float = 0.0         # N, aft pair
    delta_e: float = 0.0    # rad, aft flap
    beta_dot: float = 0.0   # rad/s


@dataclass(frozen=True)
class EarthForces:
    F_ze: float
    F_xe: float


def total_body_forces(state, cmd, params, flags=None):
    """Sum rotor, fixed-wing, free-wing and tilt-reaction contributions."""
    flags = flags or aero.ModelFlags()
    rotors = aero.rotor_thrust_forces(cmd.T1, cmd.T2, state.beta, params)
    wing = aero.fixed_wing_forces(state.Z_dot, state.X_dot, state.theta, params,
                                  flags.literal_eq8)
    flow1 = aero.free_wing_local_flow(state.Z_dot, state.X_dot, state.beta, cmd.T1,
                                      params, flags.literal_eq10, flags.literal_eq9)
    flow2 = aero.free_wing_local_flow(state.Z_dot, state.X_dot, state.beta, cmd.T2,
                                      params, flags.literal_eq10, flags.literal_eq9)
    free = aero.free_wing_forces(flow1, flow2, cmd.delta_e, state.beta, params)
    tilt = aero.BodyForces(tau_theta=aero.tilt_reaction_moment(cmd.beta_dot, params))
    return rotors + wing + free + tilt


def earth_frame_forces(body, theta, params):
    c, s = math.cos(theta), math.sin(theta)
    return EarthForces(
        F_ze=c * body.F_za + s * body.F_xa - params.m * params.g,
        F_xe=-s * body.F_za + c * body.F_xa,
    )


def accelerations(earth, tau_theta, params):
    return earth.F_ze / params.m, earth.F_xe / params.m, tau_theta / params.J_y


def step(state, cmd, dt, params, *, ground=True, flags=None):
    """Advance one sample.

    Velocities take the accelerations of the previous sample and positions take
    the previous velocities, so a body released from rest does not move on the
    first step. With ``ground`` set, the vehicle rests on Z = 0 while the net
    vertical force or the sink rate pushes it down; the gear then also holds
    pitch and stops the rolling speed.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    body = total_body_forces(state, cmd, params, flags)
    earth = earth_frame_forces(body, state.theta, params)
    Z_ddot, X_ddot, theta_ddot = accelerations(earth, body.tau_theta, params)

    beta = min(max(state.beta + cmd.beta_dot * dt, 0.0), math.pi / 2)
    new = LongitudinalState(
        Z=state.Z + dt * state.Z_dot,
        Z_dot=state.Z_dot + dt * Z_ddot,
        X=state.X + dt * state.X_dot,
        X_dot=state.X_dot + dt * X_ddot,
        theta=state.theta + dt * state.theta_dot,
        theta_dot=state.theta_dot + dt * theta_ddot,
        beta=beta,
    )
    if ground and new.Z <= 0.0 and (earth.F_ze < 0.0 or new.Z_dot < 0.0):
        new = replace(new, Z=0.0, Z_dot=0.0, X_dot=0.0, theta_dot=0.0)

    values = (new.Z, new.Z_dot, new.X, new.X_dot, new.theta, new.theta_dot, new.beta)
    if not all(math.isfinite(v) for v in values):
        raise SimulationFailure(f"non-finite state {new}")
    if abs(new.theta) >= math.pi / 2:
        raise SimulationFailure(f"pitch angle {new.theta!r} left (-pi/2, pi/2)")
    return new


def hover_trim(params, Z=0.0):
    """Analytic hover trim: rotors vertical, zero velocity, all accelerations zero.

    At zero airspeed the free-wing drag of each pair is linear in its thrust,
    which turns the moment balance into a linear equation in (T1, T2).
    """
    # v_i^2 = (T_pair / 2) / (2 rho A), so drag = k * T_pair.
    k = (0.5 * params.rho * params.S_f
         * (params.C_D0 + params.C_L0 ** 2 * params.induced_drag_factor)
         / (4.0 * params.rho * params.disc_area))
    weight = params.m * params.g
    fore_arm = params.l1 + params.l4 * k
    aft_arm = params.l2 + params.l3 * k
    T1 = weight * aft_arm / (fore_arm + aft_arm)
    T2 = weight - T1
    return LongitudinalState(Z=Z), ControlCommand(T1=T1, T2=T2)
