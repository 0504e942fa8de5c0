import math
import random

import pytest
from hypothesis import given, strategies as st

from tiltrotor import aero
from tiltrotor.aero import AircraftParams, FreeWingLocalFlow
from tiltrotor.errors import ConfigValidationError, DomainError

P = AircraftParams()
K = 1.0 / (math.pi * P.AR * P.e_oswald)


def bisect_largest_root(T_pair, Vz, Vx, rho, R, tol=1e-9):
    """Independent oracle: largest positive root of v^2((v+Vz)^2 + Vx^2) = (T/(4 rho A))^2."""
    rhs = (0.5 * T_pair / (2 * rho * math.pi * R * R)) ** 2

    def f(v):
        return v * v * ((v + Vz) ** 2 + Vx * Vx) - rhs

    hi = 2.0 * math.sqrt(math.sqrt(rhs)) + abs(Vz) + 1.0
    # scan down from hi for the last sign change
    n = 4000
    lo = 0.0
    for i in range(n, 0, -1):
        a = hi * (i - 1) / n
        if f(a) <= 0:
            lo, hi = a, hi * i / n
            break
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- rotor thrust ---------------------------------------------------------

def test_rotor_forces_vertical_symmetric():
    p = AircraftParams(l1=1.0, l2=1.0, delta_x=2.0)
    f = aero.rotor_thrust_forces(100, 100, 0.0, p)
    assert (f.F_za, f.F_xa, f.tau_theta) == (200, 0, 0)


def test_rotor_forces_horizontal():
    f = aero.rotor_thrust_forces(100, 100, math.pi / 2, P)
    assert f.F_za == pytest.approx(0, abs=1e-12)
    assert f.F_xa == 200
    assert f.tau_theta == pytest.approx(0, abs=1e-12)


def test_rotor_forces_scalar_oracle():
    p = AircraftParams(l1=0.8, l2=1.2, delta_x=2.0)
    f = aero.rotor_thrust_forces(60, 40, math.pi / 4, p)
    r = math.sqrt(0.5)
    assert f.F_za == pytest.approx(100 * r, rel=1e-12)
    assert f.F_xa == pytest.approx(100 * r, rel=1e-12)
    assert f.tau_theta == pytest.approx((48 - 48) * r, abs=1e-12)
    g = aero.rotor_thrust_forces(100, 80, math.radians(30), P)
    assert g.F_za == pytest.approx(155.88457268119896, rel=1e-12)
    assert g.F_xa == pytest.approx(90.0, rel=1e-12)
    assert g.tau_theta == pytest.approx(0.8660254037844386, rel=1e-9)


def test_rotor_forces_reject_bad_inputs():
    with pytest.raises(DomainError):
        aero.rotor_thrust_forces(-1, 0, 0, P)
    with pytest.raises(DomainError):
        aero.rotor_thrust_forces(1, 1, 2.0, P)


# -- fixed wing -----------------------------------------------------------

def test_fixed_wing_at_rest():
    f = aero.fixed_wing_forces(0, 0, 0.3, P)
    assert (f.F_za, f.F_xa, f.tau_theta) == (0, 0, 0)


def test_fixed_wing_zero_alpha():
    f = aero.fixed_wing_forces(0, 50, 0, P)
    lift = 0.5 * P.rho * 2500 * P.S_w * P.C_L0
    drag = 0.5 * P.rho * 2500 * P.S_w * (P.C_D0 + P.C_L0 ** 2 * K)
    assert f.F_za == pytest.approx(lift, rel=1e-12)
    assert f.F_xa == pytest.approx(-drag, rel=1e-12)


def test_fixed_wing_scalar_oracle():
    # Z_dot=5, X_dot=50, theta=0.1: gamma=atan2(5,50), alpha=theta-gamma.
    # Values evaluated by hand-coded scalar formula outside the package.
    f = aero.fixed_wing_forces(5, 50, 0.1, P)
    assert f.F_za == pytest.approx(94.3404758417, rel=1e-9)
    assert f.F_xa == pytest.approx(-28.2838042904, rel=1e-9)
    assert f.tau_theta == 0.0


def test_fixed_wing_literal_flag_flips_projection():
    lit = aero.fixed_wing_forces(5, 50, 0.1, P, literal_eq8=True)
    cor = aero.fixed_wing_forces(5, 50, 0.1, P)
    assert lit.F_za != cor.F_za
    # at zero alpha both forms agree
    a = aero.fixed_wing_forces(0, 50, 0.0, P, literal_eq8=True)
    b = aero.fixed_wing_forces(0, 50, 0.0, P)
    assert (a.F_za, a.F_xa) == (b.F_za, b.F_xa)


# -- rotor frame ----------------------------------------------------------

def test_rotor_frame_examples():
    assert aero.rotor_frame_velocities(0, 10, 0) == (10, 0)
    vz, vx = aero.rotor_frame_velocities(0, 10, math.pi / 2)
    assert vz == pytest.approx(0, abs=1e-12) and vx == pytest.approx(10)
    vz, vx = aero.rotor_frame_velocities(3, 4, math.pi / 6)
    s, c = 0.5, math.sqrt(3) / 2
    assert vz == pytest.approx(-s * 3 + c * 4)
    assert vx == pytest.approx(c * 3 + s * 4)
    vz, vx = aero.rotor_frame_velocities(3, 4, math.pi / 6, literal_eq9=True)
    assert vx == pytest.approx(-c * 3 + s * 4)


@given(st.floats(-80, 80), st.floats(-80, 80), st.floats(0, math.pi / 2))
def test_rotor_frame_preserves_speed(Z_dot, X_dot, beta):
    vz, vx = aero.rotor_frame_velocities(Z_dot, X_dot, beta)
    assert vz * vz + vx * vx == pytest.approx(Z_dot ** 2 + X_dot ** 2, rel=1e-9, abs=1e-9)


# -- induced velocity -----------------------------------------------------

def test_induced_velocity_zero_thrust():
    assert aero.induced_velocity(0.0, 5.0, 3.0, P) == 0.0


def test_induced_velocity_hover_closed_form():
    p = AircraftParams(R=0.5, T_max=3000)
    v = aero.induced_velocity(4000.0, 0.0, 0.0, p)  # 2000 N per rotor
    assert v == pytest.approx(32.2397, rel=1e-3)
    assert v == pytest.approx(math.sqrt(2000 / (2 * 1.225 * math.pi * 0.25)), rel=1e-3)


def test_induced_velocity_bisection_example():
    p = AircraftParams(R=0.5, T_max=3000)
    v = aero.induced_velocity(4000.0, 2.0, 20.0, p)
    assert v == pytest.approx(bisect_largest_root(4000.0, 2.0, 20.0, 1.225, 0.5), rel=1e-3)


@given(st.floats(0.1, 500), st.floats(-20, 60), st.floats(-20, 60))
def test_induced_velocity_root_property(T, Vz, Vx):
    v = aero.induced_velocity(T, Vz, Vx, P)
    assert v > 0
    assert v == pytest.approx(bisect_largest_root(T, Vz, Vx, P.rho, P.R), rel=1e-3)


def test_induced_velocity_negative_thrust():
    with pytest.raises(DomainError):
        aero.induced_velocity(-1.0, 0, 0, P)


def test_literal_eq10_hover_limit():
    v = aero.induced_velocity(100.0, 0.0, 0.0, P, literal_eq10=True)
    assert v == pytest.approx((50.0 / (2 * P.rho * P.disc_area)) ** 0.25, rel=1e-3)


# -- free wings -----------------------------------------------------------

def test_local_flow_hover():
    f = aero.free_wing_local_flow(0, 0, 0, 100.0, P)
    assert f.V_beta_z == 0 and f.V_beta_x == 0
    assert f.V_r == f.v_induced and f.alpha_f == 0


def test_local_flow_pure_crossflow():
    f = aero.free_wing_local_flow(0, 10, 0, 0.0, P)
    assert f.v_induced == 0 and f.V_r == 10
    assert f.alpha_f == pytest.approx(math.pi / 2)


def test_local_flow_general_consistency():
    f = aero.free_wing_local_flow(2, 30, 0.6, 150.0, P)
    vz, vx = aero.rotor_frame_velocities(2, 30, 0.6)
    assert (f.V_beta_z, f.V_beta_x) == (vz, vx)
    assert f.v_induced == aero.induced_velocity(150.0, vz, vx, P)
    assert f.V_r ** 2 == pytest.approx((vx + f.v_induced) ** 2 + vz ** 2, rel=1e-12)
    assert f.alpha_f == pytest.approx(math.atan2(vz, vx + f.v_induced))


def test_free_wing_lift_drag():
    still = FreeWingLocalFlow(0, 0, 0, 0.0, 0.3)
    assert aero.free_wing_lift_drag(still, 0.1, P) == (0.0, 0.0)
    flow = FreeWingLocalFlow(0, 20, 0, 20.0, 0.0)
    L, _ = aero.free_wing_lift_drag(flow, 0.0, P)
    assert L == pytest.approx(0.5 * P.rho * 400 * P.S_f * P.C_L0)
    flow = FreeWingLocalFlow(0, 20, 0, 20.0, 0.1)
    L, D = aero.free_wing_lift_drag(flow, 0.05, P)
    C_L = 0.1 + 5.0 * 0.1 + 2.0 * 0.05
    q_S = 0.5 * 1.225 * 400 * 0.0015
    assert L == pytest.approx(q_S * C_L, rel=1e-12)
    assert D == pytest.approx(q_S * (0.03 + C_L * C_L * K), rel=1e-12)
    with pytest.raises(DomainError):
        aero.free_wing_lift_drag(flow, 1.0, P)


def test_free_wing_forces_zero_flow():
    still = FreeWingLocalFlow(0, 0, 0, 0.0, 0.0)
    f = aero.free_wing_forces(still, still, 0.0, 0.3, P)
    assert (f.F_za, f.F_xa, f.tau_theta) == (0, 0, 0)


def test_free_wing_symmetric_lift_has_no_moment_at_zero_tilt():
    p = AircraftParams(l3=0.5, l4=0.5, l1=0.5, l2=0.5)
    flow = FreeWingLocalFlow(0, 10, 5, 15.0, 0.0)
    f = aero.free_wing_forces(flow, flow, 0.0, 0.0, p)
    assert f.tau_theta == pytest.approx(0.0, abs=1e-12)


def test_free_wing_forces_term_by_term():
    beta = 0.7
    f1 = FreeWingLocalFlow(0, 0, 0, 25.0, 0.12)
    f2 = FreeWingLocalFlow(0, 0, 0, 18.0, -0.05)
    de = 0.1
    f = aero.free_wing_forces(f1, f2, de, beta, P)

    def ld(V, a, d):
        q = 0.5 * P.rho * V * V * P.S_f
        cl = P.C_L0 + P.C_Lalpha * a + P.C_Ldelta_e * d
        return q * cl, q * (P.C_D0 + cl * cl * K)

    L1, D1 = ld(25.0, 0.12, 0.0)
    L2, D2 = ld(18.0, -0.05, de)
    s, c = math.sin(beta), math.cos(beta)
    Fz = s * math.cos(0.12) * L1 + s * math.cos(-0.05) * L2 + c * math.sin(0.12) * D1 + c * math.sin(-0.05) * D2
    Fx = c * math.sin(0.12) * L1 + c * math.sin(-0.05) * L2 + s * math.cos(0.12) * D1 + s * math.cos(-0.05) * D2
    tau = P.l4 * (L1 * s + D1 * c) - P.l3 * (L2 * s + D2 * c)
    assert f.F_za == pytest.approx(Fz, rel=1e-12)
    assert f.F_xa == pytest.approx(Fx, rel=1e-12)
    assert f.tau_theta == pytest.approx(tau, rel=1e-12)


# -- tilt reaction --------------------------------------------------------

def test_tilt_reaction_zero_rate():
    assert aero.tilt_reaction_moment(0.0, P) == 0.0


def test_tilt_reaction_cancels_for_equal_speeds():
    assert aero.tilt_reaction_moment(0.14, AircraftParams(rotor_speeds=(100,) * 4)) == 0.0


def test_tilt_reaction_unequal_speeds():
    p = AircraftParams(J_r=0.02, rotor_speeds=(100, 80, 100, 80))
    assert aero.tilt_reaction_moment(0.14, p) == pytest.approx(0.112, rel=1e-12)


# -- parameters -----------------------------------------------------------

def test_geometry_constraint():
    with pytest.raises(ConfigValidationError, match="delta_x"):
        AircraftParams(l1=0.5, l2=0.6, delta_x=1.0)


def test_thrust_margin():
    with pytest.raises(ConfigValidationError, match="T_max"):
        AircraftParams(T_max=90.0)


def test_random_envelope_agrees_with_bisection():
    rng = random.Random(7)
    for _ in range(200):
        T = rng.uniform(1, 2 * P.T_max)
        Vz, Vx = rng.uniform(-10, 60), rng.uniform(-10, 60)
        v = aero.induced_velocity(T, Vz, Vx, P)
        assert v == pytest.approx(bisect_largest_root(T, Vz, Vx, P.rho, P.R), rel=1e-3)
