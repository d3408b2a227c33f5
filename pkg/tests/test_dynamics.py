import numpy as np
import pytest

from freefall import dynamics as dyn
from freefall import kernels
from freefall.dynamics import (AeroCoefficients, DivergenceError, SkyState,
                               aero_wrench, calibrate, flow_angles,
                               forward_speed, predict_velocities, settle, step,
                               yaw_rate)

VACUUM = AeroCoefficients(0, 0, 0, 0, 0, 0)
DT = 1.0 / 240.0


def test_vacuum_free_fall_matches_gt(default_body, config):
    posture = config.neutral_posture()
    state = SkyState.initial()
    rate = np.zeros(45)
    n = 480
    for _ in range(n):
        state = step(default_body, posture, rate, state, VACUUM, DT)
    t = n * DT
    assert state.velocity[2] == pytest.approx(dyn.GRAVITY * t, rel=1e-9)
    assert abs(state.velocity[0]) < 1e-12 and abs(state.velocity[1]) < 1e-12


def test_vacuum_angular_momentum_conserved_static_posture(default_body, config, rng):
    posture = config.neutral_posture()
    from freefall.biomech import mass_state
    ms = mass_state(default_body, posture)
    omega0 = rng.normal(scale=0.8, size=3)
    state = SkyState.initial(angular_rate=omega0)
    L0 = ms.inertia @ omega0
    rate = np.zeros(45)
    for _ in range(480):
        state = step(default_body, posture, rate, state, VACUUM, DT)
    from freefall.rotations import quat_to_matrix
    L1 = quat_to_matrix(state.quaternion) @ (ms.inertia @ state.angular_rate)
    L0_inertial = np.eye(3) @ L0
    np.testing.assert_allclose(L1, L0_inertial, rtol=1e-5)


def test_quadratic_drag_scaling(default_body, config, aero, rng):
    posture = rng.normal(scale=0.3, size=45)
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    v = rng.normal(scale=10.0, size=3)
    s1 = SkyState.initial(velocity=v, quaternion=q)
    s2 = SkyState.initial(velocity=2.0 * v, quaternion=q)
    w1 = aero_wrench(default_body, posture, s1, aero)
    w2 = aero_wrench(default_body, posture, s2, aero)
    np.testing.assert_allclose(w2.force, 4.0 * w1.force, rtol=1e-9)
    np.testing.assert_allclose(w2.moment, 4.0 * w1.moment, rtol=1e-9)


def test_zero_airspeed_zero_wrench(default_body, config, aero):
    w = aero_wrench(default_body, config.neutral_posture(),
                    SkyState.initial(), aero)
    np.testing.assert_array_equal(w.force, np.zeros(3))
    np.testing.assert_array_equal(w.moment, np.zeros(3))


def test_single_flat_plate_face_on(default_body):
    # hand evaluation of the shipped per-segment law on one isolated plate
    rho, speed = 1.0, 50.0
    area = np.zeros(16)
    area[2] = 0.3
    R = np.tile(np.eye(3), (16, 1, 1))
    rc = np.zeros((16, 3))
    coeffs = np.array([0.7, 1.1, 0.0, 0.0, 0.0, 0.0])
    force, moment = kernels.aero_wrench(
        R, rc, area, np.zeros(16), np.zeros(3), np.zeros((16, 3)),
        np.array([0.0, 0.0, speed]), np.zeros(3), rho, coeffs,
        np.zeros(3), 1.0)
    expected = 0.5 * rho * coeffs[1] * area[2] * speed ** 2
    assert force[2] == pytest.approx(-expected, rel=1e-12)
    assert abs(force[0]) < 1e-12 and abs(force[1]) < 1e-12


def test_flow_angles_aligned_and_normal(default_body, config):
    posture = np.zeros(45)
    # motion along +x: every reference segment axis is x or y, normal z
    state = SkyState.initial(velocity=(30.0, 0.0, 0.0))
    ang = flow_angles(default_body, posture, state)
    thorax = 2
    assert ang["alpha"][thorax] == pytest.approx(0.0, abs=1e-12)
    assert ang["beta"][thorax] == pytest.approx(0.0, abs=1e-12)
    # motion along +z hits the plates face on
    state = SkyState.initial(velocity=(0.0, 0.0, 30.0))
    ang = flow_angles(default_body, posture, state)
    assert ang["alpha"][thorax] == pytest.approx(np.pi / 2, abs=1e-12)


def test_flow_angles_geometric_oracle(default_body, rng):
    posture = rng.normal(scale=0.3, size=45)
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    state = SkyState.initial(velocity=rng.normal(scale=15, size=3),
                             quaternion=q, angular_rate=rng.normal(scale=0.5, size=3))
    ang = flow_angles(default_body, posture, state)

    from freefall.rotations import quat_to_matrix
    R, p = kernels.fk(default_body.parent, default_body.jpos, default_body.jsign, posture)
    rc = p + np.einsum("nij,nj->ni", R, default_body.cogoff)
    ms = kernels.mass_properties(default_body.mass, default_body.cogoff,
                                 default_body.inertia, R, p,
                                 np.zeros((16, 3)), np.zeros((16, 3)))
    v_body = quat_to_matrix(state.quaternion).T @ state.velocity
    for i in range(16):
        u = v_body + np.cross(state.angular_rate, rc[i] - ms[0])
        c = R[i].T @ (u / np.linalg.norm(u))
        axis = np.array([1.0, 0, 0]) if default_body.axis_index[i] == 0 else np.array([0, 1.0, 0])
        normal = np.array([0, 0, 1.0])
        binormal = np.cross(normal, axis)
        # independent dot/cross oracle
        alpha = np.arctan2(c @ normal, c @ axis)
        beta = np.arcsin(np.clip(c @ binormal, -1, 1))
        assert ang["alpha"][i] == pytest.approx(alpha, abs=1e-12)
        assert ang["beta"][i] == pytest.approx(beta, abs=1e-12)
        assert -np.pi <= ang["alpha"][i] <= np.pi
        assert -np.pi <= ang["roll_rel"][i] <= np.pi


def test_damping_opposes_pure_spin(default_body, config, aero):
    posture = config.neutral_posture()
    for axis in range(3):
        omega = np.zeros(3)
        omega[axis] = 1.2
        state = SkyState.initial(angular_rate=omega)
        w = aero_wrench(default_body, posture, state, aero)
        assert w.moment[axis] * omega[axis] < 0.0


def test_step_halving_rk4_order(default_body, config, aero):
    posture = config.neutral_posture()
    rate = np.zeros(45)
    s0 = SkyState.initial(velocity=(3.0, -1.0, 45.0), angular_rate=(0.2, -0.1, 0.3))

    def propagate(dt, duration):
        s = s0
        for _ in range(int(round(duration / dt))):
            s = step(default_body, posture, rate, s, aero, dt)
        return s.to_vector()

    duration = 0.4
    dts = [1 / 60, 1 / 120, 1 / 240, 1 / 480]
    ref = propagate(1 / 3840, duration)
    errors = [np.linalg.norm(propagate(dt, duration) - ref) for dt in dts]
    slopes = [np.log(errors[i] / errors[i + 1]) / np.log(2.0) for i in range(len(dts) - 1)]
    assert min(slopes) >= 3.5


def test_step_halving_agreement(default_body, config, aero):
    posture = config.neutral_posture()
    rate = np.zeros(45)
    s0 = SkyState.initial(velocity=(0.0, 0.0, 55.0))
    one = step(default_body, posture, rate, s0, aero, DT)
    half = step(default_body, posture, rate, s0, aero, DT / 2)
    half = step(default_body, posture, rate, half, aero, DT / 2)
    assert np.linalg.norm(one.to_vector() - half.to_vector()) < 1e-9


def test_terminal_speed_and_force_balance(default_body, config, aero):
    posture = config.neutral_posture()
    state, vterm = settle(default_body, posture, aero, duration=30.0)
    assert vterm == pytest.approx(dyn.TERMINAL_SPEED_TARGET, rel=0.15)
    w = aero_wrench(default_body, posture, state, aero)
    from freefall.rotations import quat_to_matrix
    net = quat_to_matrix(state.quaternion) @ w.force
    net[2] += default_body.total_mass * dyn.GRAVITY
    assert np.linalg.norm(net) < 1.0


def test_calibrate_converges(default_body, config, aero):
    detuned = aero.scaled_drag(1.5)
    calibrated, info = calibrate(default_body, config.neutral_posture(), detuned,
                                 target_speed=61.0)
    assert abs(info["terminal_speed"] - 61.0) / 61.0 < 0.005
    assert calibrated.c_drag_max != detuned.c_drag_max


def test_step_validation(default_body, config, aero):
    posture = config.neutral_posture()
    state = SkyState.initial()
    with pytest.raises(ValueError):
        step(default_body, posture, np.zeros(45), state, aero, 0.0)
    with pytest.raises(ValueError):
        step(default_body, posture, np.zeros(45), state, aero, 0.06)
    bad = SkyState.initial(velocity=(np.nan, 0, 0))
    with pytest.raises(ValueError):
        step(default_body, posture, np.zeros(45), bad, aero, DT)
    fast = SkyState.initial(velocity=(0, 0, 199.99))
    with pytest.raises(DivergenceError):
        step(default_body, posture, np.zeros(45), fast, VACUUM, DT)


def test_quaternion_stays_normalized(default_body, config, aero, rng):
    posture = config.neutral_posture()
    state = SkyState.initial(velocity=(0, 0, 50), angular_rate=rng.normal(scale=1, size=3))
    for _ in range(240):
        state = step(default_body, posture, np.zeros(45), state, aero, DT)
        assert abs(np.linalg.norm(state.quaternion) - 1.0) < 1e-9


def test_predict_velocities(default_body, config, aero):
    posture = config.neutral_posture()
    state, _ = settle(default_body, posture, aero, duration=12.0)
    # steady fall: prediction matches current values
    om0, v0 = yaw_rate(state), forward_speed(state)
    om, v = predict_velocities(default_body, posture, state, aero, 0.5)
    assert om == pytest.approx(om0, abs=2e-3)
    assert v == pytest.approx(v0, abs=0.05)
    with pytest.raises(ValueError):
        predict_velocities(default_body, posture, state, aero, 2.5)
    with pytest.raises(ValueError):
        predict_velocities(default_body, posture, state, aero, -0.1)
    # t_delay = 0 is exactly the current measurement
    om, v = predict_velocities(default_body, posture, state, aero, 0.0)
    assert om == yaw_rate(state) and v == forward_speed(state)


def test_step_deterministic(default_body, config, aero):
    posture = config.neutral_posture()
    state = SkyState.initial(velocity=(1.0, 2.0, 50.0), angular_rate=(0.1, 0.2, 0.3))
    a = step(default_body, posture, np.zeros(45), state, aero, DT)
    b = step(default_body, posture, np.zeros(45), state, aero, DT)
    assert np.array_equal(a.to_vector(), b.to_vector())
