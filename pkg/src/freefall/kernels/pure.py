"""Pure numpy implementation of the simulation hot kernels.

This is the reference backend: the compiled extension in ``_native.pyx``
mirrors these functions and is checked against this module in the test
suite. Keep the two in sync.

All kernel inputs are plain float64 arrays (packed by ``biomech.BodyModel``)
so both backends share one calling convention:

    parent[15]   int32, parent segment index per joint (child segment = j+1)
    jpos[15,3]   joint position in the parent segment frame, metres
    jsign[15,3]  +/-1 per joint DOF axis (left-side joints are mirrored)
    dof[45]      joint angles, 3 per joint, canonical order
    mass[16], cogoff[16,3], inertia[16,3] (principal, segment frame)
    area[16], chord[16]  aero plate area and characteristic length

State vector layout (13): position(3), velocity(3) inertial; quaternion(4)
body->inertial scalar-first; angular rate(3) body frame.
"""

from __future__ import annotations

import numpy as np

N_SEG = 16
N_JNT = 15
GRAVITY = 9.80665


def _joint_matrix(f: float, a: float, r: float) -> np.ndarray:
    """Intrinsic Ry(flexion) @ Rx(abduction) @ Rz(rotation)."""
    cf, sf = np.cos(f), np.sin(f)
    ca, sa = np.cos(a), np.sin(a)
    cr, sr = np.cos(r), np.sin(r)
    return np.array(
        [
            [cf * cr + sf * sa * sr, -cf * sr + sf * sa * cr, sf * ca],
            [ca * sr, ca * cr, -sa],
            [-sf * cr + cf * sa * sr, sf * sr + cf * sa * cr, cf * ca],
        ]
    )


def fk(parent, jpos, jsign, dof):
    """Forward kinematics: per-segment rotation and origin in the body frame."""
    R = np.empty((N_SEG, 3, 3))
    p = np.zeros((N_SEG, 3))
    R[0] = np.eye(3)
    for j in range(N_JNT):
        par = parent[j]
        f = jsign[j, 0] * dof[3 * j]
        a = jsign[j, 1] * dof[3 * j + 1]
        r = jsign[j, 2] * dof[3 * j + 2]
        Rp = R[par]
        p[j + 1] = p[par] + Rp @ jpos[j]
        R[j + 1] = Rp @ _joint_matrix(f, a, r)
    return R, p


def fk_with_rates(parent, jpos, jsign, dof, dofrate):
    """FK plus per-segment angular velocity and origin velocity (body frame)."""
    R = np.empty((N_SEG, 3, 3))
    p = np.zeros((N_SEG, 3))
    w = np.zeros((N_SEG, 3))
    v = np.zeros((N_SEG, 3))
    R[0] = np.eye(3)
    for j in range(N_JNT):
        par = parent[j]
        f = jsign[j, 0] * dof[3 * j]
        a = jsign[j, 1] * dof[3 * j + 1]
        r = jsign[j, 2] * dof[3 * j + 2]
        fd = jsign[j, 0] * dofrate[3 * j]
        ad = jsign[j, 1] * dofrate[3 * j + 1]
        rd = jsign[j, 2] * dofrate[3 * j + 2]
        Rp = R[par]
        arm = Rp @ jpos[j]
        p[j + 1] = p[par] + arm
        v[j + 1] = v[par] + np.cross(w[par], arm)
        R[j + 1] = Rp @ _joint_matrix(f, a, r)
        # joint rate, intrinsic y-x-z: w = fd*y + Ry(f)(ad*x) + Ry(f)Rx(a)(rd*z)
        cf, sf = np.cos(f), np.sin(f)
        ca, sa = np.cos(a), np.sin(a)
        wj = np.array(
            [
                ad * cf + rd * sf * ca,
                fd - rd * sa,
                -ad * sf + rd * cf * ca,
            ]
        )
        w[j + 1] = w[par] + Rp @ wj
    return R, p, w, v


def _skew(v):
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def mass_properties(mass, cogoff, inertia, R, p, w, v):
    """Whole-body CoG, inertia about the CoG, their rates, and the per-segment
    CoG positions/velocities (all in the body frame).
    """
    total = mass.sum()
    rc = p + np.einsum("nij,nj->ni", R, cogoff)
    vc = v + np.cross(w, rc - p)
    cog = mass @ rc / total
    cog_rate = mass @ vc / total

    inert = np.zeros((3, 3))
    inert_rate = np.zeros((3, 3))
    eye = np.eye(3)
    for i in range(N_SEG):
        Ri = R[i]
        Ii = Ri @ np.diag(inertia[i]) @ Ri.T
        d = rc[i] - cog
        dd = vc[i] - cog_rate
        inert += Ii + mass[i] * ((d @ d) * eye - np.outer(d, d))
        wx = _skew(w[i])
        inert_rate += wx @ Ii - Ii @ wx
        inert_rate += mass[i] * (2.0 * (d @ dd) * eye - np.outer(dd, d) - np.outer(d, dd))
    return cog, cog_rate, inert, inert_rate, rc, vc


def aero_wrench(R, rc, area, chord, cog, relvel, v_body, omega, rho, coeffs, damp_scale, char_len):
    """Total aerodynamic force and moment about the CoG, body frame.

    Per-segment flat-plate law (plate normal = segment local +z):
        q    = 0.5 * rho * |u|^2        (u: segment velocity through the air)
        drag = -q * A * c_drag * |cos a| * u_hat
        lift = -q * A * c_lift * cos a * sin a * t_hat
        cp moment = q * A * c_m * chord * cos a * (n_hat x u_hat)
    plus per-axis rotational damping with reference speed |v| + L*|omega|.
    coeffs = [c_lift_max, c_drag_max, c_moment_max, c_roll_damp, c_pitch_damp,
    c_yaw_damp]; u_hat is the unit of u, t_hat the in-(u,n)-plane unit normal
    to u, cos a = u_hat . n_hat.
    """
    r = rc - cog
    u = v_body + np.cross(omega, r) + relvel
    speed2 = np.einsum("ni,ni->n", u, u)
    speed = np.sqrt(speed2)
    live = speed > 1e-9
    safe = np.where(live, speed, 1.0)
    uh = u / safe[:, None]
    qa = np.where(live, 0.5 * rho * speed2 * area, 0.0)
    normals = R[:, :, 2]
    cosa = np.einsum("ni,ni->n", uh, normals)
    tvec = normals - cosa[:, None] * uh
    # |tvec| = sin a, so -qa*c_lift*cos*tvec has magnitude qa*c_lift*cos*sin
    f = -(qa * coeffs[1] * np.abs(cosa))[:, None] * uh
    f -= (qa * coeffs[0] * cosa)[:, None] * tvec
    moment = np.cross(r, f).sum(axis=0)
    moment += ((qa * coeffs[2] * chord * cosa)[:, None] * np.cross(normals, uh)).sum(axis=0)
    vref = np.linalg.norm(v_body) + char_len * np.linalg.norm(omega)
    moment -= 0.5 * rho * vref * coeffs[3:6] * damp_scale * omega
    return f.sum(axis=0), moment


def _quat_matrix(q):
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def _derivative(state, R, rc, area, chord, cog, relvel, rho, coeffs, damp_scale,
                char_len, total_mass, I_inv, inert, inert_rate):
    q = state[6:10]
    qn = q / np.linalg.norm(q)
    Rq = _quat_matrix(qn)
    v = state[3:6]
    omega = state[10:13]
    v_body = Rq.T @ v
    F_b, M_b = aero_wrench(
        R, rc, area, chord, cog, relvel, v_body, omega, rho, coeffs, damp_scale, char_len
    )
    out = np.empty(13)
    out[0:3] = v
    acc = Rq @ F_b / total_mass
    acc[2] += GRAVITY
    out[3:6] = acc
    w_, x_, y_, z_ = qn
    ox, oy, oz = omega
    out[6] = 0.5 * (-x_ * ox - y_ * oy - z_ * oz)
    out[7] = 0.5 * (w_ * ox + y_ * oz - z_ * oy)
    out[8] = 0.5 * (w_ * oy - x_ * oz + z_ * ox)
    out[9] = 0.5 * (w_ * oz + x_ * oy - y_ * ox)
    gyro = M_b - np.cross(omega, inert @ omega) - inert_rate @ omega
    out[10:13] = I_inv @ gyro
    return out


def rk4_step(state, dt, R, rc, area, chord, cog, relvel, rho, coeffs, damp_scale,
             char_len, total_mass, inert, inert_rate):
    """One RK4 step of the 6-DOF state; body geometry held over the step."""
    I_inv = np.linalg.inv(inert)
    args = (R, rc, area, chord, cog, relvel, rho, coeffs, damp_scale, char_len,
            total_mass, I_inv, inert, inert_rate)
    k1 = _derivative(state, *args)
    k2 = _derivative(state + 0.5 * dt * k1, *args)
    k3 = _derivative(state + 0.5 * dt * k2, *args)
    k4 = _derivative(state + dt * k3, *args)
    out = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out[6:10] /= np.linalg.norm(out[6:10])
    return out
