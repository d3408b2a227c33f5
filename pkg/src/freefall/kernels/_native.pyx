# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled implementation of the simulation hot kernels.

Mirrors kernels/pure.py operation for operation; the test suite checks the
two backends agree to tight tolerance. Keep in sync with pure.py.
"""

import numpy as np

cimport cython
from libc.math cimport cos, sin, sqrt, fabs

N_SEG = 16
N_JNT = 15
GRAVITY = 9.80665

cdef double _GRAV = 9.80665


cdef inline void _joint_matrix(double f, double a, double r, double* m) nogil:
    cdef double cf = cos(f), sf = sin(f)
    cdef double ca = cos(a), sa = sin(a)
    cdef double cr = cos(r), sr = sin(r)
    m[0] = cf * cr + sf * sa * sr
    m[1] = -cf * sr + sf * sa * cr
    m[2] = sf * ca
    m[3] = ca * sr
    m[4] = ca * cr
    m[5] = -sa
    m[6] = -sf * cr + cf * sa * sr
    m[7] = sf * sr + cf * sa * cr
    m[8] = cf * ca


cdef inline void _mat_mul(double* a, double* b, double* out) nogil:
    cdef int i, j, k
    for i in range(3):
        for j in range(3):
            out[3 * i + j] = (a[3 * i] * b[j] + a[3 * i + 1] * b[3 + j]
                              + a[3 * i + 2] * b[6 + j])


cdef inline void _mat_vec(double* m, double* v, double* out) nogil:
    out[0] = m[0] * v[0] + m[1] * v[1] + m[2] * v[2]
    out[1] = m[3] * v[0] + m[4] * v[1] + m[5] * v[2]
    out[2] = m[6] * v[0] + m[7] * v[1] + m[8] * v[2]


cdef inline void _cross(double* a, double* b, double* out) nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


def fk(parent, jpos, jsign, dof):
    cdef int[:] par = np.ascontiguousarray(parent, dtype=np.int32)
    cdef double[:, :] jp = np.ascontiguousarray(jpos)
    cdef double[:, :] js = np.ascontiguousarray(jsign)
    cdef double[:] d = np.ascontiguousarray(dof)
    R_out = np.empty((16, 3, 3))
    p_out = np.zeros((16, 3))
    cdef double[:, :, :] R = R_out
    cdef double[:, :] p = p_out
    cdef double jm[9]
    cdef double arm[3]
    cdef double jv[3]
    cdef int j, q, i
    for i in range(3):
        for q in range(3):
            R[0, i, q] = 1.0 if i == q else 0.0
    for j in range(15):
        q = par[j]
        _joint_matrix(js[j, 0] * d[3 * j], js[j, 1] * d[3 * j + 1],
                      js[j, 2] * d[3 * j + 2], jm)
        jv[0] = jp[j, 0]; jv[1] = jp[j, 1]; jv[2] = jp[j, 2]
        _mat_vec(&R[q, 0, 0], jv, arm)
        p[j + 1, 0] = p[q, 0] + arm[0]
        p[j + 1, 1] = p[q, 1] + arm[1]
        p[j + 1, 2] = p[q, 2] + arm[2]
        _mat_mul(&R[q, 0, 0], jm, &R[j + 1, 0, 0])
    return R_out, p_out


def fk_with_rates(parent, jpos, jsign, dof, dofrate):
    cdef int[:] par = np.ascontiguousarray(parent, dtype=np.int32)
    cdef double[:, :] jp = np.ascontiguousarray(jpos)
    cdef double[:, :] js = np.ascontiguousarray(jsign)
    cdef double[:] d = np.ascontiguousarray(dof)
    cdef double[:] dr = np.ascontiguousarray(dofrate)
    R_out = np.empty((16, 3, 3))
    p_out = np.zeros((16, 3))
    w_out = np.zeros((16, 3))
    v_out = np.zeros((16, 3))
    cdef double[:, :, :] R = R_out
    cdef double[:, :] p = p_out
    cdef double[:, :] w = w_out
    cdef double[:, :] v = v_out
    cdef double jm[9]
    cdef double arm[3]
    cdef double jv[3]
    cdef double wj[3]
    cdef double wrot[3]
    cdef double wcross[3]
    cdef double f, a, r, fd, ad, rd, cf, sf, ca, sa
    cdef int j, q, i
    for i in range(3):
        for q in range(3):
            R[0, i, q] = 1.0 if i == q else 0.0
    for j in range(15):
        q = par[j]
        f = js[j, 0] * d[3 * j]
        a = js[j, 1] * d[3 * j + 1]
        r = js[j, 2] * d[3 * j + 2]
        fd = js[j, 0] * dr[3 * j]
        ad = js[j, 1] * dr[3 * j + 1]
        rd = js[j, 2] * dr[3 * j + 2]
        _joint_matrix(f, a, r, jm)
        jv[0] = jp[j, 0]; jv[1] = jp[j, 1]; jv[2] = jp[j, 2]
        _mat_vec(&R[q, 0, 0], jv, arm)
        p[j + 1, 0] = p[q, 0] + arm[0]
        p[j + 1, 1] = p[q, 1] + arm[1]
        p[j + 1, 2] = p[q, 2] + arm[2]
        _cross(&w[q, 0], arm, wcross)
        v[j + 1, 0] = v[q, 0] + wcross[0]
        v[j + 1, 1] = v[q, 1] + wcross[1]
        v[j + 1, 2] = v[q, 2] + wcross[2]
        _mat_mul(&R[q, 0, 0], jm, &R[j + 1, 0, 0])
        cf = cos(f); sf = sin(f)
        ca = cos(a); sa = sin(a)
        wj[0] = ad * cf + rd * sf * ca
        wj[1] = fd - rd * sa
        wj[2] = -ad * sf + rd * cf * ca
        _mat_vec(&R[q, 0, 0], wj, wrot)
        w[j + 1, 0] = w[q, 0] + wrot[0]
        w[j + 1, 1] = w[q, 1] + wrot[1]
        w[j + 1, 2] = w[q, 2] + wrot[2]
    return R_out, p_out, w_out, v_out


def mass_properties(mass, cogoff, inertia, R, p, w, v):
    cdef double[:] m = np.ascontiguousarray(mass)
    cdef double[:, :] cg = np.ascontiguousarray(cogoff)
    cdef double[:, :] inr = np.ascontiguousarray(inertia)
    cdef double[:, :, :] Rm = np.ascontiguousarray(R)
    cdef double[:, :] pm = np.ascontiguousarray(p)
    cdef double[:, :] wm = np.ascontiguousarray(w)
    cdef double[:, :] vm = np.ascontiguousarray(v)

    cog_out = np.zeros(3)
    cogr_out = np.zeros(3)
    I_out = np.zeros((3, 3))
    Ir_out = np.zeros((3, 3))
    rc_out = np.empty((16, 3))
    vc_out = np.empty((16, 3))
    cdef double[:] cog = cog_out
    cdef double[:] cogr = cogr_out
    cdef double[:, :] inert = I_out
    cdef double[:, :] inrate = Ir_out
    cdef double[:, :] rc = rc_out
    cdef double[:, :] vc = vc_out

    cdef double total = 0.0
    cdef double off[3]
    cdef double rot[3]
    cdef double rel[3]
    cdef double wc[3]
    cdef double Ii[9]
    cdef double tmp[9]
    cdef double Rt[9]
    cdef double wx[9]
    cdef double d0, d1, d2, e0, e1, e2, dd
    cdef int i, a_, b_

    for i in range(16):
        total += m[i]
        off[0] = cg[i, 0]; off[1] = cg[i, 1]; off[2] = cg[i, 2]
        _mat_vec(&Rm[i, 0, 0], off, rot)
        rc[i, 0] = pm[i, 0] + rot[0]
        rc[i, 1] = pm[i, 1] + rot[1]
        rc[i, 2] = pm[i, 2] + rot[2]
        _cross(&wm[i, 0], rot, wc)
        vc[i, 0] = vm[i, 0] + wc[0]
        vc[i, 1] = vm[i, 1] + wc[1]
        vc[i, 2] = vm[i, 2] + wc[2]
        cog[0] += m[i] * rc[i, 0]
        cog[1] += m[i] * rc[i, 1]
        cog[2] += m[i] * rc[i, 2]
        cogr[0] += m[i] * vc[i, 0]
        cogr[1] += m[i] * vc[i, 1]
        cogr[2] += m[i] * vc[i, 2]
    for a_ in range(3):
        cog[a_] /= total
        cogr[a_] /= total

    for i in range(16):
        # Ii = R diag(inertia) R^T
        for a_ in range(3):
            for b_ in range(3):
                Rt[3 * a_ + b_] = Rm[i, a_, b_] * inr[i, b_]
        for a_ in range(3):
            for b_ in range(3):
                Ii[3 * a_ + b_] = (Rt[3 * a_] * Rm[i, b_, 0]
                                   + Rt[3 * a_ + 1] * Rm[i, b_, 1]
                                   + Rt[3 * a_ + 2] * Rm[i, b_, 2])
        d0 = rc[i, 0] - cog[0]; d1 = rc[i, 1] - cog[1]; d2 = rc[i, 2] - cog[2]
        e0 = vc[i, 0] - cogr[0]; e1 = vc[i, 1] - cogr[1]; e2 = vc[i, 2] - cogr[2]
        dd = d0 * d0 + d1 * d1 + d2 * d2
        inert[0, 0] += Ii[0] + m[i] * (dd - d0 * d0)
        inert[0, 1] += Ii[1] - m[i] * d0 * d1
        inert[0, 2] += Ii[2] - m[i] * d0 * d2
        inert[1, 0] += Ii[3] - m[i] * d1 * d0
        inert[1, 1] += Ii[4] + m[i] * (dd - d1 * d1)
        inert[1, 2] += Ii[5] - m[i] * d1 * d2
        inert[2, 0] += Ii[6] - m[i] * d2 * d0
        inert[2, 1] += Ii[7] - m[i] * d2 * d1
        inert[2, 2] += Ii[8] + m[i] * (dd - d2 * d2)
        # wx @ Ii - Ii @ wx
        wx[0] = 0.0; wx[1] = -wm[i, 2]; wx[2] = wm[i, 1]
        wx[3] = wm[i, 2]; wx[4] = 0.0; wx[5] = -wm[i, 0]
        wx[6] = -wm[i, 1]; wx[7] = wm[i, 0]; wx[8] = 0.0
        _mat_mul(wx, Ii, tmp)
        _mat_mul(Ii, wx, Rt)
        for a_ in range(3):
            for b_ in range(3):
                inrate[a_, b_] += tmp[3 * a_ + b_] - Rt[3 * a_ + b_]
        dd = 2.0 * (d0 * e0 + d1 * e1 + d2 * e2)
        inrate[0, 0] += m[i] * (dd - e0 * d0 - d0 * e0)
        inrate[0, 1] += m[i] * (-e0 * d1 - d0 * e1)
        inrate[0, 2] += m[i] * (-e0 * d2 - d0 * e2)
        inrate[1, 0] += m[i] * (-e1 * d0 - d1 * e0)
        inrate[1, 1] += m[i] * (dd - e1 * d1 - d1 * e1)
        inrate[1, 2] += m[i] * (-e1 * d2 - d1 * e2)
        inrate[2, 0] += m[i] * (-e2 * d0 - d2 * e0)
        inrate[2, 1] += m[i] * (-e2 * d1 - d2 * e1)
        inrate[2, 2] += m[i] * (dd - e2 * d2 - d2 * e2)
    return cog_out, cogr_out, I_out, Ir_out, rc_out, vc_out


cdef void _aero(double[:, :, :] R, double[:, :] rc, double[:] area, double[:] chord,
                double* cog, double[:, :] relvel, double* v_body, double* omega,
                double rho, double[:] coeffs, double[:] damp, double char_len,
                double* F_out, double* M_out) nogil:
    cdef double r[3]
    cdef double u[3]
    cdef double wc[3]
    cdef double n[3]
    cdef double uh[3]
    cdef double tv[3]
    cdef double fi[3]
    cdef double mcross[3]
    cdef double speed2, speed, qa, cosa, vref, wnorm, coef
    cdef int i, a_
    F_out[0] = 0.0; F_out[1] = 0.0; F_out[2] = 0.0
    M_out[0] = 0.0; M_out[1] = 0.0; M_out[2] = 0.0
    for i in range(16):
        r[0] = rc[i, 0] - cog[0]
        r[1] = rc[i, 1] - cog[1]
        r[2] = rc[i, 2] - cog[2]
        _cross(omega, r, wc)
        u[0] = v_body[0] + wc[0] + relvel[i, 0]
        u[1] = v_body[1] + wc[1] + relvel[i, 1]
        u[2] = v_body[2] + wc[2] + relvel[i, 2]
        speed2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2]
        speed = sqrt(speed2)
        if speed <= 1e-9:
            continue
        uh[0] = u[0] / speed; uh[1] = u[1] / speed; uh[2] = u[2] / speed
        qa = 0.5 * rho * speed2 * area[i]
        n[0] = R[i, 0, 2]; n[1] = R[i, 1, 2]; n[2] = R[i, 2, 2]
        cosa = uh[0] * n[0] + uh[1] * n[1] + uh[2] * n[2]
        tv[0] = n[0] - cosa * uh[0]
        tv[1] = n[1] - cosa * uh[1]
        tv[2] = n[2] - cosa * uh[2]
        coef = qa * coeffs[1] * fabs(cosa)
        fi[0] = -coef * uh[0]
        fi[1] = -coef * uh[1]
        fi[2] = -coef * uh[2]
        coef = qa * coeffs[0] * cosa
        fi[0] -= coef * tv[0]
        fi[1] -= coef * tv[1]
        fi[2] -= coef * tv[2]
        F_out[0] += fi[0]; F_out[1] += fi[1]; F_out[2] += fi[2]
        _cross(r, fi, mcross)
        M_out[0] += mcross[0]; M_out[1] += mcross[1]; M_out[2] += mcross[2]
        coef = qa * coeffs[2] * chord[i] * cosa
        _cross(n, uh, mcross)
        M_out[0] += coef * mcross[0]
        M_out[1] += coef * mcross[1]
        M_out[2] += coef * mcross[2]
    vref = sqrt(v_body[0] * v_body[0] + v_body[1] * v_body[1] + v_body[2] * v_body[2])
    wnorm = sqrt(omega[0] * omega[0] + omega[1] * omega[1] + omega[2] * omega[2])
    vref += char_len * wnorm
    for a_ in range(3):
        M_out[a_] -= 0.5 * rho * vref * coeffs[3 + a_] * damp[a_] * omega[a_]


def aero_wrench(R, rc, area, chord, cog, relvel, v_body, omega, rho, coeffs,
                damp_scale, char_len):
    cdef double[:, :, :] Rm = np.ascontiguousarray(R)
    cdef double[:, :] rcm = np.ascontiguousarray(rc)
    cdef double[:] am = np.ascontiguousarray(area)
    cdef double[:] cm = np.ascontiguousarray(chord)
    cdef double[:] cogm = np.ascontiguousarray(cog)
    cdef double[:, :] rv = np.ascontiguousarray(relvel)
    cdef double[:] vb = np.ascontiguousarray(v_body)
    cdef double[:] om = np.ascontiguousarray(omega)
    cdef double[:] cf = np.ascontiguousarray(coeffs)
    cdef double[:] dp = np.ascontiguousarray(damp_scale)
    F_out = np.zeros(3)
    M_out = np.zeros(3)
    cdef double[:] F = F_out
    cdef double[:] M = M_out
    _aero(Rm, rcm, am, cm, &cogm[0], rv, &vb[0], &om[0], rho, cf, dp,
          char_len, &F[0], &M[0])
    return F_out, M_out


cdef inline void _quat_matrix(double* q, double* m) nogil:
    cdef double w = q[0], x = q[1], y = q[2], z = q[3]
    m[0] = 1 - 2 * (y * y + z * z); m[1] = 2 * (x * y - w * z); m[2] = 2 * (x * z + w * y)
    m[3] = 2 * (x * y + w * z); m[4] = 1 - 2 * (x * x + z * z); m[5] = 2 * (y * z - w * x)
    m[6] = 2 * (x * z - w * y); m[7] = 2 * (y * z + w * x); m[8] = 1 - 2 * (x * x + y * y)


cdef void _derivative(double* state, double[:, :, :] R, double[:, :] rc,
                      double[:] area, double[:] chord, double* cog,
                      double[:, :] relvel, double rho, double[:] coeffs,
                      double[:] damp, double char_len, double total_mass,
                      double* I_inv, double[:, :] inert, double[:, :] inrate,
                      double* out) nogil:
    cdef double q[4]
    cdef double qm[9]
    cdef double vb[3]
    cdef double F[3]
    cdef double M[3]
    cdef double Iw[3]
    cdef double wIw[3]
    cdef double gyro[3]
    cdef double qn
    cdef double w_, x_, y_, z_, ox, oy, oz
    cdef int i
    qn = sqrt(state[6] * state[6] + state[7] * state[7] + state[8] * state[8]
              + state[9] * state[9])
    for i in range(4):
        q[i] = state[6 + i] / qn
    _quat_matrix(q, qm)
    # v_body = R^T v
    vb[0] = qm[0] * state[3] + qm[3] * state[4] + qm[6] * state[5]
    vb[1] = qm[1] * state[3] + qm[4] * state[4] + qm[7] * state[5]
    vb[2] = qm[2] * state[3] + qm[5] * state[4] + qm[8] * state[5]
    _aero(R, rc, area, chord, cog, relvel, vb, &state[10], rho, coeffs, damp,
          char_len, F, M)
    out[0] = state[3]; out[1] = state[4]; out[2] = state[5]
    out[3] = (qm[0] * F[0] + qm[1] * F[1] + qm[2] * F[2]) / total_mass
    out[4] = (qm[3] * F[0] + qm[4] * F[1] + qm[5] * F[2]) / total_mass
    out[5] = (qm[6] * F[0] + qm[7] * F[1] + qm[8] * F[2]) / total_mass + _GRAV
    w_ = q[0]; x_ = q[1]; y_ = q[2]; z_ = q[3]
    ox = state[10]; oy = state[11]; oz = state[12]
    out[6] = 0.5 * (-x_ * ox - y_ * oy - z_ * oz)
    out[7] = 0.5 * (w_ * ox + y_ * oz - z_ * oy)
    out[8] = 0.5 * (w_ * oy - x_ * oz + z_ * ox)
    out[9] = 0.5 * (w_ * oz + x_ * oy - y_ * ox)
    Iw[0] = inert[0, 0] * ox + inert[0, 1] * oy + inert[0, 2] * oz
    Iw[1] = inert[1, 0] * ox + inert[1, 1] * oy + inert[1, 2] * oz
    Iw[2] = inert[2, 0] * ox + inert[2, 1] * oy + inert[2, 2] * oz
    wIw[0] = oy * Iw[2] - oz * Iw[1]
    wIw[1] = oz * Iw[0] - ox * Iw[2]
    wIw[2] = ox * Iw[1] - oy * Iw[0]
    gyro[0] = M[0] - wIw[0] - (inrate[0, 0] * ox + inrate[0, 1] * oy + inrate[0, 2] * oz)
    gyro[1] = M[1] - wIw[1] - (inrate[1, 0] * ox + inrate[1, 1] * oy + inrate[1, 2] * oz)
    gyro[2] = M[2] - wIw[2] - (inrate[2, 0] * ox + inrate[2, 1] * oy + inrate[2, 2] * oz)
    out[10] = I_inv[0] * gyro[0] + I_inv[1] * gyro[1] + I_inv[2] * gyro[2]
    out[11] = I_inv[3] * gyro[0] + I_inv[4] * gyro[1] + I_inv[5] * gyro[2]
    out[12] = I_inv[6] * gyro[0] + I_inv[7] * gyro[1] + I_inv[8] * gyro[2]


def rk4_step(state, dt, R, rc, area, chord, cog, relvel, rho, coeffs, damp_scale,
             char_len, total_mass, inert, inert_rate):
    cdef double[:] s = np.ascontiguousarray(state)
    cdef double[:, :, :] Rm = np.ascontiguousarray(R)
    cdef double[:, :] rcm = np.ascontiguousarray(rc)
    cdef double[:] am = np.ascontiguousarray(area)
    cdef double[:] cm = np.ascontiguousarray(chord)
    cdef double[:] cogm = np.ascontiguousarray(cog)
    cdef double[:, :] rv = np.ascontiguousarray(relvel)
    cdef double[:] cf = np.ascontiguousarray(coeffs)
    cdef double[:] dp = np.ascontiguousarray(damp_scale)
    cdef double[:, :] im = np.ascontiguousarray(inert)
    cdef double[:, :] irm = np.ascontiguousarray(inert_rate)
    cdef double h = dt
    cdef double rho_ = rho
    cdef double cl = char_len
    cdef double tm = total_mass

    I_inv_arr = np.linalg.inv(np.asarray(inert))
    cdef double[:, :] Iiv = np.ascontiguousarray(I_inv_arr)
    cdef double I_inv[9]
    cdef int i, j
    for i in range(3):
        for j in range(3):
            I_inv[3 * i + j] = Iiv[i, j]

    out_arr = np.empty(13)
    cdef double[:] out = out_arr
    cdef double k1[13]
    cdef double k2[13]
    cdef double k3[13]
    cdef double k4[13]
    cdef double tmp[13]
    cdef double st[13]
    cdef double qn
    for i in range(13):
        st[i] = s[i]
    _derivative(st, Rm, rcm, am, cm, &cogm[0], rv, rho_, cf, dp, cl, tm,
                I_inv, im, irm, k1)
    for i in range(13):
        tmp[i] = st[i] + 0.5 * h * k1[i]
    _derivative(tmp, Rm, rcm, am, cm, &cogm[0], rv, rho_, cf, dp, cl, tm,
                I_inv, im, irm, k2)
    for i in range(13):
        tmp[i] = st[i] + 0.5 * h * k2[i]
    _derivative(tmp, Rm, rcm, am, cm, &cogm[0], rv, rho_, cf, dp, cl, tm,
                I_inv, im, irm, k3)
    for i in range(13):
        tmp[i] = st[i] + h * k3[i]
    _derivative(tmp, Rm, rcm, am, cm, &cogm[0], rv, rho_, cf, dp, cl, tm,
                I_inv, im, irm, k4)
    for i in range(13):
        out[i] = st[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    qn = sqrt(out[6] * out[6] + out[7] * out[7] + out[8] * out[8] + out[9] * out[9])
    for i in range(4):
        out[6 + i] /= qn
    return out_arr
