"""Quaternion and rotation helpers.

Conventions used across the package:
    - quaternions are scalar-first ``(w, x, y, z)`` and map body -> inertial,
    - rotation matrices act on column vectors,
    - the inertial frame is z-down; the body frame is x forward (cranial),
      y right, z ventral, so the identity quaternion is a belly-to-earth
      skydiver with the head pointing along inertial +x.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def quat_normalize(q: Array) -> Array:
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    return q / n


def quat_multiply(a: Array, b: Array) -> Array:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: Array) -> Array:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_from_axis_angle(axis: Array, angle: float) -> Array:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = 0.5 * angle
    q = np.empty(4)
    q[0] = np.cos(half)
    q[1:] = np.sin(half) * axis
    return q


def quat_to_matrix(q: Array) -> Array:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(m: Array) -> Array:
    """Shepperd's method; returns the quaternion with non-negative scalar part."""
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(m)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(m[i, i] - m[j, j] - m[k, k] + 1.0) * 2
        q = np.empty(4)
        q[0] = (m[k, j] - m[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (m[j, i] + m[i, j]) / s
        q[1 + k] = (m[k, i] + m[i, k]) / s
    if q[0] < 0:
        q = -q
    return q


def rotate(q: Array, v: Array) -> Array:
    """Rotate vector v from body to inertial frame."""
    return quat_to_matrix(q) @ v


def rotate_inverse(q: Array, v: Array) -> Array:
    """Rotate vector v from inertial to body frame."""
    return quat_to_matrix(q).T @ v


def rx(a: float) -> Array:
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def ry(a: float) -> Array:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rz(a: float) -> Array:
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def wrap_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    return float(np.pi - np.mod(np.pi - a, 2.0 * np.pi))


def heading_of(vx: float, vy: float) -> float:
    """Horizontal heading of a vector, quadrant-aware, in (-pi, pi].

    Measured from inertial +x toward +y; with z down a positive yaw rate
    increases the heading (clockwise seen from above = right turn).
    """
    return float(np.arctan2(vy, vx))
