"""Per-segment aerodynamics and 6-DOF Newton-Euler equations of motion.

The equations are integrated with fixed-step RK4 at the simulator's 240 Hz
input rate. Within one step the posture (hence body geometry, mass state and
limb relative velocities) is held constant; the aerodynamic wrench is
re-evaluated at every RK4 stage.

The per-segment force law is the flat-plate normal-force decomposition
documented in ``kernels.pure.aero_wrench``. The six aerodynamic coefficients
are the tuning knobs; ``calibrate`` scales c_drag_max so the neutral-posture
terminal speed hits a target (default 61 m/s, about 220 km/h).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .biomech import N_DOF, BodyModel
from .rotations import quat_to_matrix

Array = np.ndarray

GRAVITY = kernels.GRAVITY
DEFAULT_RATE_HZ = 240
DEFAULT_AIR_DENSITY = 1.0
DIVERGENCE_SPEED = 200.0
TERMINAL_SPEED_TARGET = 61.0


class DivergenceError(RuntimeError):
    """Integration produced speeds outside the physically sane envelope."""


@dataclass(frozen=True)
class AeroCoefficients:
    c_lift_max: float
    c_drag_max: float
    c_moment_max: float
    c_roll_damp: float
    c_pitch_damp: float
    c_yaw_damp: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0.0 or not np.isfinite(value):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, float(value))

    def as_array(self) -> Array:
        return np.array(
            [self.c_lift_max, self.c_drag_max, self.c_moment_max,
             self.c_roll_damp, self.c_pitch_damp, self.c_yaw_damp],
            dtype=float,
        )

    def scaled_drag(self, factor: float) -> "AeroCoefficients":
        return replace(self, c_drag_max=self.c_drag_max * factor)


@dataclass(frozen=True)
class Wrench:
    force: Array      # N, body frame
    moment: Array     # N m, body frame, about the CoG


@dataclass(frozen=True)
class SkyState:
    """Inertial position/velocity (z down), body->inertial quaternion,
    body-frame angular rate, and time."""

    position: Array
    velocity: Array
    quaternion: Array
    angular_rate: Array
    time: float = 0.0

    @staticmethod
    def initial(position=(0.0, 0.0, 0.0), velocity=(0.0, 0.0, 0.0),
                quaternion=(1.0, 0.0, 0.0, 0.0), angular_rate=(0.0, 0.0, 0.0),
                time=0.0) -> "SkyState":
        q = np.asarray(quaternion, dtype=float)
        return SkyState(
            position=np.asarray(position, dtype=float),
            velocity=np.asarray(velocity, dtype=float),
            quaternion=q / np.linalg.norm(q),
            angular_rate=np.asarray(angular_rate, dtype=float),
            time=float(time),
        )

    def to_vector(self) -> Array:
        return np.concatenate([self.position, self.velocity, self.quaternion, self.angular_rate])

    @staticmethod
    def from_vector(vec: Array, time: float) -> "SkyState":
        return SkyState(
            position=vec[0:3].copy(),
            velocity=vec[3:6].copy(),
            quaternion=vec[6:10].copy(),
            angular_rate=vec[10:13].copy(),
            time=float(time),
        )

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.position))
            and np.all(np.isfinite(self.velocity))
            and np.all(np.isfinite(self.quaternion))
            and np.all(np.isfinite(self.angular_rate))
        )


def yaw_rate(state: SkyState) -> float:
    """Angular rate about the inertial down axis (positive = right turn)."""
    w_inertial = quat_to_matrix(state.quaternion) @ state.angular_rate
    return float(w_inertial[2])


def forward_speed(state: SkyState) -> float:
    """Horizontal speed projected on the body heading (negative = backslide)."""
    fwd = quat_to_matrix(state.quaternion)[:, 0]
    norm = np.hypot(fwd[0], fwd[1])
    if norm < 1e-9:
        return float(np.hypot(state.velocity[0], state.velocity[1]))
    return float((state.velocity[0] * fwd[0] + state.velocity[1] * fwd[1]) / norm)


def horizontal_speed(state: SkyState) -> float:
    return float(np.hypot(state.velocity[0], state.velocity[1]))


def flow_angles(body: BodyModel, posture: Array, state: SkyState) -> dict:
    """Per-segment attack/sideslip/roll angles of motion through the air.

    The segment's velocity through the air, unit vector c in the segment
    frame, is resolved against the long axis a, binormal b = n x a and plate
    normal n: alpha = atan2(c.n, c.a), beta = asin(c.b), roll = atan2(c.b, c.n).
    Segments slower than 1e-6 m/s get defined-zero angles.
    """
    R, p = kernels.fk(body.parent, body.jpos, body.jsign, np.asarray(posture, dtype=float))
    rc = p + np.einsum("nij,nj->ni", R, body.cogoff)
    ms = kernels.mass_properties(body.mass, body.cogoff, body.inertia, R, p,
                                 np.zeros((16, 3)), np.zeros((16, 3)))
    cog = ms[0]
    v_body = quat_to_matrix(state.quaternion).T @ state.velocity
    u = v_body + np.cross(state.angular_rate, rc - cog)
    alpha = np.zeros(16)
    beta = np.zeros(16)
    roll = np.zeros(16)
    for i in range(16):
        speed = np.linalg.norm(u[i])
        if speed < 1e-6:
            continue
        c = R[i].T @ (u[i] / speed)
        if body.axis_index[i] == 0:
            ca, cb, cn = c[0], c[1], c[2]      # axis x, b = z cross x = y
        else:
            ca, cb, cn = c[1], -c[0], c[2]     # axis y, b = z cross y = -x
        alpha[i] = np.arctan2(cn, ca)
        beta[i] = np.arcsin(np.clip(cb, -1.0, 1.0))
        roll[i] = np.arctan2(cb, cn)
    return {"alpha": alpha, "beta": beta, "roll_rel": roll}


def aero_wrench(body: BodyModel, posture: Array, state: SkyState,
                coeffs: AeroCoefficients, air_density: float = DEFAULT_AIR_DENSITY) -> Wrench:
    """Total aerodynamic wrench about the CoG for a static posture."""
    posture = np.asarray(posture, dtype=float)
    R, p = kernels.fk(body.parent, body.jpos, body.jsign, posture)
    rc = p + np.einsum("nij,nj->ni", R, body.cogoff)
    ms = kernels.mass_properties(body.mass, body.cogoff, body.inertia, R, p,
                                 np.zeros((16, 3)), np.zeros((16, 3)))
    cog = ms[0]
    v_body = quat_to_matrix(state.quaternion).T @ state.velocity
    force, moment = kernels.aero_wrench(
        R, rc, body.area, body.chord, cog, np.zeros((16, 3)), v_body,
        state.angular_rate, air_density, coeffs.as_array(), body.damp_scale, body.char_len,
    )
    return Wrench(force=force, moment=moment)


def step(body: BodyModel, posture: Array, posture_rate: Array, state: SkyState,
         coeffs: AeroCoefficients, dt: float,
         air_density: float = DEFAULT_AIR_DENSITY) -> SkyState:
    """Advance the 6-DOF state one RK4 step under the given posture."""
    if not (0.0 < dt <= 0.05):
        raise ValueError(f"dt must be in (0, 0.05], got {dt}")
    if not state.is_finite():
        raise ValueError("non-finite state")
    posture = np.asarray(posture, dtype=float)
    rate = np.zeros(N_DOF) if posture_rate is None else np.asarray(posture_rate, dtype=float)

    R, p, w, v = kernels.fk_with_rates(body.parent, body.jpos, body.jsign, posture, rate)
    cog, cog_rate, inert, inert_rate, rc, vc = kernels.mass_properties(
        body.mass, body.cogoff, body.inertia, R, p, w, v
    )
    relvel = vc - cog_rate
    out = kernels.rk4_step(
        state.to_vector(), dt, R, rc, body.area, body.chord, cog, relvel,
        air_density, coeffs.as_array(), body.damp_scale, body.char_len,
        body.total_mass, inert, inert_rate,
    )
    if not np.all(np.isfinite(out)):
        raise DivergenceError("integration produced non-finite state")
    speed = float(np.linalg.norm(out[3:6]))
    if speed > DIVERGENCE_SPEED:
        raise DivergenceError(f"speed {speed:.1f} m/s exceeds {DIVERGENCE_SPEED} m/s guard")
    return SkyState.from_vector(out, state.time + dt)


def settle(body: BodyModel, posture: Array, coeffs: AeroCoefficients,
           duration: float = 12.0, dt: float = 1.0 / DEFAULT_RATE_HZ,
           air_density: float = DEFAULT_AIR_DENSITY,
           initial: SkyState | None = None) -> tuple[SkyState, float]:
    """Integrate a held posture to near-steady fall.

    Returns the final state and the mean descent speed over the last second.
    """
    state = initial if initial is not None else SkyState.initial(velocity=(0.0, 0.0, 50.0))
    rate = np.zeros(N_DOF)
    n = int(round(duration / dt))
    tail = max(1, int(round(1.0 / dt)))
    vz_acc = 0.0
    count = 0
    for k in range(n):
        state = step(body, posture, rate, state, coeffs, dt, air_density)
        if k >= n - tail:
            vz_acc += state.velocity[2]
            count += 1
    return state, vz_acc / count


def calibrate(body: BodyModel, neutral_posture: Array, coeffs: AeroCoefficients,
              target_speed: float = TERMINAL_SPEED_TARGET,
              air_density: float = DEFAULT_AIR_DENSITY,
              tolerance: float = 0.005, max_iterations: int = 8) -> tuple[AeroCoefficients, dict]:
    """Scale c_drag_max so the neutral-posture terminal speed hits the target.

    Drag scales with v^2 at fixed geometry, so the fixed-point update
    ``c_drag *= (v_measured / v_target)^2`` converges in a few iterations.
    """
    if target_speed <= 0.0:
        raise ValueError("target_speed must be positive")
    current = coeffs
    history = []
    measured = None
    for _ in range(max_iterations):
        _, measured = settle(body, neutral_posture, current,
                             initial=SkyState.initial(velocity=(0.0, 0.0, target_speed)),
                             air_density=air_density)
        history.append({"c_drag_max": current.c_drag_max, "terminal_speed": measured})
        if abs(measured - target_speed) / target_speed < tolerance:
            break
        current = current.scaled_drag((measured / target_speed) ** 2)
    return current, {"target_speed": target_speed, "terminal_speed": measured,
                     "iterations": history}


def predict_velocities(body: BodyModel, posture: Array, state: SkyState,
                       coeffs: AeroCoefficients, t_delay: float,
                       air_density: float = DEFAULT_AIR_DENSITY,
                       dt: float = 1.0 / DEFAULT_RATE_HZ,
                       max_delay: float = 2.0) -> tuple[float, float]:
    """Predicted (yaw rate, forward speed) t_delay seconds ahead, holding posture."""
    if t_delay < 0.0:
        raise ValueError("t_delay must be >= 0")
    if t_delay > max_delay:
        raise ValueError(f"t_delay {t_delay} s outside sane range (max {max_delay} s)")
    rate = np.zeros(N_DOF)
    future = state
    for _ in range(int(round(t_delay / dt))):
        future = step(body, posture, rate, future, coeffs, dt, air_density)
    return yaw_rate(future), forward_speed(future)
