"""The three training cues and the imitation exercise.

Cues computed here are pure values handed to the streaming layer:

  - Desired Posture: pattern superposition, range- and rate-limited so the
    displayed figure moves slowly enough to follow.
  - Forward Model arrows: predicted vs desired horizontal position/heading
    t_predict seconds ahead under constant speed and turn rate (closed-form
    constant-turn chord, continuous through zero turn rate). Both arrows are
    drawn from the shared predicted-endpoint origin so the desired arrow
    reads as a pure heading difference.
  - Corridor: carried in the frame from the planned path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .biomech import N_DOF
from .dynamics import SkyState, horizontal_speed
from .guidance import travel_heading
from .patterns import DofLimits, PatternBasis, PatternSet, clamp, compose_posture
from .rotations import wrap_angle

Array = np.ndarray


@dataclass(frozen=True)
class Arrow:
    origin: Array               # (3,) m inertial
    heading: float              # rad, wrapped to (-pi, pi]


@dataclass(frozen=True)
class CueFrame:
    desired_posture: Array
    feedback_posture: Array
    predicted_arrow: Arrow
    desired_arrow: Arrow
    corridor: Array             # (n, 2) centerline waypoints
    corridor_half_width: float
    t_predict: float


def _advance_constant_turn(x: float, y: float, heading: float, speed: float,
                           omega: float, horizon: float) -> tuple[float, float, float]:
    """Constant-speed constant-turn-rate horizontal kinematics, closed form.

    Displacement is the chord 2*(V/w)*sin(w*t/2) at bearing heading + w*t/2;
    np.sinc gives the continuous w -> 0 limit (straight advance V*t).
    """
    half = 0.5 * omega * horizon
    chord = speed * horizon * np.sinc(half / np.pi)
    bearing = heading + half
    return (
        x + chord * np.cos(bearing),
        y + chord * np.sin(bearing),
        wrap_angle(heading + omega * horizon),
    )


def forward_arrows(state: SkyState, omega_meas: float, omega_com: float,
                   t_predict: float) -> tuple[Arrow, Arrow]:
    """Predicted (current velocities) and desired (commanded turn rate) arrows."""
    if t_predict <= 0.0:
        raise ValueError("t_predict must be positive")
    x, y = float(state.position[0]), float(state.position[1])
    speed = horizontal_speed(state)
    heading = travel_heading(state)
    z_future = float(state.position[2] + state.velocity[2] * t_predict)

    px, py, p_heading = _advance_constant_turn(x, y, heading, speed, omega_meas, t_predict)
    _, _, d_heading = _advance_constant_turn(x, y, heading, speed, omega_com, t_predict)
    origin = np.array([px, py, z_future])
    return Arrow(origin=origin, heading=p_heading), Arrow(origin=origin, heading=d_heading)


def cue_limits(pset: PatternSet, cue_rate: float) -> DofLimits:
    """The displayed-posture limits: ergonomic ranges with the cue rate cap."""
    return replace(pset.limits, max_rate=np.full(N_DOF, float(cue_rate)))


def desired_posture_cue(pset: PatternSet, angles: Array, previous_cue: Array,
                        dt: float, limits: DofLimits | None = None) -> Array:
    """Compose the commanded posture and slew-limit it for display."""
    commanded = compose_posture(pset, angles)
    if limits is None:
        return clamp(pset, commanded, previous_cue, dt)
    bounded = PatternSet(neutral=pset.neutral, patterns=pset.patterns,
                         limits=limits, max_pattern_angle=pset.max_pattern_angle)
    return clamp(bounded, commanded, previous_cue, dt)


@dataclass(frozen=True)
class ImitationSpec:
    amplitude: float            # rad
    frequency: float            # Hz
    pattern: PatternBasis
    hold_threshold: float       # rad rms
    hold_duration: float        # s

    def __post_init__(self):
        if self.amplitude <= 0.0 or self.frequency <= 0.0:
            raise ValueError("amplitude and frequency must be positive")


def imitation_target(spec: ImitationSpec, t: float, neutral: Array) -> Array:
    """Slow sine activation of one pattern around the neutral posture."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    angle = spec.amplitude * np.sin(2.0 * np.pi * spec.frequency * t)
    return neutral + angle * spec.pattern.weights


def posture_error(desired: Array, actual: Array) -> tuple[Array, float]:
    """Per-DOF error and its rms over the 45 DOFs."""
    per_dof = np.asarray(actual, dtype=float) - np.asarray(desired, dtype=float)
    return per_dof, float(np.sqrt(np.mean(per_dof ** 2)))


class HoldTracker:
    """Accumulates time while the posture rms error stays within threshold."""

    def __init__(self, threshold: float, duration: float):
        self.threshold = threshold
        self.duration = duration
        self.within_for = 0.0

    def update(self, desired: Array, actual: Array, dt: float) -> dict:
        per_dof, rms = posture_error(desired, actual)
        if rms <= self.threshold:
            self.within_for += dt
        else:
            self.within_for = 0.0
        return {
            "per_dof": per_dof,
            "rms": rms,
            "within_threshold_for": self.within_for,
            "held": self.within_for >= self.duration,
        }
