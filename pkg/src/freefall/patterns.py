"""Movement-pattern algebra.

A movement pattern is a unit-norm 45-vector over the posture DOFs; scaling
it by a pattern angle (radians) and adding the neutral posture yields the
commanded posture:

    posture = neutral + sum_i u_i * pattern_i

Projection inverts that superposition; the clamp enforces per-DOF ergonomic
ranges and rate limits on any posture stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .biomech import N_DOF, dof_index

Array = np.ndarray

ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class PatternBasis:
    """Named unit-norm direction in posture space."""

    name: str
    weights: Array

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (N_DOF,):
            raise ValueError(f"pattern weights must have shape ({N_DOF},)")
        norm = np.linalg.norm(w)
        if not np.isfinite(norm) or norm == 0.0:
            raise ValueError("pattern weights must be nonzero and finite")
        object.__setattr__(self, "weights", w / norm)


@dataclass(frozen=True)
class DofLimits:
    """Per-DOF range (rad) and rate limit (rad/s)."""

    lower: Array
    upper: Array
    max_rate: Array

    def __post_init__(self):
        for name in ("lower", "upper", "max_rate"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (N_DOF,):
                raise ValueError(f"{name} must have shape ({N_DOF},)")
            object.__setattr__(self, name, v)
        if np.any(self.lower > self.upper):
            raise ValueError("lower limit above upper limit")
        if np.any(self.max_rate < 0.0):
            raise ValueError("negative rate limit")

    @staticmethod
    def uniform(lower: float, upper: float, max_rate: float) -> "DofLimits":
        return DofLimits(
            lower=np.full(N_DOF, lower),
            upper=np.full(N_DOF, upper),
            max_rate=np.full(N_DOF, max_rate),
        )


class Projection(NamedTuple):
    angles: Array
    least_squares: bool


@dataclass(frozen=True)
class PatternSet:
    """Neutral posture, movement patterns and the ergonomic limits."""

    neutral: Array
    patterns: list
    limits: DofLimits
    max_pattern_angle: float = np.deg2rad(30.0)

    def __post_init__(self):
        neutral = np.asarray(self.neutral, dtype=float)
        if neutral.shape != (N_DOF,):
            raise ValueError(f"neutral posture must have shape ({N_DOF},)")
        if not self.patterns:
            raise ValueError("a pattern set needs at least one pattern")
        if np.any(neutral < self.limits.lower) or np.any(neutral > self.limits.upper):
            raise ValueError("neutral posture violates DOF limits")
        object.__setattr__(self, "neutral", neutral)

    @property
    def basis_matrix(self) -> Array:
        return np.stack([p.weights for p in self.patterns])

    @property
    def orthogonal(self) -> bool:
        m = self.basis_matrix
        gram = m @ m.T
        return bool(np.allclose(gram, np.eye(len(self.patterns)), atol=1e-8))

    def pattern_named(self, name: str) -> PatternBasis:
        for p in self.patterns:
            if p.name == name:
                return p
        raise KeyError(name)


def compose_posture(pset: PatternSet, angles: Array) -> Array:
    """Neutral plus the pattern superposition; limits are NOT applied here."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.shape != (len(pset.patterns),):
        raise ValueError(f"expected {len(pset.patterns)} pattern angles")
    if not np.all(np.isfinite(angles)):
        raise ValueError("pattern angles must be finite")
    return pset.neutral + angles @ pset.basis_matrix


def project(pset: PatternSet, posture: Array) -> Projection:
    """Pattern angles that best reproduce a posture.

    Orthogonal pattern sets use exact inner products; otherwise the
    least-squares solution is returned (flagged on the result).
    """
    posture = np.asarray(posture, dtype=float)
    delta = posture - pset.neutral
    m = pset.basis_matrix
    if pset.orthogonal:
        return Projection(angles=m @ delta, least_squares=False)
    sol, *_ = np.linalg.lstsq(m.T, delta, rcond=None)
    return Projection(angles=sol, least_squares=True)


def clamp(pset: PatternSet, commanded: Array, previous: Array, dt: float) -> Array:
    """Range- and rate-limit a commanded posture against the previous one."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    commanded = np.asarray(commanded, dtype=float)
    previous = np.asarray(previous, dtype=float)
    lim = pset.limits
    out = np.clip(commanded, lim.lower, lim.upper)
    max_step = lim.max_rate * dt
    return previous + np.clip(out - previous, -max_step, max_step)


def turning_pattern() -> PatternBasis:
    """The proof-of-concept 'turning' pattern: four 0.5 shoulder weights.

    Right shoulder flexion + axial rotation, left shoulder extension +
    medial rotation (the left flexion axis is side-relative, see biomech).
    Positive pattern angle turns right.
    """
    w = np.zeros(N_DOF)
    for side in ("l", "r"):
        w[dof_index(f"{side}_shoulder", "flexion")] = 0.5
        w[dof_index(f"{side}_shoulder", "rotation")] = 0.5
    return PatternBasis(name="turning", weights=w)


def forward_backward_pattern() -> PatternBasis:
    """The proof-of-concept 'forward-backward' pattern over knees and hips.

    Knee weights 0.582, hip weights 0.402; positive pattern angle extends
    the legs and drives forward.
    """
    w = np.zeros(N_DOF)
    for side in ("l", "r"):
        w[dof_index(f"{side}_knee", "flexion")] = 0.582
        w[dof_index(f"{side}_hip", "flexion")] = 0.402
    return PatternBasis(name="forward-backward", weights=w)
