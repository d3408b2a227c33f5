"""Synthetic trainee models: map the Desired Posture cue to an executed posture.

Stages compose in declared order (e.g. delay then lag then noise); every
stage with zero parameters is the identity, so a composite with all-zero
parameters degenerates to the ideal trainee. Noise is seeded and
reproducible: the same seed and input stream give the same output stream.
"""

from __future__ import annotations

import numpy as np

from .biomech import N_DOF, dof_index

Array = np.ndarray

NOISE_CUTOFF_HZ = 2.0


class _Ideal:
    def reset(self, neutral: Array, rng: np.random.Generator):
        pass

    def step(self, posture: Array, dt: float) -> Array:
        return posture


class _Frozen:
    """No actuation at all: the posture stays at neutral whatever the cue."""

    def __init__(self):
        self._neutral = None

    def reset(self, neutral: Array, rng):
        self._neutral = neutral.copy()

    def step(self, posture: Array, dt: float) -> Array:
        return self._neutral.copy()


class _Delay:
    """Pure transport delay via a posture ring buffer primed with neutral."""

    def __init__(self, t_delay: float, rate: float):
        if t_delay < 0.0:
            raise ValueError("t_delay must be >= 0")
        self.t_delay = t_delay
        self.samples = int(round(t_delay * rate))
        self._buffer = None
        self._head = 0

    def reset(self, neutral: Array, rng):
        self._buffer = np.tile(neutral, (max(self.samples, 1), 1))
        self._head = 0

    def step(self, posture: Array, dt: float) -> Array:
        if self.samples == 0:
            return posture
        out = self._buffer[self._head].copy()
        self._buffer[self._head] = posture
        self._head = (self._head + 1) % self.samples
        return out


class _Lag:
    """Per-DOF first-order filter with exact exponential discretization."""

    def __init__(self, tau: float):
        if tau < 0.0:
            raise ValueError("tau must be >= 0")
        self.tau = tau
        self._state = None

    def reset(self, neutral: Array, rng):
        self._state = neutral.copy()

    def step(self, posture: Array, dt: float) -> Array:
        if self.tau == 0.0:
            return posture
        a = np.exp(-dt / self.tau)
        self._state = a * self._state + (1.0 - a) * posture
        return self._state.copy()


class _Noise:
    """Zero-mean per-DOF tremor: white noise low-passed at 2 Hz, stationary
    standard deviation equal to sigma."""

    def __init__(self, sigma: float):
        if sigma < 0.0:
            raise ValueError("sigma must be >= 0")
        self.sigma = sigma
        self._state = None
        self._rng = None

    def reset(self, neutral: Array, rng: np.random.Generator):
        self._state = np.zeros(N_DOF)
        self._rng = rng

    def step(self, posture: Array, dt: float) -> Array:
        if self.sigma == 0.0:
            return posture
        a = np.exp(-2.0 * np.pi * NOISE_CUTOFF_HZ * dt)
        white = self.sigma * np.sqrt((1.0 + a) / (1.0 - a)) * self._rng.standard_normal(N_DOF)
        self._state = a * self._state + (1.0 - a) * white
        return posture + self._state


class _RangeRestricted:
    """Per-DOF caps tighter than the ergonomic range (e.g. stiff shoulders)."""

    def __init__(self, caps: dict):
        self.lower = np.full(N_DOF, -np.inf)
        self.upper = np.full(N_DOF, np.inf)
        for key, pair in caps.items():
            joint, axis = key.split(".")
            i = dof_index(joint, axis)
            self.lower[i] = float(pair[0])
            self.upper[i] = float(pair[1])

    def reset(self, neutral: Array, rng):
        pass

    def step(self, posture: Array, dt: float) -> Array:
        return np.clip(posture, self.lower, self.upper)


class TraineeModel:
    """Stage pipeline standing in for the human actuator."""

    def __init__(self, stages, neutral: Array, seed: int = 0):
        self.stages = list(stages)
        self.neutral = np.asarray(neutral, dtype=float).copy()
        self.seed = seed
        self.reset()

    def reset(self, seed: int | None = None):
        if seed is not None:
            self.seed = seed
        rng = np.random.default_rng(self.seed)
        for stage in self.stages:
            stage.reset(self.neutral, rng)

    def step(self, desired: Array, dt: float) -> Array:
        out = np.asarray(desired, dtype=float)
        for stage in self.stages:
            out = stage.step(out, dt)
        return out


def _stage_from_spec(spec: dict, rate: float):
    kind = spec.get("kind", "ideal")
    if kind == "ideal":
        return _Ideal()
    if kind == "frozen":
        return _Frozen()
    if kind == "pure_delay":
        return _Delay(float(spec.get("t_delay_s", 0.0)), rate)
    if kind == "first_order_lag":
        return _Lag(float(spec.get("tau_s", 0.0)))
    if kind == "noisy":
        return _Noise(float(np.deg2rad(spec.get("sigma_deg", 1.0))))
    if kind == "range_restricted":
        caps = {k: [float(np.deg2rad(v[0])), float(np.deg2rad(v[1]))]
                for k, v in spec.get("caps_deg", {}).items()}
        return _RangeRestricted(caps)
    raise ValueError(f"unknown trainee kind {kind!r}")


def trainee_from_spec(spec: dict, neutral: Array, rate: float, seed: int = 0) -> TraineeModel:
    """Build a trainee from a scenario mapping.

    {"kind": "composite", "stages": [...]} chains stages in order; any other
    kind is a single-stage model.
    """
    if spec.get("kind") == "composite":
        stages = [_stage_from_spec(s, rate) for s in spec.get("stages", [])]
        if not stages:
            stages = [_Ideal()]
    else:
        stages = [_stage_from_spec(spec, rate)]
    return TraineeModel(stages, neutral, seed=seed)
