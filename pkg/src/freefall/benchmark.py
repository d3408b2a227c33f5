"""Benchmark of the dynamics hot path: compiled kernels vs pure numpy."""

from __future__ import annotations

import time

import numpy as np

from .biomech import build_body
from .config import Config
from .kernels import get_backend


def run_backend_ticks(backend, body, posture, rate45, state, ticks, dt, coeffs, rho=1.0):
    for _ in range(ticks):
        R, p, w, v = backend.fk_with_rates(body.parent, body.jpos, body.jsign,
                                           posture, rate45)
        cog, cog_rate, inert, inert_rate, rc, vc = backend.mass_properties(
            body.mass, body.cogoff, body.inertia, R, p, w, v)
        relvel = vc - cog_rate
        state = backend.rk4_step(state, dt, R, rc, body.area, body.chord, cog,
                                 relvel, rho, coeffs, body.damp_scale,
                                 body.char_len, body.total_mass, inert, inert_rate)
    return state


def run_benchmark(config: Config, ticks: int = 2000) -> dict:
    """Time `ticks` full dynamics ticks on every available backend.

    Returns {backend_name: seconds}. The two backends compute identical
    physics; their trajectories agree to float tolerance (see tests).
    """
    body = build_body(config.anthropometrics())
    posture = config.neutral_posture()
    rate45 = np.zeros(45)
    coeffs = config.aero_coefficients().as_array()
    dt = 1.0 / config.sample_rate()
    state0 = np.concatenate([[0.0, 0.0, 0.0], [0.0, 0.0, 61.0],
                             [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    results = {}
    for name in ("python", "native"):
        try:
            backend = get_backend(name)
        except ImportError:
            continue
        run_backend_ticks(backend, body, posture, rate45, state0.copy(), 50, dt, coeffs)
        t0 = time.perf_counter()
        run_backend_ticks(backend, body, posture, rate45, state0.copy(), ticks, dt, coeffs)
        results[name] = time.perf_counter() - t0
    return results
