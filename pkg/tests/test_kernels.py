import os
import subprocess
import sys

import numpy as np
import pytest

from freefall.benchmark import run_benchmark
from freefall.kernels import backend_name, get_backend


@pytest.fixture(scope="module")
def both_backends():
    pure = get_backend("python")
    try:
        native = get_backend("native")
    except ImportError:
        pytest.skip("compiled extension not built")
    return pure, native


def test_backends_agree_on_random_inputs(default_body, both_backends):
    pure, native = both_backends
    rng = np.random.default_rng(99)
    body = default_body
    for _ in range(40):
        dof = rng.normal(scale=0.6, size=45)
        rate = rng.normal(scale=0.8, size=45)
        rp = pure.fk_with_rates(body.parent, body.jpos, body.jsign, dof, rate)
        rn = native.fk_with_rates(body.parent, body.jpos, body.jsign, dof, rate)
        for a, b in zip(rp, rn):
            np.testing.assert_allclose(a, b, atol=1e-13)
        mp = pure.mass_properties(body.mass, body.cogoff, body.inertia, *rp)
        mn = native.mass_properties(body.mass, body.cogoff, body.inertia, *rn)
        for a, b in zip(mp, mn):
            np.testing.assert_allclose(a, b, atol=1e-12)
        v_body = rng.normal(scale=25.0, size=3)
        omega = rng.normal(scale=1.5, size=3)
        coeffs = np.abs(rng.normal(scale=1.0, size=6))
        relvel = rng.normal(scale=0.4, size=(16, 3))
        ap = pure.aero_wrench(rp[0], mp[4], body.area, body.chord, mp[0], relvel,
                              v_body, omega, 1.0, coeffs, body.damp_scale, body.char_len)
        an = native.aero_wrench(rn[0], mn[4], body.area, body.chord, mn[0], relvel,
                                v_body, omega, 1.0, coeffs, body.damp_scale, body.char_len)
        np.testing.assert_allclose(ap[0], an[0], atol=1e-10)
        np.testing.assert_allclose(ap[1], an[1], atol=1e-10)
        state = np.concatenate([rng.normal(scale=5, size=3),
                                rng.normal(scale=20, size=3),
                                rng.normal(size=4), rng.normal(scale=1, size=3)])
        state[6:10] /= np.linalg.norm(state[6:10])
        sp = pure.rk4_step(state, 1 / 240, rp[0], mp[4], body.area, body.chord,
                           mp[0], relvel, 1.0, coeffs, body.damp_scale,
                           body.char_len, body.total_mass, mp[2], mp[3])
        sn = native.rk4_step(state, 1 / 240, rn[0], mn[4], body.area, body.chord,
                             mn[0], relvel, 1.0, coeffs, body.damp_scale,
                             body.char_len, body.total_mass, mn[2], mn[3])
        np.testing.assert_allclose(sp, sn, atol=1e-12)


def test_trajectories_agree_over_many_ticks(default_body, config, both_backends):
    pure, native = both_backends
    body = default_body
    posture = config.neutral_posture()
    rate45 = np.zeros(45)
    coeffs = config.aero_coefficients().as_array()
    dt = 1.0 / 240.0

    def run(backend, n):
        state = np.concatenate([[0, 0, 0], [0, 0, 55.0], [1, 0, 0, 0], [0.01, -0.02, 0.03]])
        for _ in range(n):
            R, p, w, v = backend.fk_with_rates(body.parent, body.jpos, body.jsign,
                                               posture, rate45)
            cog, cog_rate, inert, inert_rate, rc, vc = backend.mass_properties(
                body.mass, body.cogoff, body.inertia, R, p, w, v)
            state = backend.rk4_step(state, dt, R, rc, body.area, body.chord, cog,
                                     vc - cog_rate, 1.0, coeffs, body.damp_scale,
                                     body.char_len, body.total_mass, inert, inert_rate)
        return state

    np.testing.assert_allclose(run(pure, 480), run(native, 480), atol=1e-8)


def test_benchmark_reports_both_backends(config):
    results = run_benchmark(config, ticks=300)
    assert "python" in results
    if "native" in results:
        assert results["native"] < results["python"]
        assert results["python"] / results["native"] > 2.0


def test_backend_env_override():
    code = ("import freefall.kernels as k; print(k.backend_name())")
    for choice, expected in (("python", "python"), ("native", "native")):
        out = subprocess.run([sys.executable, "-c", code],
                             env={**os.environ, "FREEFALL_BACKEND": choice},
                             capture_output=True, text=True)
        if choice == "native" and out.returncode != 0:
            pytest.skip("native backend unavailable")
        assert out.stdout.strip() == expected


def test_default_backend_is_native_when_built():
    assert backend_name() in ("native", "python")
