import numpy as np
import pytest

from freefall.biomech import dof_index
from freefall.patterns import compose_posture
from freefall.trainee import TraineeModel, trainee_from_spec

RATE = 240.0
DT = 1.0 / RATE


def _run(model, inputs):
    return np.array([model.step(u, DT) for u in inputs])


def test_ideal_identity(pattern_set, rng):
    model = trainee_from_spec({"kind": "ideal"}, pattern_set.neutral, RATE)
    posture = rng.normal(size=45)
    np.testing.assert_array_equal(model.step(posture, DT), posture)


def test_frozen_stays_neutral(pattern_set, rng):
    model = trainee_from_spec({"kind": "frozen"}, pattern_set.neutral, RATE)
    out = model.step(rng.normal(size=45), DT)
    np.testing.assert_array_equal(out, pattern_set.neutral)


def test_pure_delay_cross_correlation(pattern_set):
    delay = 0.5
    model = trainee_from_spec({"kind": "pure_delay", "t_delay_s": delay},
                              pattern_set.neutral, RATE)
    n = int(6.0 * RATE)
    t = np.arange(n) * DT
    signal = np.sin(2 * np.pi * 0.8 * t)
    inputs = pattern_set.neutral + np.outer(signal, np.ones(45) * 0.01)
    outputs = _run(model, inputs)
    out_sig = (outputs[:, 0] - pattern_set.neutral[0]) / 0.01
    # cross-correlation peak at the delay, within one sample
    lags = np.arange(0, int(1.0 * RATE))
    scores = [np.dot(out_sig[lag:], signal[:n - lag]) for lag in lags]
    best = lags[int(np.argmax(scores))]
    assert abs(best - delay * RATE) <= 1.0


def test_pure_delay_primed_with_neutral(pattern_set):
    model = trainee_from_spec({"kind": "pure_delay", "t_delay_s": 0.25},
                              pattern_set.neutral, RATE)
    out = model.step(pattern_set.neutral + 1.0, DT)
    np.testing.assert_array_equal(out, pattern_set.neutral)


def test_first_order_lag_step_response(pattern_set):
    tau = 0.4
    model = trainee_from_spec({"kind": "first_order_lag", "tau_s": tau},
                              pattern_set.neutral, RATE)
    target = pattern_set.neutral + 0.1
    steps = int(tau * RATE)
    out = pattern_set.neutral
    for _ in range(steps):
        out = model.step(target, DT)
    frac = (out[0] - pattern_set.neutral[0]) / 0.1
    assert frac == pytest.approx(1.0 - np.exp(-1.0), abs=0.01)


def test_range_restricted_pins_shoulders(pattern_set):
    caps = {}
    for side in ("l", "r"):
        for axis in ("flexion", "rotation"):
            caps[f"{side}_shoulder.{axis}"] = [
                np.degrees(pattern_set.neutral[dof_index(f"{side}_shoulder", axis)]) - 2.0,
                np.degrees(pattern_set.neutral[dof_index(f"{side}_shoulder", axis)]) + 2.0,
            ]
    model = trainee_from_spec({"kind": "range_restricted", "caps_deg": caps},
                              pattern_set.neutral, RATE)
    demanded = compose_posture(pattern_set, np.array([np.deg2rad(10.0), 0.0]))
    out = model.step(demanded, DT)
    for side in ("l", "r"):
        for axis in ("flexion", "rotation"):
            i = dof_index(f"{side}_shoulder", axis)
            # the turning pattern demands 5 deg; the cap pins at 2 deg
            assert out[i] == pytest.approx(pattern_set.neutral[i] + np.deg2rad(2.0),
                                           abs=1e-12)


def test_noise_reproducible_and_zero_mean(pattern_set):
    spec = {"kind": "noisy", "sigma_deg": 1.0}
    a = trainee_from_spec(spec, pattern_set.neutral, RATE, seed=7)
    b = trainee_from_spec(spec, pattern_set.neutral, RATE, seed=7)
    inputs = [pattern_set.neutral] * 2000
    out_a = _run(a, inputs)
    out_b = _run(b, inputs)
    np.testing.assert_array_equal(out_a, out_b)
    c = trainee_from_spec(spec, pattern_set.neutral, RATE, seed=8)
    out_c = _run(c, inputs)
    assert not np.array_equal(out_a, out_c)
    residual = out_a - pattern_set.neutral
    assert abs(residual.mean()) < np.deg2rad(0.3)
    # stationary std close to the requested sigma
    assert residual[500:].std() == pytest.approx(np.deg2rad(1.0), rel=0.2)


def test_composite_order_and_degeneration(pattern_set):
    composite = trainee_from_spec(
        {"kind": "composite", "stages": [
            {"kind": "pure_delay", "t_delay_s": 0.0},
            {"kind": "first_order_lag", "tau_s": 0.0},
            {"kind": "noisy", "sigma_deg": 0.0},
        ]}, pattern_set.neutral, RATE)
    posture = pattern_set.neutral + 0.2
    np.testing.assert_array_equal(composite.step(posture, DT), posture)

    # delay then cap: the cap applies to the delayed value
    delayed_caps = trainee_from_spec(
        {"kind": "composite", "stages": [
            {"kind": "pure_delay", "t_delay_s": 0.1},
            {"kind": "range_restricted",
             "caps_deg": {"spine_lower.flexion": [-1.0, 1.0]}},
        ]}, pattern_set.neutral, RATE)
    big = pattern_set.neutral.copy()
    big[0] = np.deg2rad(45.0)
    out = delayed_caps.step(big, DT)
    # first tick returns the (capped) primed neutral, not the new input
    assert out[0] == pytest.approx(np.deg2rad(1.0))


def test_reset_restores_history(pattern_set):
    model = trainee_from_spec({"kind": "pure_delay", "t_delay_s": 0.2},
                              pattern_set.neutral, RATE)
    model.step(pattern_set.neutral + 1.0, DT)
    model.reset()
    out = model.step(pattern_set.neutral + 2.0, DT)
    np.testing.assert_array_equal(out, pattern_set.neutral)


def test_unknown_kind_rejected(pattern_set):
    with pytest.raises(ValueError):
        trainee_from_spec({"kind": "psychic"}, pattern_set.neutral, RATE)
