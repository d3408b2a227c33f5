import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freefall.biomech import dof_index
from freefall.patterns import (DofLimits, PatternBasis, PatternSet, Projection,
                               clamp, compose_posture, forward_backward_pattern,
                               project, turning_pattern)

ARM_INDICES = sorted(
    dof_index(f"{side}_shoulder", axis)
    for side in ("l", "r") for axis in ("flexion", "rotation"))
LEG_INDICES = sorted(
    [dof_index(f"{s}_knee", "flexion") for s in ("l", "r")]
    + [dof_index(f"{s}_hip", "flexion") for s in ("l", "r")])


def test_turning_pattern_support_and_values():
    w = turning_pattern().weights
    nonzero = sorted(np.flatnonzero(w))
    assert nonzero == ARM_INDICES
    # the four 0.5 entries have unit norm exactly, so no renormalization shift
    assert all(w[i] == 0.5 for i in ARM_INDICES)


def test_forward_backward_pattern_support_and_values():
    w = forward_backward_pattern().weights
    nonzero = sorted(np.flatnonzero(w))
    assert nonzero == LEG_INDICES
    # published 0.582/0.402 give |w| = 1.000328; unit-norm construction
    # rescales by that factor, within rounding of the published values
    for side in ("l", "r"):
        assert w[dof_index(f"{side}_knee", "flexion")] == pytest.approx(0.582, abs=5e-4)
        assert w[dof_index(f"{side}_hip", "flexion")] == pytest.approx(0.402, abs=5e-4)
    assert np.linalg.norm(w) == pytest.approx(1.0, abs=1e-9)


def test_unit_norm_enforced(rng):
    raw = rng.normal(size=45) * 3.0
    basis = PatternBasis(name="x", weights=raw)
    assert np.linalg.norm(basis.weights) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        PatternBasis(name="zero", weights=np.zeros(45))


def test_compose_zero_returns_neutral_exactly(pattern_set):
    out = compose_posture(pattern_set, np.zeros(2))
    assert np.array_equal(out, pattern_set.neutral)


def test_compose_arm_offsets_eq2(pattern_set):
    u = np.deg2rad(10.0)
    out = compose_posture(pattern_set, np.array([u, 0.0]))
    delta = out - pattern_set.neutral
    for i in ARM_INDICES:
        assert delta[i] == pytest.approx(np.deg2rad(5.0), abs=1e-12)
    others = np.delete(delta, ARM_INDICES)
    assert np.all(others == 0.0)


def test_compose_leg_offsets_eq2(pattern_set):
    out = compose_posture(pattern_set, np.array([0.0, 0.1]))
    delta = out - pattern_set.neutral
    for side in ("l", "r"):
        assert delta[dof_index(f"{side}_knee", "flexion")] == pytest.approx(0.0582, abs=5e-5)
        assert delta[dof_index(f"{side}_hip", "flexion")] == pytest.approx(0.0402, abs=5e-5)


def test_project_neutral_is_zero(pattern_set):
    proj = project(pattern_set, pattern_set.neutral)
    assert not proj.least_squares
    np.testing.assert_allclose(proj.angles, np.zeros(2), atol=1e-15)


def test_project_roundtrip_orthogonal(pattern_set, rng):
    assert pattern_set.orthogonal
    for _ in range(50):
        u = rng.normal(scale=0.3, size=2)
        out = project(pattern_set, compose_posture(pattern_set, u))
        np.testing.assert_allclose(out.angles, u, atol=1e-9)


def test_project_ignores_null_space_noise(pattern_set, rng):
    u = rng.normal(scale=0.2, size=2)
    posture = compose_posture(pattern_set, u)
    noise = rng.normal(scale=0.05, size=45)
    basis = pattern_set.basis_matrix
    noise -= basis.T @ (basis @ noise)     # project out the pattern span
    noisy = project(pattern_set, posture + noise)
    np.testing.assert_allclose(noisy.angles, u, atol=1e-9)


def test_project_non_orthogonal_flagged(pattern_set):
    a = np.zeros(45)
    a[0] = 1.0
    b = np.zeros(45)
    b[0] = 1.0
    b[1] = 0.2
    pset = PatternSet(neutral=pattern_set.neutral,
                      patterns=[PatternBasis("a", a), PatternBasis("b", b)],
                      limits=pattern_set.limits)
    assert not pset.orthogonal
    proj = project(pset, compose_posture(pset, np.array([0.1, -0.2])))
    assert isinstance(proj, Projection)
    assert proj.least_squares
    np.testing.assert_allclose(proj.angles, [0.1, -0.2], atol=1e-9)


def test_clamp_identity_inside_limits(pattern_set):
    neutral = pattern_set.neutral
    commanded = neutral + 1e-4
    out = clamp(pattern_set, commanded, neutral, 1.0 / 240.0)
    np.testing.assert_array_equal(out, commanded)


def test_clamp_pins_range(pattern_set):
    commanded = pattern_set.neutral.copy()
    commanded[0] = pattern_set.limits.upper[0] + 1.0
    out = clamp(pattern_set, commanded, commanded, 1.0)
    assert out[0] == pattern_set.limits.upper[0]


def test_clamp_rate_limit_hand_arithmetic():
    limits = DofLimits.uniform(-2.0, 2.0, 0.5)
    pset = PatternSet(neutral=np.zeros(45), patterns=[turning_pattern()], limits=limits)
    previous = np.zeros(45)
    commanded = np.zeros(45)
    commanded[7] = 0.5
    out = clamp(pset, commanded, previous, 1.0 / 240.0)
    assert out[7] == pytest.approx(0.5 / 240.0, abs=1e-15)


def test_clamp_idempotent(pattern_set, rng):
    previous = pattern_set.neutral
    commanded = previous + rng.normal(scale=1e-4, size=45)
    once = clamp(pattern_set, commanded, previous, 1.0 / 240.0)
    twice = clamp(pattern_set, once, previous, 1.0 / 240.0)
    np.testing.assert_array_equal(once, twice)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_clamp_safety_random_streams(seed):
    rng = np.random.default_rng(seed)
    limits = DofLimits.uniform(-1.0, 1.0, 2.0)
    pset = PatternSet(neutral=np.zeros(45), patterns=[turning_pattern()], limits=limits)
    dt = 1.0 / 240.0
    previous = np.zeros(45)
    for _ in range(30):
        commanded = rng.normal(scale=2.0, size=45)
        out = clamp(pset, commanded, previous, dt)
        assert np.all(out >= limits.lower - 1e-12)
        assert np.all(out <= limits.upper + 1e-12)
        assert np.all(np.abs(out - previous) <= limits.max_rate * dt + 1e-12)
        previous = out


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_compose_linearity(seed):
    rng = np.random.default_rng(seed)
    from freefall.config import load_config
    pset = load_config().pattern_set()
    u = rng.normal(scale=0.3, size=2)
    v = rng.normal(scale=0.3, size=2)
    lhs = compose_posture(pset, u + v) - compose_posture(pset, u)
    rhs = compose_posture(pset, v) - compose_posture(pset, np.zeros(2))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_pattern_set_validation(pattern_set):
    with pytest.raises(ValueError):
        PatternSet(neutral=np.zeros(45), patterns=[], limits=pattern_set.limits)
    bad_neutral = np.full(45, 99.0)
    with pytest.raises(ValueError):
        PatternSet(neutral=bad_neutral, patterns=[turning_pattern()],
                   limits=pattern_set.limits)
