"""Acceptance suite: one test per headless criterion, at pinned tolerances.

Each test prints a [PASS] line with its measured numbers; runtime caps are
asserted against wall time. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import time

import numpy as np
import pytest

from freefall import dynamics as dyn
from freefall.biomech import build_body, dof_index
from freefall.config import load_config
from freefall.control import discretize, qft_paper_transfer_functions
from freefall.cues import ImitationSpec, forward_arrows, imitation_target
from freefall.dynamics import AeroCoefficients, SkyState
from freefall.guidance import BLEND_SPEED, plan_path, guidance_step
from freefall.patterns import (DofLimits, PatternSet, clamp, turning_pattern,
                               forward_backward_pattern)
from freefall.rotations import quat_from_axis_angle, wrap_angle
from freefall.session import (Scenario, compute_metrics, run_episode,
                              sustained_oscillation)

CFG = load_config()
BODY = build_body(CFG.anthropometrics())


class Stopwatch:
    def __init__(self, budget):
        self.budget = budget
        self.t0 = time.perf_counter()

    def check(self, label):
        elapsed = time.perf_counter() - self.t0
        assert elapsed < self.budget, f"{label}: {elapsed:.1f}s over {self.budget}s budget"
        return elapsed


def test_physics_sanity():
    watch = Stopwatch(10.0)
    # vacuum free fall: g*t within 1e-6 relative
    vacuum = AeroCoefficients(0, 0, 0, 0, 0, 0)
    posture = CFG.neutral_posture()
    state = SkyState.initial()
    dt = 1.0 / 240.0
    n = 720
    for _ in range(n):
        state = dyn.step(BODY, posture, np.zeros(45), state, vacuum, dt)
    gt = dyn.GRAVITY * n * dt
    rel = abs(state.velocity[2] - gt) / gt
    assert rel < 1e-6

    # calibrated neutral terminal speed: 61 m/s +/- 15%
    _, vterm = dyn.settle(BODY, posture, CFG.aero_coefficients(), duration=20.0,
                          air_density=CFG.air_density())
    assert abs(vterm - 61.0) / 61.0 < 0.15

    # RK4 order by step halving: measured slope >= 3.5
    aero = CFG.aero_coefficients()
    s0 = SkyState.initial(velocity=(3.0, -1.0, 45.0), angular_rate=(0.2, -0.1, 0.3))

    def propagate(h, duration=0.4):
        s = s0
        for _ in range(int(round(duration / h))):
            s = dyn.step(BODY, posture, np.zeros(45), s, aero, h)
        return s.to_vector()

    ref = propagate(1 / 3840)
    dts = [1 / 60, 1 / 120, 1 / 240, 1 / 480]
    errors = [np.linalg.norm(propagate(h) - ref) for h in dts]
    slopes = [np.log(errors[i] / errors[i + 1]) / np.log(2.0) for i in range(3)]
    assert min(slopes) >= 3.5

    elapsed = watch.check("physics sanity")
    print(f"\n[PASS] physics sanity: vacuum rel err {rel:.2e}, terminal {vterm:.2f} m/s, "
          f"RK4 slope {min(slopes):.2f} ({elapsed:.1f}s)")


def test_controller_fidelity():
    watch = Stopwatch(5.0)
    omega = np.logspace(np.log10(0.01), 1.0, 400)
    worst = {}
    for name, tf in qft_paper_transfer_functions().items():
        lti = discretize(tf, 240.0)
        mag_d = np.abs(lti.response(omega))
        mag_c = np.abs(tf.response(omega))
        worst[name] = float(np.max(np.abs(mag_d - mag_c) / mag_c))
        assert worst[name] < 0.01, name
    elapsed = watch.check("controller fidelity")
    print(f"\n[PASS] controller fidelity: worst magnitude error "
          f"{max(worst.values()):.2e} over [0.01, 10] rad/s ({elapsed:.1f}s)")


def test_closed_loop_ideal_trainee():
    watch = Stopwatch(30.0)
    log = run_episode(Scenario(), CFG)
    metrics = compute_metrics(log, path_length=150.0)
    assert log.outcome == "completed"
    assert log.completion_time <= 120.0
    assert metrics.corridor_violation_time == 0.0
    assert metrics.max_u_arms <= np.deg2rad(10.0)
    elapsed = watch.check("closed loop ideal")
    print(f"\n[PASS] closed-loop ideal: completed {log.completion_time:.1f}s, "
          f"zero corridor violation, max |u_arms| "
          f"{np.degrees(metrics.max_u_arms):.1f} deg ({elapsed:.1f}s)")


def test_closed_loop_delay_study():
    watch = Stopwatch(60.0)
    clean = run_episode(Scenario(), CFG)
    assert not sustained_oscillation(clean)
    delayed = run_episode(Scenario(trainee={"kind": "pure_delay", "t_delay_s": 0.7}), CFG)
    assert sustained_oscillation(delayed)
    assert delayed.outcome == "completed"
    assert delayed.completion_time <= 240.0
    elapsed = watch.check("delay study")
    print(f"\n[PASS] delay study: no oscillation undelayed; 0.7 s delay oscillates "
          f"and completes in {delayed.completion_time:.1f}s ({elapsed:.1f}s)")


def test_no_control_baseline():
    watch = Stopwatch(60.0)
    log = run_episode(Scenario(trainee={"kind": "frozen"}), CFG)
    metrics = compute_metrics(log, path_length=150.0)
    assert log.outcome == "timeout"
    assert metrics.progress_fraction < 0.5
    elapsed = watch.check("no-control baseline")
    print(f"\n[PASS] no-control baseline: timeout with progress "
          f"{metrics.progress_fraction:.3f} ({elapsed:.1f}s)")


def test_guidance_and_cue_property_suites():
    watch = Stopwatch(10.0)
    rng = np.random.default_rng(7)
    fast = BLEND_SPEED + 2.0

    # hand-evaluation grid of the look-ahead law, including wrap cases
    path = plan_path((0.0, 0.0), (500.0, 0.0), cruise_speed=fast)
    t_la = 2.0
    for offset_angle in np.deg2rad([-170.0, -135.0, -45.0, -2.0, 0.0, 2.0, 45.0, 135.0, 170.0]):
        d_la = t_la * fast
        # place the body so the bearing to the lookahead point equals offset_angle
        dy = -d_la * np.tan(offset_angle) if abs(offset_angle) < np.pi / 2 else None
        if dy is None:
            continue
        state = SkyState.initial(position=(100.0, dy, 0.0), velocity=(fast, 0.0, 55.0))
        cmd = guidance_step(path, state, t_la)
        expected = np.arctan2(-dy, d_la)
        assert cmd.psi_error == pytest.approx(expected, abs=1e-9)
        assert cmd.omega_com == pytest.approx(2.0 * expected / t_la, abs=1e-9)
    # wrap case: heading +179 deg, bearing -179 deg -> short way, +2 deg-ish
    heading = np.deg2rad(179.0)
    back_path = plan_path((0.0, 0.0), (-500.0, 0.0), cruise_speed=fast)
    vel = (fast * np.cos(heading), fast * np.sin(heading))
    state = SkyState.initial(position=(-100.0, 0.0, 0.0), velocity=(vel[0], vel[1], 55.0))
    cmd = guidance_step(back_path, state, t_la)
    assert abs(cmd.psi_error) < np.deg2rad(5.0)
    assert -np.pi < cmd.psi_error <= np.pi

    # arrow coincidence iff the rates match; chord-formula oracle
    for _ in range(200):
        speed = rng.uniform(2.0, 15.0)
        om = rng.uniform(-1.5, 1.5)
        state = SkyState.initial(velocity=(speed, 0.0, 55.0))
        pred, des = forward_arrows(state, om, om, 2.0)
        assert np.allclose(pred.origin, des.origin, atol=1e-12)
        assert abs(wrap_angle(pred.heading - des.heading)) < 1e-9
        pred2, des2 = forward_arrows(state, om, om + 0.02, 2.0)
        assert abs(wrap_angle(pred2.heading - des2.heading)) > 1e-4
    state = SkyState.initial(velocity=(10.0, 0.0, 55.0))
    pred, _ = forward_arrows(state, 0.5, 0.0, 2.0)
    chord = 2.0 * (10.0 / 0.5) * np.sin(0.5)
    assert np.hypot(pred.origin[0], pred.origin[1]) == pytest.approx(chord, rel=1e-12)
    assert pred.heading == pytest.approx(1.0, abs=1e-12)

    # clamp safety over 1e4 random streams
    limits = DofLimits.uniform(-1.2, 1.2, 1.5)
    pset = PatternSet(neutral=np.zeros(45),
                      patterns=[turning_pattern(), forward_backward_pattern()],
                      limits=limits)
    dt = 1.0 / 240.0
    previous = np.zeros((10_000, 45))
    for step_k in range(8):
        commanded = rng.normal(scale=2.0, size=(10_000, 45))
        stepped = np.clip(commanded, limits.lower, limits.upper)
        stepped = previous + np.clip(stepped - previous, -limits.max_rate * dt,
                                     limits.max_rate * dt)
        # the vectorized reference must match the library clamp on a sample
        for idx in rng.integers(0, 10_000, size=4):
            lib = clamp(pset, commanded[idx], previous[idx], dt)
            np.testing.assert_allclose(lib, stepped[idx], atol=1e-15)
        assert np.all(stepped >= limits.lower - 1e-12)
        assert np.all(stepped <= limits.upper + 1e-12)
        assert np.all(np.abs(stepped - previous) <= limits.max_rate * dt + 1e-12)
        previous = stepped

    # shipped pattern eigenvectors: support and values
    arms = turning_pattern().weights
    legs = forward_backward_pattern().weights
    arm_idx = sorted(dof_index(f"{s}_shoulder", a)
                     for s in ("l", "r") for a in ("flexion", "rotation"))
    leg_idx = sorted([dof_index(f"{s}_knee", "flexion") for s in ("l", "r")]
                     + [dof_index(f"{s}_hip", "flexion") for s in ("l", "r")])
    assert sorted(np.flatnonzero(arms)) == arm_idx
    assert sorted(np.flatnonzero(legs)) == leg_idx
    assert all(arms[i] == 0.5 for i in arm_idx)
    for s in ("l", "r"):
        assert legs[dof_index(f"{s}_knee", "flexion")] == pytest.approx(0.582, abs=5e-4)
        assert legs[dof_index(f"{s}_hip", "flexion")] == pytest.approx(0.402, abs=5e-4)

    # imitation waveform exact at quarter-period points
    pset_cfg = CFG.pattern_set()
    spec = ImitationSpec(amplitude=np.deg2rad(10.0), frequency=0.25,
                         pattern=pset_cfg.pattern_named("turning"),
                         hold_threshold=np.deg2rad(3.0), hold_duration=3.0)
    neutral = pset_cfg.neutral
    np.testing.assert_array_equal(imitation_target(spec, 0.0, neutral), neutral)
    quarter = imitation_target(spec, 1.0, neutral) - neutral
    np.testing.assert_allclose(quarter, np.deg2rad(10.0) * spec.pattern.weights, atol=1e-15)
    np.testing.assert_allclose(imitation_target(spec, 2.0, neutral), neutral, atol=1e-12)
    three_quarter = imitation_target(spec, 3.0, neutral) - neutral
    np.testing.assert_allclose(three_quarter, -np.deg2rad(10.0) * spec.pattern.weights,
                               atol=1e-12)

    elapsed = watch.check("guidance/cue properties")
    print(f"\n[PASS] guidance/cue property suites ({elapsed:.1f}s)")


def test_determinism_byte_identical_logs(tmp_path):
    scenario = Scenario(trainee={"kind": "noisy", "sigma_deg": 1.0}, seed=314,
                        timeout=30.0)
    a = run_episode(scenario, CFG)
    b = run_episode(scenario, CFG)
    pa, pb = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    a.save(pa)
    b.save(pb)
    assert pa.read_bytes() == pb.read_bytes()
    print(f"\n[PASS] determinism: two seeded runs produced byte-identical logs "
          f"({pa.stat().st_size} bytes)")
