import numpy as np
import pytest

from freefall.control import (AdaptiveTrim, ControllerBank, RationalTF,
                              delay_compensated_errors, discretize,
                              qft_paper_transfer_functions)

RATE = 240.0
OMEGA_GRID = np.logspace(np.log10(0.01), 1.0, 300)


@pytest.fixture(scope="module")
def tfs():
    return qft_paper_transfer_functions()


def test_shipped_profile_matches_factored_forms(tfs):
    # spot-check expanded coefficients against hand expansion
    g11 = tfs["g11"]
    np.testing.assert_allclose(g11.num, [5 / 49, 3 / 7, 0.25], rtol=1e-15)
    np.testing.assert_allclose(g11.den, [0.001, 0.11, 1.0, 0.0], rtol=1e-15)
    f22 = tfs["f22"]
    np.testing.assert_allclose(f22.num, [1.0])
    np.testing.assert_allclose(f22.den, [0.5, 1.5, 1.0], rtol=1e-15)
    g21 = tfs["g21"]
    assert g21.den[-1] == 0.0 and g21.den[-2] == 0.0            # double integrator
    assert g21.num[-1] == pytest.approx(-0.035, rel=1e-12)


def test_config_profile_equals_builtin(config, tfs):
    from_config = config.transfer_functions()
    for name, tf in tfs.items():
        np.testing.assert_allclose(from_config[name].num, tf.num, rtol=1e-12)
        np.testing.assert_allclose(from_config[name].den, tf.den, rtol=1e-12)


def test_rational_tf_validation():
    with pytest.raises(ValueError):
        RationalTF(num=(1.0, 0.0), den=(1.0,))       # improper
    with pytest.raises(ValueError):
        RationalTF(num=(1.0,), den=(0.0,))
    with pytest.raises(ValueError):
        RationalTF(num=(np.inf,), den=(1.0, 1.0))


def test_pure_integrator_pole_at_one():
    lti = discretize(RationalTF(num=(1.0,), den=(1.0, 0.0)), RATE)
    A, B, C, D = lti.state_space()
    poles = np.linalg.eigvals(np.atleast_2d(A))
    assert poles[0] == pytest.approx(1.0, abs=0.0)


def test_dc_gain_preserved_for_finite_tfs(tfs):
    for name in ("f11", "f22"):
        lti = discretize(tfs[name], RATE)
        dc_continuous = tfs[name].response(np.array([0.0]))[0]
        dc_discrete = lti.response(np.array([0.0]))[0]
        assert abs(dc_discrete - dc_continuous) < 1e-12


def test_frequency_response_match_all_blocks(tfs):
    for name, tf in tfs.items():
        lti = discretize(tf, RATE)
        mag_d = np.abs(lti.response(OMEGA_GRID))
        mag_c = np.abs(tf.response(OMEGA_GRID))
        assert np.max(np.abs(mag_d - mag_c) / mag_c) < 0.01, name


def test_nyquist_guard_warning():
    fast = RationalTF(num=(1.0,), den=(1 / 100.0, 1.0))    # break at 100 rad/s
    assert not discretize(fast, 240.0).nyquist_warning
    assert discretize(fast, 20.0).nyquist_warning


def test_state_dimension_matches_denominator_degree(tfs):
    for name, tf in tfs.items():
        lti = discretize(tf, RATE)
        assert lti.order == len(tf.den) - 1
        A, B, C, D = lti.state_space()
        assert A.shape == (lti.order, lti.order)


def test_state_space_equals_section_cascade(tfs, rng):
    for tf in tfs.values():
        lti = discretize(tf, RATE)
        A, B, C, D = lti.state_space()
        u = rng.normal(size=64)
        x = np.zeros(len(B))
        ys = []
        for uk in u:
            ys.append(C @ x + D * uk)
            x = A @ x + B * uk
        lti.reset()
        yc = [lti.step(uk) for uk in u]
        np.testing.assert_allclose(ys, yc, atol=1e-12)


def test_lti_linearity_and_time_invariance(tfs, rng):
    tf = tfs["g22"]
    u1 = rng.normal(size=200)
    u2 = rng.normal(size=200)

    def response(u):
        lti = discretize(tf, RATE)
        return np.array([lti.step(v) for v in u])

    left = response(u1 + 0.7 * u2)
    right = response(u1) + 0.7 * response(u2)
    np.testing.assert_allclose(left, right, atol=1e-9)
    # time invariance: shifted input gives shifted output
    shifted = np.concatenate([np.zeros(10), u1])
    y = response(u1)
    ys = response(shifted)
    np.testing.assert_allclose(ys[10:], y, atol=1e-9)
    np.testing.assert_array_equal(ys[:10], np.zeros(10))


def test_g11_ramp_slope_low_frequency(tfs):
    # integrator gain: constant unit error ramps the output at 0.25 rad/s
    lti = discretize(tfs["g11"], RATE)
    ys = [lti.step(1.0) for _ in range(int(40 * RATE))]
    slope = (ys[-1] - ys[int(20 * RATE)]) / 20.0
    assert slope == pytest.approx(0.25, rel=1e-3)


def test_bank_zero_in_zero_out():
    bank = ControllerBank()
    assert bank.step(0.0, 0.0, 0.0, 0.0) == (0.0, 0.0)


def test_bank_wiring_no_cross_into_arms():
    bank = ControllerBank()
    for _ in range(240):
        u_arms, u_legs = bank.step(0.0, 1.0, 0.0, 0.0)   # pure speed error
    assert u_arms == 0.0
    assert u_legs != 0.0


def test_bank_yaw_error_reaches_both_channels():
    bank = ControllerBank()
    for _ in range(240):
        u_arms, u_legs = bank.step(0.5, 0.0, 0.0, 0.0)
    assert u_arms > 0.0
    assert u_legs != 0.0                                  # through G21


def test_bank_output_clamped():
    bank = ControllerBank()
    for _ in range(2400):
        u_arms, u_legs = bank.step(5.0, 5.0, 0.0, 0.0)
    assert abs(u_arms) <= np.deg2rad(30.0)
    assert abs(u_legs) <= np.deg2rad(30.0)


def test_bank_rejects_non_finite():
    bank = ControllerBank()
    state_before = bank.g11.state.copy()
    with pytest.raises(ValueError):
        bank.step(np.nan, 0.0, 0.0, 0.0)
    np.testing.assert_array_equal(bank.g11.state, state_before)


def test_anti_windup_releases_within_five_samples():
    bank = ControllerBank()
    lim = bank.output_limit
    for _ in range(2400):                                 # 10 s pinned at the clamp
        u_arms, _ = bank.step(1.0, 0.0, 0.0, 0.0)
    assert u_arms == pytest.approx(lim)
    # reverse the error through the unfiltered measurement path
    released = None
    for k in range(5):
        u_arms, _ = bank.step(1.0, 0.0, 3.0, 0.0)
        if abs(u_arms) < lim:
            released = k
            break
    assert released is not None and released < 5


def test_bank_linearity_scaling():
    # scaling command and measurement by lambda scales the pre-clamp output
    def run(scale):
        bank = ControllerBank()
        outs = []
        for k in range(480):
            outs.append(bank.step(scale * 0.05, scale * 0.02,
                                  scale * 0.01, scale * 0.005))
        return np.array(outs)

    small = run(1.0)
    double = run(2.0)
    np.testing.assert_allclose(double, 2.0 * small, atol=1e-12)


def test_bank_reset_restores_zero_state():
    bank = ControllerBank()
    for _ in range(100):
        bank.step(0.3, 0.2, 0.1, 0.0)
    bank.reset()
    assert bank.step(0.0, 0.0, 0.0, 0.0) == (0.0, 0.0)


def test_delay_compensated_errors():
    assert delay_compensated_errors(0.5, 2.0, 0.1, 1.5) == (0.4, 0.5)
    # zero delay with current measurements is the plain error pair
    assert delay_compensated_errors(0.5, 2.0, 0.2, 1.0, t_delay=0.0) == (0.3, 1.0)
    with pytest.raises(ValueError):
        delay_compensated_errors(0.0, 0.0, 0.0, 0.0, t_delay=2.5)
    with pytest.raises(ValueError):
        delay_compensated_errors(0.0, 0.0, 0.0, 0.0, t_delay=-0.1)


def test_adaptive_trim_zero_and_constant():
    trim = AdaptiveTrim(kp=0.3, ki=0.1)
    assert trim.step(0.0, 0.0, 0.1) == (0.0, 0.0)
    trim.reset()
    d = 0.05
    dt = 0.01
    steps = 200                                           # T = 2 s
    for _ in range(steps):
        arms, legs = trim.step(d, 2 * d, dt)
    T = steps * dt
    assert arms == pytest.approx((0.3 + 0.1 * T) * d, rel=1e-9)
    assert legs == pytest.approx((0.3 + 0.1 * T) * 2 * d, rel=1e-9)


def test_controller_bank_missing_tf():
    with pytest.raises(ValueError):
        ControllerBank(tfs={"g11": RationalTF(num=(1.0,), den=(1.0, 1.0))})
