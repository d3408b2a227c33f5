"""Discrete-time realization of the yaw-rate/speed controller bank.

The bank wires five SISO blocks:

    u_arms = G11 * (F11 * omega_com - omega_meas)
    u_legs = G22 * (F22 * v_com - v_meas) + G21 * (F11 * omega_com - omega_meas)

The continuous designs are given as rational transfer functions in the
Laplace variable and discretized by the bilinear (trapezoidal) map at the
simulation rate, realized as a cascade of first-order sections so that pure
integrators stay explicit. Anti-windup is conditional integration: when a
bank output is clamped and its driving error pushes further into the clamp,
the integrator states of that path are held for the sample.

The shipped profile "qft-paper" is built in `qft_paper_transfer_functions`
with exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

Array = np.ndarray

DEFAULT_RATE_HZ = 240.0
OUTPUT_LIMIT = np.deg2rad(30.0)
_POLE_AT_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class RationalTF:
    """num/den polynomial coefficients in s, descending powers."""

    num: tuple
    den: tuple

    def __post_init__(self):
        num = tuple(float(c) for c in self.num)
        den = tuple(float(c) for c in self.den)
        num = _strip_leading(num)
        den = _strip_leading(den)
        if not den or all(c == 0.0 for c in den):
            raise ValueError("zero denominator")
        if len(num) > len(den):
            raise ValueError("improper transfer function (num degree > den degree)")
        if not all(np.isfinite(c) for c in num + den):
            raise ValueError("non-finite coefficients")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def response(self, omega: Array) -> Array:
        """Frequency response at omega rad/s."""
        s = 1j * np.asarray(omega, dtype=float)
        return np.polyval(self.num, s) / np.polyval(self.den, s)

    def max_break_frequency(self) -> float:
        breaks = [0.0]
        for coeffs in (self.num, self.den):
            if len(coeffs) > 1:
                breaks.extend(abs(r) for r in np.roots(coeffs))
        return float(max(breaks))


def _strip_leading(coeffs):
    coeffs = tuple(coeffs)
    i = 0
    while i < len(coeffs) - 1 and coeffs[i] == 0.0:
        i += 1
    return coeffs[i:]


class _LeadLagSection:
    """Bilinear image of (1 + s/zb)/(1 + s/pb); zb=None means no zero."""

    __slots__ = ("b0", "b1", "a1", "x")

    def __init__(self, zb, pb, period):
        cp = 2.0 / (period * pb)
        cz = 0.0 if zb is None else 2.0 / (period * zb)
        self.b0 = (1.0 + cz) / (1.0 + cp)
        self.b1 = (1.0 - cz) / (1.0 + cp)
        self.a1 = (cp - 1.0) / (cp + 1.0)
        self.x = 0.0

    def step(self, u):
        y = self.x + self.b0 * u
        self.x = self.a1 * self.x + (self.b1 + self.a1 * self.b0) * u
        return y

    def response(self, z):
        return (self.b0 * z + self.b1) / (z - self.a1)

    def reset(self):
        self.x = 0.0


class _PISection:
    """Trapezoidal Kp + Ki/s; the integrator state can be held for a sample."""

    __slots__ = ("kp", "ki", "period", "x", "_x_prev")

    def __init__(self, kp, ki, period):
        self.kp = kp
        self.ki = ki
        self.period = period
        self.x = 0.0
        self._x_prev = 0.0

    def step(self, u):
        self._x_prev = self.x
        y = self.x + (self.kp + 0.5 * self.ki * self.period) * u
        self.x = self.x + self.ki * self.period * u
        return y

    def hold(self):
        """Undo the integrator accumulation of the sample just stepped."""
        self.x = self._x_prev

    def response(self, z):
        return self.kp + 0.5 * self.ki * self.period * (z + 1.0) / (z - 1.0)

    def reset(self):
        self.x = 0.0
        self._x_prev = 0.0


class DiscreteLTI:
    """Cascade realization of a discretized rational transfer function.

    State dimension equals the continuous denominator degree; `step` is
    deterministic. Build with `discretize`.
    """

    def __init__(self, gain, sections, rate, nyquist_warning=False):
        self.gain = gain
        self.sections = sections
        self.rate = rate
        self.nyquist_warning = nyquist_warning

    def step(self, u: float) -> float:
        y = self.gain * u
        for section in self.sections:
            y = section.step(y)
        return y

    def response(self, omega: Array) -> Array:
        omega = np.asarray(omega, dtype=float)
        z = np.exp(1j * omega / self.rate)
        h = np.full(z.shape, self.gain, dtype=complex)
        for section in self.sections:
            h = h * section.response(z)
        return h

    def reset(self):
        for section in self.sections:
            section.reset()

    @property
    def state(self) -> Array:
        return np.array([s.x for s in self.sections])

    @property
    def order(self) -> int:
        return len(self.sections)

    def integrator_sections(self):
        return [s for s in self.sections if isinstance(s, _PISection)]

    def hold_integrators(self):
        for s in self.integrator_sections():
            s.hold()

    def state_space(self):
        """Composite (A, B, C, D) of the section cascade, states in cascade order."""
        n = len(self.sections)
        A = np.zeros((n, n))
        B = np.zeros(n)
        C = np.zeros(n)
        D = self.gain
        # build by propagating (c_vec, d) of the partial cascade through each section
        c_vec = np.zeros(n)
        d = self.gain
        for i, s in enumerate(self.sections):
            if isinstance(s, _PISection):
                a_i, b_scale, c_i, d_i = 1.0, s.ki * s.period, 1.0, s.kp + 0.5 * s.ki * s.period
            else:
                a_i, b_scale, c_i, d_i = s.a1, s.b1 + s.a1 * s.b0, 1.0, s.b0
            A[i, :] = b_scale * c_vec
            A[i, i] = a_i
            B[i] = b_scale * d
            c_vec = d_i * c_vec
            c_vec[i] = c_i
            d = d_i * d
        return A, B, c_vec, d


def discretize(tf: RationalTF, rate: float = DEFAULT_RATE_HZ) -> DiscreteLTI:
    """Bilinear (trapezoidal) discretization without prewarping.

    Poles at s=0 become exact discrete integrators (pole at z=1); the DC gain
    of transfer functions finite at s=0 is preserved exactly. A Nyquist
    warning flag is set when the sample rate is below twice the fastest
    break frequency.
    """
    if rate <= 0.0:
        raise ValueError("rate must be positive")
    period = 1.0 / rate
    warn = 2.0 * np.pi * rate < 2.0 * tf.max_break_frequency()

    num = np.array(tf.num)
    den = np.array(tf.den)
    zroots = np.roots(num) if len(num) > 1 else np.array([])
    proots = np.roots(den) if len(den) > 1 else np.array([])
    for roots in (zroots, proots):
        if len(roots) and np.max(np.abs(np.imag(roots))) > 1e-9 * (1.0 + np.max(np.abs(roots))):
            raise ValueError("complex poles/zeros are not supported by the section cascade")
    zroots = np.real(zroots)
    proots = np.real(proots)

    scale = 1.0 + max([np.max(np.abs(proots), initial=0.0), np.max(np.abs(zroots), initial=0.0)])
    n_int = int(np.sum(np.abs(proots) < _POLE_AT_ZERO_TOL * scale))
    finite_poles = sorted((-p for p in proots if abs(p) >= _POLE_AT_ZERO_TOL * scale), key=abs)
    zeros = sorted((-z for z in zroots), key=abs)

    # low-frequency gain K: num(0) / (coefficient of s^n_int in den)
    k_gain = num[-1] / den[len(den) - 1 - n_int]

    sections = []
    # integrators take the slowest zeros (classic PI shape)
    pi_zeros = zeros[:n_int]
    rest_zeros = zeros[n_int:]
    for i in range(n_int):
        zb = pi_zeros[i] if i < len(pi_zeros) else None
        kp = 0.0 if zb is None else 1.0 / zb
        sections.append(_PISection(kp=kp, ki=1.0, period=period))
    # pair remaining zeros with the fastest remaining poles, nearest first
    rest_zeros = sorted(rest_zeros, key=abs, reverse=True)
    poles = sorted(finite_poles, key=abs, reverse=True)
    for zb in rest_zeros:
        if not poles:
            raise ValueError("unpaired zero (improper remainder)")
        pb = min(poles, key=lambda p: abs(abs(p) - abs(zb)))
        poles.remove(pb)
        sections.append(_LeadLagSection(zb, pb, period))
    for pb in poles:
        sections.append(_LeadLagSection(None, pb, period))

    # keep integrators at the end of the cascade, nearest the output
    sections.sort(key=lambda s: isinstance(s, _PISection))
    return DiscreteLTI(gain=k_gain, sections=sections, rate=rate, nyquist_warning=warn)


def _poly_mul(*factors):
    out = [Fraction(1)]
    for factor in factors:
        res = [Fraction(0)] * (len(out) + len(factor) - 1)
        for i, a in enumerate(out):
            for j, b in enumerate(factor):
                res[i + j] += a * b
        out = res
    return out


def _tf_from_factors(gain, num_factors, den_factors) -> RationalTF:
    gain = Fraction(gain)
    num = [gain * c for c in _poly_mul(*num_factors)] if num_factors else [gain]
    den = _poly_mul(*den_factors)
    return RationalTF(num=tuple(float(c) for c in num), den=tuple(float(c) for c in den))


def _lead(break_freq) -> list:
    """(1 + s/break) as [1/break, 1] descending."""
    return [Fraction(1, 1) / Fraction(break_freq), Fraction(1)]


_S = [Fraction(1), Fraction(0)]


def qft_paper_transfer_functions() -> dict:
    """The five shipped loop-shaping transfer functions, profile 'qft-paper'."""
    g11 = _tf_from_factors(
        Fraction(1, 4),
        [_lead(Fraction(7, 2)), _lead(Fraction(7, 10))],
        [_S, _lead(10), _lead(100)],
    )
    f11 = _tf_from_factors(
        1,
        [_lead(Fraction(3, 5))],
        [_lead(7), _lead(8), _lead(1)],
    )
    g22 = _tf_from_factors(
        Fraction(1, 10),
        [_lead(Fraction(3, 2)), _lead(Fraction(1, 5)), _lead(1)],
        [_S, _lead(Fraction(3, 5)), _lead(10)],
    )
    g21 = _tf_from_factors(
        Fraction(-35, 1000),
        [_lead(3), _lead(1), _lead(Fraction(1, 2))],
        [_S, _S, _lead(5)],
    )
    f22 = _tf_from_factors(1, [], [_lead(1), _lead(2)])
    return {"g11": g11, "f11": f11, "g22": g22, "g21": g21, "f22": f22}


class ControllerBank:
    """The wired five-block bank with output clamping and anti-windup.

    The G21 cross-term carries a double integrator, so a yaw transient can
    leave its output ramping indefinitely; its contribution therefore gets
    its own envelope (with the same conditional hold), small enough that the
    speed integrator rejects the worst case as a constant disturbance.

    Single-owner mutable state; advance only from the simulation loop.
    """

    def __init__(self, tfs: dict | None = None, rate: float = DEFAULT_RATE_HZ,
                 output_limit: float = OUTPUT_LIMIT,
                 cross_limit: float = np.deg2rad(10.0)):
        tfs = tfs if tfs is not None else qft_paper_transfer_functions()
        missing = {"g11", "f11", "g22", "g21", "f22"} - set(tfs)
        if missing:
            raise ValueError(f"missing transfer functions: {sorted(missing)}")
        self.rate = rate
        self.output_limit = float(output_limit)
        self.cross_limit = float(cross_limit)
        self.g11 = discretize(tfs["g11"], rate)
        self.f11 = discretize(tfs["f11"], rate)
        self.g22 = discretize(tfs["g22"], rate)
        self.g21 = discretize(tfs["g21"], rate)
        self.f22 = discretize(tfs["f22"], rate)
        self._g11_sign = np.sign(tfs["g11"].num[-1] / _low_freq_den(tfs["g11"]))
        self._g22_sign = np.sign(tfs["g22"].num[-1] / _low_freq_den(tfs["g22"]))
        self._g21_sign = np.sign(tfs["g21"].num[-1] / _low_freq_den(tfs["g21"]))

    def reset(self):
        for blk in (self.g11, self.f11, self.g22, self.g21, self.f22):
            blk.reset()

    def step(self, omega_com: float, v_com: float, omega_meas: float, v_meas: float,
             trim_arms: float = 0.0, trim_legs: float = 0.0) -> tuple[float, float]:
        """Advance one sample; returns clamped (u_arms, u_legs) in radians."""
        inputs = (omega_com, v_com, omega_meas, v_meas, trim_arms, trim_legs)
        if not all(np.isfinite(x) for x in inputs):
            raise ValueError("non-finite controller input")
        e_yaw = self.f11.step(omega_com) - omega_meas
        e_vel = self.f22.step(v_com) - v_meas
        raw_arms = self.g11.step(e_yaw) + trim_arms
        raw_cross = self.g21.step(e_yaw)
        cross = min(max(raw_cross, -self.cross_limit), self.cross_limit)
        if raw_cross != cross and raw_cross * self._g21_sign * e_yaw > 0.0:
            self.g21.hold_integrators()
        raw_legs = self.g22.step(e_vel) + cross + trim_legs
        lim = self.output_limit
        u_arms = min(max(raw_arms, -lim), lim)
        u_legs = min(max(raw_legs, -lim), lim)
        # conditional integration: hold integrators that keep pushing into the clamp
        if raw_arms != u_arms and raw_arms * self._g11_sign * e_yaw > 0.0:
            self.g11.hold_integrators()
        if raw_legs != u_legs and raw_legs * self._g22_sign * e_vel > 0.0:
            self.g22.hold_integrators()
        return u_arms, u_legs


def _low_freq_den(tf: RationalTF) -> float:
    den = tf.den
    i = len(den) - 1
    while i > 0 and den[i] == 0.0:
        i -= 1
    return den[i]


def delay_compensated_errors(omega_com: float, v_com: float,
                             omega_meas_predicted: float, v_meas_predicted: float,
                             t_delay: float = 0.0, max_delay: float = 2.0) -> tuple[float, float]:
    """Tracking errors against measurements predicted t_delay ahead.

    With t_delay = 0 the caller passes the current measurements and this is
    the plain error pair.
    """
    if t_delay < 0.0:
        raise ValueError("t_delay must be >= 0")
    if t_delay > max_delay:
        raise ValueError(f"t_delay {t_delay} s outside sane range (max {max_delay} s)")
    return omega_com - omega_meas_predicted, v_com - v_meas_predicted


class AdaptiveTrim:
    """PI pair on the ideal-loop vs measured velocity disparity.

    The outputs are additive pattern-angle corrections applied before the
    bank clamp; zero disparity keeps them at zero.
    """

    def __init__(self, kp: float = 0.0, ki: float = 0.0,
                 limit: float = np.deg2rad(10.0)):
        self.kp = kp
        self.ki = ki
        self.limit = limit
        self._int_arms = 0.0
        self._int_legs = 0.0

    def reset(self):
        self._int_arms = 0.0
        self._int_legs = 0.0

    def step(self, omega_disparity: float, v_disparity: float, dt: float) -> tuple[float, float]:
        self._int_arms += self.ki * omega_disparity * dt
        self._int_legs += self.ki * v_disparity * dt
        lim = self.limit
        self._int_arms = min(max(self._int_arms, -lim), lim)
        self._int_legs = min(max(self._int_legs, -lim), lim)
        arms = self.kp * omega_disparity + self._int_arms
        legs = self.kp * v_disparity + self._int_legs
        return (min(max(arms, -lim), lim), min(max(legs, -lim), lim))
