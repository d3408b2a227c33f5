"""Development probe: measured plant frequency response + loop margins.

Injects small sinusoidal pattern angles open-loop around the trimmed fall,
demodulates the velocity responses, and prints the loop transfer margins
with the shipped controllers. Used to tune the default aero coefficients.
"""

from __future__ import annotations

import sys

import numpy as np

from freefall import dynamics as dyn
from freefall.biomech import build_body
from freefall.config import load_config
from freefall.control import qft_paper_transfer_functions
from freefall.patterns import compose_posture


def settle_state(body, pset, coeffs, density, duration=16.0):
    state, _ = dyn.settle(body, pset.neutral, coeffs, duration=duration,
                          air_density=density)
    return state


def probe_response(body, pset, coeffs, density, state0, pattern_index, omega,
                   amp=0.03, cycles=6, settle_cycles=3):
    dt = 1.0 / 240.0
    period = 2.0 * np.pi / omega
    t_total = (cycles + settle_cycles) * period
    state = state0
    prev = pset.neutral.copy()
    ts, ys, vs = [], [], []
    t = 0.0
    u = np.zeros(2)
    while t < t_total:
        u[pattern_index] = amp * np.sin(omega * t)
        posture = compose_posture(pset, u)
        rate = (posture - prev) / dt
        state = dyn.step(body, posture, rate, state, coeffs, dt, density)
        prev = posture
        t += dt
        ts.append(t)
        ys.append(dyn.yaw_rate(state))
        vs.append(dyn.forward_speed(state))
    ts = np.array(ts)
    signal = np.array(ys if pattern_index == 0 else vs)
    mask = ts > settle_cycles * period
    tt = ts[mask]
    sig = signal[mask] - signal[mask].mean()
    ref = amp * np.sin(omega * tt)
    # quadrature demodulation
    c = 2.0 * np.mean(sig * np.sin(omega * tt))
    s = 2.0 * np.mean(sig * np.cos(omega * tt))
    h = (c + 1j * s) / amp
    return h


def margins(loop_response, omegas, label, delays=(0.0, 0.7, 1.0)):
    mags = np.abs(loop_response)
    phases = np.unwrap(np.angle(loop_response))
    print(f"\n{label}: loop |L| and phase")
    for w, m, p in zip(omegas, mags, np.degrees(phases)):
        print(f"  w={w:5.2f}  |L|={m:7.3f}  ph={p:8.1f} deg")
    for delay in delays:
        ph_d = np.degrees(phases) - np.degrees(w * delay) if False else None
        # find crossover by interpolation in log|L|
        idx = np.where(np.diff(np.sign(np.log(mags))))[0]
        if len(idx) == 0:
            print(f"  delay {delay}: no crossover in grid")
            continue
        i = idx[-1]
        f = -np.log(mags[i]) / (np.log(mags[i + 1]) - np.log(mags[i]))
        wc = omegas[i] * (omegas[i + 1] / omegas[i]) ** f
        ph_c = np.interp(np.log(wc), np.log(omegas), np.degrees(phases))
        pm = 180.0 + ph_c - np.degrees(wc * delay)
        print(f"  delay {delay:.1f}s: crossover {wc:.2f} rad/s, PM {pm:+.1f} deg")


def main(argv):
    cfg = load_config()
    body = build_body(cfg.anthropometrics())
    coeffs = cfg.aero_coefficients()
    density = cfg.air_density()
    pset = cfg.pattern_set()
    tfs = qft_paper_transfer_functions()

    state0 = settle_state(body, pset, coeffs, density)
    omegas = np.array([0.3, 0.5, 0.8, 1.2, 1.8, 2.6, 3.8, 5.5, 8.0])

    which = argv[0] if argv else "yaw"
    if which in ("yaw", "both"):
        P = np.array([probe_response(body, pset, coeffs, density, state0, 0, w)
                      for w in omegas])
        print("yaw plant P(jw):")
        for w, h in zip(omegas, P):
            print(f"  w={w:5.2f}  |P|={abs(h):7.3f}  ph={np.degrees(np.angle(h)):7.1f}")
        L = tfs["g11"].response(omegas) * P
        margins(L, omegas, "yaw loop G11*P")
    if which in ("speed", "both"):
        P = np.array([probe_response(body, pset, coeffs, density, state0, 1, w)
                      for w in omegas])
        print("speed plant P(jw):")
        for w, h in zip(omegas, P):
            print(f"  w={w:5.2f}  |P|={abs(h):7.3f}  ph={np.degrees(np.angle(h)):7.1f}")
        L = tfs["g22"].response(omegas) * P
        margins(L, omegas, "speed loop G22*P")


if __name__ == "__main__":
    main(sys.argv[1:])
