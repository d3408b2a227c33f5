"""Development probe: geometry sanity, trim and pattern response.

Run with:  python scripts/plant_probe.py [geometry|trim|calibrate|patterns|gain ...]

Used while tuning the shipped neutral posture and aero defaults; reads the
current packaged config so it always reflects the shipped values. Not part
of the test suite.
"""

from __future__ import annotations

import sys

import numpy as np

from freefall import biomech, dynamics
from freefall.biomech import build_body
from freefall.config import load_config
from freefall.patterns import compose_posture
from freefall.rotations import quat_to_matrix

np.set_printoptions(precision=4, suppress=True, linewidth=120)


def probe_geometry(body, posture):
    poses = biomech.forward_kinematics(body, posture)
    print("segment positions (body frame, z ventral):")
    for name, pos in zip(biomech.SEGMENT_NAMES, poses.positions):
        print(f"  {name:13s} {pos}")
    ms = biomech.mass_state(body, posture)
    print("cog:", ms.cog)
    print("inertia diag:", np.diag(ms.inertia))
    print("area_total:", body.area_total)


def probe_trim(body, posture, coeffs, density):
    state, vterm = dynamics.settle(body, posture, coeffs, duration=25.0,
                                   air_density=density)
    R = quat_to_matrix(state.quaternion)
    print(f"terminal vz = {vterm:.2f} m/s")
    print(f"horizontal drift vx,vy = {state.velocity[0]:+.4f}, {state.velocity[1]:+.4f} m/s")
    print(f"body x-axis (inertial): {R[:, 0]}")
    print(f"omega: {state.angular_rate}")


def probe_static_response(body, pset, coeffs, density):
    state0, _ = dynamics.settle(body, pset.neutral, coeffs, duration=20.0,
                                air_density=density)
    w0 = dynamics.aero_wrench(body, pset.neutral, state0, coeffs, density)
    for name, u in (("arms", [0.1, 0.0]), ("arms", [-0.1, 0.0]),
                    ("legs", [0.0, 0.2]), ("legs", [0.0, -0.2])):
        posture = compose_posture(pset, np.array(u))
        w = dynamics.aero_wrench(body, posture, state0, coeffs, density)
        print(f"{name} u={u}: dF={w.force - w0.force} dM={w.moment - w0.moment}")


def probe_gain(body, pset, coeffs, density):
    state0, _ = dynamics.settle(body, pset.neutral, coeffs, duration=20.0,
                                air_density=density)
    dt = 1.0 / 240.0
    for label, u in (("arms +0.15", [0.15, 0.0]), ("arms -0.15", [-0.15, 0.0]),
                     ("legs +0.25", [0.0, 0.25]), ("legs -0.25", [0.0, -0.25])):
        state = state0
        prev = pset.neutral
        posture = compose_posture(pset, np.array(u))
        for _ in range(int(16.0 / dt)):
            state = dynamics.step(body, posture, (posture - prev) / dt, state,
                                  coeffs, dt, density)
            prev = posture
        print(f"{label}: yaw={dynamics.yaw_rate(state):+.3f} rad/s "
              f"fwd={dynamics.forward_speed(state):+.3f} m/s "
              f"vz={state.velocity[2]:.1f}")


def main(argv):
    cfg = load_config()
    body = build_body(cfg.anthropometrics())
    pset = cfg.pattern_set()
    coeffs = cfg.aero_coefficients()
    density = cfg.air_density()
    probes = argv or ["geometry", "trim"]
    if "geometry" in probes:
        probe_geometry(body, pset.neutral)
    if "calibrate" in probes:
        coeffs, info = dynamics.calibrate(body, pset.neutral, coeffs,
                                          air_density=density)
        print("calibrated c_drag_max:", coeffs.c_drag_max,
              "-> terminal", info["terminal_speed"])
    if "trim" in probes:
        probe_trim(body, pset.neutral, coeffs, density)
    if "patterns" in probes:
        probe_static_response(body, pset, coeffs, density)
    if "gain" in probes:
        probe_gain(body, pset, coeffs, density)


if __name__ == "__main__":
    main(sys.argv[1:])
