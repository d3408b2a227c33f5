"""Episode orchestration: guidance -> controllers -> cues -> trainee -> dynamics.

The loop runs at the simulator input rate (240 Hz). Each tick logs one
columnar record; cues computed at tick k depend only on data through tick k.
Episodes end in exactly one outcome: completed, timeout, diverged or
stream_lost.

Logs persist as line-delimited JSON: one self-describing header object
(scenario, config hash, seed, backend) followed by one object per tick.
Recomputing dynamics from the logged pattern angles reproduces the logged
trajectory exactly for trainees whose output stays in the pattern span.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import cues as cues_mod
from . import dynamics as dyn
from . import guidance as gd
from .biomech import build_body
from .config import Config, load_scenario_dict
from .control import AdaptiveTrim
from .kernels import backend_name
from .patterns import compose_posture, project
from .rotations import quat_from_axis_angle
from .trainee import trainee_from_spec

Array = np.ndarray

LOG_VERSION = 1

COLUMNS = [
    "time",
    "px", "py", "pz", "vx", "vy", "vz",
    "qw", "qx", "qy", "qz", "wx", "wy", "wz",
    "omega_com", "v_com", "omega_meas", "v_meas", "psi_error",
    "u_arms", "u_legs", "u_cue_arms", "u_cue_legs",
    "u_exec_arms", "u_exec_legs", "exec_residual",
    "arrow_origin_x", "arrow_origin_y", "arrow_pred_heading", "arrow_des_heading",
    "cross_track", "inside", "progress",
]

OUTCOMES = ("completed", "timeout", "diverged", "stream_lost")


class LogCorruptError(RuntimeError):
    def __init__(self, record_index: int, reason: str):
        super().__init__(f"corrupt log record {record_index}: {reason}")
        self.record_index = record_index


@dataclass(frozen=True)
class Scenario:
    name: str = "default-approach"
    kind: str = "approach"
    start: tuple = (0.0, 0.0)
    target: tuple = (150.0, 0.0)
    via: tuple = ()
    start_offset: tuple = (0.0, 1.5)
    corridor_half_width: float = 10.0
    t_lookahead: float = 2.25
    cruise_speed: float = 3.0
    accel: float = 0.5
    approach_speed: float = 1.0
    capture_radius: float = 2.0
    timeout: float = 240.0
    trainee: dict = field(default_factory=lambda: {"kind": "ideal"})
    seed: int = 0
    external_input: bool = False
    delay_compensation: dict = field(default_factory=lambda: {"enabled": False, "t_delay_s": 0.0})
    adaptive_trim: dict = field(default_factory=lambda: {"enabled": False, "kp": 0.3, "ki": 0.1})
    imitation: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.timeout <= 0.0:
            raise ValueError("timeout must be positive")
        if self.capture_radius <= 0.0:
            raise ValueError("capture radius must be positive")
        if self.kind not in ("approach", "imitation"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")

    @staticmethod
    def from_mapping(raw: dict) -> "Scenario":
        speed = raw.get("speed_profile", {})
        return Scenario(
            name=raw.get("name", "scenario"),
            kind=raw.get("kind", "approach"),
            start=tuple(raw.get("start_xy_m", (0.0, 0.0))),
            target=tuple(raw.get("target_xy_m", (150.0, 0.0))),
            via=tuple(tuple(p) for p in raw.get("via_xy_m", ())),
            start_offset=tuple(raw.get("start_offset_xy_m", (0.0, 1.5))),
            corridor_half_width=float(raw.get("corridor_half_width_m", 10.0)),
            t_lookahead=float(raw.get("t_lookahead_s", 2.25)),
            cruise_speed=float(speed.get("cruise_m_s", 3.0)),
            accel=float(speed.get("accel_m_s2", 0.5)),
            approach_speed=float(speed.get("approach_m_s", 1.0)),
            capture_radius=float(raw.get("capture_radius_m", 2.0)),
            timeout=float(raw.get("timeout_s", 240.0)),
            trainee=raw.get("trainee", {"kind": "ideal"}),
            seed=int(raw.get("seed", 0)),
            external_input=bool(raw.get("external_input", False)),
            delay_compensation=raw.get("delay_compensation", {"enabled": False, "t_delay_s": 0.0}),
            adaptive_trim=raw.get("adaptive_trim", {"enabled": False, "kp": 0.3, "ki": 0.1}),
            imitation=raw.get("imitation", {}),
        )


def load_scenario(path: str | None = None, overrides: dict | None = None) -> Scenario:
    return Scenario.from_mapping(load_scenario_dict(path, overrides))


class EpisodeLog:
    """Columnar per-tick records plus header metadata and the outcome."""

    def __init__(self, columns=COLUMNS, header: dict | None = None):
        self.columns = list(columns)
        self.header = header or {}
        self._rows = []
        self._data = None
        self.outcome = None
        self.completion_time = None

    def append(self, row):
        if len(row) != len(self.columns):
            raise ValueError("row width mismatch")
        self._rows.append(tuple(float(v) for v in row))
        self._data = None

    def finalize(self, outcome: str, completion_time: float | None):
        if self.outcome is not None:
            raise RuntimeError("outcome already set")
        if outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {outcome!r}")
        self.outcome = outcome
        self.completion_time = completion_time

    def __len__(self):
        return len(self._rows)

    @property
    def data(self) -> dict:
        if self._data is None:
            arr = np.array(self._rows) if self._rows else np.zeros((0, len(self.columns)))
            self._data = {name: arr[:, i] for i, name in enumerate(self.columns)}
        return self._data

    def __getitem__(self, column: str) -> Array:
        return self.data[column]

    def save(self, path):
        with open(path, "w") as fh:
            head = {
                "type": "header",
                "log_version": LOG_VERSION,
                "outcome": self.outcome,
                "completion_time": self.completion_time,
                "columns": self.columns,
            }
            head.update(self.header)
            fh.write(json.dumps(head) + "\n")
            for k, row in enumerate(self._rows):
                rec = {"type": "tick", "k": k}
                rec.update({name: value for name, value in zip(self.columns, row)})
                fh.write(json.dumps(rec) + "\n")

    @staticmethod
    def load(path) -> "EpisodeLog":
        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise LogCorruptError(0, "empty file")
        try:
            head = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise LogCorruptError(0, str(exc)) from None
        if head.get("type") != "header":
            raise LogCorruptError(0, "missing header")
        log = EpisodeLog(columns=head["columns"],
                         header={k: v for k, v in head.items()
                                 if k not in ("type", "log_version", "outcome",
                                              "completion_time", "columns")})
        expected_k = 0
        for i, line in enumerate(lines[1:], start=1):
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogCorruptError(i, str(exc)) from None
            if rec.get("type") != "tick" or rec.get("k") != expected_k:
                raise LogCorruptError(i, "tick sequence broken")
            try:
                log.append([rec[name] for name in log.columns])
            except KeyError as exc:
                raise LogCorruptError(i, f"missing column {exc}") from None
            expected_k += 1
        log.outcome = head.get("outcome")
        log.completion_time = head.get("completion_time")
        return log


def _initial_state(scenario: Scenario, path: gd.PlannedPath | None) -> dyn.SkyState:
    if path is not None:
        tangent = path.waypoints[1] - path.waypoints[0]
        heading = float(np.arctan2(tangent[1], tangent[0]))
    else:
        heading = 0.0
    return dyn.SkyState.initial(
        position=(scenario.start[0] + scenario.start_offset[0],
                  scenario.start[1] + scenario.start_offset[1], 0.0),
        velocity=(0.0, 0.0, dyn.TERMINAL_SPEED_TARGET),
        quaternion=quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), heading),
    )


class _Channels:
    """Per-tick taps for the service layer (None when unused)."""

    def __init__(self, on_tick=None, external=None):
        self.on_tick = on_tick
        self.external = external


def run_episode(scenario: Scenario, config: Config, input_source=None,
                on_tick=None) -> EpisodeLog:
    """Run one headless episode and return its log.

    `input_source` (required when scenario.external_input) provides
    `poll(time) -> (u_arms, u_legs) | None`; the latest value wins within a
    tick and values older than 1 s abort the episode. `on_tick(k, record)` is
    an optional tap for the streaming service.
    """
    body = build_body(config.anthropometrics())
    coeffs = config.aero_coefficients()
    density = config.air_density()
    rate = config.sample_rate()
    dt = 1.0 / rate
    pset = config.pattern_set()
    bank = config.controller_bank()
    bank.reset()
    cue_lims = cues_mod.cue_limits(pset, config.cue_rate_limit())
    cue_params = config.cue_parameters()

    if scenario.kind == "imitation":
        path = None
        imit = scenario.imitation or {}
        imitation = cues_mod.ImitationSpec(
            amplitude=float(np.deg2rad(imit.get("amplitude_deg", 10.0))),
            frequency=float(imit.get("frequency_hz", 0.25)),
            pattern=pset.pattern_named(imit.get("pattern", "turning")),
            hold_threshold=float(np.deg2rad(imit.get("hold_threshold_deg", 3.0))),
            hold_duration=float(imit.get("hold_duration_s", 3.0)),
        )
        tracker = cues_mod.HoldTracker(imitation.hold_threshold, imitation.hold_duration)
    else:
        path = gd.plan_path(scenario.start, scenario.target,
                            cruise_speed=scenario.cruise_speed, accel=scenario.accel,
                            approach_speed=scenario.approach_speed,
                            corridor_half_width=scenario.corridor_half_width,
                            via=scenario.via)
        imitation = None
        tracker = None

    if scenario.external_input:
        if input_source is None:
            raise ValueError("external_input scenario needs an input_source")
        trainee = None
    else:
        trainee = trainee_from_spec(scenario.trainee, pset.neutral, rate, seed=scenario.seed)

    delay_cfg = scenario.delay_compensation or {}
    delay_on = bool(delay_cfg.get("enabled", False))
    t_delay = float(delay_cfg.get("t_delay_s", 0.0))
    trim_cfg = scenario.adaptive_trim or {}
    trim_on = bool(trim_cfg.get("enabled", False))
    trim = AdaptiveTrim(kp=float(trim_cfg.get("kp", 0.0)),
                        ki=float(trim_cfg.get("ki", 0.0))) if trim_on else None
    if trim_on:
        ideal_state = _initial_state(scenario, path)
        ideal_bank = config.controller_bank()
        ideal_bank.reset()
        ideal_prev_cue = pset.neutral.copy()
        ideal_prev_exec = pset.neutral.copy()

    header = {
        "scenario": scenario.name,
        "scenario_kind": scenario.kind,
        "config_hash": config.config_hash,
        "seed": scenario.seed,
        "backend": backend_name(),
        "rate_hz": rate,
    }
    log = EpisodeLog(header=header)

    state = _initial_state(scenario, path)
    prev_cue = pset.neutral.copy()
    prev_exec = pset.neutral.copy()
    target = np.asarray(scenario.target, dtype=float)
    last_input = (0.0, 0.0)
    last_input_time = 0.0
    outcome = None
    completion_time = None

    k = 0
    while True:
        t = k * dt
        if t >= scenario.timeout:
            outcome = "timeout"
            break

        omega_meas = dyn.yaw_rate(state)
        v_meas = dyn.forward_speed(state)

        if path is not None:
            cmd = gd.guidance_step(path, state, scenario.t_lookahead)
            corridor = gd.corridor_status(path, state.position)
            omega_com, v_com, psi_error = cmd.omega_com, cmd.v_com, cmd.psi_error
        else:
            omega_com = v_com = psi_error = 0.0
            corridor = {"cross_track": 0.0, "inside": True, "progress": 0.0}

        om_used, v_used = omega_meas, v_meas
        if delay_on and t_delay > 0.0:
            om_used, v_used = dyn.predict_velocities(
                body, prev_exec, state, coeffs, t_delay,
                air_density=density, dt=1.0 / 60.0)

        trim_arms = trim_legs = 0.0
        if trim_on:
            ideal_cmd = gd.guidance_step(path, ideal_state, scenario.t_lookahead)
            iu_arms, iu_legs = ideal_bank.step(
                ideal_cmd.omega_com, ideal_cmd.v_com,
                dyn.yaw_rate(ideal_state), dyn.forward_speed(ideal_state))
            ideal_cue = cues_mod.desired_posture_cue(
                pset, np.array([iu_arms, iu_legs]), ideal_prev_cue, dt, cue_lims)
            ideal_rate = (ideal_cue - ideal_prev_exec) / dt
            trim_arms, trim_legs = trim.step(
                dyn.yaw_rate(ideal_state) - omega_meas,
                dyn.forward_speed(ideal_state) - v_meas, dt)
            ideal_state = dyn.step(body, ideal_cue, ideal_rate, ideal_state,
                                   coeffs, dt, density)
            ideal_prev_cue = ideal_cue
            ideal_prev_exec = ideal_cue

        if imitation is not None:
            sine_target = cues_mod.imitation_target(imitation, t, pset.neutral)
            proj = project(pset, sine_target)
            u_arms, u_legs = float(proj.angles[0]), float(proj.angles[1])
        else:
            u_arms, u_legs = bank.step(omega_com, v_com, om_used, v_used,
                                       trim_arms=trim_arms, trim_legs=trim_legs)

        cue_posture = cues_mod.desired_posture_cue(
            pset, np.array([u_arms, u_legs]), prev_cue, dt, cue_lims)
        cue_proj = project(pset, cue_posture)

        if scenario.external_input:
            polled = input_source.poll(t)
            if polled is not None:
                last_input = (float(polled[0]), float(polled[1]))
                last_input_time = t
            elif t - last_input_time > 1.0 and t > 1.0:
                outcome = "stream_lost"
                break
            executed = compose_posture(pset, np.array(last_input))
        else:
            executed = trainee.step(cue_posture, dt)

        exec_proj = project(pset, executed)
        residual = float(np.linalg.norm(
            executed - compose_posture(pset, exec_proj.angles)))
        exec_rate = (executed - prev_exec) / dt

        arrows = cues_mod.forward_arrows(state, omega_meas, omega_com,
                                         cue_params["t_predict"])
        if tracker is not None:
            tracker.update(cue_posture, executed, dt)

        row = [
            t,
            state.position[0], state.position[1], state.position[2],
            state.velocity[0], state.velocity[1], state.velocity[2],
            state.quaternion[0], state.quaternion[1], state.quaternion[2], state.quaternion[3],
            state.angular_rate[0], state.angular_rate[1], state.angular_rate[2],
            omega_com, v_com, omega_meas, v_meas, psi_error,
            u_arms, u_legs, cue_proj.angles[0], cue_proj.angles[1],
            exec_proj.angles[0], exec_proj.angles[1], residual,
            arrows[0].origin[0], arrows[0].origin[1],
            arrows[0].heading, arrows[1].heading,
            corridor["cross_track"], float(corridor["inside"]), corridor["progress"],
        ]
        log.append(row)
        if on_tick is not None:
            on_tick(k, row, cue_posture, executed)

        try:
            state = dyn.step(body, executed, exec_rate, state, coeffs, dt, density)
        except dyn.DivergenceError:
            outcome = "diverged"
            break
        prev_cue = cue_posture
        prev_exec = executed
        k += 1

        if path is not None:
            dist = float(np.hypot(state.position[0] - target[0],
                                  state.position[1] - target[1]))
            if dist <= scenario.capture_radius:
                outcome = "completed"
                completion_time = state.time
                break
        elif tracker is not None and tracker.within_for >= imitation.hold_duration and t > 1.0:
            outcome = "completed"
            completion_time = state.time
            break

    log.finalize(outcome, completion_time)
    return log


@dataclass(frozen=True)
class Metrics:
    completion_time: float | None
    max_u_arms: float
    max_u_legs: float
    max_omega_com: float
    yaw_tracking_rms: float
    corridor_violation_time: float
    progress_fraction: float
    outcome: str

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "completion_time_s": self.completion_time,
            "max_u_arms_rad": self.max_u_arms,
            "max_u_legs_rad": self.max_u_legs,
            "max_omega_com_rad_s": self.max_omega_com,
            "yaw_tracking_rms_rad_s": self.yaw_tracking_rms,
            "corridor_violation_time_s": self.corridor_violation_time,
            "progress_fraction": self.progress_fraction,
        }


def compute_metrics(log: EpisodeLog, path_length: float | None = None) -> Metrics:
    """Aggregate episode metrics; deterministic and idempotent on replays."""
    if len(log) == 0:
        raise ValueError("empty episode log")
    d = log.data
    dt = float(d["time"][1] - d["time"][0]) if len(log) > 1 else 0.0
    if path_length is None:
        progress_max = float(d["progress"].max())
        total = max(progress_max, 1e-9)
        fraction = 1.0 if log.outcome == "completed" else float("nan")
        # without the plan, fall back to the logged progress relative extent
        if log.outcome != "completed":
            fraction = float(progress_max / total) if total > 0 else 0.0
    else:
        fraction = float(min(d["progress"].max() / path_length, 1.0))
    return Metrics(
        completion_time=log.completion_time if log.outcome == "completed" else None,
        max_u_arms=float(np.abs(d["u_arms"]).max()),
        max_u_legs=float(np.abs(d["u_legs"]).max()),
        max_omega_com=float(np.abs(d["omega_com"]).max()),
        yaw_tracking_rms=float(np.sqrt(np.mean((d["omega_com"] - d["omega_meas"]) ** 2))),
        corridor_violation_time=float(np.sum(d["inside"] < 0.5) * dt),
        progress_fraction=fraction,
        outcome=log.outcome or "unknown",
    )


def sustained_oscillation(log: EpisodeLog, window: float = 20.0,
                          min_crossings: int = 3, guard: float = np.deg2rad(0.5),
                          settle: float = 10.0) -> bool:
    """True when the yaw-rate tracking error keeps oscillating.

    A qualifying crossing is a sign change between excursions beyond the
    +/-guard band. Sustained means every `window`-second span inside
    [settle, end] contains at least `min_crossings` crossings.
    """
    d = log.data
    t = d["time"]
    if len(t) < 2 or t[-1] < settle + window:
        return False
    err = d["omega_com"] - d["omega_meas"]
    crossings = []
    last_sign = 0
    for ti, ei in zip(t, err):
        if ei > guard:
            sign = 1
        elif ei < -guard:
            sign = -1
        else:
            continue
        if last_sign != 0 and sign != last_sign:
            crossings.append(ti)
        last_sign = sign
    crossings = np.array(crossings)
    starts = np.arange(settle, t[-1] - window + 1e-9, 1.0)
    if len(starts) == 0:
        return False
    for w0 in starts:
        n = int(np.sum((crossings >= w0) & (crossings <= w0 + window)))
        if n < min_crossings:
            return False
    return True


def replay(log: EpisodeLog, speed_factor: float = 1.0, pace=None):
    """Yield per-tick replay records, optionally paced against wall clock.

    `pace` is a sleep callable (tests inject a fake); records are yielded in
    log order and bit-identical to the recording.
    """
    if speed_factor <= 0.0:
        raise ValueError("speed_factor must be positive")
    d = log.data
    times = d["time"]
    for k in range(len(log)):
        if pace is not None and k > 0:
            pace((times[k] - times[k - 1]) / speed_factor)
        yield {name: d[name][k] for name in log.columns}


def export_csv(log: EpisodeLog, path):
    """Flat CSV export of the per-tick records for plotting."""
    d = log.data
    with open(path, "w") as fh:
        fh.write(",".join(log.columns) + "\n")
        for k in range(len(log)):
            fh.write(",".join(repr(float(d[name][k])) for name in log.columns) + "\n")
