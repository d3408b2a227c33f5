"""Configuration and scenario loading.

Human-editable YAML files are deep-merged over the packaged defaults
(`data/default_config.yaml`, `data/default_scenario.yaml`). The config hash
recorded in episode logs is the sha256 of the canonical JSON rendering of
the merged config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from .biomech import Anthropometrics, Equipment, N_DOF, dof_index, JOINT_NAMES, DOF_AXES
from .control import ControllerBank, RationalTF
from .dynamics import AeroCoefficients
from .patterns import DofLimits, PatternBasis, PatternSet


def _read_packaged(name: str) -> dict:
    text = resources.files("freefall.data").joinpath(name).read_text()
    return yaml.safe_load(text)


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def _canonical_hash(data: dict) -> str:
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True)
class Config:
    raw: dict

    @property
    def config_hash(self) -> str:
        return _canonical_hash(self.raw)

    def anthropometrics(self) -> Anthropometrics:
        a = self.raw["anthropometrics"]
        eq = a.get("equipment", {})
        return Anthropometrics(
            total_mass=float(a["total_mass_kg"]),
            stature=float(a["stature_m"]),
            segment_overrides=a.get("segment_overrides", {}) or {},
            equipment=Equipment(
                jumpsuit_drag_scale=float(eq.get("jumpsuit_drag_scale", 1.0)),
                helmet=bool(eq.get("helmet", False)),
                weight_belt_kg=float(eq.get("weight_belt_kg", 0.0)),
            ),
        )

    def air_density(self) -> float:
        return float(self.raw["air_density_kg_m3"])

    def aero_coefficients(self) -> AeroCoefficients:
        a = self.raw["aero"]
        scale = float(self.raw["anthropometrics"].get("equipment", {}).get("jumpsuit_drag_scale", 1.0))
        return AeroCoefficients(
            c_lift_max=float(a["c_lift_max"]),
            c_drag_max=float(a["c_drag_max"]) * scale,
            c_moment_max=float(a["c_moment_max"]),
            c_roll_damp=float(a["c_roll_damp"]),
            c_pitch_damp=float(a["c_pitch_damp"]),
            c_yaw_damp=float(a["c_yaw_damp"]),
        )

    def sample_rate(self) -> float:
        return float(self.raw["controllers"]["sample_rate_hz"])

    def transfer_functions(self) -> dict:
        out = {}
        for name, coeffs in self.raw["controllers"]["transfer_functions"].items():
            out[name] = RationalTF(num=tuple(coeffs["num"]), den=tuple(coeffs["den"]))
        return out

    def controller_bank(self) -> ControllerBank:
        c = self.raw["controllers"]
        return ControllerBank(
            tfs=self.transfer_functions(),
            rate=float(c["sample_rate_hz"]),
            output_limit=np.deg2rad(float(c["output_limit_deg"])),
        )

    def neutral_posture(self) -> np.ndarray:
        table = self.raw["patterns"]["neutral_rad"]
        out = np.zeros(N_DOF)
        for joint, triplet in table.items():
            if joint not in JOINT_NAMES:
                raise ValueError(f"unknown joint {joint!r} in neutral table")
            base = 3 * JOINT_NAMES.index(joint)
            out[base:base + 3] = [float(v) for v in triplet]
        return out

    def dof_limits(self) -> DofLimits:
        p = self.raw["patterns"]
        ranges = p["dof_range_deg"]
        lo_default, hi_default = (np.deg2rad(float(v)) for v in ranges["default"])
        lower = np.full(N_DOF, lo_default)
        upper = np.full(N_DOF, hi_default)
        for key, pair in ranges.items():
            if key == "default":
                continue
            joint, axis = key.split(".")
            i = dof_index(joint, axis)
            lower[i] = np.deg2rad(float(pair[0]))
            upper[i] = np.deg2rad(float(pair[1]))
        rate = np.full(N_DOF, np.deg2rad(float(p["rate_limit_deg_s"])))
        return DofLimits(lower=lower, upper=upper, max_rate=rate)

    def cue_rate_limit(self) -> float:
        return float(np.deg2rad(float(self.raw["patterns"]["cue_rate_limit_deg_s"])))

    def pattern_set(self, name: str | None = None) -> PatternSet:
        p = self.raw["patterns"]
        set_name = name or p["active_set"]
        if set_name not in p["sets"]:
            raise KeyError(f"unknown pattern set {set_name!r}")
        patterns = []
        for entry in p["sets"][set_name]:
            weights = np.zeros(N_DOF)
            for key, value in entry["weights"].items():
                joint, axis = key.split(".")
                weights[dof_index(joint, axis)] = float(value)
            patterns.append(PatternBasis(name=entry["name"], weights=weights))
        return PatternSet(
            neutral=self.neutral_posture(),
            patterns=patterns,
            limits=self.dof_limits(),
            max_pattern_angle=np.deg2rad(float(p["max_pattern_angle_deg"])),
        )

    def cue_parameters(self) -> dict:
        c = self.raw["cues"]
        return {
            "t_predict": float(c["t_predict_s"]),
            "hold_threshold": float(np.deg2rad(float(c["hold_threshold_deg"]))),
            "hold_duration": float(c["hold_duration_s"]),
        }


def load_config(path: str | None = None) -> Config:
    raw = _read_packaged("default_config.yaml")
    if path is not None:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        raw = _deep_merge(raw, user)
    return Config(raw=raw)


def load_scenario_dict(path: str | None = None, overrides: dict | None = None) -> dict:
    raw = _read_packaged("default_scenario.yaml")
    if path is not None:
        with open(path) as fh:
            user = yaml.safe_load(fh) or {}
        raw = _deep_merge(raw, user)
    if overrides:
        raw = _deep_merge(raw, overrides)
    return raw
