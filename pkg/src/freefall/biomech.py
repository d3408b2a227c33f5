"""Segmented body model: anthropometry, forward kinematics, mass geometry.

The body is 16 rigid segments linked by 15 spherical joints. Each joint
carries 3 rotation DOFs, giving the 45-vector posture that is the sole
control input of the simulator.

Frames: the body (root) frame is the pelvis frame, x cranial, y right,
z ventral. In the reference layout (all DOFs zero) every segment frame is
aligned with the body frame: torso and head extend along +x, legs and feet
along -x, left arm along -y, right arm along +y, and every plate normal is
the local +z.

Canonical joint order (3 DOFs each, axes = flexion about y, abduction about
x, rotation about z, intrinsic y-x-z):
    spine_lower, spine_upper, neck,
    l_shoulder, l_elbow, l_wrist,
    r_shoulder, r_elbow, r_wrist,
    l_hip, l_knee, l_ankle,
    r_hip, r_knee, r_ankle

Left-side joints mirror the abduction and rotation axes, so equal left/right
DOF values produce a sagittally symmetric posture. Arm-chain joints
additionally mirror the flexion axis: an arm's flexion/axial-rotation sense
is side-relative (medial/lateral), so equal positive values on both
shoulders tilt the arm plates in opposite sagittal directions. That makes
the four all-positive turning-pattern weights produce the intended
anti-symmetric arm motion, with positive pattern angle = right turn.

The mass-fraction and dimension tables below are standard anatomical
estimates shipped as pinned, overridable constants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .rotations import matrix_to_quat

Array = np.ndarray

N_SEG = 16
N_JNT = 15
N_DOF = 45

SEGMENT_NAMES = [
    "pelvis", "abdomen", "thorax", "head",
    "l_upper_arm", "l_forearm", "l_hand",
    "r_upper_arm", "r_forearm", "r_hand",
    "l_thigh", "l_shank", "l_foot",
    "r_thigh", "r_shank", "r_foot",
]

JOINT_NAMES = [
    "spine_lower", "spine_upper", "neck",
    "l_shoulder", "l_elbow", "l_wrist",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_hip", "l_knee", "l_ankle",
    "r_hip", "r_knee", "r_ankle",
]

DOF_AXES = ("flexion", "abduction", "rotation")

# joint j connects PARENT_SEGMENT[j] -> segment j+1
PARENT_SEGMENT = np.array([0, 1, 2, 2, 4, 5, 2, 7, 8, 0, 10, 11, 0, 13, 14], dtype=np.int32)

# mass fractions of total body mass (bilateral entries listed once)
MASS_FRACTIONS = {
    "pelvis": 0.1117, "abdomen": 0.1633, "thorax": 0.1596, "head": 0.0694,
    "upper_arm": 0.0271, "forearm": 0.0162, "hand": 0.0061,
    "thigh": 0.1416, "shank": 0.0433, "foot": 0.0137,
}

# geometry as fractions of stature: (shape, length, width_or_radius, thickness)
# cylinders: (shape, length, radius); ellipsoids: (shape, length, width, thickness)
GEOMETRY = {
    "pelvis": ("ellipsoid", 0.095, 0.191, 0.070),
    "abdomen": ("ellipsoid", 0.120, 0.174, 0.080),
    "thorax": ("ellipsoid", 0.170, 0.204, 0.090),
    "head": ("ellipsoid", 0.130, 0.080, 0.090),
    "upper_arm": ("cylinder", 0.186, 0.025),
    "forearm": ("cylinder", 0.146, 0.021),
    "hand": ("ellipsoid", 0.108, 0.045, 0.020),
    "thigh": ("cylinder", 0.245, 0.032),
    "shank": ("cylinder", 0.246, 0.021),
    "foot": ("ellipsoid", 0.140, 0.050, 0.025),
}

# CoG location along the segment axis, as a fraction of segment length
COG_FRACTIONS = {
    "pelvis": 0.0, "abdomen": 0.5, "thorax": 0.5, "head": 0.5,
    "upper_arm": 0.45, "forearm": 0.43, "hand": 0.5,
    "thigh": 0.41, "shank": 0.44, "foot": 0.5,
}

# segment axis direction in the reference layout: (axis char, sign)
AXIS_DIRECTIONS = {
    "pelvis": ("x", +1), "abdomen": ("x", +1), "thorax": ("x", +1), "head": ("x", +1),
    "l_upper_arm": ("y", -1), "l_forearm": ("y", -1), "l_hand": ("y", -1),
    "r_upper_arm": ("y", +1), "r_forearm": ("y", +1), "r_hand": ("y", +1),
    "l_thigh": ("x", -1), "l_shank": ("x", -1), "l_foot": ("x", -1),
    "r_thigh": ("x", -1), "r_shank": ("x", -1), "r_foot": ("x", -1),
}

# joint positions in the parent segment frame, fractions of stature
JOINT_POSITIONS = {
    "spine_lower": (0.0475, 0.0, 0.0),
    "spine_upper": (0.120, 0.0, 0.0),
    "neck": (0.170, 0.0, 0.0),
    "l_shoulder": (0.140, -0.129, 0.0),
    "l_elbow": (0.0, -0.186, 0.0),
    "l_wrist": (0.0, -0.146, 0.0),
    "r_shoulder": (0.140, 0.129, 0.0),
    "r_elbow": (0.0, 0.186, 0.0),
    "r_wrist": (0.0, 0.146, 0.0),
    "l_hip": (-0.0475, -0.052, 0.0),
    "l_knee": (-0.245, 0.0, 0.0),
    "l_ankle": (-0.246, 0.0, 0.0),
    "r_hip": (-0.0475, 0.052, 0.0),
    "r_knee": (-0.245, 0.0, 0.0),
    "r_ankle": (-0.246, 0.0, 0.0),
}

HELMET_MASS_KG = 1.2

# rotational damping reference lengths (roll, pitch, yaw) and the spin
# reference length, as fractions of stature
DAMP_LENGTH_FRACTIONS = (0.25, 0.45, 0.35)
CHAR_LENGTH_FRACTION = 0.5


class InvalidAnthropometrics(ValueError):
    pass


@dataclass(frozen=True)
class Equipment:
    jumpsuit_drag_scale: float = 1.0
    helmet: bool = False
    weight_belt_kg: float = 0.0


@dataclass(frozen=True)
class Anthropometrics:
    """Body size/weight plus optional per-segment overrides.

    ``total_mass`` is the all-up mass including equipment; helmet and weight
    belt redistribute mass toward head/pelvis rather than adding to it.
    Overrides map a table key (e.g. "thigh") to {"mass_fraction": ..} and/or
    {"length": ..} (length in metres).
    """

    total_mass: float = 80.0
    stature: float = 1.80
    segment_overrides: dict = field(default_factory=dict)
    equipment: Equipment = field(default_factory=Equipment)

    def validate(self) -> None:
        if not (self.total_mass > 0.0 and np.isfinite(self.total_mass)):
            raise InvalidAnthropometrics(f"total_mass must be positive, got {self.total_mass}")
        if not (self.stature > 0.0 and np.isfinite(self.stature)):
            raise InvalidAnthropometrics(f"stature must be positive, got {self.stature}")
        if self.equipment.weight_belt_kg < 0.0:
            raise InvalidAnthropometrics("weight_belt_kg must be >= 0")
        if self.equipment.weight_belt_kg >= self.total_mass:
            raise InvalidAnthropometrics("weight belt cannot exceed the all-up mass")
        for key in self.segment_overrides:
            if key not in MASS_FRACTIONS:
                raise InvalidAnthropometrics(f"unknown segment table key {key!r}")


@dataclass(frozen=True)
class Segment:
    name: str
    mass: float
    inertia_diag: Array          # principal inertia, segment frame, kg m^2
    cog_offset: Array            # segment frame, m
    shape: str
    dims: tuple
    area: float                  # plate area, m^2
    chord: float                 # characteristic length, m
    axis: str                    # long axis in the reference layout


@dataclass(frozen=True)
class Joint:
    name: str
    parent: str
    child: str
    position: Array              # parent segment frame, m


@dataclass(frozen=True)
class BodyModel:
    segments: list
    joints: list
    total_mass: float
    stature: float
    # packed arrays for the kernels
    parent: Array
    jpos: Array
    jsign: Array
    mass: Array
    cogoff: Array
    inertia: Array
    area: Array
    chord: Array
    axis_index: Array            # 0 = x, 1 = y long axis
    area_total: float
    damp_scale: Array
    char_len: float


@dataclass(frozen=True)
class MassState:
    cog: Array
    cog_rate: Array
    inertia: Array
    inertia_rate: Array


@dataclass(frozen=True)
class SegmentPoses:
    positions: Array             # (16, 3) body frame
    rotations: Array             # (16, 3, 3) segment -> body

    def quaternions(self) -> Array:
        return np.array([matrix_to_quat(r) for r in self.rotations])


def posture_zero() -> Array:
    return np.zeros(N_DOF)


def dof_index(joint: str, axis: str) -> int:
    return 3 * JOINT_NAMES.index(joint) + DOF_AXES.index(axis)


def dof_names() -> list:
    return [f"{j}.{a}" for j in JOINT_NAMES for a in DOF_AXES]


def mirror_posture(posture: Array) -> Array:
    """Mirror a posture about the sagittal plane.

    Left/right joint triplets are swapped (arm-chain flexion negated on the
    swap, since that axis is side-relative); midline joints keep flexion and
    negate abduction/rotation, which change handedness under the mirror.
    """
    posture = np.asarray(posture, dtype=float)
    out = posture.copy()
    for center in ("spine_lower", "spine_upper", "neck"):
        ci = 3 * JOINT_NAMES.index(center)
        out[ci + 1] = -out[ci + 1]
        out[ci + 2] = -out[ci + 2]
    for left, right in (("l_shoulder", "r_shoulder"), ("l_elbow", "r_elbow"),
                        ("l_wrist", "r_wrist"), ("l_hip", "r_hip"),
                        ("l_knee", "r_knee"), ("l_ankle", "r_ankle")):
        li, ri = 3 * JOINT_NAMES.index(left), 3 * JOINT_NAMES.index(right)
        out[li:li + 3], out[ri:ri + 3] = posture[ri:ri + 3].copy(), posture[li:li + 3].copy()
        if left in ("l_shoulder", "l_elbow", "l_wrist"):
            out[li] = -out[li]
            out[ri] = -out[ri]
    return out


def _table_key(segment_name: str) -> str:
    for prefix in ("l_", "r_"):
        if segment_name.startswith(prefix):
            return segment_name[2:]
    return segment_name


def _segment_inertia(shape: str, dims: tuple, axis: str, mass: float) -> Array:
    if shape == "cylinder":
        length, radius = dims
        axial = 0.5 * mass * radius * radius
        trans = mass * (3.0 * radius * radius + length * length) / 12.0
        if axis == "x":
            return np.array([axial, trans, trans])
        return np.array([trans, axial, trans])
    length, width, thick = dims
    if axis == "x":
        a, b, c = length / 2.0, width / 2.0, thick / 2.0
    else:
        a, b, c = width / 2.0, length / 2.0, thick / 2.0
    return (mass / 5.0) * np.array([b * b + c * c, a * a + c * c, a * a + b * b])


def _segment_area(shape: str, dims: tuple) -> float:
    if shape == "cylinder":
        length, radius = dims
        return length * 2.0 * radius
    length, width, _ = dims
    return np.pi * (length / 2.0) * (width / 2.0)


def build_body(anthro: Anthropometrics) -> BodyModel:
    """Build the 16-segment body from anthropometric parameters.

    Deterministic; segment masses always sum to ``total_mass`` exactly
    (fractions are renormalized, equipment mass is redistributed).
    """
    anthro.validate()
    h = anthro.stature

    fractions = {}
    for name in SEGMENT_NAMES:
        key = _table_key(name)
        frac = MASS_FRACTIONS[key]
        override = anthro.segment_overrides.get(key, {})
        fractions[name] = float(override.get("mass_fraction", frac))
    total_frac = sum(fractions.values())
    fractions = {k: v / total_frac for k, v in fractions.items()}

    helmet = HELMET_MASS_KG if anthro.equipment.helmet else 0.0
    belt = anthro.equipment.weight_belt_kg
    body_mass = anthro.total_mass - helmet - belt
    if body_mass <= 0.0:
        raise InvalidAnthropometrics("equipment mass exceeds total mass")

    lengths = {}
    for name in SEGMENT_NAMES:
        key = _table_key(name)
        override = anthro.segment_overrides.get(key, {})
        lengths[name] = float(override.get("length", GEOMETRY[key][1] * h))

    segments = []
    for name in SEGMENT_NAMES:
        key = _table_key(name)
        geo = GEOMETRY[key]
        shape = geo[0]
        length = lengths[name]
        if shape == "cylinder":
            dims = (length, geo[2] * h)
        else:
            dims = (length, geo[2] * h, geo[3] * h)
        mass = fractions[name] * body_mass
        if name == "head":
            mass += helmet
        elif name == "pelvis":
            mass += belt
        axis_char, axis_sign = AXIS_DIRECTIONS[name]
        cog = np.zeros(3)
        idx = 0 if axis_char == "x" else 1
        cog[idx] = axis_sign * COG_FRACTIONS[key] * length
        segments.append(
            Segment(
                name=name,
                mass=mass,
                inertia_diag=_segment_inertia(shape, dims, axis_char, mass),
                cog_offset=cog,
                shape=shape,
                dims=dims,
                area=_segment_area(shape, dims),
                chord=length,
                axis=axis_char,
            )
        )

    joints = []
    for j, jname in enumerate(JOINT_NAMES):
        pos = np.array(JOINT_POSITIONS[jname]) * h
        joints.append(
            Joint(
                name=jname,
                parent=SEGMENT_NAMES[PARENT_SEGMENT[j]],
                child=SEGMENT_NAMES[j + 1],
                position=pos,
            )
        )

    jsign = np.ones((N_JNT, 3))
    for j, jname in enumerate(JOINT_NAMES):
        if jname.startswith("l_"):
            jsign[j, 1] = -1.0
            jsign[j, 2] = -1.0
            if jname in ("l_shoulder", "l_elbow", "l_wrist"):
                jsign[j, 0] = -1.0

    area = np.array([s.area for s in segments])
    area_total = float(area.sum())
    damp_scale = np.array([area_total * (f * h) ** 2 for f in DAMP_LENGTH_FRACTIONS])

    return BodyModel(
        segments=segments,
        joints=joints,
        total_mass=anthro.total_mass,
        stature=h,
        parent=PARENT_SEGMENT.copy(),
        jpos=np.array([jt.position for jt in joints]),
        jsign=jsign,
        mass=np.array([s.mass for s in segments]),
        cogoff=np.array([s.cog_offset for s in segments]),
        inertia=np.array([s.inertia_diag for s in segments]),
        area=area,
        chord=np.array([s.chord for s in segments]),
        axis_index=np.array([0 if s.axis == "x" else 1 for s in segments], dtype=np.int32),
        area_total=area_total,
        damp_scale=damp_scale,
        char_len=CHAR_LENGTH_FRACTION * h,
    )


def forward_kinematics(body: BodyModel, posture: Array) -> SegmentPoses:
    """Segment poses in the body frame; the pelvis pose is the identity."""
    posture = np.asarray(posture, dtype=float)
    if posture.shape != (N_DOF,):
        raise ValueError(f"posture must have shape ({N_DOF},)")
    if not np.all(np.isfinite(posture)):
        raise ValueError("posture must be finite")
    R, p = kernels.fk(body.parent, body.jpos, body.jsign, posture)
    return SegmentPoses(positions=p, rotations=R)


def mass_state(body: BodyModel, posture: Array, posture_rate: Array | None = None) -> MassState:
    """Whole-body CoG, inertia about the CoG, and their time derivatives."""
    posture = np.asarray(posture, dtype=float)
    rate = np.zeros(N_DOF) if posture_rate is None else np.asarray(posture_rate, dtype=float)
    if not (np.all(np.isfinite(posture)) and np.all(np.isfinite(rate))):
        raise ValueError("posture and posture_rate must be finite")
    R, p, w, v = kernels.fk_with_rates(body.parent, body.jpos, body.jsign, posture, rate)
    cog, cog_rate, inert, inert_rate, _, _ = kernels.mass_properties(
        body.mass, body.cogoff, body.inertia, R, p, w, v
    )
    return MassState(cog=cog, cog_rate=cog_rate, inertia=inert, inertia_rate=inert_rate)
