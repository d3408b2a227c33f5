"""Path planning and the online look-ahead guidance law.

The offline plan is a polyline with an arc-length lookup table and a
trapezoidal speed profile. Online, the command pair is

    omega_com = 2 * psi_error / t_LA
    v_com     = profile speed at the look-ahead point

where psi_error is the wrapped difference between the bearing to the
look-ahead point (the path point t_LA * |V_horizontal| beyond the closest
point) and the velocity heading. Headings use the quadrant-aware
two-argument arctangent, wrapped to (-pi, pi]; below 0.1 m/s horizontal
speed the body yaw stands in for the velocity heading.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SkyState
from .rotations import heading_of, quat_to_matrix, wrap_angle

Array = np.ndarray

MIN_HEADING_SPEED = 0.1
# below BLEND_SPEED the velocity heading is dominated by the bank-induced
# lateral slide (tau ~ 6 s), which feeds a slow weave back into the pursuit
# loop, so the heading blends toward the body yaw: pure body yaw below
# MIN_HEADING_SPEED where the heading is undefined, pure velocity heading
# above BLEND_SPEED. The threshold sits above the proof-of-concept cruise
# speeds, where sideslip routinely reaches tens of degrees.
BLEND_SPEED = 6.0
# look-ahead distance floor: below ~cruise speed the raw t_LA * |V| distance
# degenerates (zero at standstill, where the bearing to the closest point is
# broadside); the floor keeps the start transient sane and is inactive at
# cruise speed
MIN_LOOKAHEAD_DISTANCE = 5.0
SPEED_FLOOR = 0.5


@dataclass(frozen=True)
class SpeedProfile:
    """Trapezoid in arc length: ramp up from the floor, cruise, ramp down."""

    cruise: float
    accel: float
    approach: float
    total_length: float
    floor: float = SPEED_FLOOR

    def __post_init__(self):
        if self.cruise <= 0.0 or self.accel <= 0.0 or self.approach <= 0.0:
            raise ValueError("speed profile parameters must be positive")

    def speed_at(self, s: float) -> float:
        s = min(max(s, 0.0), self.total_length)
        up = np.sqrt(self.floor ** 2 + 2.0 * self.accel * s)
        down = np.sqrt(self.approach ** 2 + 2.0 * self.accel * (self.total_length - s))
        return float(min(self.cruise, up, down))


@dataclass(frozen=True)
class PlannedPath:
    waypoints: Array            # (n, 2) m
    arc_lengths: Array          # (n,) cumulative, arc_lengths[0] = 0
    profile: SpeedProfile
    corridor_half_width: float

    def __post_init__(self):
        wp = np.asarray(self.waypoints, dtype=float)
        if wp.ndim != 2 or wp.shape[0] < 2 or wp.shape[1] != 2:
            raise ValueError("need at least 2 waypoints of shape (n, 2)")
        arc = np.asarray(self.arc_lengths, dtype=float)
        if np.any(np.diff(arc) <= 0.0):
            raise ValueError("arc lengths must be strictly increasing")
        object.__setattr__(self, "waypoints", wp)
        object.__setattr__(self, "arc_lengths", arc)

    @property
    def length(self) -> float:
        return float(self.arc_lengths[-1])

    @property
    def target(self) -> Array:
        return self.waypoints[-1]

    def point_at(self, s: float) -> Array:
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.arc_lengths, s, side="right") - 1)
        i = min(i, len(self.waypoints) - 2)
        seg = self.arc_lengths[i + 1] - self.arc_lengths[i]
        t = (s - self.arc_lengths[i]) / seg
        return (1.0 - t) * self.waypoints[i] + t * self.waypoints[i + 1]

    def speed_at(self, s: float) -> float:
        return self.profile.speed_at(s)

    def closest(self, position) -> tuple[float, float, Array]:
        """(arc length, signed cross-track, tangent) of the closest path point.

        Ties resolve to the smallest arc length. Cross-track is the distance
        to the closest path point, signed by the side (positive = starboard
        of the local path direction).
        """
        pos = np.asarray(position, dtype=float)[:2]
        best = None
        for i in range(len(self.waypoints) - 1):
            a = self.waypoints[i]
            b = self.waypoints[i + 1]
            d = b - a
            seg_len2 = float(d @ d)
            t = float(np.clip((pos - a) @ d / seg_len2, 0.0, 1.0))
            point = a + t * d
            dist = float(np.hypot(*(pos - point)))
            if best is None or dist < best[0] - 1e-12:
                s = float(self.arc_lengths[i] + t * np.sqrt(seg_len2))
                tangent = d / np.sqrt(seg_len2)
                best = (dist, s, point, tangent)
        dist, s, point, tangent = best
        offset = pos - point
        side = tangent[0] * offset[1] - tangent[1] * offset[0]
        cross = float(np.copysign(dist, side) if dist > 0.0 else 0.0)
        return s, cross, tangent


@dataclass(frozen=True)
class GuidanceCommand:
    omega_com: float            # rad/s
    v_com: float                # m/s
    psi_error: float            # rad, in (-pi, pi]
    lookahead_point: Array      # (2,) m


class DegeneratePathError(ValueError):
    pass


def travel_heading(state: SkyState) -> float:
    """Direction of travel: velocity heading, body yaw at (near) standstill.

    Below MIN_HEADING_SPEED the velocity heading is undefined and the body
    yaw substitutes; up to BLEND_SPEED the two are blended circularly, since
    small lateral velocities swing the raw velocity heading wildly.
    """
    vx, vy = float(state.velocity[0]), float(state.velocity[1])
    speed_h = float(np.hypot(vx, vy))
    fwd = quat_to_matrix(state.quaternion)[:, 0]
    yaw = heading_of(fwd[0], fwd[1])
    if speed_h < MIN_HEADING_SPEED:
        return yaw
    vel_heading = heading_of(vx, vy)
    w = min((speed_h - MIN_HEADING_SPEED) / (BLEND_SPEED - MIN_HEADING_SPEED), 1.0)
    return float(np.arctan2(w * np.sin(vel_heading) + (1.0 - w) * np.sin(yaw),
                            w * np.cos(vel_heading) + (1.0 - w) * np.cos(yaw)))


def plan_path(start, target, cruise_speed: float = 3.0, accel: float = 0.5,
              approach_speed: float = 1.0, corridor_half_width: float = 10.0,
              via=()) -> PlannedPath:
    """Plan a polyline from start to target with a trapezoidal speed profile."""
    start = np.asarray(start, dtype=float)
    target = np.asarray(target, dtype=float)
    if np.hypot(*(target - start)) < 1.0:
        raise DegeneratePathError("start and target closer than 1 m")
    points = [start, *[np.asarray(v, dtype=float) for v in via], target]
    wp = np.stack(points)
    steps = np.hypot(np.diff(wp[:, 0]), np.diff(wp[:, 1]))
    if np.any(steps <= 0.0):
        raise DegeneratePathError("repeated consecutive waypoints")
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    profile = SpeedProfile(cruise=cruise_speed, accel=accel,
                           approach=approach_speed, total_length=float(arc[-1]))
    return PlannedPath(waypoints=wp, arc_lengths=arc, profile=profile,
                       corridor_half_width=corridor_half_width)


def guidance_step(path: PlannedPath, state: SkyState, t_lookahead: float) -> GuidanceCommand:
    """One evaluation of the look-ahead law for the current state."""
    if t_lookahead <= 0.0:
        raise ValueError("t_lookahead must be positive")
    pos = state.position[:2]
    vx, vy = float(state.velocity[0]), float(state.velocity[1])
    speed_h = float(np.hypot(vx, vy))

    s_closest, _, _ = path.closest(pos)
    s_la = s_closest + t_lookahead * speed_h
    # the bearing geometry degenerates at standstill; the speed command does
    # not, so only the bearing look-ahead gets the distance floor
    s_bearing = s_closest + max(t_lookahead * speed_h, MIN_LOOKAHEAD_DISTANCE)
    look = path.point_at(s_bearing)

    heading = travel_heading(state)
    to_look = look - pos
    if np.hypot(*to_look) < 1e-9:
        bearing = heading
    else:
        bearing = heading_of(to_look[0], to_look[1])
    psi_error = wrap_angle(bearing - heading)
    return GuidanceCommand(
        omega_com=2.0 * psi_error / t_lookahead,
        v_com=path.speed_at(min(s_la, path.length)),
        psi_error=psi_error,
        lookahead_point=look,
    )


def corridor_status(path: PlannedPath, position) -> dict:
    """Cross-track distance, inside flag (closed corridor) and path progress."""
    s, cross, _ = path.closest(position)
    return {
        "cross_track": cross,
        "inside": bool(abs(cross) <= path.corridor_half_width),
        "progress": s,
    }
