"""Idealized sensor models: scent substrate, hearing, ranging, orientation.

Sensors are exact (no noise). The scent field is the only mutable piece and
is owned by a single simulation; all sensor reads are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

from .world import DIR_VECS, GridSite, rotate

if TYPE_CHECKING:  # avoid a circular import; RobotState lives in policy
    from .policy import RobotState

# Robots touch when within this Chebyshev distance of each other.
CONTACT_RADIUS = 1
# Victims are detected within this Euclidean distance in cells.
VICTIM_RADIUS = 2.0


class ScentField:
    """Per-cell visit counters, one per site cell."""

    __slots__ = ("site", "counts")

    def __init__(self, site: GridSite):
        self.site = site
        self.counts = [0] * (site.width * site.height)

    def deposit(self, cell: tuple[int, int]) -> None:
        """Record one visit at a free cell."""
        x, y = cell
        if not self.site.is_free(x, y):
            raise ValueError(f"cannot deposit scent on a wall: {cell}")
        self.counts[y * self.site.width + x] += 1

    def smell(self, cell: tuple[int, int]) -> int:
        """Number of recorded visits at a free cell."""
        x, y = cell
        if not self.site.is_free(x, y):
            raise ValueError(f"cannot smell a wall cell: {cell}")
        return self.counts[y * self.site.width + x]

    def total(self) -> int:
        return sum(self.counts)

    def to_rows(self) -> list[list[int]]:
        w = self.site.width
        return [self.counts[y * w : (y + 1) * w] for y in range(self.site.height)]


@dataclass(frozen=True, slots=True)
class AuditoryReading:
    """Bearings to every other robot: (robot id, distance, azimuth degrees)."""

    neighbors: tuple[tuple[int, float, float], ...]


@dataclass(frozen=True, slots=True)
class RangingReading:
    wall_ahead: bool
    wall_on_side: str  # "left" | "right" | "both" | "none"
    robots_in_contact: tuple[int, ...]
    at_outer_corner: bool
    victims_in_range: tuple[int, ...]
    # Azimuth of the blocked cardinal direction when wall_ahead, else None.
    wall_normal: Optional[int] = None


def listen(positions: Sequence[tuple[int, int]], i: int) -> AuditoryReading:
    """Distances and azimuths from robot ``i`` to every other robot."""
    if not 0 <= i < len(positions):
        raise ValueError(f"unknown robot id: {i}")
    xi, yi = positions[i]
    neighbors = []
    for j, (xj, yj) in enumerate(positions):
        if j == i:
            continue
        dx, dy = xj - xi, yj - yi
        rho = math.hypot(dx, dy)
        theta = math.degrees(math.atan2(dy, dx)) % 360.0
        neighbors.append((j, rho, theta))
    return AuditoryReading(neighbors=tuple(neighbors))


def step_blocked(site: GridSite, x: int, y: int, heading: int) -> bool:
    """Whether one step along ``heading`` is blocked by walls.

    Diagonal steps also require both orthogonal neighbors to be free, so
    robots can never slip between two diagonally-touching wall cells.
    """
    dx, dy = DIR_VECS[heading]
    if site.is_wall(x + dx, y + dy):
        return True
    if dx and dy:
        return site.is_wall(x + dx, y) or site.is_wall(x, y + dy)
    return False


def blocked_normal(site: GridSite, x: int, y: int, heading: int) -> Optional[int]:
    """Cardinal azimuth of the wall face blocking a step, if any.

    For diagonal headings the x-component direction is checked first; when
    only the diagonal cell itself is a wall, the x-component is reported.
    """
    dx, dy = DIR_VECS[heading]
    if dx == 0 or dy == 0:
        return heading if site.is_wall(x + dx, y + dy) else None
    hx = 0 if dx > 0 else 180
    hy = 90 if dy > 0 else 270
    if site.is_wall(x + dx, y):
        return hx
    if site.is_wall(x, y + dy):
        return hy
    if site.is_wall(x + dx, y + dy):
        return hx
    return None


def side_is_wall(site: GridSite, x: int, y: int, heading: int, side: str) -> bool:
    delta = -90 if side == "right" else 90
    dx, dy = DIR_VECS[rotate(heading, delta)]
    return site.is_wall(x + dx, y + dy)


def at_outer_corner(site: GridSite, robot: "RobotState") -> bool:
    """True when the wall run on the follow side ends at the robot's position.

    The cell beside the robot (on its follow side) is free, but one step back
    along the heading that same side was wall: the followed run just ended.
    Suppressed while the robot is mid-way through rounding a corner.
    """
    from .policy import FsmState  # local import to avoid a cycle

    if robot.fsm is not FsmState.FOLLOWING_WALL or robot.follow_side is None:
        return False
    if robot.corner_phase != 0:
        return False
    pose = robot.pose
    delta = -90 if robot.follow_side == "right" else 90
    sx, sy = DIR_VECS[rotate(pose.heading, delta)]
    fx, fy = DIR_VECS[pose.heading]
    side_cell = (pose.x + sx, pose.y + sy)
    side_back = (side_cell[0] - fx, side_cell[1] - fy)
    return site.is_free(*side_cell) and site.is_wall(*side_back)


def range_scan(site: GridSite, robots: Sequence["RobotState"], i: int) -> RangingReading:
    """Raw ranging snapshot for robot ``i`` against the current robot poses."""
    if not 0 <= i < len(robots):
        raise ValueError(f"unknown robot id: {i}")
    me = robots[i]
    x, y, heading = me.pose.x, me.pose.y, me.pose.heading

    wall_ahead = step_blocked(site, x, y, heading)
    left = side_is_wall(site, x, y, heading, "left")
    right = side_is_wall(site, x, y, heading, "right")
    wall_on_side = {(False, False): "none", (True, False): "left",
                    (False, True): "right", (True, True): "both"}[(left, right)]

    contacts = tuple(
        other.id
        for other in robots
        if other.id != me.id
        and max(abs(other.pose.x - x), abs(other.pose.y - y)) <= CONTACT_RADIUS
    )

    victims = tuple(
        idx
        for idx, victim in enumerate(site.victims)
        if (victim.position[0] - x) ** 2 + (victim.position[1] - y) ** 2 <= VICTIM_RADIUS ** 2
    )

    return RangingReading(
        wall_ahead=wall_ahead,
        wall_on_side=wall_on_side,
        robots_in_contact=contacts,
        at_outer_corner=at_outer_corner(site, me),
        victims_in_range=victims,
        wall_normal=blocked_normal(site, x, y, heading) if wall_ahead else None,
    )


def orient(robot: "RobotState") -> int:
    """Current azimuth of the robot."""
    return robot.pose.heading
