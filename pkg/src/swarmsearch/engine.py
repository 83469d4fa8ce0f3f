"""Deterministic discrete-time simulation loop.

Each tick every robot takes exactly one action (a step or a turn) in
ascending id order against a tick-start sensing snapshot. Motion into walls
or occupied cells is rejected and surfaces as a trigger on the next tick.
Scent is deposited on every cell entry; coverage counts rooms entered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

from . import sensing
from .policy import (
    GAS_KINDS,
    SOUND_KINDS,
    AlgorithmKind,
    FsmState,
    RobotState,
    SenseBundle,
    active_trigger,
    decide,
    initial_direction,
)
from .rng import Rng, mix_parts
from .sensing import RangingReading, ScentField, listen
from .sitegen import SiteGenParams, generate
from .world import DIR_VECS, GridSite, Pose, quantize_heading


class Departure(str, Enum):
    CENTER = "center"
    EDGE = "edge"


class InsufficientSpace(Exception):
    """Not enough free cells near the departure point for the swarm."""


@dataclass(frozen=True)
class SimConfig:
    site: Union[GridSite, SiteGenParams]
    algorithm: AlgorithmKind
    n_robots: int
    departure: Departure
    max_actions_per_robot: int
    sample_interval: int = 100
    seed: int = 0
    revisit_threshold: int = 3
    bias: float = 0.0
    record_trace: bool = False


@dataclass(frozen=True, slots=True)
class Sample:
    action_count: int
    total_coverage: float
    per_robot_coverage: tuple[float, ...]
    crash_count: int


@dataclass(frozen=True, slots=True)
class TraceEvent:
    tick: int
    robot_id: int
    before: Pose
    after: Pose
    action: str  # "spawn" | "straight" | "blocked" | "turn:<azimuth>"
    trigger: Optional[str]
    fsm_before: str
    fsm_after: str
    smell: Optional[int]

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "robot": self.robot_id,
            "before": [self.before.x, self.before.y, self.before.heading],
            "after": [self.after.x, self.after.y, self.after.heading],
            "action": self.action,
            "trigger": self.trigger,
            "fsm_before": self.fsm_before,
            "fsm_after": self.fsm_after,
            "smell": self.smell,
        }


@dataclass(frozen=True)
class RunRecord:
    samples: tuple[Sample, ...]
    final_coverage: float
    victims_found: tuple[tuple[int, int], ...]
    terminated_early: bool
    trace: Optional[tuple[TraceEvent, ...]] = None

    @property
    def crash_count(self) -> int:
        return self.samples[-1].crash_count if self.samples else 0

    def to_dict(self) -> dict:
        return {
            "final_coverage": self.final_coverage,
            "terminated_early": self.terminated_early,
            "crash_count": self.crash_count,
            "victims_found": [list(v) for v in self.victims_found],
            "samples": [
                {
                    "action_count": s.action_count,
                    "total_coverage": s.total_coverage,
                    "per_robot_coverage": list(s.per_robot_coverage),
                    "crash_count": s.crash_count,
                }
                for s in self.samples
            ],
        }


def coverage(site: GridSite, entered_rooms: set[int]) -> float:
    """Fraction of rooms entered; a site without rooms counts as covered."""
    room_ids = {room.id for room in site.rooms}
    unknown = entered_rooms - room_ids
    if unknown:
        raise ValueError(f"unknown room ids: {sorted(unknown)}")
    if not room_ids:
        return 1.0
    return len(entered_rooms) / len(room_ids)


def _ring_cells(cx: int, cy: int, r: int) -> list[tuple[int, int]]:
    if r == 0:
        return [(cx, cy)]
    cells = []
    for x in range(cx - r, cx + r + 1):
        cells.append((x, cy - r))
        cells.append((x, cy + r))
    for y in range(cy - r + 1, cy + r):
        cells.append((cx - r, y))
        cells.append((cx + r, y))
    return cells


def _spiral_free_cells(
    site: GridSite,
    anchor: tuple[float, float],
    n: int,
    max_radius: int,
    exclude_boundary: bool,
) -> list[tuple[int, int]]:
    """The n free cells nearest the anchor, in deterministic spiral order.

    Cells are visited ring by ring (Chebyshev radius), each ring sorted by
    exact Euclidean distance to the anchor and then by azimuth.
    """
    ax, ay = anchor
    cx, cy = int(round(ax)), int(round(ay))
    found: list[tuple[int, int]] = []
    for r in range(0, max_radius + 1):
        ring = []
        for (x, y) in _ring_cells(cx, cy, r):
            if not site.is_free(x, y):
                continue
            if exclude_boundary and (
                x == 0 or y == 0 or x == site.width - 1 or y == site.height - 1
            ):
                continue
            d2 = (x - ax) ** 2 + (y - ay) ** 2
            ang = math.atan2(y - ay, x - ax) % (2 * math.pi)
            ring.append((d2, ang, x, y))
        ring.sort()
        for _, _, x, y in ring:
            found.append((x, y))
            if len(found) == n:
                return found
    raise InsufficientSpace(
        f"only {len(found)} of {n} robots fit within radius {max_radius} of {anchor}"
    )


def place_robots(
    site: GridSite, n: int, departure: Departure, bias: float = 0.0
) -> list[Pose]:
    """Starting poses: n distinct free cells near the centroid or entrance."""
    if n < 1:
        raise ValueError("need at least one robot")
    max_radius = max(3, math.ceil(2.0 * math.sqrt(n)))
    if departure is Departure.CENTER:
        anchor = ((site.width - 1) / 2.0, (site.height - 1) / 2.0)
        cells = _spiral_free_cells(site, anchor, n, max_radius, exclude_boundary=False)
    else:
        if not site.entrance:
            raise InsufficientSpace("site has no entrance to depart from")
        mid = site.entrance[len(site.entrance) // 2]
        inward = {
            0: (1, 0),
            site.width - 1: (-1, 0),
        }.get(mid[0])
        if inward is None or 0 < mid[0] < site.width - 1:
            inward = (0, 1) if mid[1] == 0 else (0, -1)
        anchor = (float(mid[0] + inward[0]), float(mid[1] + inward[1]))
        cells = _spiral_free_cells(site, anchor, n, max_radius, exclude_boundary=True)
    return [
        Pose(x, y, quantize_heading(initial_direction(i, n, bias)))
        for i, (x, y) in enumerate(cells)
    ]


class Simulation:
    """One mutable simulation instance; single-threaded, owns all state."""

    def __init__(self, config: SimConfig):
        self.config = config
        site = config.site
        if isinstance(site, SiteGenParams):
            site = generate(site)
        self.site = site
        self.kind = config.algorithm
        self.n = config.n_robots
        self.tracing = config.record_trace

        poses = place_robots(site, self.n, config.departure, config.bias)
        self.robots: list[RobotState] = [
            RobotState(
                id=i,
                pose=poses[i],
                fsm=FsmState.JUST_STARTED,
                preferred_direction=initial_direction(i, self.n, config.bias),
            )
            for i in range(self.n)
        ]
        self.rngs = [Rng(mix_parts(config.seed, "robot", i)) for i in range(self.n)]

        self.field = ScentField(site)
        self.entry_smell = [0] * self.n
        self.occupied: dict[tuple[int, int], int] = {}
        self.room_grid = site.room_id_grid()
        self.entered: set[int] = set()
        self.entered_by: list[set[int]] = [set() for _ in range(self.n)]
        self.n_rooms = len(site.rooms)
        self.crash_count = 0
        self.contact_pairs: set[tuple[int, int]] = set()
        self.next_events: list[set[int]] = [set() for _ in range(self.n)]
        self.victims_found: dict[int, int] = {}
        self.tick = 0
        self.samples: list[Sample] = []
        self.trace: list[TraceEvent] = []
        self.done = False
        self.terminated_early = False

        for i, st in enumerate(self.robots):
            cell = st.pose.cell
            self.entry_smell[i] = self.field.smell(cell)
            self.field.deposit(cell)
            self.occupied[cell] = i
            self._mark_room(i, cell)
            if self.tracing:
                self.trace.append(
                    TraceEvent(0, i, st.pose, st.pose, "spawn", None,
                               st.fsm.value, st.fsm.value, None)
                )
        self._detect_victims()
        # Robots that spawn adjacent start inside a contact episode: the pair
        # is pre-armed so deployment does not count as a crash.
        self.contact_pairs = self._adjacent_pairs()
        if self._total_coverage() == 1.0:
            self._record_sample()
            self.done = True
            self.terminated_early = True

    # -- helpers ------------------------------------------------------------

    def _mark_room(self, robot_id: int, cell: tuple[int, int]) -> None:
        rid = self.room_grid[cell[1] * self.site.width + cell[0]]
        if rid >= 0:
            self.entered.add(rid)
            self.entered_by[robot_id].add(rid)

    def _total_coverage(self) -> float:
        if self.n_rooms == 0:
            return 1.0
        return len(self.entered) / self.n_rooms

    def _per_robot_coverage(self) -> tuple[float, ...]:
        if self.n_rooms == 0:
            return tuple(1.0 for _ in range(self.n))
        return tuple(len(s) / self.n_rooms for s in self.entered_by)

    def _adjacent_pairs(self) -> set[tuple[int, int]]:
        pairs = set()
        for i in range(self.n):
            pi = self.robots[i].pose
            for j in range(i + 1, self.n):
                pj = self.robots[j].pose
                if max(abs(pi.x - pj.x), abs(pi.y - pj.y)) <= sensing.CONTACT_RADIUS:
                    pairs.add((i, j))
        return pairs

    def _detect_victims(self) -> None:
        victims = self.site.victims
        if not victims:
            return
        for idx, victim in enumerate(victims):
            if idx in self.victims_found:
                continue
            vx, vy = victim.position
            for st in self.robots:
                dx, dy = st.pose.x - vx, st.pose.y - vy
                if dx * dx + dy * dy <= sensing.VICTIM_RADIUS ** 2:
                    self.victims_found[idx] = self.tick
                    break

    def _record_sample(self) -> None:
        if self.samples and self.samples[-1].action_count == self.tick:
            return
        self.samples.append(
            Sample(self.tick, self._total_coverage(), self._per_robot_coverage(),
                   self.crash_count)
        )

    # -- stepping -----------------------------------------------------------

    def step(self) -> None:
        """Advance every robot by one action in ascending id order."""
        if self.done:
            raise RuntimeError("run already terminated")
        site = self.site
        positions = [st.pose.cell for st in self.robots]
        events = self.next_events
        self.next_events = [set() for _ in range(self.n)]

        for i in range(self.n):
            st = self.robots[i]
            pose = st.pose
            x, y, heading = pose.x, pose.y, pose.heading

            wall_ahead = sensing.step_blocked(site, x, y, heading)
            ranging = RangingReading(
                wall_ahead=wall_ahead,
                wall_on_side=self._side_label(x, y, heading),
                robots_in_contact=tuple(sorted(events[i])),
                at_outer_corner=sensing.at_outer_corner(site, st),
                victims_in_range=self._victims_near(x, y),
                wall_normal=sensing.blocked_normal(site, x, y, heading) if wall_ahead else None,
            )
            auditory = None
            if self.kind in SOUND_KINDS and (
                ranging.robots_in_contact or wall_ahead or ranging.at_outer_corner
            ):
                auditory = listen(positions, i)
            senses = SenseBundle(
                ranging=ranging,
                smell_count=self.entry_smell[i] if self.kind in GAS_KINDS else None,
                auditory=auditory,
                orientation=heading,
            )
            action, new_st = decide(
                self.kind, st, senses, self.rngs[i], self.config.revisit_threshold
            )

            action_label = "straight"
            if action.kind == "turn":
                new_pose = Pose(x, y, action.turn_to)
                action_label = f"turn:{action.turn_to}"
            else:
                dx, dy = DIR_VECS[heading]
                target = (x + dx, y + dy)
                if sensing.step_blocked(site, x, y, heading):
                    new_pose = pose
                    action_label = "blocked"
                elif target in self.occupied:
                    blocker = self.occupied[target]
                    self.next_events[i].add(blocker)
                    new_pose = pose
                    action_label = "blocked"
                else:
                    del self.occupied[(x, y)]
                    self.occupied[target] = i
                    new_pose = Pose(target[0], target[1], heading)
                    cell_idx = target[1] * site.width + target[0]
                    self.entry_smell[i] = self.field.counts[cell_idx]
                    self.field.counts[cell_idx] += 1
                    self._mark_room(i, target)
            if new_pose is not pose:
                new_st = replace(new_st, pose=new_pose)
            self.robots[i] = new_st

            if self.tracing:
                trig = active_trigger(st, senses)
                self.trace.append(
                    TraceEvent(
                        self.tick + 1, i, pose, new_pose, action_label,
                        trig.value if trig else None,
                        st.fsm.value, new_st.fsm.value, senses.smell_count,
                    )
                )

        self.tick += 1
        self._detect_victims()

        pairs = self._adjacent_pairs()
        for pair in pairs - self.contact_pairs:
            self.crash_count += 1
            self.next_events[pair[0]].add(pair[1])
            self.next_events[pair[1]].add(pair[0])
        self.contact_pairs = pairs

        if self._total_coverage() == 1.0:
            self._record_sample()
            self.done = True
            self.terminated_early = True
        elif self.tick % self.config.sample_interval == 0:
            self._record_sample()
        if not self.done and self.tick >= self.config.max_actions_per_robot:
            self._record_sample()
            self.done = True

    def _side_label(self, x: int, y: int, heading: int) -> str:
        left = sensing.side_is_wall(self.site, x, y, heading, "left")
        right = sensing.side_is_wall(self.site, x, y, heading, "right")
        if left and right:
            return "both"
        if left:
            return "left"
        if right:
            return "right"
        return "none"

    def _victims_near(self, x: int, y: int) -> tuple[int, ...]:
        victims = self.site.victims
        if not victims:
            return ()
        return tuple(
            idx
            for idx, v in enumerate(victims)
            if (v.position[0] - x) ** 2 + (v.position[1] - y) ** 2
            <= sensing.VICTIM_RADIUS ** 2
        )

    def run_to_completion(self) -> RunRecord:
        while not self.done:
            self.step()
        return RunRecord(
            samples=tuple(self.samples),
            final_coverage=self.samples[-1].total_coverage if self.samples else self._total_coverage(),
            victims_found=tuple(sorted(self.victims_found.items())),
            terminated_early=self.terminated_early,
            trace=tuple(self.trace) if self.tracing else None,
        )


def run(config: SimConfig) -> RunRecord:
    """Execute one full run; a pure function of (config, seed)."""
    return Simulation(config).run_to_completion()
