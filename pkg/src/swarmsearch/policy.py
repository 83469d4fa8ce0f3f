"""Decision policies: five reactive search behaviors over a two-state FSM.

Robots alternate between cruising along a preferred direction and following
walls. The five policies differ in how they pick directions at wall contacts
and at outer corners: blind random turns, a fixed global turn side, sound
repulsion away from other robots, scent-gated redirects, or both together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from .rng import Rng
from .sensing import AuditoryReading, RangingReading
from .world import Pose, quantize_heading, rotate

# Scent count at a redirect corner at or above which the robot reverses its
# preferred direction by 180 degrees.
DEFAULT_REVISIT_THRESHOLD = 3

# Below this vector magnitude (in cells) a neighbor sum is treated as the
# degenerate symmetric case and the preferred direction is left unchanged.
_DEGENERATE_NORM = 1e-9


class FsmState(Enum):
    JUST_STARTED = "just_started"
    FOLLOWING_WALL = "following_wall"


class Trigger(Enum):
    HITTING_WALL = "hitting_wall"
    HITTING_OTHERS = "hitting_others"
    AT_OUTER_CORNER = "at_outer_corner"


class AlgorithmKind(str, Enum):
    RANDOM = "random"
    MINIMUM = "minimum"
    USING_SOUND = "sound"
    USING_GAS = "gas"
    USING_GAS_AND_SOUND = "gas_sound"


GAS_KINDS = frozenset({AlgorithmKind.USING_GAS, AlgorithmKind.USING_GAS_AND_SOUND})
SOUND_KINDS = frozenset({AlgorithmKind.USING_SOUND, AlgorithmKind.USING_GAS_AND_SOUND})


@dataclass(frozen=True, slots=True)
class Action:
    """Either one step forward or a turn-in-place to a quantized azimuth."""

    kind: str  # "straight" | "turn"
    turn_to: Optional[int] = None

    @staticmethod
    def straight() -> "Action":
        return _STRAIGHT

    @staticmethod
    def turn(azimuth: int) -> "Action":
        azimuth %= 360
        if azimuth % 45 != 0:
            raise ValueError(f"turn target must be a multiple of 45 degrees: {azimuth}")
        return Action("turn", azimuth)


_STRAIGHT = Action("straight", None)


@dataclass(frozen=True, slots=True)
class RobotState:
    id: int
    pose: Pose
    fsm: FsmState = FsmState.JUST_STARTED
    preferred_direction: float = 0.0  # continuous degrees in [0, 360)
    follow_side: Optional[str] = None  # "left" | "right", set while following
    redirect_pending: bool = False  # armed at a scented corner, fires at the next
    reversal_done: bool = False  # a 180-degree reversal has fired at least once
    corner_phase: int = 0  # 1 while completing the step around an outer corner


@dataclass(frozen=True, slots=True)
class SenseBundle:
    """Per-tick sensor snapshot handed to a policy.

    ``smell_count`` is present only for scent-bearing kinds and holds the
    visit count of the robot's current cell from before its own entry.
    ``auditory`` is sampled only on ticks where a trigger can fire, and only
    for sound-bearing kinds.
    """

    ranging: RangingReading
    smell_count: Optional[int]
    auditory: Optional[AuditoryReading]
    orientation: int


class SenseContractError(ValueError):
    """A SenseBundle violates the policy's input contract."""


def initial_direction(i: int, n: int, bias: float) -> float:
    """Evenly spread starting direction: (i * 360/n + bias) mod 360."""
    if n < 1:
        raise ValueError("swarm size must be at least 1")
    if not 0 <= i < n:
        raise ValueError(f"robot index {i} out of range for swarm of {n}")
    exact = Fraction(360 * i, n) + Fraction(bias)
    return float(exact % 360)


def opposite_direction(reading: AuditoryReading, current_phi: float) -> float:
    """Azimuth pointing away from the vector sum of all heard neighbors.

    Symmetric configurations whose bearings cancel leave the current
    preferred direction unchanged.
    """
    sx = 0.0
    sy = 0.0
    for _, rho, theta in reading.neighbors:
        rad = math.radians(theta)
        sx += rho * math.cos(rad)
        sy += rho * math.sin(rad)
    if math.hypot(sx, sy) < _DEGENERATE_NORM:
        return current_phi % 360.0
    return math.degrees(math.atan2(-sy, -sx)) % 360.0


def transition_table(kind: AlgorithmKind) -> dict[tuple[FsmState, Trigger], tuple[FsmState, str]]:
    """Static (state, trigger) -> (next state, action class) map.

    The state transitions are identical for all five kinds; only the action
    class taken on each trigger differs.
    """
    js, fw = FsmState.JUST_STARTED, FsmState.FOLLOWING_WALL
    hw, ho, oc = Trigger.HITTING_WALL, Trigger.HITTING_OTHERS, Trigger.AT_OUTER_CORNER
    attach = {
        AlgorithmKind.RANDOM: "turn_random",
        AlgorithmKind.MINIMUM: "turn_fixed_side",
        AlgorithmKind.USING_SOUND: "turn_toward_updated_preference",
        AlgorithmKind.USING_GAS: "turn_fixed_side",
        AlgorithmKind.USING_GAS_AND_SOUND: "turn_toward_updated_preference",
    }[kind]
    corner = {
        AlgorithmKind.RANDOM: "forward_or_random_turn",
        AlgorithmKind.MINIMUM: "turn_to_preferred",
        AlgorithmKind.USING_SOUND: "turn_to_updated_preference",
        AlgorithmKind.USING_GAS: "arm_or_redirect_preferred",
        AlgorithmKind.USING_GAS_AND_SOUND: "arm_or_redirect_updated",
    }[kind]
    return {
        (js, hw): (fw, attach),
        (fw, hw): (fw, "follow_wall_turn"),
        (js, ho): (js, "turn_right_together"),
        (fw, ho): (js, "turn_right_together"),
        (js, oc): (js, "reorient"),
        (fw, oc): (js, corner),
    }


def active_trigger(state: RobotState, senses: SenseBundle) -> Optional[Trigger]:
    """The single trigger (if any) that the policy will handle this tick.

    Contact events dominate; while following a wall, an ending wall run
    (outer corner) takes priority over a wall ahead, since the geometry of a
    corner usually presents both at once.
    """
    if senses.ranging.robots_in_contact:
        return Trigger.HITTING_OTHERS
    if state.fsm is FsmState.JUST_STARTED:
        if senses.ranging.wall_ahead:
            return Trigger.HITTING_WALL
        if senses.ranging.at_outer_corner:
            return Trigger.AT_OUTER_CORNER
        return None
    if state.corner_phase != 0:
        return None
    if state.pose.heading % 90 != 0:
        return None  # stray diagonal heading is normalized before anything else
    if senses.ranging.at_outer_corner:
        return Trigger.AT_OUTER_CORNER
    if senses.ranging.wall_ahead:
        return Trigger.HITTING_WALL
    return None


def _check_contract(kind: AlgorithmKind, senses: SenseBundle) -> None:
    if kind in GAS_KINDS:
        if senses.smell_count is None:
            raise SenseContractError(f"{kind.value} requires a smell reading")
    elif senses.smell_count is not None:
        raise SenseContractError(f"{kind.value} must not receive a smell reading")
    if kind not in SOUND_KINDS and senses.auditory is not None:
        raise SenseContractError(f"{kind.value} must not receive an auditory reading")


def _require_auditory(kind: AlgorithmKind, senses: SenseBundle) -> AuditoryReading:
    if senses.auditory is None:
        raise SenseContractError(f"{kind.value} needs an auditory reading at this trigger")
    return senses.auditory


def _turn_toward_side(state: RobotState) -> int:
    """Heading that rounds the current outer corner (turn onto the side)."""
    return rotate(state.pose.heading, -90 if state.follow_side == "right" else 90)


def _turn_away_from_side(state: RobotState) -> int:
    """Heading for the inner-corner turn (wall ahead while following)."""
    return rotate(state.pose.heading, 90 if state.follow_side == "right" else -90)


def _attach_to_wall(
    kind: AlgorithmKind, state: RobotState, senses: SenseBundle, rng: Rng
) -> tuple[Action, RobotState]:
    """Hitting Wall from Just Started: pick a follow side and turn along the wall."""
    normal = senses.ranging.wall_normal
    if normal is None:
        normal = state.pose.heading - state.pose.heading % 90  # defensive fallback

    if kind is AlgorithmKind.RANDOM:
        heading = 45 * rng.below(8)
        side = "right" if rng.below(2) == 0 else "left"
        new = replace(state, fsm=FsmState.FOLLOWING_WALL, follow_side=side, corner_phase=0)
        return Action.turn(heading), new

    phi = state.preferred_direction
    if kind in SOUND_KINDS:
        phi = opposite_direction(_require_auditory(kind, senses), phi)

    right_along = rotate(normal, 90)  # heading that keeps the wall on the right
    if kind in SOUND_KINDS:
        left_along = rotate(normal, -90)
        score_r = math.cos(math.radians(right_along - phi))
        score_l = math.cos(math.radians(left_along - phi))
        if score_l > score_r:
            along, side = left_along, "left"
        else:
            along, side = right_along, "right"
    else:
        along, side = right_along, "right"

    new = replace(
        state,
        fsm=FsmState.FOLLOWING_WALL,
        follow_side=side,
        corner_phase=0,
        preferred_direction=phi,
    )
    return Action.turn(along), new


def _leave_wall(state: RobotState, target: float, **changes) -> tuple[Action, RobotState]:
    new = replace(
        state,
        fsm=FsmState.JUST_STARTED,
        follow_side=None,
        corner_phase=0,
        preferred_direction=target % 360.0,
        **changes,
    )
    return Action.turn(quantize_heading(target)), new


def _continue_following(state: RobotState, **changes) -> tuple[Action, RobotState]:
    return Action.turn(_turn_toward_side(state)), replace(state, corner_phase=1, **changes)


def _at_corner(
    kind: AlgorithmKind, state: RobotState, senses: SenseBundle, rng: Rng,
    revisit_threshold: int,
) -> tuple[Action, RobotState]:
    if kind is AlgorithmKind.RANDOM:
        if rng.random() < 0.5:
            return Action.straight(), state  # drift past the corner
        heading = 45 * rng.below(8)
        new = replace(state, fsm=FsmState.JUST_STARTED, follow_side=None, corner_phase=0)
        return Action.turn(heading), new

    if kind is AlgorithmKind.MINIMUM:
        return _leave_wall(state, state.preferred_direction)

    if kind is AlgorithmKind.USING_SOUND:
        phi = opposite_direction(_require_auditory(kind, senses), state.preferred_direction)
        return _leave_wall(state, phi)

    # Scent-bearing kinds: arm on the first scented corner, redirect at the next.
    if state.redirect_pending:
        if kind is AlgorithmKind.USING_GAS_AND_SOUND:
            base = opposite_direction(_require_auditory(kind, senses), state.preferred_direction)
        else:
            base = state.preferred_direction
        reverse = senses.smell_count >= revisit_threshold
        target = base + 180.0 if reverse else base
        return _leave_wall(
            state,
            target,
            redirect_pending=False,
            reversal_done=state.reversal_done or reverse,
        )
    if senses.smell_count >= 1:
        return _continue_following(state, redirect_pending=True)
    return _continue_following(state)


def _reorient(
    kind: AlgorithmKind, state: RobotState, senses: SenseBundle, rng: Rng,
    revisit_threshold: int,
) -> tuple[Action, RobotState]:
    """Outer corner seen from Just Started: re-run the orientation change."""
    if kind is AlgorithmKind.RANDOM:
        return Action.turn(45 * rng.below(8)), state
    if kind is AlgorithmKind.MINIMUM:
        return Action.turn(quantize_heading(state.preferred_direction)), state
    phi = state.preferred_direction
    if kind in SOUND_KINDS:
        phi = opposite_direction(_require_auditory(kind, senses), phi)
    if kind in GAS_KINDS and senses.smell_count >= revisit_threshold:
        phi += 180.0
    new = replace(state, preferred_direction=phi % 360.0)
    return Action.turn(quantize_heading(phi)), new


def decide(
    kind: AlgorithmKind,
    state: RobotState,
    senses: SenseBundle,
    rng: Rng,
    revisit_threshold: int = DEFAULT_REVISIT_THRESHOLD,
) -> tuple[Action, RobotState]:
    """One policy decision: maps a sensor snapshot to an action and new state.

    Pure in (kind, state, senses, rng draws); the input state is never
    mutated, and no world state is touched.
    """
    _check_contract(kind, senses)
    trigger = active_trigger(state, senses)

    if trigger is Trigger.HITTING_OTHERS:
        # Everyone involved turns the same way (right) and restarts.
        new = replace(
            state, fsm=FsmState.JUST_STARTED, follow_side=None, corner_phase=0
        )
        return Action.turn(rotate(state.pose.heading, -90)), new

    if state.fsm is FsmState.JUST_STARTED:
        if trigger is Trigger.HITTING_WALL:
            return _attach_to_wall(kind, state, senses, rng)
        if trigger is Trigger.AT_OUTER_CORNER:
            return _reorient(kind, state, senses, rng, revisit_threshold)
        return Action.straight(), state

    # Following wall.
    if state.corner_phase != 0:
        return Action.straight(), replace(state, corner_phase=0)
    if state.pose.heading % 90 != 0:
        # Stray diagonal heading (only the random policy produces one):
        # snap clockwise to a cardinal and let the follow logic recover.
        return Action.turn(rotate(state.pose.heading, -45)), state
    if trigger is Trigger.AT_OUTER_CORNER:
        return _at_corner(kind, state, senses, rng, revisit_threshold)
    if trigger is Trigger.HITTING_WALL:
        return Action.turn(_turn_away_from_side(state)), state
    return Action.straight(), state
