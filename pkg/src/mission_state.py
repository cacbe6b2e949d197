"""
World model of the simulated mission: objects, agents and the shared state
the simulator advances.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .arena_grid import GridSpec, Position
from .belief import BeliefGrid, ObjectKind
from .errors import DomainError
from .mission_log import MissionLog
from .planner import ClaimBoard, PlanAction
from .tasks import FoundTask, ObjectClass


class ObjectStatus(str, Enum):
    IN_FIELD = "InField"
    BEING_CARRIED = "BeingCarried"
    DELIVERED = "Delivered"
    LOST = "Lost"


class AgentPhase(str, Enum):
    DECIDING = "Deciding"
    EXPLORING = "Exploring"
    APPROACHING = "Approaching"
    PICKING = "Picking"
    TRANSFERRING = "Transferring"
    DROPPING = "Dropping"
    CRASHED = "Crashed"
    IDLE = "Idle"


@dataclass
class SimObject:
    object_id: str
    object_class: ObjectClass
    true_pos: Position
    status: ObjectStatus = ObjectStatus.IN_FIELD
    heading: float = 0.0
    since_turn: float = 0.0
    rng: Optional[np.random.Generator] = field(default=None, repr=False, compare=False)

    @property
    def is_moving(self) -> bool:
        return self.object_class.kind == ObjectKind.MOVING


@dataclass(frozen=True)
class Leg:
    start: Position
    end: Position
    t_start: float
    t_end: float

    def position_at(self, t: float) -> Position:
        if self.t_end <= self.t_start or t >= self.t_end:
            return self.end
        if t <= self.t_start:
            return self.start
        f = (t - self.t_start) / (self.t_end - self.t_start)
        return Position(self.start.x + f * (self.end.x - self.start.x),
                        self.start.y + f * (self.end.y - self.start.y))


@dataclass
class AgentState:
    agent_id: int
    pos: Position
    phase: AgentPhase = AgentPhase.DECIDING
    carried: Optional[str] = None
    budget_used: float = 0.0
    token: int = 0
    action: Optional[PlanAction] = None
    task_id: Optional[str] = None
    leg: Optional[Leg] = None
    waypoints: List[Position] = field(default_factory=list)
    free_at: float = 0.0
    free_pos: Optional[Position] = None
    tracking: Optional[str] = None  # moving object followed while deciding

    @property
    def alive(self) -> bool:
        return self.phase != AgentPhase.CRASHED


@dataclass
class MissionState:
    grid: GridSpec
    clock: float = 0.0
    agents: List[AgentState] = field(default_factory=list)
    objects: Dict[str, SimObject] = field(default_factory=dict)
    beliefs: Dict[str, BeliefGrid] = field(default_factory=dict)
    found_tasks: Dict[str, FoundTask] = field(default_factory=dict)
    finder: Dict[str, int] = field(default_factory=dict)
    claims: ClaimBoard = field(default_factory=ClaimBoard)
    score: int = 0
    trace: List[Tuple[float, int]] = field(default_factory=list)
    event_log: MissionLog = field(default_factory=MissionLog)

    def status_counts(self) -> Dict[ObjectStatus, int]:
        counts = Counter(obj.status for obj in self.objects.values())
        return {status: counts.get(status, 0) for status in ObjectStatus}

    def unfound_beliefs(self) -> Dict[str, BeliefGrid]:
        return {oid: b for oid, b in self.beliefs.items() if oid not in self.found_tasks}


def step_moving_objects(state: MissionState, dt: float, speed: float, heading_period: float) -> MissionState:
    """Advance every in-field moving object along its random heading for dt seconds"""
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    width, height = state.grid.width_m, state.grid.height_m

    for obj in state.objects.values():
        if not obj.is_moving or obj.status != ObjectStatus.IN_FIELD:
            continue
        if obj.since_turn >= heading_period:
            obj.heading = float(obj.rng.uniform(0.0, 2.0 * math.pi))
            obj.since_turn = 0.0

        x = obj.true_pos.x + speed * dt * math.cos(obj.heading)
        y = obj.true_pos.y + speed * dt * math.sin(obj.heading)
        if x < 0.0 or x > width:
            x = -x if x < 0.0 else 2.0 * width - x
            obj.heading = math.pi - obj.heading
        if y < 0.0 or y > height:
            y = -y if y < 0.0 else 2.0 * height - y
            obj.heading = -obj.heading

        obj.true_pos = Position(min(max(x, 0.0), width), min(max(y, 0.0), height))
        obj.since_turn += dt
    return state
