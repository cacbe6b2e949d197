"""
Pickup-and-delivery tasks: object classes, rewards and the task time cost.

The cost of a task is t_approach + t_pick + t_transfer + t_drop. Measured from
the drop box it is the cost of a successive pickup; measured from an agent's
position it is the cost of a first pickup.
"""

from dataclasses import dataclass
from typing import Iterable, Optional, Set

from .arena_grid import GridSpec, Position, travel_time
from .belief import ObjectKind
from .errors import DomainError


@dataclass(frozen=True)
class ObjectClass:
    kind: ObjectKind
    points: int

    def __post_init__(self):
        if self.points not in (1, 2, 3):
            raise DomainError(f"Object points must be 1, 2 or 3, got {self.points}")
        if self.kind == ObjectKind.MOVING and self.points != 3:
            raise DomainError(f"Moving objects are worth 3 points, got {self.points}")

    @property
    def label(self) -> str:
        return f"{self.kind.value.lower()}-{self.points}pt"


STATIC_1PT = ObjectClass(ObjectKind.STATIC, 1)
STATIC_2PT = ObjectClass(ObjectKind.STATIC, 2)
STATIC_3PT = ObjectClass(ObjectKind.STATIC, 3)
MOVING_3PT = ObjectClass(ObjectKind.MOVING, 3)


@dataclass(frozen=True)
class CostParams:
    uav_speed: float = 2.0
    t_pick_static: float = 25.0
    t_pick_moving: float = 45.0
    t_drop_static: float = 20.0
    t_drop_moving: float = 20.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if value <= 0:
                raise DomainError(f"{name} must be positive, got {value}")

    def pick_time(self, object_class: ObjectClass) -> float:
        if object_class.kind == ObjectKind.MOVING:
            return self.t_pick_moving
        return self.t_pick_static

    def drop_time(self, object_class: ObjectClass) -> float:
        if object_class.kind == ObjectKind.MOVING:
            return self.t_drop_moving
        return self.t_drop_static


@dataclass(frozen=True)
class FoundTask:
    task_id: str
    object_class: ObjectClass
    est_pos: Position
    last_seen: float
    reward: int = 0

    def __post_init__(self):
        if self.reward == 0:
            object.__setattr__(self, "reward", self.object_class.points)
        if self.reward != self.object_class.points:
            raise DomainError(f"Task {self.task_id} reward {self.reward} differs from its class points")

    @property
    def is_moving(self) -> bool:
        return self.object_class.kind == ObjectKind.MOVING

    def is_expired(self, now: float, timeout: float) -> bool:
        return self.is_moving and now - self.last_seen > timeout


def task_cost_from(pos: Position, task: FoundTask, params: CostParams, grid: GridSpec,
                   now: Optional[float] = None, timeout: Optional[float] = None) -> float:
    """Seconds to fly to the object, pick it, carry it to the drop box and drop it"""
    if now is not None and timeout is not None and task.is_expired(now, timeout):
        raise DomainError(f"Moving task {task.task_id} was last seen at {task.last_seen}s and has expired")
    if not grid.contains(pos) or not grid.contains(task.est_pos):
        raise DomainError(f"Task {task.task_id} cost requested outside the arena")

    t_approach = travel_time(pos, task.est_pos, params.uav_speed)
    t_transfer = travel_time(task.est_pos, grid.drop_box, params.uav_speed)
    return t_approach + params.pick_time(task.object_class) + t_transfer + params.drop_time(task.object_class)


def expire_moving(tasks: Iterable[FoundTask], now: float, timeout: float) -> Set[FoundTask]:
    """Drop moving tasks not seen within the tracking timeout"""
    return {task for task in tasks if not task.is_expired(now, timeout)}
