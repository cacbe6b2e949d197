"""
Per-object probability density maps (PDMs) over the arena grid.

Each undelivered object owns one BeliefGrid. Grids are immutable: prediction
and measurement updates return new grids, so planners can share snapshots.
Arrays are indexed [row, col].
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, Tuple

import numpy as np

from .arena_grid import CellIndex, GridSpec
from .errors import DomainError


class ObjectKind(str, Enum):
    STATIC = "Static"
    MOVING = "Moving"


@dataclass(frozen=True)
class MotionParams:
    p_out: float = 0.1
    step_dt: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.p_out <= 1.0:
            raise DomainError(f"p_out must lie in [0, 1], got {self.p_out}")
        if self.step_dt <= 0:
            raise DomainError(f"step_dt must be positive, got {self.step_dt}")


@dataclass(frozen=True)
class Observation:
    observed_cells: FrozenSet[CellIndex]
    detections: FrozenSet[Tuple[str, CellIndex]] = frozenset()
    time: float = 0.0

    def __post_init__(self):
        for object_id, cell in self.detections:
            if cell not in self.observed_cells:
                raise DomainError(f"Detection of {object_id} at {tuple(cell)} is outside the observed cells")

    def for_object(self, object_id: str) -> "Observation":
        """The same observation restricted to detections of one object"""
        return Observation(
            observed_cells=self.observed_cells,
            detections=frozenset(d for d in self.detections if d[0] == object_id),
            time=self.time,
        )


@dataclass(frozen=True)
class BeliefGrid:
    object_id: str
    probs: np.ndarray = field(repr=False)
    kind: ObjectKind = ObjectKind.STATIC

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, object_id: str, spec: GridSpec, kind: ObjectKind = ObjectKind.STATIC) -> "BeliefGrid":
        probs = np.full((spec.rows, spec.cols), 1.0 / spec.cell_count)
        return cls(object_id, probs, kind)

    @classmethod
    def point_mass(cls, object_id: str, cell: CellIndex, spec: GridSpec,
                   kind: ObjectKind = ObjectKind.STATIC) -> "BeliefGrid":
        probs = np.zeros((spec.rows, spec.cols))
        probs[cell[1], cell[0]] = 1.0
        return cls(object_id, probs, kind)

    def prob(self, cell: CellIndex) -> float:
        return float(self.probs[cell[1], cell[0]])

    def total(self) -> float:
        return float(self.probs.sum())

    def to_text(self) -> str:
        """Row-major dump, one float per line"""
        return "\n".join(repr(float(p)) for p in self.probs.ravel())

    @classmethod
    def from_text(cls, object_id: str, text: str, spec: GridSpec,
                  kind: ObjectKind = ObjectKind.STATIC) -> "BeliefGrid":
        values = [float(line) for line in text.split()]
        if len(values) != spec.cell_count:
            raise DomainError(f"Expected {spec.cell_count} values for {object_id}, got {len(values)}")
        return cls(object_id, np.array(values).reshape(spec.rows, spec.cols), kind)

    def __eq__(self, other):
        if not isinstance(other, BeliefGrid):
            return NotImplemented
        return (self.object_id == other.object_id and self.kind == other.kind
                and np.array_equal(self.probs, other.probs))

    def __hash__(self):
        return hash((self.object_id, self.kind))


def predict_static(b: BeliefGrid) -> BeliefGrid:
    if b.kind != ObjectKind.STATIC:
        raise DomainError(f"predict_static called on {b.kind.value} object {b.object_id}")
    return b


def _missing_neighbor_counts(rows: int, cols: int) -> np.ndarray:
    inside = np.ones((rows + 2, cols + 2))
    inside[0, :] = inside[-1, :] = inside[:, 0] = inside[:, -1] = 0
    present = np.zeros((rows, cols))
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            present += inside[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]
    return 8 - present


def predict_moving(b: BeliefGrid, params: MotionParams) -> BeliefGrid:
    """Random-walk transition with a reflecting boundary"""
    if b.kind != ObjectKind.MOVING:
        raise DomainError(f"predict_moving called on {b.kind.value} object {b.object_id}")
    if params.p_out == 0.0:
        return b

    rows, cols = b.probs.shape
    share = params.p_out / 8.0

    # Mass aimed at a missing neighbour stays where it is
    stay = (1.0 - params.p_out) + share * _missing_neighbor_counts(rows, cols)
    result = b.probs * stay

    padded = np.zeros((rows + 2, cols + 2))
    padded[1:-1, 1:-1] = b.probs * share
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == 0 and dc == 0:
                continue
            result += padded[1 + dr:1 + dr + rows, 1 + dc:1 + dc + cols]

    return BeliefGrid(b.object_id, result, b.kind)


def measurement_update(b: BeliefGrid, obs: Observation) -> BeliefGrid:
    """Perfect-detection Bayes update from a FoV observation"""
    if not obs.observed_cells:
        raise DomainError("Observation covers no cells")

    detected = None
    for object_id, cell in sorted(obs.detections):
        if object_id != b.object_id:
            raise DomainError(f"Detection of {object_id} passed to the grid of {b.object_id}")
        detected = cell

    rows, cols = b.probs.shape
    if detected is not None:
        probs = np.zeros((rows, cols))
        probs[detected[1], detected[0]] = 1.0
        return BeliefGrid(b.object_id, probs, b.kind)

    mask = np.zeros((rows, cols), dtype=bool)
    for cell in obs.observed_cells:
        mask[cell[1], cell[0]] = True

    if not b.probs[mask].any():
        return b

    probs = np.where(mask, 0.0, b.probs)
    total = probs.sum()
    if total > 0:
        return BeliefGrid(b.object_id, probs / total, b.kind)

    # Everything observed and nothing seen: fall back to uniform over what is left
    unobserved = ~mask
    if not unobserved.any():
        unobserved = np.ones((rows, cols), dtype=bool)
    probs = unobserved / unobserved.sum()
    return BeliefGrid(b.object_id, probs, b.kind)


def mass_in(b: BeliefGrid, cells: Iterable[CellIndex]) -> float:
    total = 0.0
    for cell in set(cells):
        total += b.probs[cell[1], cell[0]]
    return float(min(max(total, 0.0), 1.0))
