"""
Arena geometry: cell indexing, cell centers, travel times and grid adjacency.

The arena is an axis-aligned rectangle split into square cells, each cell being
one camera footprint. Adjacency is kept in a networkx graph so that path
enumeration and neighbour lookups share the same structure.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Set

import networkx as nx

from .errors import DomainError

FOUR_CONNECTED = 4
EIGHT_CONNECTED = 8

# Boundary slack for float positions computed by interpolation
_EPS = 1e-9


class CellIndex(NamedTuple):
    col: int
    row: int


class Position(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GridSpec:
    width_m: float = 100.0
    height_m: float = 60.0
    cell_size_m: float = 10.0
    drop_box: Position = Position(50.0, 30.0)

    def __post_init__(self):
        if self.cell_size_m <= 0 or self.width_m <= 0 or self.height_m <= 0:
            raise DomainError(f"Arena dimensions must be positive: {self}")
        for name, size in (("width_m", self.width_m), ("height_m", self.height_m)):
            ratio = size / self.cell_size_m
            if abs(ratio - round(ratio)) > 1e-9:
                raise DomainError(f"{name}={size} is not a multiple of cell_size_m={self.cell_size_m}")
        if not self.contains(self.drop_box):
            raise DomainError(f"Drop box {self.drop_box} lies outside the arena")

    @property
    def cols(self) -> int:
        return int(round(self.width_m / self.cell_size_m))

    @property
    def rows(self) -> int:
        return int(round(self.height_m / self.cell_size_m))

    @property
    def cell_count(self) -> int:
        return self.cols * self.rows

    def contains(self, pos: Position) -> bool:
        return -_EPS <= pos[0] <= self.width_m + _EPS and -_EPS <= pos[1] <= self.height_m + _EPS

    def is_valid_cell(self, cell: CellIndex) -> bool:
        return 0 <= cell[0] < self.cols and 0 <= cell[1] < self.rows

    def all_cells(self):
        """Every cell in row-major order"""
        return [CellIndex(col, row) for row in range(self.rows) for col in range(self.cols)]


def _check_cell(cell: CellIndex, spec: GridSpec):
    if not spec.is_valid_cell(cell):
        raise DomainError(f"Cell {tuple(cell)} is outside the {spec.cols}x{spec.rows} grid")


def cell_of(pos: Position, spec: GridSpec) -> CellIndex:
    """Cell containing pos; shared boundaries go to the higher index"""
    if not spec.contains(pos):
        raise DomainError(f"Position {tuple(pos)} lies outside the arena")
    col = min(int(math.floor(pos[0] / spec.cell_size_m)), spec.cols - 1)
    row = min(int(math.floor(pos[1] / spec.cell_size_m)), spec.rows - 1)
    return CellIndex(max(col, 0), max(row, 0))


def cell_center(cell: CellIndex, spec: GridSpec) -> Position:
    _check_cell(cell, spec)
    half = spec.cell_size_m / 2.0
    return Position(cell[0] * spec.cell_size_m + half, cell[1] * spec.cell_size_m + half)


def travel_time(start: Position, end: Position, speed: float) -> float:
    """Straight-line flight time at constant speed"""
    if speed <= 0:
        raise DomainError(f"Speed must be positive, got {speed}")
    return math.hypot(end[0] - start[0], end[1] - start[1]) / speed


@lru_cache(maxsize=None)
def grid_graph(spec: GridSpec, connectivity: int = FOUR_CONNECTED) -> nx.Graph:
    """Adjacency graph over the arena cells"""
    if connectivity not in (FOUR_CONNECTED, EIGHT_CONNECTED):
        raise DomainError(f"Connectivity must be 4 or 8, got {connectivity}")

    G = nx.grid_2d_graph(spec.cols, spec.rows)
    G = nx.relabel_nodes(G, {node: CellIndex(*node) for node in G.nodes()})

    if connectivity == EIGHT_CONNECTED:
        for col in range(spec.cols - 1):
            for row in range(spec.rows - 1):
                G.add_edge(CellIndex(col, row), CellIndex(col + 1, row + 1))
                G.add_edge(CellIndex(col + 1, row), CellIndex(col, row + 1))

    nx.freeze(G)
    return G


def neighbors(cell: CellIndex, spec: GridSpec, connectivity: int = FOUR_CONNECTED) -> Set[CellIndex]:
    _check_cell(cell, spec)
    G = grid_graph(spec, connectivity)
    return set(G.neighbors(CellIndex(*cell)))
