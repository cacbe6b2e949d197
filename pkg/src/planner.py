"""
Action selection for one agent: enumerate exploration paths over the belief
grids, score each by its expected increase of the predicted final reward and
fall back to executing a found task when exploring no longer pays.

Agents coordinate implicitly through a claim board. Each agent replans on its
own turn against the claims its peers have already broadcast, then broadcasts
its own decision.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

import numpy as np

from .arena_grid import CellIndex, GridSpec, Position, cell_center, cell_of, grid_graph, travel_time
from .belief import BeliefGrid, mass_in
from .errors import ClaimConflictError, DomainError
from .reward_dp import AgentBudget, BudgetQuantizer, allocate_sequential, build_multi_instance
from .tasks import CostParams, FoundTask, ObjectClass, expire_moving

INFEASIBLE = float("-inf")

# Sorts after every object id, so the DP item order does not depend on which object is hypothesised
HYPOTHETICAL_TASK_ID = "~hypothetical"

STRAIGHT_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class ExploreAction:
    path: Tuple[CellIndex, ...]
    cost: float
    cells_observed: FrozenSet[CellIndex]


@dataclass(frozen=True)
class ExecuteTask:
    task_id: str


@dataclass(frozen=True)
class IdleAction:
    pass


PlanAction = Union[ExploreAction, ExecuteTask, IdleAction]


def describe_action(action: PlanAction) -> Dict:
    """Log payload for an action"""
    if isinstance(action, ExploreAction):
        return {"action": "explore", "path": [list(c) for c in action.path], "cost": round(action.cost, 3)}
    if isinstance(action, ExecuteTask):
        return {"action": "execute", "task": action.task_id}
    return {"action": "idle"}


@dataclass(frozen=True)
class PeerState:
    """Where and with how much time a peer becomes free"""
    agent_id: int
    position: Position
    budget: float


@dataclass(frozen=True)
class PlannerSettings:
    grid: GridSpec
    cost: CostParams
    quantizer: BudgetQuantizer = BudgetQuantizer()
    tracking_timeout: float = 4.0
    decision_overhead: float = 0.0
    horizon: int = 3

    def __post_init__(self):
        if self.horizon < 1:
            raise DomainError(f"Horizon must be at least 1 cell, got {self.horizon}")
        if self.decision_overhead < 0:
            raise DomainError(f"Decision overhead must be nonnegative, got {self.decision_overhead}")


@dataclass(frozen=True)
class PlanContext:
    agent_id: int
    my_position: Position
    my_budget: float
    now: float = 0.0
    found_tasks: FrozenSet[FoundTask] = frozenset()
    beliefs: Dict[str, BeliefGrid] = field(default_factory=dict)  # objects not yet found
    object_classes: Dict[str, ObjectClass] = field(default_factory=dict)
    claimed_tasks: FrozenSet[str] = frozenset()
    claimed_cells: FrozenSet[CellIndex] = frozenset()
    peers: Tuple[PeerState, ...] = ()

    def selectable_tasks(self, settings: PlannerSettings) -> Set[FoundTask]:
        tasks = {t for t in self.found_tasks if t.task_id not in self.claimed_tasks}
        return expire_moving(tasks, self.now, settings.tracking_timeout)

    def agents(self, position: Position, budget: float) -> List[AgentBudget]:
        """The deciding agent first, then peers in ID order"""
        ordered = sorted(self.peers, key=lambda p: p.agent_id)
        return [AgentBudget(position, budget)] + [AgentBudget(p.position, max(0.0, p.budget)) for p in ordered]


@dataclass(frozen=True)
class Decision:
    action: PlanAction
    value: float
    top_values: Tuple[float, ...] = ()
    candidates: int = 0


def path_cost(start: Position, path: Tuple[CellIndex, ...], settings: PlannerSettings) -> float:
    centers = [cell_center(c, settings.grid) for c in path]
    total = travel_time(start, centers[0], settings.cost.uav_speed)
    for a, b in zip(centers, centers[1:]):
        total += travel_time(a, b, settings.cost.uav_speed)
    return total


def predicted_scores(ctx: PlanContext, grid: GridSpec) -> np.ndarray:
    """Expected points per cell over all unfound objects; claimed cells count zero"""
    scores = np.zeros((grid.rows, grid.cols))
    for object_id, belief in ctx.beliefs.items():
        scores += belief.probs * ctx.object_classes[object_id].points
    for cell in ctx.claimed_cells:
        scores[cell[1], cell[0]] = 0.0
    return scores


def _walks(G, start: CellIndex, moves: int) -> List[Tuple[CellIndex, ...]]:
    """Self-avoiding walks of up to moves steps; a walk ends early only when it is boxed in"""
    walks = []
    stack = [(start,)]
    while stack:
        path = stack.pop()
        if len(path) == moves + 1:
            walks.append(path)
            continue
        extensions = [nxt for nxt in sorted(G.neighbors(path[-1]), reverse=True) if nxt not in path]
        if not extensions and len(path) > 1:
            walks.append(path)
        for nxt in extensions:
            stack.append(path + (nxt,))
    return walks


def _straight(start: CellIndex, direction: Tuple[int, int], moves: int, grid: GridSpec) -> Tuple[CellIndex, ...]:
    path = [start]
    for _ in range(moves):
        nxt = CellIndex(path[-1].col + direction[0], path[-1].row + direction[1])
        if not grid.is_valid_cell(nxt):
            break
        path.append(nxt)
    return tuple(path)


def best_cell(scores: np.ndarray, position: Position, settings: PlannerSettings) -> Optional[CellIndex]:
    """Highest-scoring cell; equal scores go to the cell nearest the agent, then row-major"""
    top = float(scores.max())
    if top <= 0:
        return None
    rows, cols = np.nonzero(np.isclose(scores, top, rtol=1e-9, atol=0.0))
    cells = [CellIndex(int(col), int(row)) for row, col in zip(rows, cols)]
    return min(cells, key=lambda c: (travel_time(position, cell_center(c, settings.grid), settings.cost.uav_speed),
                                     c.row, c.col))


def enumerate_actions(ctx: PlanContext, settings: PlannerSettings) -> List[ExploreAction]:
    grid = settings.grid
    G = grid_graph(grid)
    here = cell_of(ctx.my_position, grid)

    candidates = list(_walks(G, here, settings.horizon))

    best = best_cell(predicted_scores(ctx, grid), ctx.my_position, settings)
    if best is not None:
        for direction in STRAIGHT_DIRECTIONS:
            path = _straight(best, direction, settings.horizon, grid)
            if len(path) == 1 and best == here:
                continue
            candidates.append(path)

    cheapest: Dict[FrozenSet[CellIndex], ExploreAction] = {}
    for path in candidates:
        action = ExploreAction(path, path_cost(ctx.my_position, path, settings), frozenset(path))
        kept = cheapest.get(action.cells_observed)
        if kept is None or (action.cost, len(action.path), action.path) < (kept.cost, len(kept.path), kept.path):
            cheapest[action.cells_observed] = action

    return sorted(cheapest.values(), key=lambda a: a.path)


class _RewardCache:
    """Memoises J over one planning round; keys describe agents and task sets"""

    def __init__(self, ctx: PlanContext, settings: PlannerSettings):
        self.ctx = ctx
        self.settings = settings
        self.values: Dict[Tuple, int] = {}

    def solve(self, position: Position, budget: float, tasks: Iterable[FoundTask]):
        agents = self.ctx.agents(position, budget)
        minst = build_multi_instance(agents, tasks, self.settings.cost, self.settings.grid,
                                     self.settings.decision_overhead)
        return minst, allocate_sequential(minst, self.settings.quantizer)

    def value(self, position: Position, budget: float, tasks: FrozenSet[FoundTask]) -> int:
        key = (position, budget, tasks)
        if key not in self.values:
            _, tables = self.solve(position, budget, tasks)
            self.values[key] = sum(t.value for t in tables)
        return self.values[key]


def _hypothetical_cell(belief: BeliefGrid, cells: Iterable[CellIndex]) -> CellIndex:
    best, best_p = None, -1.0
    for cell in sorted(cells):
        p = belief.prob(cell)
        if p > best_p:
            best, best_p = cell, p
    return best


def evaluate_action(a: ExploreAction, ctx: PlanContext, settings: PlannerSettings,
                    cache: Optional[_RewardCache] = None) -> float:
    """Expected change of the predicted final reward if the agent flies this path"""
    if a.cost >= ctx.my_budget:
        return INFEASIBLE
    cache = cache or _RewardCache(ctx, settings)
    grid = settings.grid

    tasks = frozenset(ctx.selectable_tasks(settings))
    # The current decision has already paid its overhead
    j_now = cache.value(ctx.my_position, ctx.my_budget + settings.decision_overhead, tasks)

    end = cell_center(a.path[-1], grid)
    budget_after = ctx.my_budget - a.cost
    arrival = ctx.now + a.cost
    tasks_after = frozenset(expire_moving(tasks, arrival, settings.tracking_timeout))

    visible = a.cells_observed - ctx.claimed_cells
    terms = []
    p_none = 1.0
    for object_id in sorted(ctx.beliefs):
        belief = ctx.beliefs[object_id]
        p = mass_in(belief, visible) if visible else 0.0
        if p <= 0.0:
            continue
        cell = _hypothetical_cell(belief, visible)
        found = FoundTask(HYPOTHETICAL_TASK_ID, ctx.object_classes[object_id], cell_center(cell, grid), arrival)
        j_found = cache.value(end, budget_after, tasks_after | {found})
        terms.append(p * (j_found - j_now))
        p_none *= 1.0 - p

    j_after = cache.value(end, budget_after, tasks_after)
    terms.append(p_none * (j_after - j_now))
    return math.fsum(terms)


def first_task(ctx: PlanContext, settings: PlannerSettings,
               cache: Optional[_RewardCache] = None) -> Optional[str]:
    """The task the deciding agent starts with, out of its share of the current allocation.

    Any selected task that still leaves room for the rest of the share may go
    first. A moving task under the agent's own camera wins, then the task with
    the smallest detour from the agent's position; the DP's own PickFirst is
    always among the candidates.
    """
    cache = cache or _RewardCache(ctx, settings)
    tasks = ctx.selectable_tasks(settings)
    if not tasks:
        return None
    budget = ctx.my_budget + settings.decision_overhead
    minst, tables = cache.solve(ctx.my_position, budget, tasks)
    if tables[0].first_task_id is None:
        return None

    q = settings.quantizer
    index = {task_id: k for k, task_id in enumerate(minst.task_ids)}
    share = [index[task_id] for task_id in tables[0].selected]
    later_units = sum(q.cost_units(minst.costs[k]) for k in share)
    limit = q.budget_units(budget)
    here = cell_of(ctx.my_position, settings.grid)
    tracked = {t.task_id for t in tasks if t.is_moving and cell_of(t.est_pos, settings.grid) == here}

    def fits_first(k):
        return later_units - q.cost_units(minst.costs[k]) + q.cost_units(minst.first_costs[0][k]) <= limit

    candidates = [k for k in share if fits_first(k)]
    best = min(candidates, key=lambda k: (minst.task_ids[k] not in tracked,
                                         minst.first_costs[0][k] - minst.costs[k], minst.task_ids[k]))
    return minst.task_ids[best]


def select_action(ctx: PlanContext, settings: PlannerSettings) -> Decision:
    cache = _RewardCache(ctx, settings)
    actions = enumerate_actions(ctx, settings)

    scored = []
    for action in actions:
        r = evaluate_action(action, ctx, settings, cache)
        if r != INFEASIBLE:
            scored.append((r, action))
    scored.sort(key=lambda ra: (-ra[0], len(ra[1].path), ra[1].path))
    top = tuple(round(r, 6) for r, _ in scored[:5])

    if scored and scored[0][0] >= 0:
        return Decision(scored[0][1], scored[0][0], top, len(actions))

    value = scored[0][0] if scored else INFEASIBLE
    task_id = first_task(ctx, settings, cache)
    if task_id is not None:
        return Decision(ExecuteTask(task_id), value, top, len(actions))
    return Decision(IdleAction(), value, top, len(actions))


@dataclass
class Claim:
    task_id: Optional[str] = None
    cells: FrozenSet[CellIndex] = frozenset()


class ClaimBoard:
    """Latest broadcast decision of every agent"""

    def __init__(self):
        self.claims: Dict[int, Claim] = {}
        self.crashed: Set[int] = set()

    def holder(self, task_id: str) -> Optional[int]:
        for agent_id, claim in self.claims.items():
            if claim.task_id == task_id:
                return agent_id
        return None

    def claim(self, agent_id: int, action: PlanAction):
        if agent_id in self.crashed:
            raise DomainError(f"Crashed agent {agent_id} cannot claim")
        if isinstance(action, ExecuteTask):
            holder = self.holder(action.task_id)
            if holder is not None and holder != agent_id:
                raise ClaimConflictError(f"Task {action.task_id} is already claimed by agent {holder}")
            self.claims[agent_id] = Claim(task_id=action.task_id)
        elif isinstance(action, ExploreAction):
            self.claims[agent_id] = Claim(cells=action.cells_observed)
        else:
            self.claims.pop(agent_id, None)

    def release(self, agent_id: int) -> Optional[str]:
        """Drop an agent's claim; returns the task it held, if any"""
        claim = self.claims.pop(agent_id, None)
        return claim.task_id if claim else None

    def mark_crashed(self, agent_id: int) -> Optional[str]:
        self.crashed.add(agent_id)
        return self.release(agent_id)

    def claimed_tasks(self, excluding: Optional[int] = None) -> FrozenSet[str]:
        return frozenset(c.task_id for a, c in self.claims.items() if a != excluding and c.task_id is not None)

    def claimed_cells(self, excluding: Optional[int] = None) -> FrozenSet[CellIndex]:
        cells = set()
        for agent_id, claim in self.claims.items():
            if agent_id != excluding:
                cells |= claim.cells
        return frozenset(cells)


def replan(ctx: PlanContext, settings: PlannerSettings, board: ClaimBoard) -> Decision:
    """select_action against the peers' broadcast claims, then broadcast the result"""
    ctx = replace(
        ctx,
        claimed_tasks=ctx.claimed_tasks | board.claimed_tasks(excluding=ctx.agent_id),
        claimed_cells=ctx.claimed_cells | board.claimed_cells(excluding=ctx.agent_id),
        peers=tuple(p for p in ctx.peers if p.agent_id not in board.crashed and p.agent_id != ctx.agent_id),
    )
    decision = select_action(ctx, settings)
    board.claim(ctx.agent_id, decision.action)
    return decision
