"""
Decision policies the simulator can fly: the reward-predicting planner and
three rule-based benchmarks.

A strategy is asked for the next action whenever one of its agents becomes
free, and may ask the simulator to interrupt an exploration move when its
agent detects something.
"""

from typing import Dict, List, Optional

import numpy as np

from .arena_grid import CellIndex, cell_center, cell_of, neighbors, travel_time
from .belief import ObjectKind
from .planner import Decision, ExecuteTask, ExploreAction, PeerState, PlanContext, PlannerSettings, replan
from .tasks import FoundTask, task_cost_from

NO_VALUE = float('nan')


def move_to(cell: CellIndex, sim, agent) -> ExploreAction:
    """One-cell exploration move to the center of cell"""
    cost = travel_time(agent.pos, cell_center(cell, sim.cfg.grid), sim.cfg.cost.uav_speed)
    return ExploreAction((cell,), cost, frozenset({cell}))


def own_detections(sim, agent, kind: Optional[ObjectKind] = None) -> List[FoundTask]:
    """Unclaimed found tasks last detected by this agent, best first"""
    claimed = sim.state.claims.claimed_tasks(excluding=agent.agent_id)
    tasks = [
        t for t in sim.state.found_tasks.values()
        if sim.state.finder.get(t.task_id) == agent.agent_id and t.task_id not in claimed
        and (kind is None or t.object_class.kind == kind)
    ]
    return sorted(tasks, key=lambda t: (-t.reward, t.task_id))


def band_sweeps(grid, uav_count: int) -> List[List[CellIndex]]:
    """Zig-zag coverage order for uav_count equal horizontal bands"""
    sweeps = []
    for band in np.array_split(np.arange(grid.rows), uav_count):
        cells = []
        for i, row in enumerate(band):
            cols = range(grid.cols) if i % 2 == 0 else range(grid.cols - 1, -1, -1)
            cells.extend(CellIndex(col, int(row)) for col in cols)
        sweeps.append(cells)
    return sweeps


class Strategy:
    name = ""

    def __init__(self, cfg):
        self.cfg = cfg

    @property
    def decision_time(self) -> float:
        return 0.0

    def next_action(self, sim, agent) -> Decision:
        raise NotImplementedError

    def interrupts(self, sim, agent, new_task_ids) -> bool:
        return False


class ProposedStrategy(Strategy):
    """Reward-predicting planner with implicit coordination through the claim board"""
    name = "Proposed"

    def __init__(self, cfg):
        super().__init__(cfg)
        self.settings = PlannerSettings(
            grid=cfg.grid,
            cost=cfg.cost,
            quantizer=cfg.quantizer,
            tracking_timeout=cfg.tracking_timeout,
            decision_overhead=cfg.calc_time,
            horizon=cfg.horizon,
        )

    @property
    def decision_time(self) -> float:
        return self.cfg.calc_time

    def context(self, sim, agent) -> PlanContext:
        state = sim.state
        now = state.clock
        peers = tuple(
            PeerState(other.agent_id, other.free_pos or other.pos, self.cfg.t0 - max(other.free_at, now))
            for other in state.agents
            if other.agent_id != agent.agent_id and other.alive
        )
        return PlanContext(
            agent_id=agent.agent_id,
            my_position=agent.pos,
            my_budget=self.cfg.t0 - now,
            now=now,
            found_tasks=frozenset(state.found_tasks.values()),
            beliefs=state.unfound_beliefs(),
            object_classes={oid: obj.object_class for oid, obj in state.objects.items()},
            peers=peers,
        )

    def next_action(self, sim, agent) -> Decision:
        return replan(self.context(sim, agent), self.settings, sim.state.claims)

    def interrupts(self, sim, agent, new_task_ids) -> bool:
        # a moving sighting expires within the tracking timeout unless the agent stays on it
        return any(t.task_id in new_task_ids for t in own_detections(sim, agent, ObjectKind.MOVING))


class RandomStrategy(Strategy):
    """Random one-cell moves; own detections are picked up at once"""
    name = "Random"

    def __init__(self, cfg):
        super().__init__(cfg)
        self.rng = np.random.default_rng([cfg.seed, 2])

    def random_move(self, sim, agent) -> ExploreAction:
        here = cell_of(agent.pos, self.cfg.grid)
        options = sorted(neighbors(here, self.cfg.grid))
        return move_to(options[int(self.rng.integers(len(options)))], sim, agent)

    def next_action(self, sim, agent) -> Decision:
        detections = own_detections(sim, agent)
        if detections:
            return Decision(ExecuteTask(detections[0].task_id), NO_VALUE)
        return Decision(self.random_move(sim, agent), NO_VALUE)

    def interrupts(self, sim, agent, new_task_ids) -> bool:
        return any(t.task_id in new_task_ids for t in own_detections(sim, agent))


class CoverAndPickupStrategy(RandomStrategy):
    """Zig-zag band coverage; pick up on detection, then resume the sweep where it stopped"""
    name = "CoverAndPickup"

    def __init__(self, cfg):
        super().__init__(cfg)
        self.sweeps = band_sweeps(cfg.grid, cfg.uav_count)
        self.pointer: Dict[int, int] = {i: 0 for i in range(cfg.uav_count)}
        self.band_started: Dict[int, bool] = {i: False for i in range(cfg.uav_count)}
        self.covered: Dict[int, bool] = {i: False for i in range(cfg.uav_count)}

    def sweep_move(self, sim, agent) -> Optional[ExploreAction]:
        sweep = self.sweeps[agent.agent_id]
        if not sweep:
            return None
        i = agent.agent_id
        if cell_of(agent.pos, self.cfg.grid) == sweep[self.pointer[i]]:
            self.band_started[i] = True
            self.pointer[i] += 1
            if self.pointer[i] == len(sweep):
                self.covered[i] = True
                sweep.reverse()
                self.pointer[i] = 1 if len(sweep) > 1 else 0
        return move_to(sweep[self.pointer[i]], sim, agent)

    def next_action(self, sim, agent) -> Decision:
        detections = own_detections(sim, agent)
        if detections:
            return Decision(ExecuteTask(detections[0].task_id), NO_VALUE)
        action = self.sweep_move(sim, agent) or self.random_move(sim, agent)
        return Decision(action, NO_VALUE)


class CoverFieldFirstStrategy(CoverAndPickupStrategy):
    """Cover the whole band first, then collect static objects by cost per point"""
    name = "CoverFieldFirst"

    def best_static(self, sim, agent) -> Optional[FoundTask]:
        claimed = sim.state.claims.claimed_tasks(excluding=agent.agent_id)
        candidates = [
            t for t in sim.state.found_tasks.values()
            if t.object_class.kind == ObjectKind.STATIC and t.task_id not in claimed
        ]
        if not candidates:
            return None
        return min(candidates, key=lambda t: (
            task_cost_from(agent.pos, t, self.cfg.cost, self.cfg.grid) / t.reward, t.task_id))

    def next_action(self, sim, agent) -> Decision:
        i = agent.agent_id
        if not self.sweeps[i]:
            self.covered[i] = True

        if not self.covered[i]:
            moving = own_detections(sim, agent, ObjectKind.MOVING) if self.band_started[i] else []
            if moving:
                return Decision(ExecuteTask(moving[0].task_id), NO_VALUE)
            action = self.sweep_move(sim, agent)
            if not self.covered[i]:
                return Decision(action, NO_VALUE)

        static = self.best_static(sim, agent)
        if static is not None:
            return Decision(ExecuteTask(static.task_id), NO_VALUE)
        moving = own_detections(sim, agent, ObjectKind.MOVING)
        if moving:
            return Decision(ExecuteTask(moving[0].task_id), NO_VALUE)
        return Decision(self.random_move(sim, agent), NO_VALUE)

    def interrupts(self, sim, agent, new_task_ids) -> bool:
        i = agent.agent_id
        if not self.band_started[i]:
            return False
        if self.covered[i]:
            return any(t.task_id in new_task_ids for t in sim.state.found_tasks.values()
                       if sim.state.finder.get(t.task_id) == i)
        return any(t.task_id in new_task_ids for t in own_detections(sim, agent, ObjectKind.MOVING))


STRATEGY_CLASSES = {
    cls.name: cls for cls in (ProposedStrategy, RandomStrategy, CoverFieldFirstStrategy, CoverAndPickupStrategy)
}


def make_strategy(cfg) -> Strategy:
    return STRATEGY_CLASSES[cfg.strategy](cfg)
