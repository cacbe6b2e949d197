"""
Deterministic event-driven 2D mission simulator.

A global tick every filter step moves the objects, predicts the moving-object
beliefs, samples every agent's camera cell and expires stale moving tasks.
Agent actions are chains of events (leg arrivals, pick and drop completions)
that the active strategy starts whenever an agent becomes free. Ticks run
before agent events scheduled at the same time, and nothing after t0 is
processed.
"""

import heapq
import itertools
import math
from dataclasses import replace
from datetime import datetime
from typing import List, Optional

import numpy as np

from .arena_grid import Position, cell_center, cell_of, travel_time
from .belief import BeliefGrid, ObjectKind, Observation, measurement_update, predict_moving
from .errors import DomainError
from .mission_log import MissionReport
from .mission_state import (AgentPhase, AgentState, Leg, MissionState, ObjectStatus, SimObject,
                            step_moving_objects)
from .planner import ExecuteTask, ExploreAction, describe_action
from .scenario_config import ScenarioConfig
from .strategies import make_strategy
from .tasks import FoundTask, task_cost_from

TICK, AGENT = 0, 1


class MissionSimulator:
    def __init__(self, cfg: ScenarioConfig, debug: bool = False):
        self.cfg = cfg
        self.debug = debug
        self.strategy = make_strategy(cfg)
        self.state = MissionState(grid=cfg.grid)
        self.decisions = 0
        self.lost: List[str] = []
        self._events = []
        self._seq = itertools.count()
        self._started = False

        self.state.agents = [
            AgentState(agent_id=i, pos=cfg.grid.drop_box, free_pos=cfg.grid.drop_box)
            for i in range(cfg.uav_count)
        ]
        self._spawn_objects()

    # ------------------------------------------------------------------
    # setup
    # ------------------------------------------------------------------

    def _spawn_objects(self):
        cfg = self.cfg
        rng = np.random.default_rng(cfg.seed)
        index = 0
        for object_class, count in cfg.inventory:
            for _ in range(count):
                if cfg.object_positions is not None:
                    pos = cfg.object_positions[index]
                else:
                    pos = Position(float(rng.uniform(0.0, cfg.grid.width_m)), float(rng.uniform(0.0, cfg.grid.height_m)))
                object_id = f"o{index:02d}"
                obj = SimObject(object_id, object_class, pos)
                if obj.is_moving:
                    obj.rng = np.random.default_rng([cfg.seed, 1, index])
                    obj.heading = float(obj.rng.uniform(0.0, 2.0 * math.pi))
                self.state.objects[object_id] = obj
                self.state.beliefs[object_id] = BeliefGrid.uniform(object_id, cfg.grid, object_class.kind)
                index += 1

    def inject_crash(self, agent_id: int, time: float):
        """Schedule agent_id to crash at time"""
        if not 0 <= agent_id < len(self.state.agents):
            raise DomainError(f"Unknown agent: {agent_id}")
        if time < 0:
            raise DomainError(f"Crash time must be nonnegative, got {time}")
        self._schedule(time, AGENT, 'crash', agent_id)

    def _schedule(self, t: float, priority: int, kind: str, agent_id: Optional[int] = None,
                  token: Optional[int] = None):
        heapq.heappush(self._events, (t, priority, next(self._seq), kind, agent_id, token))

    def _log(self, event_kind: str, agent: Optional[int] = None, **payload):
        self.state.event_log.record(self.state.clock, event_kind, agent, **payload)

    # ------------------------------------------------------------------
    # main loop
    # ------------------------------------------------------------------

    def run(self) -> MissionReport:
        if self._started:
            raise DomainError("A simulator instance runs one mission only")
        self._started = True
        cfg = self.cfg
        start_time = datetime.now()
        if self.debug:
            print(f"Execution started at: {start_time}")
            print(f"Strategy: {cfg.strategy}, seed: {cfg.seed}, t0: {cfg.t0}s")

        self._log('mission', strategy=cfg.strategy, seed=cfg.seed, t0=cfg.t0, uav_count=cfg.uav_count,
                  objects=cfg.object_count)
        for obj in self.state.objects.values():
            self._log('spawn', object=obj.object_id, kind=obj.object_class.kind.value,
                      points=obj.object_class.points, x=round(obj.true_pos.x, 3), y=round(obj.true_pos.y, 3))

        for agent_id, time in cfg.crashes:
            self.inject_crash(agent_id, time)
        self._schedule(0.0, TICK, 'tick', token=0)
        for agent in self.state.agents:
            self._begin_decision(agent)

        handlers = {
            'decide': self._on_decide,
            'arrive': self._on_arrive,
            'pick_done': self._on_pick_done,
            'drop_done': self._on_drop_done,
        }
        while self._events:
            t, _, _, kind, agent_id, token = heapq.heappop(self._events)
            if t > cfg.t0:
                break
            self.state.clock = t
            if kind == 'tick':
                self._on_tick(token)
                continue
            agent = self.state.agents[agent_id]
            if kind == 'crash':
                self._on_crash(agent)
            elif agent.alive and token == agent.token:
                handlers[kind](agent)

        self.state.clock = cfg.t0
        self._log('end', score=self.state.score, delivered=len(self._delivered()), lost=len(self.lost))

        if self.debug:
            end_time = datetime.now()
            print(f"Final score: {self.state.score}")
            for status, count in self.state.status_counts().items():
                print(f"  {status.value}: {count} objects")
            print(f"Execution ended at: {end_time}")
            print(f"Total execution time: {end_time - start_time}")
        return self.report()

    def _delivered(self) -> List[str]:
        return [oid for oid, obj in self.state.objects.items() if obj.status == ObjectStatus.DELIVERED]

    def report(self) -> MissionReport:
        return MissionReport(
            strategy=self.cfg.strategy,
            seed=self.cfg.seed,
            t0=self.cfg.t0,
            score=self.state.score,
            trace=list(self.state.trace),
            delivered=self._delivered(),
            lost=list(self.lost),
            decisions=self.decisions,
            log_lines=list(self.state.event_log.lines),
        )

    # ------------------------------------------------------------------
    # world tick
    # ------------------------------------------------------------------

    def _on_tick(self, k: int):
        cfg = self.cfg
        now = self.state.clock
        dt = cfg.motion.step_dt

        if k > 0:
            step_moving_objects(self.state, dt, cfg.object_speed, cfg.heading_period)
            for oid, belief in self.state.beliefs.items():
                if belief.kind == ObjectKind.MOVING:
                    self.state.beliefs[oid] = predict_moving(belief, cfg.motion)

        for agent in self.state.agents:
            if agent.alive and agent.leg is not None:
                agent.pos = agent.leg.position_at(now)
        self._track(cfg.cost.uav_speed * dt)

        new_tasks = set()
        for agent in self.state.agents:
            if agent.alive:
                new_tasks |= self._sense(agent)

        self._expire_tasks()
        self._pursue()
        if new_tasks:
            self._interrupt_explorers(new_tasks)
            self._wake_idle()

        next_t = (k + 1) * dt
        if next_t <= cfg.t0:
            self._schedule(next_t, TICK, 'tick', token=k + 1)

    def sense(self, agent: AgentState) -> Observation:
        """Camera observation of the cell under the agent"""
        if not agent.alive:
            raise DomainError(f"Agent {agent.agent_id} has crashed and cannot sense")
        cell = cell_of(agent.pos, self.cfg.grid)
        detections = frozenset(
            (oid, cell) for oid, obj in self.state.objects.items()
            if obj.status == ObjectStatus.IN_FIELD and cell_of(obj.true_pos, self.cfg.grid) == cell
        )
        return Observation(frozenset({cell}), detections, self.state.clock)

    def _sense(self, agent: AgentState) -> set:
        """Apply one observation to the shared beliefs and task set; returns newly found task ids"""
        state = self.state
        obs = self.sense(agent)
        cell = next(iter(obs.observed_cells))
        detected = {oid for oid, _ in obs.detections}

        for oid in list(state.beliefs):
            belief = state.beliefs[oid]
            if oid not in detected and belief.prob(cell) == 0.0:
                continue
            state.beliefs[oid] = measurement_update(belief, obs.for_object(oid))

        new_tasks = set()
        for oid in sorted(detected):
            obj = state.objects[oid]
            task = FoundTask(oid, obj.object_class, cell_center(cell, self.cfg.grid), state.clock)
            if oid not in state.found_tasks:
                new_tasks.add(oid)
                self._log('found', agent.agent_id, task=oid, kind=obj.object_class.kind.value,
                          points=task.reward, cell=list(cell), last_seen=state.clock)
            state.found_tasks[oid] = task
            state.finder[oid] = agent.agent_id
        return new_tasks

    def _track(self, reach: float):
        """Deciding agents hover over a moving object they have found, following it by up to reach metres"""
        state = self.state
        grid = self.cfg.grid
        for agent in state.agents:
            if not agent.alive or agent.phase != AgentPhase.DECIDING:
                continue
            obj = state.objects.get(agent.tracking) if agent.tracking else None
            if obj is None or obj.status != ObjectStatus.IN_FIELD:
                here = cell_of(agent.pos, grid)
                obj = next((o for oid, o in sorted(state.objects.items())
                            if o.is_moving and o.status == ObjectStatus.IN_FIELD and oid in state.found_tasks
                            and cell_of(o.true_pos, grid) == here), None)
            if obj is None:
                agent.tracking = None
                continue
            agent.tracking = obj.object_id
            gap = math.dist(agent.pos, obj.true_pos)
            if gap <= reach:
                agent.pos = obj.true_pos
            else:
                f = reach / gap
                agent.pos = Position(agent.pos.x + f * (obj.true_pos.x - agent.pos.x),
                                     agent.pos.y + f * (obj.true_pos.y - agent.pos.y))
            agent.free_pos = agent.pos

    def _expire_tasks(self):
        state = self.state
        now = state.clock
        for oid in sorted(state.found_tasks):
            task = state.found_tasks[oid]
            if not task.is_expired(now, self.cfg.tracking_timeout):
                continue
            del state.found_tasks[oid]
            self._log('lost', task=oid, reason='timeout', last_seen=task.last_seen)
            for agent in state.agents:
                if agent.alive and agent.phase == AgentPhase.APPROACHING and agent.task_id == oid:
                    self._abort(agent, 'expired')

    def _pursue(self):
        """Approaching agents follow re-detections of their moving target"""
        state = self.state
        for agent in state.agents:
            if not agent.alive or agent.phase != AgentPhase.APPROACHING:
                continue
            obj = state.objects[agent.task_id]
            if not obj.is_moving:
                continue
            if obj.status == ObjectStatus.IN_FIELD and \
                    cell_of(obj.true_pos, self.cfg.grid) == cell_of(agent.pos, self.cfg.grid):
                self._start_pick(agent, obj)
                continue
            task = state.found_tasks.get(agent.task_id)
            target = agent.leg.end if agent.leg is not None else agent.pos
            if task is not None and task.est_pos != target:
                agent.token += 1
                self._start_leg(agent, task.est_pos)

    def _interrupt_explorers(self, new_tasks: set):
        for agent in self.state.agents:
            if agent.alive and agent.phase == AgentPhase.EXPLORING and \
                    self.strategy.interrupts(self, agent, new_tasks):
                agent.leg = None
                agent.waypoints = []
                self.state.claims.release(agent.agent_id)
                self._begin_decision(agent)

    def _wake_idle(self):
        for agent in self.state.agents:
            if agent.alive and agent.phase == AgentPhase.IDLE:
                self._begin_decision(agent)

    # ------------------------------------------------------------------
    # agent actions
    # ------------------------------------------------------------------

    def _begin_decision(self, agent: AgentState):
        now = self.state.clock
        agent.budget_used = now
        agent.token += 1
        agent.phase = AgentPhase.DECIDING
        agent.leg = None
        agent.tracking = None
        agent.free_at = now + self.strategy.decision_time
        agent.free_pos = agent.pos
        self._schedule(agent.free_at, AGENT, 'decide', agent.agent_id, agent.token)

    def _on_decide(self, agent: AgentState):
        agent.tracking = None
        decision = self.strategy.next_action(self, agent)
        action = decision.action
        self.decisions += 1
        # Benchmarks broadcast through the same board; replanning already did
        self.state.claims.claim(agent.agent_id, action)

        payload = describe_action(action)
        if math.isfinite(decision.value):
            payload['r'] = round(decision.value, 6)
        if decision.top_values:
            payload['top'] = [v if math.isfinite(v) else None for v in decision.top_values]
        self._log('decide', agent.agent_id, **payload)

        agent.action = action
        if isinstance(action, ExecuteTask):
            self._log('claim', agent.agent_id, task=action.task_id)
            self._start_task(agent, action.task_id)
        elif isinstance(action, ExploreAction):
            self._start_explore(agent, action)
        else:
            agent.phase = AgentPhase.IDLE
            agent.free_at = self.state.clock
            agent.free_pos = agent.pos

    def _start_leg(self, agent: AgentState, end: Position):
        now = self.state.clock
        duration = travel_time(agent.pos, end, self.cfg.cost.uav_speed)
        agent.leg = Leg(agent.pos, end, now, now + duration)
        self._schedule(now + duration, AGENT, 'arrive', agent.agent_id, agent.token)

    def _start_explore(self, agent: AgentState, action: ExploreAction):
        agent.phase = AgentPhase.EXPLORING
        agent.waypoints = [cell_center(c, self.cfg.grid) for c in action.path]
        agent.free_at = self.state.clock + action.cost
        agent.free_pos = agent.waypoints[-1]
        self._start_leg(agent, agent.waypoints.pop(0))

    def _start_task(self, agent: AgentState, task_id: str):
        task = self.state.found_tasks[task_id]
        agent.phase = AgentPhase.APPROACHING
        agent.task_id = task_id
        agent.free_at = self.state.clock + task_cost_from(agent.pos, task, self.cfg.cost, self.cfg.grid)
        agent.free_pos = self.cfg.grid.drop_box
        self._start_leg(agent, task.est_pos)

    def _on_arrive(self, agent: AgentState):
        agent.pos = agent.leg.end
        agent.leg = None
        if agent.phase == AgentPhase.EXPLORING:
            if agent.waypoints:
                self._start_leg(agent, agent.waypoints.pop(0))
                return
            self.state.claims.release(agent.agent_id)
            self._begin_decision(agent)
        elif agent.phase == AgentPhase.APPROACHING:
            obj = self.state.objects[agent.task_id]
            if obj.status != ObjectStatus.IN_FIELD:
                self._abort(agent, 'unavailable')
            elif not obj.is_moving or cell_of(obj.true_pos, self.cfg.grid) == cell_of(agent.pos, self.cfg.grid):
                self._start_pick(agent, obj)
            # otherwise hover and let pursuit or expiry decide
        elif agent.phase == AgentPhase.TRANSFERRING:
            agent.phase = AgentPhase.DROPPING
            drop = self.cfg.cost.drop_time(self.state.objects[agent.carried].object_class)
            self._schedule(self.state.clock + drop, AGENT, 'drop_done', agent.agent_id, agent.token)

    def _start_pick(self, agent: AgentState, obj: SimObject):
        state = self.state
        agent.token += 1
        agent.leg = None
        agent.phase = AgentPhase.PICKING
        obj.status = ObjectStatus.BEING_CARRIED
        state.found_tasks.pop(obj.object_id, None)
        state.beliefs.pop(obj.object_id, None)
        self._log('pick_start', agent.agent_id, object=obj.object_id)
        pick = self.cfg.cost.pick_time(obj.object_class)
        self._schedule(state.clock + pick, AGENT, 'pick_done', agent.agent_id, agent.token)

    def _on_pick_done(self, agent: AgentState):
        agent.carried = agent.task_id
        agent.phase = AgentPhase.TRANSFERRING
        self._log('pick_done', agent.agent_id, object=agent.carried)
        self._start_leg(agent, self.cfg.grid.drop_box)

    def _on_drop_done(self, agent: AgentState):
        state = self.state
        obj = state.objects[agent.carried]
        obj.status = ObjectStatus.DELIVERED
        obj.true_pos = self.cfg.grid.drop_box
        state.score += obj.object_class.points
        state.trace.append((state.clock, state.score))
        self._log('deliver', agent.agent_id, object=obj.object_id, points=obj.object_class.points,
                  score=state.score)
        self._release(agent)
        agent.carried = None
        agent.task_id = None
        self._begin_decision(agent)

    def _release(self, agent: AgentState):
        task_id = self.state.claims.release(agent.agent_id)
        if task_id is not None:
            self._log('release', agent.agent_id, task=task_id)
            self._wake_idle()

    def _abort(self, agent: AgentState, reason: str):
        self._log('abort', agent.agent_id, task=agent.task_id, reason=reason)
        self._release(agent)
        agent.task_id = None
        self._begin_decision(agent)

    def _on_crash(self, agent: AgentState):
        if not agent.alive:
            return
        state = self.state
        agent.token += 1
        agent.phase = AgentPhase.CRASHED
        agent.leg = None
        agent.waypoints = []

        held = agent.carried or agent.task_id
        if held is not None and state.objects[held].status == ObjectStatus.BEING_CARRIED:
            state.objects[held].status = ObjectStatus.LOST
            self.lost.append(held)
            self._log('lost', agent.agent_id, object=held, reason='crash')
        agent.carried = None
        agent.task_id = None

        task_id = state.claims.mark_crashed(agent.agent_id)
        self._log('crash', agent.agent_id)
        if task_id is not None:
            self._log('release', agent.agent_id, task=task_id)
        self._wake_idle()


def run_mission(cfg: ScenarioConfig, debug: bool = False) -> MissionReport:
    return MissionSimulator(cfg, debug=debug).run()


def run_strategy_random(cfg: ScenarioConfig, debug: bool = False) -> MissionReport:
    return run_mission(replace(cfg, strategy='Random'), debug)


def run_strategy_cover_first(cfg: ScenarioConfig, debug: bool = False) -> MissionReport:
    return run_mission(replace(cfg, strategy='CoverFieldFirst'), debug)


def run_strategy_cover_pickup(cfg: ScenarioConfig, debug: bool = False) -> MissionReport:
    return run_mission(replace(cfg, strategy='CoverAndPickup'), debug)
