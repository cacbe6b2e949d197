"""
Event-driven mission simulation on small hand-timed scenarios.

One agent and one 2-point static object at the drop box: the planner decides
at t=10 (calculation time), picks 10-35 and drops 35-55.
"""

import math

import numpy as np
import pytest

from src.arena_grid import GridSpec, Position
from src.errors import DomainError
from src.mission_log import MissionReport, parse_events
from src.mission_simulator import MissionSimulator, run_mission
from src.mission_state import AgentPhase, MissionState, ObjectStatus, SimObject, step_moving_objects
from src.replay_checker import replay_lines
from src.scenario_config import ScenarioConfig
from src.tasks import MOVING_3PT, STATIC_1PT


def _kinds(report):
    return [event.kind for event in parse_events(report.log_lines)]


def test_single_pickup_is_delivered(single_pickup_config):
    report = run_mission(single_pickup_config(60.0))
    assert report.score == 2
    assert report.trace == [(55.0, 2)]
    assert report.delivered == ["o00"]
    assert report.lost == []

    kinds = _kinds(report)
    assert kinds[:3] == ["mission", "spawn", "found"]
    assert kinds[-1] == "end"
    for kind in ("decide", "claim", "pick_start", "pick_done", "deliver", "release"):
        assert kind in kinds
    assert replay_lines(report.log_lines).ok


def test_delivery_must_fit_the_time_limit(single_pickup_config):
    report = run_mission(single_pickup_config(50.0))
    assert report.score == 0
    assert "deliver" not in _kinds(report)
    assert replay_lines(report.log_lines).ok


def test_zero_time_limit(single_pickup_config):
    report = run_mission(single_pickup_config(0.0))
    assert report.score == 0
    assert report.decisions == 0
    assert _kinds(report) == ["mission", "spawn", "found", "end"]


def test_crash_while_picking_loses_the_object(single_pickup_config):
    report = run_mission(single_pickup_config(60.0, crashes=((0, 20.0),)))
    assert report.score == 0
    assert report.lost == ["o00"]

    events = parse_events(report.log_lines)
    lost = next(e for e in events if e.kind == "lost")
    assert lost.payload == {"object": "o00", "reason": "crash"}
    assert lost.t == pytest.approx(20.0)
    assert any(e.kind == "release" and e.payload["task"] == "o00" for e in events)

    result = replay_lines(report.log_lines)
    assert result.ok, result.violations
    assert result.report.lost == ["o00"]


def test_crash_after_delivery_keeps_the_score(single_pickup_config):
    report = run_mission(single_pickup_config(60.0, crashes=((0, 56.0),)))
    assert report.score == 2
    assert report.lost == []
    assert replay_lines(report.log_lines).ok


def test_inject_crash_rejects_unknown_agent(single_pickup_config):
    sim = MissionSimulator(single_pickup_config(60.0))
    with pytest.raises(DomainError):
        sim.inject_crash(3, 10.0)
    with pytest.raises(DomainError):
        sim.inject_crash(0, -1.0)


def test_simulator_runs_once(single_pickup_config):
    sim = MissionSimulator(single_pickup_config(60.0))
    sim.run()
    with pytest.raises(DomainError):
        sim.run()


def test_crashed_agent_cannot_sense(single_pickup_config):
    sim = MissionSimulator(single_pickup_config(60.0))
    agent = sim.state.agents[0]
    obs = sim.sense(agent)
    assert obs.detections == frozenset({("o00", (1, 1))})

    agent.phase = AgentPhase.CRASHED
    with pytest.raises(DomainError):
        sim.sense(agent)


def test_objects_spawn_inside_the_arena():
    cfg = ScenarioConfig(seed=7)
    sim = MissionSimulator(cfg)
    assert len(sim.state.objects) == 20
    assert sorted(sim.state.objects) == [f"o{k:02d}" for k in range(20)]
    for obj in sim.state.objects.values():
        assert cfg.grid.contains(obj.true_pos)
        assert sim.state.beliefs[obj.object_id].total() == pytest.approx(1.0)
    assert sum(obj.is_moving for obj in sim.state.objects.values()) == 10


def test_same_seed_same_mission():
    cfg = ScenarioConfig(seed=3, t0=200.0)
    first = run_mission(cfg)
    second = run_mission(cfg)
    assert first.log_lines == second.log_lines
    assert first.to_json() == second.to_json()


def test_default_mission_log_replays_cleanly():
    report = run_mission(ScenarioConfig(seed=1, t0=300.0, crashes=((1, 150.0),)))
    result = replay_lines(report.log_lines)
    assert result.ok, result.violations
    assert result.report.score == report.score
    # the log keeps times to the millisecond
    assert [s for _, s in result.report.trace] == [s for _, s in report.trace]
    assert [t for t, _ in result.report.trace] == pytest.approx([t for t, _ in report.trace], abs=1e-3)
    assert "crash" in _kinds(report)


def test_moving_objects_stay_in_the_arena():
    grid = GridSpec()
    state = MissionState(grid=grid)
    for k in range(5):
        obj = SimObject(f"m{k}", MOVING_3PT, Position(1.0 + 24 * k, 59.0), heading=math.pi / 3 * k)
        obj.rng = np.random.default_rng([0, 1, k])
        state.objects[obj.object_id] = obj
    rock = SimObject("s0", STATIC_1PT, Position(10.0, 10.0))
    state.objects["s0"] = rock

    for _ in range(600):
        step_moving_objects(state, 1.0, 1.0, 5.0)
        for obj in state.objects.values():
            assert grid.contains(obj.true_pos)
    assert rock.true_pos == Position(10.0, 10.0)


def test_carried_objects_do_not_move():
    state = MissionState(grid=GridSpec())
    obj = SimObject("m0", MOVING_3PT, Position(30.0, 30.0), status=ObjectStatus.BEING_CARRIED)
    obj.rng = np.random.default_rng(0)
    state.objects["m0"] = obj
    step_moving_objects(state, 1.0, 1.0, 5.0)
    assert obj.true_pos == Position(30.0, 30.0)


def test_step_needs_positive_dt():
    with pytest.raises(DomainError):
        step_moving_objects(MissionState(grid=GridSpec()), 0.0, 1.0, 5.0)


def test_report_json_round_trip(single_pickup_config):
    report = run_mission(single_pickup_config(60.0))
    loaded = MissionReport.from_json(report.to_json())
    assert loaded.score == 2
    assert loaded.trace == [(55.0, 2)]
    assert loaded.score_at(54.0) == 0
    assert loaded.score_at(60.0) == 2


def test_debug_run_prints_summary(single_pickup_config, capsys):
    run_mission(single_pickup_config(60.0), debug=True)
    out = capsys.readouterr().out
    assert "Final score: 2" in out
    assert "Delivered: 1 objects" in out
    assert "Total execution time" in out


def test_spawn_and_found_events_name_the_object_kind(single_pickup_config):
    events = parse_events(run_mission(single_pickup_config(60.0)).log_lines)
    spawn, found = events[1], events[2]
    assert spawn.payload == {"object": "o00", "kind": "Static", "points": 2, "x": 15.0, "y": 15.0}
    assert found.agent == 0
    assert found.payload == {"task": "o00", "kind": "Static", "points": 2, "cell": [1, 1], "last_seen": 0.0}


def test_long_mission_explores_before_picking(single_pickup_config):
    report = run_mission(single_pickup_config(200.0))
    first = next(e for e in parse_events(report.log_lines) if e.kind == "decide")
    assert first.t == pytest.approx(10.0)
    assert first.payload["action"] == "explore"
    assert first.payload["r"] == 0.0
    assert report.score == 2


def test_deciding_agent_stays_over_a_moving_object(small_grid):
    cfg = ScenarioConfig(grid=small_grid, inventory=((MOVING_3PT, 1),), uav_count=1, t0=200.0, calc_time=10.0,
                         object_positions=(Position(15.0, 15.0),))
    sim = MissionSimulator(cfg)
    report = sim.run()
    events = parse_events(report.log_lines)

    first = next(e for e in events if e.kind == "decide")
    assert first.t == pytest.approx(10.0)
    assert first.payload["action"] == "execute"
    assert first.payload["task"] == "o00"
    assert not any(e.kind == "lost" and e.t <= 10.0 for e in events)
    assert replay_lines(report.log_lines).ok
