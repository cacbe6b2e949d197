import pytest

from src.arena_grid import CellIndex, GridSpec, Position
from src.mission_log import parse_events
from src.mission_simulator import (MissionSimulator, run_mission, run_strategy_cover_first, run_strategy_cover_pickup,
                                   run_strategy_random)
from src.planner import ExecuteTask
from src.replay_checker import replay_lines
from src.scenario_config import ScenarioConfig
from src.strategies import (STRATEGY_CLASSES, CoverFieldFirstStrategy, ProposedStrategy, band_sweeps, make_strategy)
from src.tasks import MOVING_3PT, STATIC_1PT, STATIC_3PT, FoundTask


def test_every_strategy_is_registered():
    assert set(STRATEGY_CLASSES) == {"Proposed", "Random", "CoverFieldFirst", "CoverAndPickup"}
    assert isinstance(make_strategy(ScenarioConfig()), ProposedStrategy)
    assert make_strategy(ScenarioConfig()).decision_time == 10.0
    assert make_strategy(ScenarioConfig(strategy="Random")).decision_time == 0.0


def test_band_sweeps_cover_every_cell_once():
    grid = GridSpec()
    sweeps = band_sweeps(grid, 3)
    assert [len(s) for s in sweeps] == [20, 20, 20]
    assert sorted(c for s in sweeps for c in s) == sorted(grid.all_cells())
    assert sweeps[0][:3] == [CellIndex(0, 0), CellIndex(1, 0), CellIndex(2, 0)]
    # second row of a band runs back
    assert sweeps[0][10] == CellIndex(9, 1)
    assert sweeps[2][0] == CellIndex(0, 4)


def test_band_sweeps_with_more_agents_than_rows():
    sweeps = band_sweeps(GridSpec(30.0, 20.0, 10.0, Position(15.0, 10.0)), 3)
    assert [len(s) for s in sweeps] == [3, 3, 0]


@pytest.mark.parametrize("runner", [run_strategy_random, run_strategy_cover_pickup])
def test_benchmarks_pick_up_their_own_detection_at_once(single_pickup_config, runner):
    report = runner(single_pickup_config(60.0))
    assert report.score == 2
    assert report.trace == [(45.0, 2)]
    assert replay_lines(report.log_lines).ok


def test_cover_field_first_covers_before_collecting(single_pickup_config):
    assert run_strategy_cover_first(single_pickup_config(60.0)).score == 0

    report = run_strategy_cover_first(single_pickup_config(200.0))
    assert report.score == 2
    # nine cells swept, then back to the middle cell; the object lies at the drop box, so pick and drop
    delivered_at = report.trace[0][0]
    assert delivered_at == pytest.approx(47.071 + 7.071 + 25.0 + 20.0, abs=0.01)


def test_cover_and_pickup_resumes_its_sweep():
    cfg = ScenarioConfig(inventory=((STATIC_1PT, 1),), uav_count=1, t0=200.0, strategy="CoverAndPickup",
                         object_positions=(Position(5.0, 5.0),))
    report = run_mission(cfg)
    assert report.score == 1

    events = parse_events(report.log_lines)
    found = next(e for e in events if e.kind == "found")
    assert found.t < 26.0
    deliver = next(i for i, e in enumerate(events) if e.kind == "deliver")
    resumed = next(e for e in events[deliver:] if e.kind == "decide")
    assert resumed.payload["path"] == [[0, 0]]


def test_cover_field_first_prefers_points_per_second():
    cfg = ScenarioConfig(strategy="CoverFieldFirst", uav_count=1)
    sim = MissionSimulator(cfg)
    agent = sim.state.agents[0]
    sim.state.found_tasks = {
        "o00": FoundTask("o00", STATIC_1PT, Position(55.0, 35.0), 0.0),
        "o01": FoundTask("o01", STATIC_3PT, Position(95.0, 55.0), 0.0),
    }
    assert sim.strategy.best_static(sim, agent).task_id == "o01"

    sim.state.claims.claim(1, ExecuteTask("o01"))
    assert sim.strategy.best_static(sim, agent).task_id == "o00"


@pytest.mark.parametrize("seed", range(5))
def test_cover_field_first_scores_nothing_in_short_missions(seed):
    report = run_mission(ScenarioConfig(seed=seed, t0=100.0, strategy="CoverFieldFirst"))
    assert report.score == 0


def test_cover_field_first_is_a_cover_strategy():
    assert issubclass(CoverFieldFirstStrategy, STRATEGY_CLASSES["CoverAndPickup"])


@pytest.mark.parametrize("strategy", ["Random", "CoverFieldFirst", "CoverAndPickup"])
def test_benchmark_logs_replay_cleanly(strategy):
    report = run_mission(ScenarioConfig(seed=4, t0=400.0, strategy=strategy, crashes=((2, 200.0),)))
    result = replay_lines(report.log_lines)
    assert result.ok, result.violations
    assert result.report.score == report.score


def test_proposed_replans_on_its_own_moving_sighting():
    sim = MissionSimulator(ScenarioConfig(uav_count=2))
    agent = sim.state.agents[0]
    sim.state.found_tasks = {
        "o00": FoundTask("o00", MOVING_3PT, Position(55.0, 35.0), 0.0),
        "o01": FoundTask("o01", STATIC_3PT, Position(95.0, 55.0), 0.0),
    }
    sim.state.finder = {"o00": 1, "o01": 0}
    assert not sim.strategy.interrupts(sim, agent, {"o00", "o01"})

    sim.state.finder["o00"] = 0
    assert sim.strategy.interrupts(sim, agent, {"o00"})
    assert not sim.strategy.interrupts(sim, agent, {"o01"})

    sim.state.claims.claim(1, ExecuteTask("o00"))
    assert not sim.strategy.interrupts(sim, agent, {"o00"})
