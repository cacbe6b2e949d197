import pytest

from src.arena_grid import GridSpec, Position
from src.planner import PlannerSettings
from src.scenario_config import ScenarioConfig
from src.tasks import STATIC_2PT, CostParams


@pytest.fixture
def default_grid():
    return GridSpec()


@pytest.fixture
def small_grid():
    """3x3 cells with the drop box at the center of the middle cell"""
    return GridSpec(30.0, 30.0, 10.0, Position(15.0, 15.0))


@pytest.fixture
def small_settings(small_grid):
    return PlannerSettings(grid=small_grid, cost=CostParams(), horizon=1)


@pytest.fixture
def single_pickup_config(small_grid):
    """One agent and one 2-point static object sharing the drop-box cell"""
    def build(t0, strategy='Proposed', **overrides):
        return ScenarioConfig(
            grid=small_grid,
            inventory=((STATIC_2PT, 1),),
            uav_count=1,
            t0=t0,
            calc_time=10.0,
            strategy=strategy,
            object_positions=(Position(15.0, 15.0),),
            **overrides,
        )
    return build
