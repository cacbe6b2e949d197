"""
Scenario configuration: flat JSON documents merged over the default mission
parameters, validated, and turned into a typed ScenarioConfig.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .arena_grid import GridSpec, Position
from .belief import MotionParams
from .errors import ConfigError, DomainError
from .reward_dp import BudgetQuantizer
from .tasks import MOVING_3PT, STATIC_1PT, STATIC_2PT, STATIC_3PT, CostParams, ObjectClass

STRATEGIES = ("Proposed", "Random", "CoverFieldFirst", "CoverAndPickup")

DEFAULTS = {
    'width_m': 100.0,
    'height_m': 60.0,
    'cell_size_m': 10.0,
    'drop_box_x': 50.0,
    'drop_box_y': 30.0,
    'static_1pt': 4,
    'static_2pt': 3,
    'static_3pt': 3,
    'moving_3pt': 10,
    'object_speed': 1.0,
    'heading_period': 5.0,
    'uav_count': 3,
    'uav_speed': 2.0,
    't_pick_static': 25.0,
    't_pick_moving': 45.0,
    't_drop_static': 20.0,
    't_drop_moving': 20.0,
    't0': 1200.0,
    'tracking_timeout': 4.0,
    'calc_time': 10.0,
    'p_out': 0.1,
    'filter_step': 1.0,
    'horizon': 3,
    'budget_step': 1.0,
    'seed': 0,
    'strategy': 'Proposed',
    'object_positions': None,
    'crashes': [],
}

INVENTORY_KEYS = (
    ('static_1pt', STATIC_1PT),
    ('static_2pt', STATIC_2PT),
    ('static_3pt', STATIC_3PT),
    ('moving_3pt', MOVING_3PT),
)

_POSITIVE = ('width_m', 'height_m', 'cell_size_m', 'object_speed', 'heading_period', 'uav_speed',
             't_pick_static', 't_pick_moving', 't_drop_static', 't_drop_moving', 'filter_step', 'budget_step')
_NONNEGATIVE = ('t0', 'tracking_timeout', 'calc_time')
_COUNTS = ('static_1pt', 'static_2pt', 'static_3pt', 'moving_3pt', 'horizon')


def validate_config(config: Dict):
    """Validate a scenario dict that already carries every key"""
    for key in config:
        if key not in DEFAULTS:
            raise ConfigError(f"Unknown configuration key: {key}")
    for key in DEFAULTS:
        if key not in config:
            raise ConfigError(f"Missing required key: {key}")

    for key in _POSITIVE + _NONNEGATIVE + ('drop_box_x', 'drop_box_y', 'p_out'):
        value = config[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
    for key in _POSITIVE:
        if config[key] <= 0:
            raise ConfigError(f"{key} must be positive, got {config[key]}")
    for key in _NONNEGATIVE:
        if config[key] < 0:
            raise ConfigError(f"{key} must be nonnegative, got {config[key]}")
    for key in _COUNTS + ('uav_count', 'seed'):
        value = config[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ConfigError(f"{key} must be a nonnegative integer, got {value!r}")
    if config['uav_count'] < 1:
        raise ConfigError(f"uav_count must be at least 1, got {config['uav_count']}")
    if config['horizon'] < 1:
        raise ConfigError(f"horizon must be at least 1, got {config['horizon']}")
    if not 0.0 <= config['p_out'] <= 1.0:
        raise ConfigError(f"p_out must lie in [0, 1], got {config['p_out']}")
    if config['strategy'] not in STRATEGIES:
        raise ConfigError(f"Unknown strategy: {config['strategy']} (expected one of {', '.join(STRATEGIES)})")

    positions = config['object_positions']
    if positions is not None:
        total = sum(config[key] for key, _ in INVENTORY_KEYS)
        if not isinstance(positions, list) or len(positions) != total:
            raise ConfigError(f"object_positions must list {total} [x, y] pairs")
        for pos in positions:
            if not isinstance(pos, (list, tuple)) or len(pos) != 2:
                raise ConfigError(f"Invalid object position: {pos!r}")
            if not (0 <= pos[0] <= config['width_m'] and 0 <= pos[1] <= config['height_m']):
                raise ConfigError(f"Object position {pos} lies outside the arena")

    for crash in config['crashes']:
        if not isinstance(crash, (list, tuple)) or len(crash) != 2:
            raise ConfigError(f"Invalid crash entry: {crash!r} (expected [agent_id, time])")
        agent_id, time = crash
        if isinstance(agent_id, bool) or not isinstance(agent_id, int) or not 0 <= agent_id < config['uav_count']:
            raise ConfigError(f"Crash names unknown agent: {agent_id!r}")
        if not isinstance(time, (int, float)) or time < 0:
            raise ConfigError(f"Crash time must be a nonnegative number, got {time!r}")


def merge_defaults(config: Dict) -> Dict:
    merged = dict(config)
    for key, default_value in DEFAULTS.items():
        if key not in merged:
            merged[key] = default_value
    return merged


def load_config(path: Optional[str]) -> Dict:
    """Read a scenario file and fill in defaults; None gives the defaults"""
    if path is None:
        return merge_defaults({})
    if not os.path.exists(path):
        raise ConfigError(f"Scenario file not found: {path}")
    try:
        with open(path) as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Scenario file {path} is not valid JSON: {e}")
    if not isinstance(config, dict):
        raise ConfigError(f"Scenario file {path} must hold a JSON object")
    return merge_defaults(config)


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    inventory: Tuple[Tuple[ObjectClass, int], ...] = ((STATIC_1PT, 4), (STATIC_2PT, 3), (STATIC_3PT, 3), (MOVING_3PT, 10))
    object_speed: float = 1.0
    heading_period: float = 5.0
    uav_count: int = 3
    cost: CostParams = field(default_factory=CostParams)
    t0: float = 1200.0
    tracking_timeout: float = 4.0
    calc_time: float = 10.0
    motion: MotionParams = field(default_factory=MotionParams)
    horizon: int = 3
    budget_step: float = 1.0
    seed: int = 0
    strategy: str = 'Proposed'
    object_positions: Optional[Tuple[Position, ...]] = None
    crashes: Tuple[Tuple[int, float], ...] = ()

    @property
    def quantizer(self) -> BudgetQuantizer:
        return BudgetQuantizer(self.budget_step)

    @property
    def object_count(self) -> int:
        return sum(count for _, count in self.inventory)

    @classmethod
    def from_dict(cls, config: Dict) -> "ScenarioConfig":
        config = merge_defaults(config)
        validate_config(config)
        try:
            grid = GridSpec(config['width_m'], config['height_m'], config['cell_size_m'],
                            Position(config['drop_box_x'], config['drop_box_y']))
            cost = CostParams(config['uav_speed'], config['t_pick_static'], config['t_pick_moving'],
                              config['t_drop_static'], config['t_drop_moving'])
            motion = MotionParams(config['p_out'], config['filter_step'])
        except DomainError as e:
            raise ConfigError(str(e))

        positions = config['object_positions']
        return cls(
            grid=grid,
            inventory=tuple((cls_, config[key]) for key, cls_ in INVENTORY_KEYS),
            object_speed=float(config['object_speed']),
            heading_period=float(config['heading_period']),
            uav_count=config['uav_count'],
            cost=cost,
            t0=float(config['t0']),
            tracking_timeout=float(config['tracking_timeout']),
            calc_time=float(config['calc_time']),
            motion=motion,
            horizon=config['horizon'],
            budget_step=float(config['budget_step']),
            seed=config['seed'],
            strategy=config['strategy'],
            object_positions=tuple(Position(float(x), float(y)) for x, y in positions) if positions else None,
            crashes=tuple((int(a), float(t)) for a, t in config['crashes']),
        )

    def to_dict(self) -> Dict:
        config = {
            'width_m': self.grid.width_m,
            'height_m': self.grid.height_m,
            'cell_size_m': self.grid.cell_size_m,
            'drop_box_x': self.grid.drop_box.x,
            'drop_box_y': self.grid.drop_box.y,
            'object_speed': self.object_speed,
            'heading_period': self.heading_period,
            'uav_count': self.uav_count,
            'uav_speed': self.cost.uav_speed,
            't_pick_static': self.cost.t_pick_static,
            't_pick_moving': self.cost.t_pick_moving,
            't_drop_static': self.cost.t_drop_static,
            't_drop_moving': self.cost.t_drop_moving,
            't0': self.t0,
            'tracking_timeout': self.tracking_timeout,
            'calc_time': self.calc_time,
            'p_out': self.motion.p_out,
            'filter_step': self.motion.step_dt,
            'horizon': self.horizon,
            'budget_step': self.budget_step,
            'seed': self.seed,
            'strategy': self.strategy,
            'object_positions': [list(p) for p in self.object_positions] if self.object_positions else None,
            'crashes': [list(c) for c in self.crashes],
        }
        for key, object_class in INVENTORY_KEYS:
            config[key] = dict(self.inventory).get(object_class, 0)
        return config


def apply_overrides(config: Dict, overrides: Dict) -> Dict:
    """CLI flags win over file values; None means the flag was not given"""
    merged = dict(config)
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return merged


def parse_crash(text: str) -> List:
    """'AGENT@TIME' as given on the command line"""
    try:
        agent, time = text.split('@')
        return [int(agent), float(time)]
    except ValueError:
        raise ConfigError(f"Invalid crash specification: {text!r} (expected AGENT@TIME)")
