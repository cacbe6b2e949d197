"""
Randomised checks of the reward prediction against exhaustive enumeration.

The asserted properties are the ones that hold for every instance of their
family: table value equals the oracle, J is monotone in tasks and budget,
marginal gains diminish when all tasks cost the same, and sequential
allocation stays within the known bounds of the joint optimum. Diminishing
returns with unequal costs is reported but not asserted.
"""

from dataclasses import dataclass
from datetime import datetime
from typing import List

import numpy as np
from tqdm import tqdm

from .arena_grid import GridSpec, Position
from .reward_dp import (AgentBudget, BudgetQuantizer, DpInstance, DpItem, MultiDpInstance, allocate_sequential,
                        brute_force_oracle, build_multi_instance, monotonicity_violations, predict_reward_single, random_instance,
                        submodularity_violations)
from .tasks import MOVING_3PT, STATIC_1PT, STATIC_2PT, STATIC_3PT, CostParams, FoundTask

IDENTICAL_BIN_BOUND = 0.632
HETEROGENEOUS_BOUND = 0.5

_CLASSES = (STATIC_1PT, STATIC_2PT, STATIC_3PT, MOVING_3PT)


def random_identical_multi(rng: np.random.Generator, max_agents: int = 3, max_items: int = 8) -> MultiDpInstance:
    """Agents at the drop box with equal budgets"""
    m = int(rng.integers(1, max_agents + 1))
    n = int(rng.integers(0, max_items + 1))
    costs = tuple(float(rng.integers(1, 201)) for _ in range(n))
    budget = float(rng.integers(1, 401))
    return MultiDpInstance(
        task_ids=tuple(f"t{k:02d}" for k in range(n)),
        rewards=tuple(int(rng.integers(1, 4)) for _ in range(n)),
        costs=costs,
        first_costs=tuple(costs for _ in range(m)),
        budgets=tuple(budget for _ in range(m)),
    )


def random_geometric_multi(rng: np.random.Generator, max_agents: int = 3, max_items: int = 8,
                           grid: GridSpec = GridSpec(), params: CostParams = CostParams()) -> MultiDpInstance:
    """Agents and tasks scattered over the arena, costed by flight and handling times"""
    m = int(rng.integers(1, max_agents + 1))
    n = int(rng.integers(0, max_items + 1))

    def point():
        return Position(float(rng.uniform(0, grid.width_m)), float(rng.uniform(0, grid.height_m)))

    agents = [AgentBudget(point(), float(rng.integers(40, 401))) for _ in range(m)]
    tasks = [FoundTask(f"t{k:02d}", _CLASSES[int(rng.integers(len(_CLASSES)))], point(), 0.0) for k in range(n)]
    return build_multi_instance(agents, tasks, params, grid)


@dataclass
class PropertyReport:
    instances: int = 0
    dp_mismatches: int = 0
    quantization_overestimates: int = 0
    monotonicity_violations: int = 0
    equal_cost_submodularity_violations: int = 0
    general_submodularity_violations: int = 0
    general_submodularity_instances: int = 0
    near_optimality_violations: int = 0
    worst_ratio: float = 1.0

    @property
    def ok(self) -> bool:
        return (self.dp_mismatches == 0 and self.quantization_overestimates == 0
                and self.monotonicity_violations == 0 and self.equal_cost_submodularity_violations == 0
                and self.near_optimality_violations == 0)

    def lines(self) -> List[str]:
        return [
            f"Instances per check: {self.instances}",
            f"DP vs oracle mismatches: {self.dp_mismatches}",
            f"Quantized DP above exact optimum: {self.quantization_overestimates}",
            f"Monotonicity violations: {self.monotonicity_violations}",
            f"Submodularity violations (equal costs): {self.equal_cost_submodularity_violations}",
            f"Submodularity violations (unequal costs, reported only): "
            f"{self.general_submodularity_violations} in {self.general_submodularity_instances} instances",
            f"Near-optimality violations: {self.near_optimality_violations}",
            f"Worst sequential/optimal ratio: {self.worst_ratio:.3f}",
        ]


def run_property_suite(instances: int = 100, seed: int = 0, debug: bool = False) -> PropertyReport:
    rng = np.random.default_rng(seed)
    q = BudgetQuantizer()
    report = PropertyReport(instances=instances)
    if debug:
        start_time = datetime.now()
        print(f"Execution started at: {start_time}")

    for _ in tqdm(range(instances), desc="Property checks", disable=not debug):
        inst = random_instance(rng)
        value, _ = predict_reward_single(inst, q)
        if value != brute_force_oracle(inst):
            report.dp_mismatches += 1

        shifted = random_instance(rng, max_items=8)
        fractional = DpInstance(
            tuple(DpItem(i.task_id, i.cost - 0.5, i.first_cost - 0.25, i.reward) for i in shifted.items),
            shifted.budget + 0.5)
        if predict_reward_single(fractional, q)[0] > brute_force_oracle(fractional):
            report.quantization_overestimates += 1

        small = random_instance(rng, max_items=8, drop_box_only=True)
        budgets = [float(b) for b in rng.integers(0, 401, size=4)]
        report.monotonicity_violations += monotonicity_violations(small, budgets)

        general = submodularity_violations(small)
        report.general_submodularity_violations += general
        report.general_submodularity_instances += int(general > 0)
        equal = random_instance(rng, max_items=8, equal_costs=True)
        report.equal_cost_submodularity_violations += submodularity_violations(equal)

        for minst, bound in ((random_identical_multi(rng), IDENTICAL_BIN_BOUND),
                             (random_geometric_multi(rng), HETEROGENEOUS_BOUND)):
            optimum = brute_force_oracle(minst, q)
            sequential = sum(t.value for t in allocate_sequential(minst, q))
            if optimum > 0:
                ratio = sequential / optimum
                report.worst_ratio = min(report.worst_ratio, ratio)
                if ratio < bound:
                    report.near_optimality_violations += 1

    if debug:
        end_time = datetime.now()
        print(f"Total execution time: {end_time - start_time}")
    return report
