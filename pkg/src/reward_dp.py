"""
Reward prediction J(T, t): the most points a set of agents can still deliver
from the found tasks within their remaining time budgets.

A single agent's prediction is a knapsack over tasks with one twist: the first
pickup starts from the agent's position (cost c*_k), every later pickup starts
from the drop box (cost c_k). Two budget-indexed tables handle this:

    B(k, tau)   best reward from tasks 1..k, all costed from the drop box
    B*(k, tau)  best reward from tasks 1..k where one task is picked first

B* is filled from an auxiliary table F holding selections that already contain
their first pickup, so every non-empty solution has exactly one PickFirst task.
Several agents are handled by solving the single-agent problem for each agent
in turn over the tasks the previous agents left.

The brute-force oracles and the property checks at the bottom of this module
are exact enumerations used to validate the tables.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .arena_grid import GridSpec, Position
from .errors import DomainError, OracleSizeError
from .tasks import CostParams, FoundTask, task_cost_from

# Marks table cells with no valid "first pickup committed" selection
NEG = -(10 ** 12)

MAX_ORACLE_ITEMS = 12
MAX_MULTI_ORACLE_ITEMS = 8
MAX_MULTI_ORACLE_AGENTS = 3


class DecisionLabel(str, Enum):
    PICK_FIRST = "PickFirst"
    PICK_LATER = "PickLater"
    SKIP = "Skip"


@dataclass(frozen=True)
class DpItem:
    task_id: str
    cost: float         # c_k, from the drop box
    first_cost: float   # c*_k, from the agent position
    reward: int


@dataclass(frozen=True)
class DpInstance:
    items: Tuple[DpItem, ...]
    budget: float

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if self.budget < 0:
            raise DomainError(f"Budget must be nonnegative, got {self.budget}")
        for item in self.items:
            if item.cost <= 0 or item.first_cost <= 0:
                raise DomainError(f"Task {item.task_id} has a nonpositive cost")
            if item.reward < 0:
                raise DomainError(f"Task {item.task_id} has a negative reward")


@dataclass(frozen=True)
class MultiDpInstance:
    """Tasks shared by several agents; first_costs[j][k] is c*_k for agent j"""
    task_ids: Tuple[str, ...]
    rewards: Tuple[int, ...]
    costs: Tuple[float, ...]
    first_costs: Tuple[Tuple[float, ...], ...]
    budgets: Tuple[float, ...]

    @property
    def agent_count(self) -> int:
        return len(self.budgets)

    def agent_instance(self, agent: int, indices: Sequence[int]) -> DpInstance:
        items = tuple(
            DpItem(self.task_ids[k], self.costs[k], self.first_costs[agent][k], self.rewards[k])
            for k in indices
        )
        return DpInstance(items, max(0.0, self.budgets[agent]))


@dataclass(frozen=True)
class BudgetQuantizer:
    step: float = 1.0

    def __post_init__(self):
        if self.step <= 0:
            raise DomainError(f"Budget step must be positive, got {self.step}")

    def cost_units(self, cost: float) -> int:
        # Round up so predictions never promise more than can be delivered
        return max(1, int(math.ceil(cost / self.step - 1e-9)))

    def budget_units(self, budget: float) -> int:
        return max(0, int(math.floor(budget / self.step + 1e-9)))


@dataclass
class DpTables:
    B: np.ndarray
    B_star: np.ndarray
    first_committed: np.ndarray
    labels: Dict[str, DecisionLabel] = field(default_factory=dict)

    @property
    def value(self) -> int:
        return int(self.B_star[-1, -1])

    @property
    def first_task_id(self) -> Optional[str]:
        for task_id, label in self.labels.items():
            if label == DecisionLabel.PICK_FIRST:
                return task_id
        return None

    @property
    def selected(self) -> List[str]:
        return [task_id for task_id, label in self.labels.items() if label != DecisionLabel.SKIP]

    def dump(self) -> str:
        """Text rendering of both tables for debugging"""
        lines = ["B:"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in self.B)
        lines.append("B*:")
        lines.extend(" ".join(str(int(v)) for v in row) for row in self.B_star)
        lines.append("labels: " + ", ".join(f"{k}={v.value}" for k, v in self.labels.items()))
        return "\n".join(lines)


@dataclass(frozen=True)
class AgentBudget:
    position: Position
    budget: float


def fill_tables(inst: DpInstance, q: BudgetQuantizer) -> DpTables:
    n = len(inst.items)
    T = q.budget_units(inst.budget)

    B = np.zeros((n + 1, T + 1), dtype=np.int64)
    F = np.full((n + 1, T + 1), NEG, dtype=np.int64)
    units = []

    for k, item in enumerate(inst.items, start=1):
        c = q.cost_units(item.cost)
        cs = q.cost_units(item.first_cost)
        r = item.reward
        units.append((c, cs, r))

        B[k] = B[k - 1]
        if c <= T:
            B[k, c:] = np.maximum(B[k - 1, c:], B[k - 1, :T + 1 - c] + r)

        F[k] = F[k - 1]
        if cs <= T:
            F[k, cs:] = np.maximum(F[k, cs:], B[k - 1, :T + 1 - cs] + r)
        if c <= T:
            F[k, c:] = np.maximum(F[k, c:], F[k - 1, :T + 1 - c] + r)

    B_star = np.maximum(F, 0)
    tables = DpTables(B=B, B_star=B_star, first_committed=F)
    tables.labels = _backtrack(inst, units, B, F, T)
    return tables


def _backtrack(inst: DpInstance, units, B: np.ndarray, F: np.ndarray, T: int) -> Dict[str, DecisionLabel]:
    n = len(inst.items)
    labels = {item.task_id: DecisionLabel.SKIP for item in inst.items}
    if n == 0 or F[n, T] <= 0:
        return labels

    tau = T
    committed = True
    for k in range(n, 0, -1):
        c, cs, r = units[k - 1]
        task_id = inst.items[k - 1].task_id
        if committed:
            if F[k - 1, tau] == F[k, tau]:
                continue
            if c <= tau and F[k - 1, tau - c] + r == F[k, tau]:
                labels[task_id] = DecisionLabel.PICK_LATER
                tau -= c
                continue
            labels[task_id] = DecisionLabel.PICK_FIRST
            tau -= cs
            committed = False
        else:
            if B[k - 1, tau] == B[k, tau]:
                continue
            labels[task_id] = DecisionLabel.PICK_LATER
            tau -= c
    return labels


def predict_reward_single(inst: DpInstance, q: BudgetQuantizer = BudgetQuantizer()) -> Tuple[int, Dict[str, DecisionLabel]]:
    tables = fill_tables(inst, q)
    return tables.value, tables.labels


def build_multi_instance(agents: Sequence[AgentBudget], tasks: Iterable[FoundTask], params: CostParams,
                         grid: GridSpec, overhead: float = 0.0) -> MultiDpInstance:
    """Cost every task from the drop box and from each agent's position"""
    ordered = sorted(tasks, key=lambda t: t.task_id)
    costs = tuple(task_cost_from(grid.drop_box, t, params, grid) + overhead for t in ordered)
    first_costs = tuple(
        tuple(task_cost_from(agent.position, t, params, grid) + overhead for t in ordered)
        for agent in agents
    )
    return MultiDpInstance(
        task_ids=tuple(t.task_id for t in ordered),
        rewards=tuple(t.reward for t in ordered),
        costs=costs,
        first_costs=first_costs,
        budgets=tuple(agent.budget for agent in agents),
    )


def allocate_sequential(minst: MultiDpInstance, q: BudgetQuantizer = BudgetQuantizer()) -> List[DpTables]:
    """Each agent, in list order, solves its DP over the tasks still unassigned"""
    remaining = list(range(len(minst.task_ids)))
    results = []
    for agent in range(minst.agent_count):
        tables = fill_tables(minst.agent_instance(agent, remaining), q)
        results.append(tables)
        taken = set(tables.selected)
        remaining = [k for k in remaining if minst.task_ids[k] not in taken]
    return results


def predict_reward_multi(agents: Sequence[AgentBudget], tasks: Iterable[FoundTask], params: CostParams,
                         grid: GridSpec, q: BudgetQuantizer = BudgetQuantizer(), overhead: float = 0.0) -> int:
    if not agents:
        raise DomainError("Reward prediction needs at least one agent")
    minst = build_multi_instance(agents, tasks, params, grid, overhead)
    return sum(tables.value for tables in allocate_sequential(minst, q))


# ---------------------------------------------------------------------------
# Exhaustive oracles
# ---------------------------------------------------------------------------

def _subset_bits(n: int) -> np.ndarray:
    return ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(bool)


def _feasible_rewards(costs, first_costs, rewards, budget) -> np.ndarray:
    """Reward of every subset mask, or -1 where the subset cannot be delivered"""
    n = len(costs)
    costs = np.asarray(costs, dtype=float)
    first_costs = np.asarray(first_costs, dtype=float)
    bits = _subset_bits(n)

    sum_cost = bits @ costs if n else np.zeros(1)
    sum_reward = bits @ np.asarray(rewards, dtype=float) if n else np.zeros(1)
    # The cheapest choice of first pickup swaps one c_k for c*_k
    min_delta = np.where(bits, first_costs - costs, np.inf).min(axis=1) if n else np.zeros(1)
    total = sum_cost + min_delta
    total[0] = 0.0

    feasible = total <= budget + 1e-9
    return np.where(feasible, sum_reward, -1.0).astype(np.int64)


def _quantized(costs, first_costs, budget, q: Optional[BudgetQuantizer]):
    if q is None:
        return list(costs), list(first_costs), budget
    return ([q.cost_units(c) for c in costs], [q.cost_units(c) for c in first_costs], q.budget_units(budget))


def _closure(values: List[int], n: int) -> List[int]:
    """best[U] = max over subsets S of U of values[S]"""
    best = list(values)
    for mask in range(1 << n):
        for i in range(n):
            bit = 1 << i
            if mask & bit and best[mask ^ bit] > best[mask]:
                best[mask] = best[mask ^ bit]
    return best


def subset_values(inst: DpInstance, q: Optional[BudgetQuantizer] = None) -> List[int]:
    """Exact J for every subset of the instance's tasks, indexed by bit mask"""
    n = len(inst.items)
    if n > MAX_ORACLE_ITEMS:
        raise OracleSizeError(f"Oracle handles at most {MAX_ORACLE_ITEMS} tasks, got {n}")
    costs, first_costs, budget = _quantized(
        [i.cost for i in inst.items], [i.first_cost for i in inst.items], inst.budget, q)
    values = _feasible_rewards(costs, first_costs, [i.reward for i in inst.items], budget)
    return _closure([int(v) for v in values], n)


def _oracle_single(inst: DpInstance, q: Optional[BudgetQuantizer]) -> int:
    n = len(inst.items)
    if n > MAX_ORACLE_ITEMS:
        raise OracleSizeError(f"Oracle handles at most {MAX_ORACLE_ITEMS} tasks, got {n}")
    costs, first_costs, budget = _quantized(
        [i.cost for i in inst.items], [i.first_cost for i in inst.items], inst.budget, q)
    values = _feasible_rewards(costs, first_costs, [i.reward for i in inst.items], budget)
    return int(max(values.max(), 0))


def _oracle_multi(minst: MultiDpInstance, q: Optional[BudgetQuantizer]) -> int:
    n = len(minst.task_ids)
    m = minst.agent_count
    if n > MAX_MULTI_ORACLE_ITEMS or m > MAX_MULTI_ORACLE_AGENTS:
        raise OracleSizeError(
            f"Multi-agent oracle handles at most {MAX_MULTI_ORACLE_ITEMS} tasks and "
            f"{MAX_MULTI_ORACLE_AGENTS} agents, got {n} tasks and {m} agents")
    if m == 0:
        return 0

    per_agent = []
    for j in range(m):
        costs, first_costs, budget = _quantized(minst.costs, minst.first_costs[j], max(0.0, minst.budgets[j]), q)
        values = _feasible_rewards(costs, first_costs, minst.rewards, budget)
        per_agent.append(_closure([int(v) for v in values], n))

    best = per_agent[0]
    for j in range(1, m):
        own = per_agent[j]
        merged = [0] * (1 << n)
        for U in range(1 << n):
            value = best[U]
            S = U
            while S:
                candidate = own[S] + best[U ^ S]
                if candidate > value:
                    value = candidate
                S = (S - 1) & U
            merged[U] = value
        best = merged
    return int(best[(1 << n) - 1])


def brute_force_oracle(inst, q: Optional[BudgetQuantizer] = None) -> int:
    """Exact optimum by enumeration; pass q to compare against quantized tables"""
    if isinstance(inst, MultiDpInstance):
        return _oracle_multi(inst, q)
    return _oracle_single(inst, q)


# ---------------------------------------------------------------------------
# Property checks
# ---------------------------------------------------------------------------

def monotonicity_violations(inst: DpInstance, budgets: Sequence[float] = (),
                            q: Optional[BudgetQuantizer] = None) -> int:
    """Count task-set and budget monotonicity failures of J on one instance"""
    n = len(inst.items)
    values = subset_values(inst, q)
    violations = 0
    for mask in range(1 << n):
        for i in range(n):
            bit = 1 << i
            if not mask & bit and values[mask] > values[mask | bit]:
                violations += 1

    previous = None
    for budget in sorted(budgets):
        value = brute_force_oracle(DpInstance(inst.items, budget), q)
        if previous is not None and value < previous:
            violations += 1
        previous = value
    return violations


def submodularity_violations(inst: DpInstance, q: Optional[BudgetQuantizer] = None) -> int:
    """
    Count diminishing-returns failures of J over all subsets of the instance.

    Marginal gains must not grow when the base set grows. Checking every base
    set against every single added task is enough, since any A within B is
    reached through single additions.
    """
    n = len(inst.items)
    values = np.array(subset_values(inst, q), dtype=np.int64)
    masks = np.arange(1 << n)
    violations = 0
    for e in range(n):
        e_bit = 1 << e
        for x in range(n):
            x_bit = 1 << x
            if x == e:
                continue
            base = masks[(masks & e_bit == 0) & (masks & x_bit == 0)]
            gain_small = values[base | e_bit] - values[base]
            gain_large = values[base | x_bit | e_bit] - values[base | x_bit]
            violations += int(np.count_nonzero(gain_small < gain_large))
    return violations


def random_instance(rng: np.random.Generator, max_items: int = MAX_ORACLE_ITEMS,
                    cost_range: Tuple[int, int] = (1, 200), budget_range: Tuple[int, int] = (1, 400),
                    reward_range: Tuple[int, int] = (1, 3), drop_box_only: bool = False,
                    equal_costs: bool = False) -> DpInstance:
    n = int(rng.integers(0, max_items + 1))
    shared = int(rng.integers(cost_range[0], cost_range[1] + 1))
    items = []
    for k in range(n):
        cost = shared if equal_costs else int(rng.integers(cost_range[0], cost_range[1] + 1))
        if drop_box_only or equal_costs:
            first_cost = cost
        else:
            first_cost = int(rng.integers(cost_range[0], cost_range[1] + 1))
        reward = int(rng.integers(reward_range[0], reward_range[1] + 1))
        items.append(DpItem(f"t{k:02d}", float(cost), float(first_cost), reward))
    budget = int(rng.integers(budget_range[0], budget_range[1] + 1))
    return DpInstance(tuple(items), float(budget))
