"""
Batch experiments: every strategy over a range of time limits and paired
seeds, run in parallel worker processes and gathered into pandas tables.
"""

import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, List, Optional, Tuple

import pandas as pd
from tqdm import tqdm

from .errors import DomainError
from .mission_simulator import run_mission
from .scenario_config import STRATEGIES, ScenarioConfig, apply_overrides

RESULT_COLUMNS = ['strategy', 't0', 'seed', 'score', 'runtime_ms']
SUMMARY_COLUMNS = ['strategy', 't0', 'trials', 'mean', 'min', 'max']


@dataclass(frozen=True)
class SweepSpec:
    t0_values: Tuple[float, ...] = tuple(float(t) for t in range(100, 1000, 100))
    trials_per_t0: int = 5
    strategies: Tuple[str, ...] = STRATEGIES
    base_seed: int = 0

    def __post_init__(self):
        if self.trials_per_t0 < 0:
            raise DomainError(f"trials_per_t0 must be nonnegative, got {self.trials_per_t0}")
        for strategy in self.strategies:
            if strategy not in STRATEGIES:
                raise DomainError(f"Unknown strategy: {strategy}")
        for t0 in self.t0_values:
            if t0 < 0:
                raise DomainError(f"Time limits must be nonnegative, got {t0}")

    def jobs(self) -> List[Tuple[str, float, int]]:
        """(strategy, t0, seed) per mission; trial k of every strategy shares seed base_seed + k"""
        return [
            (strategy, float(t0), self.base_seed + trial)
            for strategy in self.strategies
            for t0 in self.t0_values
            for trial in range(self.trials_per_t0)
        ]


@dataclass
class SweepResult:
    rows: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=RESULT_COLUMNS))

    def aggregates(self) -> pd.DataFrame:
        if self.rows.empty:
            return pd.DataFrame(columns=SUMMARY_COLUMNS)
        grouped = self.rows.groupby(['strategy', 't0'], sort=True)['score']
        summary = grouped.agg(trials='count', mean='mean', min='min', max='max').reset_index()
        return summary[SUMMARY_COLUMNS]


def run_sweep_job(args):
    """Run one mission of a sweep; returns a result row"""
    config, strategy, t0, seed, timing, log_dir = args
    cfg = ScenarioConfig.from_dict(apply_overrides(config, {'strategy': strategy, 't0': t0, 'seed': seed}))
    started = time.perf_counter()
    report = run_mission(cfg)
    runtime_ms = int(round((time.perf_counter() - started) * 1000)) if timing else 0
    if log_dir is not None:
        report.write_log(os.path.join(log_dir, f"{strategy}_t{int(t0)}_s{seed}.log"))
    return {'strategy': strategy, 't0': t0, 'seed': seed, 'score': report.score, 'runtime_ms': runtime_ms}


def run_sweep(spec: SweepSpec, config: Optional[Dict] = None, jobs: int = 1, timing: bool = False,
              log_dir: Optional[str] = None, debug: bool = False) -> SweepResult:
    config = dict(config or {})
    # strategy, t0 and seed vary per job
    for key in ('strategy', 't0', 'seed'):
        config.pop(key, None)
    ScenarioConfig.from_dict(config)

    if debug:
        start_time = datetime.now()
        print(f"Execution started at: {start_time}")
    if log_dir is not None and not os.path.exists(log_dir):
        os.makedirs(log_dir)

    job_args = [(config, strategy, t0, seed, timing, log_dir) for strategy, t0, seed in spec.jobs()]
    if not job_args:
        return SweepResult()

    if jobs > 1:
        if debug:
            print(f"Using {jobs} worker processes")
        with mp.Pool(jobs) as pool:
            rows = list(tqdm(pool.imap(run_sweep_job, job_args), total=len(job_args),
                             desc="Missions", disable=not debug))
    else:
        rows = [run_sweep_job(args) for args in tqdm(job_args, desc="Missions", disable=not debug)]

    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    frame = frame.sort_values(['strategy', 't0', 'seed'], kind='mergesort').reset_index(drop=True)

    if debug:
        end_time = datetime.now()
        print(f"Ran {len(frame)} missions")
        print(f"Total execution time: {end_time - start_time}")
    return SweepResult(frame)


def summary_path(path: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_summary{ext or '.csv'}"


def emit_csv(result: SweepResult, path: str) -> Tuple[str, str]:
    """Write the per-mission rows and the per-(strategy, t0) aggregates"""
    aggregates_path = summary_path(path)
    try:
        result.rows.to_csv(path, index=False, columns=RESULT_COLUMNS, float_format='%.3f', lineterminator='\n')
        result.aggregates().to_csv(aggregates_path, index=False, float_format='%.3f', lineterminator='\n')
    except OSError as e:
        raise OSError(f"Could not write sweep results to {path}: {e}")
    return path, aggregates_path
