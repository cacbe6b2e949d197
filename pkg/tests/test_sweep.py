"""
Batch sweeps on a one-object arena small enough to time by hand.
"""

import pandas as pd
import pytest

from src.errors import ConfigError, DomainError
from src.sweep_runner import (RESULT_COLUMNS, SUMMARY_COLUMNS, SweepResult, SweepSpec, emit_csv, run_sweep,
                              run_sweep_job, summary_path)

SMALL = {
    'width_m': 30.0, 'height_m': 30.0, 'drop_box_x': 15.0, 'drop_box_y': 15.0,
    'static_1pt': 0, 'static_2pt': 1, 'static_3pt': 0, 'moving_3pt': 0,
    'uav_count': 1, 'object_positions': [[15.0, 15.0]],
}


@pytest.fixture
def small_spec():
    return SweepSpec(t0_values=(60.0, 100.0), trials_per_t0=2)


def test_jobs_pair_seeds_across_strategies():
    spec = SweepSpec(t0_values=(100.0, 200.0), trials_per_t0=3, strategies=("Proposed", "Random"), base_seed=10)
    jobs = spec.jobs()
    assert len(jobs) == 12
    assert jobs[0] == ("Proposed", 100.0, 10)
    assert {seed for s, t0, seed in jobs if s == "Random"} == {10, 11, 12}


@pytest.mark.parametrize("kwargs", [
    {"trials_per_t0": -1},
    {"strategies": ("Greedy",)},
    {"t0_values": (-5.0,)},
])
def test_sweep_spec_validation(kwargs):
    with pytest.raises(DomainError):
        SweepSpec(**kwargs)


def test_default_spec():
    spec = SweepSpec()
    assert spec.t0_values == (100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0, 900.0)
    assert len(spec.jobs()) == 4 * 9 * 5


def test_run_sweep_job_row():
    row = run_sweep_job((SMALL, "Proposed", 60.0, 0, False, None))
    assert row == {"strategy": "Proposed", "t0": 60.0, "seed": 0, "score": 2, "runtime_ms": 0}


def test_small_sweep_scores(small_spec):
    result = run_sweep(small_spec, SMALL)
    rows = result.rows
    assert list(rows.columns) == RESULT_COLUMNS
    assert len(rows) == 16
    assert (rows["runtime_ms"] == 0).all()

    scores = rows.groupby(["strategy", "t0"])["score"].max().to_dict()
    assert scores[("Proposed", 60.0)] == 2
    assert scores[("Random", 60.0)] == 2
    assert scores[("CoverAndPickup", 100.0)] == 2
    # covering the nine cells alone takes 47 s, the pickup another 52 s
    assert scores[("CoverFieldFirst", 60.0)] == 0
    assert scores[("CoverFieldFirst", 100.0)] == 2


def test_aggregates(small_spec):
    summary = run_sweep(small_spec, SMALL).aggregates()
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert len(summary) == 8
    proposed = summary[(summary["strategy"] == "Proposed") & (summary["t0"] == 60.0)].iloc[0]
    assert proposed["trials"] == 2
    assert proposed["mean"] == 2.0


def test_empty_sweep():
    result = run_sweep(SweepSpec(trials_per_t0=0), SMALL)
    assert result.rows.empty
    assert list(result.aggregates().columns) == SUMMARY_COLUMNS


def test_emit_csv_is_byte_identical_across_runs(tmp_path, small_spec):
    first = emit_csv(run_sweep(small_spec, SMALL), str(tmp_path / "a.csv"))
    second = emit_csv(run_sweep(small_spec, SMALL), str(tmp_path / "b.csv"))
    for a, b in zip(first, second):
        with open(a, "rb") as fa, open(b, "rb") as fb:
            assert fa.read() == fb.read()

    with open(first[0]) as f:
        assert f.readline() == "strategy,t0,seed,score,runtime_ms\n"
    assert first[1] == str(tmp_path / "a_summary.csv")
    assert len(pd.read_csv(first[1])) == 8


def test_worker_pool_matches_serial_run(small_spec):
    serial = run_sweep(small_spec, SMALL, jobs=1)
    parallel = run_sweep(small_spec, SMALL, jobs=2)
    pd.testing.assert_frame_equal(serial.rows, parallel.rows)


def test_sweep_writes_mission_logs(tmp_path):
    spec = SweepSpec(t0_values=(60.0,), trials_per_t0=1, strategies=("Proposed",))
    log_dir = tmp_path / "logs"
    run_sweep(spec, SMALL, log_dir=str(log_dir))
    assert (log_dir / "Proposed_t60_s0.log").read_text().startswith("0.000\tmission\t-\t")


def test_timing_records_runtime():
    row = run_sweep_job((SMALL, "Random", 60.0, 0, True, None))
    assert row["runtime_ms"] >= 0


def test_sweep_rejects_bad_config(small_spec):
    with pytest.raises(ConfigError):
        run_sweep(small_spec, {**SMALL, "uav_count": 0})


def test_emit_csv_reports_unwritable_path(tmp_path):
    with pytest.raises(OSError, match="Could not write"):
        emit_csv(SweepResult(), str(tmp_path / "missing" / "out.csv"))


@pytest.mark.parametrize("path, expected", [
    ("results.csv", "results_summary.csv"),
    ("out/sweep", "out/sweep_summary.csv"),
])
def test_summary_path(path, expected):
    assert summary_path(path) == expected
