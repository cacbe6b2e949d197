import numpy as np
import pytest

from src.arena_grid import CellIndex, GridSpec, Position
from src.belief import (BeliefGrid, MotionParams, ObjectKind, Observation, mass_in, measurement_update,
                        predict_moving, predict_static)
from src.errors import DomainError


def test_uniform_belief_sums_to_one(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    assert b.total() == pytest.approx(1.0, abs=1e-12)
    assert b.prob(CellIndex(3, 2)) == pytest.approx(1 / 60)


def test_belief_arrays_are_read_only(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    with pytest.raises(ValueError):
        b.probs[0, 0] = 1.0


def test_predict_static_is_identity(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    assert predict_static(b) is b
    with pytest.raises(DomainError):
        predict_static(BeliefGrid.uniform("o01", default_grid, ObjectKind.MOVING))


def test_predict_moving_interior_point_mass(default_grid):
    b = BeliefGrid.point_mass("o10", CellIndex(5, 3), default_grid, ObjectKind.MOVING)
    out = predict_moving(b, MotionParams(p_out=0.1))
    assert out.prob(CellIndex(5, 3)) == pytest.approx(0.9)
    for dc in (-1, 0, 1):
        for dr in (-1, 0, 1):
            if dc or dr:
                assert out.prob(CellIndex(5 + dc, 3 + dr)) == pytest.approx(0.1 / 8)
    assert out.total() == pytest.approx(1.0, abs=1e-12)


def test_predict_moving_reflects_at_corner(default_grid):
    b = BeliefGrid.point_mass("o10", CellIndex(0, 0), default_grid, ObjectKind.MOVING)
    out = predict_moving(b, MotionParams(p_out=0.1))
    # five of the eight neighbours are outside the arena
    assert out.prob(CellIndex(0, 0)) == pytest.approx(0.9 + 5 * 0.1 / 8)
    assert out.prob(CellIndex(1, 1)) == pytest.approx(0.1 / 8)
    assert out.total() == pytest.approx(1.0, abs=1e-12)


def test_predict_moving_conserves_mass(default_grid):
    rng = np.random.default_rng(3)
    probs = rng.random((default_grid.rows, default_grid.cols))
    b = BeliefGrid("o10", probs / probs.sum(), ObjectKind.MOVING)
    for _ in range(50):
        b = predict_moving(b, MotionParams(p_out=0.3))
        assert abs(b.total() - 1.0) < 1e-12


def test_predict_moving_rejects_static(default_grid):
    with pytest.raises(DomainError):
        predict_moving(BeliefGrid.uniform("o00", default_grid), MotionParams())


def test_detection_collapses_to_point_mass(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    obs = Observation(frozenset({CellIndex(2, 2)}), frozenset({("o00", CellIndex(2, 2))}))
    out = measurement_update(b, obs)
    assert out.prob(CellIndex(2, 2)) == 1.0
    assert out.total() == 1.0


def test_no_detection_removes_observed_mass(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    out = measurement_update(b, Observation(frozenset({CellIndex(2, 2)})))
    assert out.prob(CellIndex(2, 2)) == 0.0
    assert out.prob(CellIndex(3, 2)) == pytest.approx(1 / 59)
    assert out.total() == pytest.approx(1.0)


def test_update_without_mass_in_view_is_unchanged(default_grid):
    b = BeliefGrid.point_mass("o00", CellIndex(0, 0), default_grid)
    assert measurement_update(b, Observation(frozenset({CellIndex(4, 4)}))) is b


def test_everything_observed_without_detection_falls_back_to_uniform():
    grid = GridSpec(20.0, 10.0, 10.0, Position(10.0, 5.0))
    b = BeliefGrid.uniform("o00", grid)
    out = measurement_update(b, Observation(frozenset(grid.all_cells())))
    assert np.allclose(out.probs, 0.5)


def test_update_rejects_foreign_detection(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    obs = Observation(frozenset({CellIndex(1, 1)}), frozenset({("o07", CellIndex(1, 1))}))
    with pytest.raises(DomainError):
        measurement_update(b, obs)


def test_detection_must_lie_in_observed_cells():
    with pytest.raises(DomainError):
        Observation(frozenset({CellIndex(1, 1)}), frozenset({("o00", CellIndex(2, 1))}))


def test_mass_in(default_grid):
    b = BeliefGrid.uniform("o00", default_grid)
    cells = [CellIndex(0, 0), CellIndex(1, 0), CellIndex(2, 0), CellIndex(2, 0)]
    assert mass_in(b, cells) == pytest.approx(3 / 60)
    assert mass_in(b, []) == 0.0


def test_text_dump_round_trip(default_grid):
    b = predict_moving(BeliefGrid.point_mass("o11", CellIndex(4, 2), default_grid, ObjectKind.MOVING),
                       MotionParams())
    text = b.to_text()
    assert BeliefGrid.from_text("o11", text, default_grid, ObjectKind.MOVING) == b
    with pytest.raises(DomainError):
        BeliefGrid.from_text("o11", "0.5\n0.5", default_grid)


def test_long_random_filter_sequences_stay_normalised():
    grid = GridSpec(50.0, 30.0, 10.0, Position(25.0, 15.0))
    rng = np.random.default_rng(11)
    cells = grid.all_cells()
    beliefs = {
        "a": BeliefGrid.uniform("a", grid),
        "b": BeliefGrid.uniform("b", grid, ObjectKind.MOVING),
        "c": BeliefGrid.uniform("c", grid, ObjectKind.MOVING),
    }
    motion = MotionParams(p_out=0.2)

    for _ in range(1000):
        oid = ["a", "b", "c"][int(rng.integers(3))]
        b = beliefs[oid]
        if rng.random() < 0.5:
            out = predict_moving(b, motion) if b.kind == ObjectKind.MOVING else predict_static(b)
            if b.kind == ObjectKind.STATIC:
                assert out is b
        else:
            picks = rng.choice(len(cells), size=int(rng.integers(1, 4)), replace=False)
            observed = frozenset(cells[i] for i in picks)
            detections = frozenset()
            if rng.random() < 0.05:
                detections = frozenset({(oid, cells[int(picks[0])])})
            out = measurement_update(b, Observation(observed, detections))
        beliefs[oid] = out
        for live in beliefs.values():
            assert abs(live.total() - 1.0) < 1e-9
