import numpy as np
import pytest
from hspitch.model import (GeometricLagGrid, LikelihoodColumn, LikelihoodLattice, ParameterError, Stage, StatePath,
                           ViterbiCostMode)
from hspitch.tools.decode import argmax_path, geometric_upsample, path_to_f0, upsample_lattice, viterbi_decode


def all_paths(n_frames, n_states, max_jump=1):
    paths = np.arange(n_states)[:, np.newaxis]
    for _ in range(n_frames - 1):
        extended = []
        for step in range(-max_jump, max_jump + 1):
            nxt = paths[:, -1] + step
            ok = (nxt >= 0) & (nxt < n_states)
            extended.append(np.column_stack([paths[ok], nxt[ok]]))
        paths = np.concatenate(extended)
    return paths


def assert_adjacent(path, max_jump=1):
    assert np.all(np.abs(np.diff(path.state_indices)) <= max_jump)


def test_grid_shape():
    grid = GeometricLagGrid.build(40, 400, 2)
    assert len(grid) == 721
    assert grid.l_min == 40 and grid.l_max == 400
    assert grid.lags[360] == pytest.approx(np.sqrt(40 * 400), rel=1e-12)


def test_grid_log_uniform():
    grid = GeometricLagGrid.build(20, 160, 3)
    assert np.all(np.diff(grid.lags) > 0)
    ratios = grid.lags[1:] / grid.lags[:-1]
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)


def test_upsample_exact_at_integer_lags():
    column = LikelihoodColumn(np.arange(20, 161, dtype=float) ** 2, 20, Stage.temporal)
    grid = GeometricLagGrid.build(20, 160, 1)
    values = geometric_upsample(column, grid)
    assert values[0] == 400.0
    assert values[-1] == 160.0 ** 2


def test_upsample_reproduces_linear_columns():
    lags = np.arange(40, 401, dtype=float)
    column = LikelihoodColumn(0.25 * lags - 3, 40, Stage.temporal)
    grid = GeometricLagGrid.build(40, 400, 2)
    np.testing.assert_allclose(geometric_upsample(column, grid), 0.25 * grid.lags - 3, atol=1e-12)


def test_upsample_lattice_matches_columns(rng):
    lattice = LikelihoodLattice(rng.uniform(0, 1, (4, 141)), 20, Stage.temporal, 40, 8000)
    grid = GeometricLagGrid.build(20, 160, 2)
    matrix = upsample_lattice(lattice, grid)
    assert matrix.shape == (4, len(grid))
    for i, column in enumerate(lattice.columns()):
        np.testing.assert_allclose(matrix[i], geometric_upsample(column, grid))


def test_upsample_grid_outside_column():
    column = LikelihoodColumn(np.ones(10), 20, Stage.temporal)
    with pytest.raises(ParameterError):
        geometric_upsample(column, GeometricLagGrid.build(20, 40, 1))


def test_viterbi_optimal_on_random_lattices():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n_frames = int(rng.integers(1, 9))
        n_states = int(rng.integers(1, 11))
        scores = rng.integers(0, 10, (n_frames, n_states)).astype(float)
        path = viterbi_decode(scores)
        assert len(path) == n_frames
        assert_adjacent(path)
        candidates = all_paths(n_frames, n_states)
        best = scores[np.arange(n_frames), candidates].sum(axis=1).max()
        assert path.total_score == best


def test_viterbi_single_frame():
    path = viterbi_decode(np.array([[0.1, 0.7, 0.3]]))
    assert path.state_indices.tolist() == [1]


def test_viterbi_limits_jumps():
    scores = np.array([
        [0.0, 9.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 9.0],
    ])
    path = viterbi_decode(scores)
    assert_adjacent(path)
    # from state 1 only 0..2 are reachable; 9 + 0 everywhere, tie goes low
    assert path.total_score == 9.0
    assert path.state_indices.tolist() == [1, 0]


def test_viterbi_constant_lattice_prefers_low_states():
    path = viterbi_decode(np.ones((6, 8)))
    assert path.state_indices.tolist() == [0] * 6


def test_viterbi_octave_tie_keeps_fundamental():
    grid = GeometricLagGrid.build(20, 160, 2)
    period, double = (int(np.argmin(np.abs(grid.lags - lag))) for lag in (40, 80))
    scores = np.full((8, len(grid)), 0.1)
    scores[:, [period, double]] = 1.0
    path = viterbi_decode(scores, max_jump=3)
    assert path.state_indices.tolist() == [period] * 8
    np.testing.assert_allclose(path_to_f0(path, grid, 8000), 200.0, rtol=0.01)


def test_viterbi_shift_invariant(rng):
    scores = rng.uniform(0, 1, (20, 15))
    a = viterbi_decode(scores)
    b = viterbi_decode(scores + 3.5)
    np.testing.assert_array_equal(a.state_indices, b.state_indices)


def test_viterbi_wider_jumps(rng):
    scores = rng.uniform(0, 1, (6, 12))
    path = viterbi_decode(scores, max_jump=3)
    assert_adjacent(path, 3)
    candidates = all_paths(6, 12, 3)
    assert path.total_score == pytest.approx(scores[np.arange(6), candidates].sum(axis=1).max())


def test_viterbi_empty_lattice():
    path = viterbi_decode(np.zeros((0, 5)))
    assert len(path) == 0


def test_viterbi_difference_cost_telescopes(rng):
    scores = rng.uniform(0, 1, (4, 6))
    path = viterbi_decode(scores, max_jump=6, cost_mode=ViterbiCostMode.paper_difference)
    assert path.state_indices[0] == np.argmin(scores[0])
    assert path.state_indices[-1] == np.argmax(scores[-1])


def test_argmax_path(rng):
    scores = rng.uniform(0, 1, (5, 7))
    path = argmax_path(scores)
    np.testing.assert_array_equal(path.state_indices, np.argmax(scores, axis=1))
    np.testing.assert_array_equal(path.scores, scores.max(axis=1))


def test_path_to_f0():
    grid = GeometricLagGrid.build(40, 320, 1)
    index = int(np.argmin(np.abs(grid.lags - 160)))
    f0 = path_to_f0(StatePath([0, index, len(grid) - 1], [1, 1, 1]), grid, 16000)
    assert f0[0] == pytest.approx(400.0)
    assert f0[1] == pytest.approx(100.0, rel=0.01)
    assert f0[2] == pytest.approx(50.0)


def test_path_to_f0_rejects_bad_states():
    grid = GeometricLagGrid.build(40, 320, 1)
    with pytest.raises(ParameterError):
        path_to_f0(StatePath([len(grid)], [1.0]), grid, 16000)
