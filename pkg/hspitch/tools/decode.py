"""
Geometric upsampling of the lag axis and continuity-constrained Viterbi decoding.
"""
import logging
import numpy as np
from ..model.config import ViterbiCostMode
from ..model.errors import ParameterError
from ..model.grid import GeometricLagGrid
from ..model.lattice import LikelihoodColumn, LikelihoodLattice
from ..model.track import StatePath

logger = logging.getLogger(__name__)


def _interpolation_weights(grid:GeometricLagGrid, lag_offset:int, n_lags:int):
    last_lag = lag_offset + n_lags - 1
    if grid.l_min < lag_offset or grid.l_max > last_lag:
        raise ParameterError(
            f'Grid {grid.l_min:.3f}..{grid.l_max:.3f} exceeds the column lag range {lag_offset}..{last_lag}'
        )
    position = grid.lags - lag_offset
    left = np.minimum(np.floor(position).astype(int), n_lags - 1)
    fraction = position - left
    right = np.minimum(left + 1, n_lags - 1)
    return left, right, fraction


def geometric_upsample(col:LikelihoodColumn, grid:GeometricLagGrid)->np.ndarray:
    """
    Linearly interpolate the column at the grid's (non-integer) lags. Grid points that fall on an
    integer lag reproduce the column value exactly.
    """
    left, right, fraction = _interpolation_weights(grid, col.lag_offset, len(col))
    return col.values[left] * (1 - fraction) + col.values[right] * fraction


def upsample_lattice(lattice:LikelihoodLattice, grid:GeometricLagGrid)->np.ndarray:
    """
    :py:func:`geometric_upsample` for every frame; returns a ``(frames, len(grid))`` matrix.
    """
    left, right, fraction = _interpolation_weights(grid, lattice.lag_offset, lattice.n_lags)
    return lattice.values[:, left] * (1 - fraction) + lattice.values[:, right] * fraction


def _best_predecessors(previous:np.ndarray, max_jump:int):
    """
    For each state, the best-scoring predecessor within ``±max_jump`` states and its score. Ties
    resolve to the lowest predecessor index.
    """
    n_states = len(previous)
    offsets = np.arange(-max_jump, max_jump + 1)
    candidates = np.arange(n_states)[np.newaxis, :] + offsets[:, np.newaxis]
    valid = (candidates >= 0) & (candidates < n_states)
    # rows run from the lowest to the highest predecessor, so argmax picks the lowest on ties
    scores = np.where(valid, previous[np.clip(candidates, 0, n_states - 1)], -np.inf)
    best = np.argmax(scores, axis=0)
    columns = np.arange(n_states)
    return candidates[best, columns], scores[best, columns]


def viterbi_decode(scores:np.ndarray, max_jump:int=1, cost_mode:ViterbiCostMode=ViterbiCostMode.sum_likelihood)->StatePath:
    """
    Find the state sequence with the best cumulative score where consecutive states differ by at most
    ``max_jump`` grid steps.

    In ``sum_likelihood`` mode the score of a path is the sum of its state likelihoods. In
    ``paper_difference`` mode each transition scores ``phi[i+1, t'] - phi[i, t]``.

    Ties are broken toward the lower state index (shorter lag).

    :param scores: ``(frames, states)`` matrix of upsampled likelihoods
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ParameterError(f'Viterbi expects a (frames, states) matrix, got shape {scores.shape}')
    if max_jump < 1:
        raise ParameterError(f'max_jump must be at least 1, got {max_jump}')
    n_frames, n_states = scores.shape
    if n_frames == 0:
        return StatePath(np.zeros(0, dtype=int), np.zeros(0))
    cost_mode = ViterbiCostMode(cost_mode)
    backpointers = np.zeros((n_frames, n_states), dtype=int)
    if cost_mode is ViterbiCostMode.sum_likelihood:
        total = scores[0].copy()
        for i in range(1, n_frames):
            backpointers[i], best = _best_predecessors(total, max_jump)
            total = best + scores[i]
    else:
        # carry score minus the frame's own likelihood so the transition term can be added per state
        total = -scores[0]
        for i in range(1, n_frames):
            backpointers[i], best = _best_predecessors(total, max_jump)
            total = best + scores[i]
            if i < n_frames - 1:
                total = total - scores[i]
        if n_frames == 1:
            total = np.zeros(n_states)
    states = np.empty(n_frames, dtype=int)
    states[-1] = int(np.argmax(total))
    for i in range(n_frames - 1, 0, -1):
        states[i - 1] = backpointers[i, states[i]]
    return StatePath(states, scores[np.arange(n_frames), states])


def argmax_path(scores:np.ndarray)->StatePath:
    """
    Per-frame best state with no continuity constraint (the decoder switched off).
    """
    scores = np.asarray(scores, dtype=np.float64)
    if len(scores) == 0:
        return StatePath(np.zeros(0, dtype=int), np.zeros(0))
    states = np.argmax(scores, axis=1)
    return StatePath(states, scores[np.arange(len(scores)), states])


def path_to_f0(path:StatePath, grid:GeometricLagGrid, sample_rate:int)->np.ndarray:
    """
    Convert decoded grid states to F0 in Hz (``F_s / lag``).
    """
    if len(path) and (path.state_indices.min() < 0 or path.state_indices.max() >= len(grid)):
        raise ParameterError('Path contains states outside the lag grid')
    return sample_rate / grid.lags[path.state_indices]
