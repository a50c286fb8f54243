"""
Pitch-state likelihoods: NAMDF, sigmoid mapping, harmonic summation and temporal accumulation.

Each step has a single-column form (mirroring the per-frame definitions) and a lattice form that
runs the same computation over all frames at once.
"""
import logging
from typing import Sequence
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import maximum_filter1d
from scipy.special import expit
from ..model.audio import AudioBuffer, FrameView, LagRange
from ..model.errors import ParameterError
from ..model.lattice import LikelihoodColumn, LikelihoodLattice, Stage
from ..model.params import HarmonicWeights

logger = logging.getLogger(__name__)

NORM_EPSILON = 1e-12
SIGMOID_CLIP = 1e-12


def _namdf_values(samples:np.ndarray, frame:FrameView, lags:LagRange)->np.ndarray:
    end = frame.start_index + frame.length + lags.l_max
    if end > len(samples):
        raise ParameterError(
            f'Frame at {frame.start_index} needs {end} samples for lag {lags.l_max}, signal has {len(samples)}'
        )
    reference = frame.read(samples)
    # every lagged frame is a row of one strided view over the segment
    segment = samples[frame.start_index:end]
    shifted = sliding_window_view(segment, frame.length)[lags.l_min:lags.l_max + 1] * frame.window
    peaks = np.max(np.abs(shifted), axis=1)
    scales = np.ones_like(peaks)
    np.divide(1.0, peaks, out=scales, where=peaks > 0)
    shifted *= scales[:, np.newaxis]

    numerator = np.sum(np.abs(reference - shifted), axis=1)
    reference_norm = np.linalg.norm(reference)
    shifted_norms = np.linalg.norm(shifted, axis=1)
    guarded = (shifted_norms < NORM_EPSILON) | (reference_norm < NORM_EPSILON)
    values = np.empty(lags.size)
    valid = ~guarded
    # (|f_i|^2 |f_i+l|^2)^(1/4)
    values[valid] = numerator[valid] / np.sqrt(reference_norm * shifted_norms[valid])
    values[guarded] = values[valid].max() if valid.any() else 0.0
    return values


def namdf(signal:AudioBuffer, frame:FrameView, lags:LagRange)->LikelihoodColumn:
    """
    Normalised average magnitude difference between a frame and the frames ``l`` samples later, for
    every lag ``l`` in ``[l_min, l_max]``.

    Lagged frames get the same Hanning window and their own peak normalisation. Small values mean
    strong periodicity at that lag. Where either frame has (near) zero energy the value is set to
    the column's largest regular value.

    :param signal: The low-pass filtered signal ``frame`` was cut from
    """
    return LikelihoodColumn(_namdf_values(signal.samples, frame, lags), lags.l_min, Stage.raw_namdf)


def namdf_lattice(signal:AudioBuffer, frames:Sequence[FrameView], lags:LagRange, stride:int)->LikelihoodLattice:
    """
    :py:func:`namdf` for every frame, stacked into a lattice.
    """
    if not frames:
        return LikelihoodLattice.empty(lags.size, lags.l_min, Stage.raw_namdf, stride, signal.sample_rate)
    values = np.empty((len(frames), lags.size))
    for index, frame in enumerate(frames):
        values[index] = _namdf_values(signal.samples, frame, lags)
    logger.debug('NAMDF over %d frames x %d lags', len(frames), lags.size)
    return LikelihoodLattice(values, lags.l_min, Stage.raw_namdf, stride, signal.sample_rate)


def _sigmoid_rows(values:np.ndarray, k:float)->np.ndarray:
    low, high = np.percentile(values, [10, 90], axis=1, keepdims=True)
    scale = high - low
    degenerate = scale <= 0
    scale = np.where(degenerate, 1.0, scale)
    out = expit(k * (values - (low + high) / 2) / scale)
    out = np.where(degenerate, 0.5, out)
    return np.clip(out, SIGMOID_CLIP, 1.0 - SIGMOID_CLIP)


def sigmoid_transform(col:LikelihoodColumn, k:float)->LikelihoodColumn:
    """
    Map raw NAMDF values to likelihoods in (0,1) with a logistic centred between the column's 10th
    and 90th percentiles and scaled by their spread.

    With ``k < 0`` small NAMDF values (strong periodicity) map to high likelihood. A constant column
    maps to 0.5 everywhere.
    """
    if col.stage is not Stage.raw_namdf:
        raise ParameterError(f'sigmoid_transform expects a raw_namdf column, got {col.stage.value}')
    if len(col) == 0:
        raise ParameterError('sigmoid_transform needs a non-empty column')
    return LikelihoodColumn(_sigmoid_rows(col.values[np.newaxis, :], k)[0], col.lag_offset, Stage.sigmoid)


def sigmoid_lattice(lattice:LikelihoodLattice, k:float)->LikelihoodLattice:
    if lattice.stage is not Stage.raw_namdf:
        raise ParameterError(f'sigmoid_lattice expects a raw_namdf lattice, got {lattice.stage.value}')
    if len(lattice) == 0:
        return lattice.replace(lattice.values, Stage.sigmoid)
    return lattice.replace(_sigmoid_rows(lattice.values, k), Stage.sigmoid)


def _harmonic_rows(values:np.ndarray, weights:HarmonicWeights, lags:LagRange)->np.ndarray:
    if weights.H != lags.H:
        raise ParameterError(f'Got {weights.H} harmonic weights for H={lags.H}')
    if values.shape[1] != lags.size:
        raise ParameterError(f'Column covers {values.shape[1]} lags, expected {lags.size} ({lags.l_min}..{lags.l_max})')
    out_lags = np.arange(lags.l_min, lags.harmonic_max + 1)
    out = values[:, :len(out_lags)].copy()
    radii = weights.tolerance(out_lags)
    # one max-filtered copy per distinct tolerance
    filtered = {0: values}
    for n, h in enumerate(range(2, lags.H + 2)):
        harmonic_lags = h * out_lags
        contribution = np.empty((values.shape[0], len(out_lags)))
        for radius in np.unique(radii):
            radius = int(radius)
            if radius not in filtered:
                filtered[radius] = maximum_filter1d(values, size=2 * radius + 1, axis=1, mode='nearest')
            selected = radii == radius
            contribution[:, selected] = filtered[radius][:, harmonic_lags[selected] - lags.l_min]
        out += weights.w[n] * contribution
    return out


def harmonic_summation(col:LikelihoodColumn, weights:HarmonicWeights, lags:LagRange)->LikelihoodColumn:
    """
    Add the weighted best likelihood within ±r of each harmonic lag ``h*l`` (``h = 2..H+1``) to the
    likelihood at ``l``. The window half-width r is set by the candidate ``l``, not by ``h*l``.

    Only lags up to ``l_max // (H+1)`` have every harmonic in range; the rest are dropped, so the
    result covers ``[l_min, l_max // (H+1)]``.
    """
    if col.lag_offset != lags.l_min:
        raise ParameterError(f'Column starts at lag {col.lag_offset}, expected {lags.l_min}')
    values = _harmonic_rows(col.values[np.newaxis, :], weights, lags)[0]
    return LikelihoodColumn(values, lags.l_min, Stage.harmonic)


def harmonic_lattice(lattice:LikelihoodLattice, weights:HarmonicWeights, lags:LagRange)->LikelihoodLattice:
    if lattice.lag_offset != lags.l_min:
        raise ParameterError(f'Lattice starts at lag {lattice.lag_offset}, expected {lags.l_min}')
    if len(lattice) == 0:
        n_out = lags.harmonic_max - lags.l_min + 1
        return lattice.replace(np.zeros((0, n_out)), Stage.harmonic)
    return lattice.replace(_harmonic_rows(lattice.values, weights, lags), Stage.harmonic)


def truncate_to_pitch_range(lattice:LikelihoodLattice, lags:LagRange)->LikelihoodLattice:
    """
    Keep only lags ``[l_min, l_max // (H+1)]`` without summing harmonics. Used when harmonic
    summation is switched off, so decoding still covers exactly ``[F_min, F_max]``.
    """
    n_out = lags.harmonic_max - lags.l_min + 1
    return lattice.replace(lattice.values[:, :n_out], lattice.stage)


def temporal_accumulation(lattice:LikelihoodLattice, K:int, step:int)->LikelihoodLattice:
    """
    Sum each column with its ``K`` neighbours on either side, ``step`` frames apart. Neighbours
    past either end of the utterance are replaced by the edge column, so the frame count is kept.
    """
    if K < 0:
        raise ParameterError(f'K must be non-negative, got {K}')
    if step < 1:
        raise ParameterError(f'Temporal step must be at least 1 frame, got {step}')
    if lattice.stage is Stage.raw_namdf:
        raise ParameterError('temporal_accumulation expects likelihoods, not raw NAMDF values')
    n = len(lattice)
    if n == 0 or K == 0:
        return lattice.replace(lattice.values.copy(), Stage.temporal)
    index = np.arange(n)
    out = np.zeros_like(lattice.values)
    for offset in range(-K, K + 1):
        out += lattice.values[np.clip(index + offset * step, 0, n - 1)]
    return lattice.replace(out, Stage.temporal)
