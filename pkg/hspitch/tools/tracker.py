"""
The complete tracking pipeline, with each stage switchable for ablation runs.
"""
from dataclasses import dataclass, field
import logging
from typing import Dict, List, Optional, Union
from warnings import warn
import numpy as np
from ..model.audio import AudioBuffer, FrameView, LagRange
from ..model.config import TrackerConfig
from ..model.errors import ParameterError
from ..model.grid import GeometricLagGrid
from ..model.lattice import LikelihoodLattice, Stage
from ..model.track import PitchTrack, StatePath
from .decode import argmax_path, path_to_f0, upsample_lattice, viterbi_decode
from .likelihood import (harmonic_lattice, namdf_lattice, sigmoid_lattice, temporal_accumulation,
                         truncate_to_pitch_range)
from .postprocess import rectify
from .preprocess import compute_lag_range, frame_stream, lowpass_filter
from .voicing import VoicingFeatures, frame_energy, omega_lattice, voicing_factors, finalize_track

logger = logging.getLogger(__name__)

UPSAMPLED = 'upsampled'


@dataclass
class LatticeStack:
    """
    The filtered signal, its frames and every likelihood stage computed for it. Disabled stages are
    absent from ``stages``; ``final`` is the lattice that gets decoded.
    """
    filtered:AudioBuffer
    lags:LagRange
    stride:int
    frames:List[FrameView]
    stages:Dict[Stage,LikelihoodLattice] = field(default_factory=dict)
    final:Optional[LikelihoodLattice] = None

    @property
    def times(self)->np.ndarray:
        return np.array([frame.center_time(self.filtered.sample_rate) for frame in self.frames])


@dataclass
class TrackerRun:
    """
    Everything a single pipeline run produced, for inspection and tests.
    """
    stack:LatticeStack
    grid:GeometricLagGrid
    upsampled:np.ndarray
    path:StatePath
    rectified:np.ndarray
    factors:np.ndarray
    track:PitchTrack


def compute_likelihoods(audio:AudioBuffer, config:TrackerConfig)->LatticeStack:
    """
    Filter, frame, and build the likelihood lattice through every enabled stage.
    """
    lags = compute_lag_range(config.f_min, config.f_max, config.H, audio.sample_rate)
    stride = config.stride_for(audio.sample_rate)
    logger.debug('Lag range %d..%d (harmonic max %d), stride %d samples',
                 lags.l_min, lags.l_max, lags.harmonic_max, stride)
    filtered = lowpass_filter(audio, config.lowpass_cutoff, config.lowpass_order)
    frames = frame_stream(filtered, config.window_dur, stride, lookahead=lags.l_max)
    stack = LatticeStack(filtered, lags, stride, frames)
    raw = namdf_lattice(filtered, frames, lags, stride)
    stack.stages[Stage.raw_namdf] = raw
    lattice = sigmoid_lattice(raw, config.k)
    stack.stages[Stage.sigmoid] = lattice
    if config.harmonic_summation:
        lattice = harmonic_lattice(lattice, config.harmonic_weights_obj(), lags)
        stack.stages[Stage.harmonic] = lattice
    else:
        lattice = truncate_to_pitch_range(lattice, lags)
    if config.temporal_accumulation:
        lattice = temporal_accumulation(lattice, config.K, config.temporal_step_for(audio.sample_rate))
        stack.stages[Stage.temporal] = lattice
    stack.final = lattice
    return stack


def run_pipeline(audio:AudioBuffer, config:TrackerConfig=None)->TrackerRun:
    """
    Run the tracker on one utterance and keep the intermediate results.
    """
    if config is None:
        config = TrackerConfig()
    stack = compute_likelihoods(audio, config)
    lags = stack.lags
    grid = GeometricLagGrid.build(lags.l_min, lags.harmonic_max, config.U)
    if not stack.frames:
        warn(f'Signal of {audio.duration:.3f} s is too short for a single analysis frame; track is empty')
        empty = np.zeros(0)
        return TrackerRun(stack, grid, np.zeros((0, len(grid))), StatePath(np.zeros(0, dtype=int), empty),
                          empty, empty, PitchTrack.empty())
    upsampled = upsample_lattice(stack.final, grid)
    if config.viterbi:
        path = viterbi_decode(upsampled, config.max_jump_for(audio.sample_rate, grid), config.viterbi_cost_mode)
    else:
        path = argmax_path(upsampled)
    f0 = path_to_f0(path, grid, audio.sample_rate)
    if config.rectification:
        rectified = rectify(path.scores, config.rectify_params_for(audio.sample_rate))
    else:
        rectified = path.scores.copy()
    if config.voicing:
        W = config.omega_width_for(lags.l_min, stack.final.n_lags)
        features = VoicingFeatures(frame_energy(stack.filtered, stack.frames), omega_lattice(stack.final, W))
        factors = voicing_factors(features, config.gmm_max_iters, config.gmm_tol, config.eq10_orientation)
    else:
        factors = np.ones(len(path))
    track = finalize_track(rectified, factors, f0, stack.times, config.voicing_threshold)
    logger.debug('Tracked %d frames, %d voiced', len(track), int(track.voiced.sum()))
    return TrackerRun(stack, grid, upsampled, path, rectified, factors, track)


def track(audio:AudioBuffer, config:TrackerConfig=None)->PitchTrack:
    """
    Estimate F0 and voicing for every analysis frame of ``audio``.
    """
    return run_pipeline(audio, config).track


@dataclass
class LatticeView:
    """
    One stage's values ready to be written out: the ``(frames, lags)`` matrix with its lag axis
    (possibly non-integer) and frame times.
    """
    stage:str
    values:np.ndarray
    lags:np.ndarray
    times:np.ndarray
    sample_rate:int
    stride:int


def compute_lattice(audio:AudioBuffer, config:TrackerConfig, stage:Union[Stage,str])->LatticeView:
    """
    The lattice at one stage of the pipeline, for inspection.

    :param stage: A :py:class:`Stage` name, or ``"upsampled"`` for the geometric-grid matrix
        that is fed to the decoder
    """
    stack = compute_likelihoods(audio, config)
    def view(name, values, lags):
        return LatticeView(name, values, lags, stack.times, audio.sample_rate, stack.stride)

    if stage == UPSAMPLED:
        grid = GeometricLagGrid.build(stack.lags.l_min, stack.lags.harmonic_max, config.U)
        return view(UPSAMPLED, upsample_lattice(stack.final, grid), grid.lags)
    try:
        stage = Stage(stage)
    except ValueError:
        raise ParameterError(f'Unknown lattice stage: {repr(stage)}') from None
    if stage not in stack.stages:
        raise ParameterError(f'Stage {stage.value} is disabled in this configuration')
    lattice = stack.stages[stage]
    return view(stage.value, lattice.values, lattice.lags)
