"""
Voiced/unvoiced classification from frame energy and an NAMDF-derived feature, through PCA and a
two-component Gaussian mixture.
"""
from dataclasses import dataclass
import logging
from typing import Sequence, Tuple
from warnings import warn
import numpy as np
from scipy.special import expit, logsumexp
from ..model.audio import AudioBuffer, FrameView
from ..model.config import VoicingOrientation
from ..model.errors import ParameterError
from ..model.gmm import BimodalGMM, VARIANCE_FLOOR
from ..model.lattice import LikelihoodColumn, LikelihoodLattice
from ..model.track import PitchTrack

logger = logging.getLogger(__name__)

LOG_EPSILON = 1e-12
STD_EPSILON = 1e-12
WEIGHT_FLOOR = 1e-12
# frames at the log-energy floor hold no signal at all
SILENCE_ENERGY = np.log(2 * LOG_EPSILON)


@dataclass
class VoicingFeatures:
    """
    Per-frame log energy and omega (log of the best ``W``-lag likelihood sum).
    """
    energy:np.ndarray
    omega:np.ndarray

    def __post_init__(self):
        self.energy = np.asarray(self.energy, dtype=np.float64)
        self.omega = np.asarray(self.omega, dtype=np.float64)
        if self.energy.shape != self.omega.shape:
            raise ValueError('energy and omega must have one value per frame')
        if not (np.all(np.isfinite(self.energy)) and np.all(np.isfinite(self.omega))):
            raise ValueError('Voicing features must be finite')

    def __len__(self):
        return len(self.energy)

    @property
    def matrix(self)->np.ndarray:
        return np.column_stack([self.energy, self.omega])


def frame_energy(signal:AudioBuffer, frames:Sequence[FrameView])->np.ndarray:
    """
    Log energy of each windowed (not normalised) frame of the filtered signal.
    """
    energies = np.empty(len(frames))
    for index, frame in enumerate(frames):
        windowed = signal.samples[frame.start_index:frame.start_index + frame.length] * frame.window
        energies[index] = np.log(np.sum(windowed ** 2) + LOG_EPSILON)
    return energies


def _omega_rows(values:np.ndarray, W:int)->np.ndarray:
    cumulative = np.cumsum(np.pad(values, ((0, 0), (1, 0))), axis=1)
    window_sums = cumulative[:, W:] - cumulative[:, :-W]
    best = window_sums.max(axis=1)
    return np.log(np.where(best > 0, best, LOG_EPSILON))


def omega_feature(col:LikelihoodColumn, W:int)->float:
    """
    ``log`` of the largest sum of ``W`` consecutive likelihoods in the column. An all-zero column
    gives ``log(1e-12)``.
    """
    if not 1 <= W <= len(col):
        raise ParameterError(f'W must lie in [1, {len(col)}], got {W}')
    return float(_omega_rows(col.values[np.newaxis, :], W)[0])


def omega_lattice(lattice:LikelihoodLattice, W:int)->np.ndarray:
    if not 1 <= W <= lattice.n_lags:
        raise ParameterError(f'W must lie in [1, {lattice.n_lags}], got {W}')
    if len(lattice) == 0:
        return np.zeros(0)
    return _omega_rows(lattice.values, W)


def principal_component(features:VoicingFeatures)->Tuple[np.ndarray, np.ndarray, float]:
    """
    Standardise the features and find their first principal axis.

    Returns the standardised feature matrix (degenerate columns zeroed), the unit axis, and the
    fraction of variance it explains. The axis is oriented so projections grow with frame energy.
    """
    if len(features) < 2:
        raise ParameterError(f'PCA needs at least 2 frames, got {len(features)}')
    matrix = features.matrix
    stds = matrix.std(axis=0)
    usable = stds > STD_EPSILON
    standardized = np.zeros_like(matrix)
    standardized[:, usable] = (matrix[:, usable] - matrix[:, usable].mean(axis=0)) / stds[usable]
    if not usable.any():
        return standardized, np.array([1.0, 0.0]), 0.0
    covariance = np.cov(standardized, rowvar=False, bias=True)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    axis = eigenvectors[:, np.argmax(eigenvalues)]
    explained = float(eigenvalues.max() / eigenvalues.sum()) if eigenvalues.sum() > 0 else 0.0
    projection = standardized @ axis
    # orient along energy; with constant energy, along omega
    reference = standardized[:, 0] if usable[0] else standardized[:, 1]
    if np.dot(projection, reference) < 0:
        axis = -axis
    return standardized, axis, explained


def pca_project(features:VoicingFeatures)->np.ndarray:
    """
    Project standardised (energy, omega) pairs onto their first principal component. Higher
    values go with higher energy. Constant features contribute nothing; if both are constant
    every projection is 0.
    """
    standardized, axis, _ = principal_component(features)
    return standardized @ axis


def _median_split(x:np.ndarray)->BimodalGMM:
    ordered = np.sort(x)
    half = len(ordered) // 2
    lower, upper = ordered[:half], ordered[half:]
    return BimodalGMM(
        means=[upper.mean(), lower.mean()],
        variances=[max(upper.var(), VARIANCE_FLOOR), max(lower.var(), VARIANCE_FLOOR)],
        weights=[0.5, 0.5],
    )


def fit_bimodal_gmm(x, max_iters:int=200, tol:float=1e-6)->BimodalGMM:
    """
    Fit a two-component 1-D Gaussian mixture by EM, starting from a median split.

    Stops when the log-likelihood improves by less than ``tol`` or after ``max_iters`` iterations.
    Variances are floored at 1e-6. The returned model lists the higher-mean (voiced) component
    first and records the log-likelihood after every iteration in ``log_likelihoods``.
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 4:
        raise ParameterError(f'GMM fitting needs at least 4 points, got {len(x)}')
    gmm = _median_split(x)
    means, variances, weights = gmm.means.copy(), gmm.variances.copy(), gmm.weights.copy()
    history = []
    for iteration in range(max_iters + 1):
        stds = np.sqrt(variances)
        log_prob = np.log(weights) - 0.5 * np.log(2 * np.pi) - np.log(stds) \
            - 0.5 * ((x[:, np.newaxis] - means) / stds) ** 2
        log_norm = logsumexp(log_prob, axis=1)
        history.append(float(log_norm.sum()))
        if iteration > 0 and history[-1] - history[-2] < tol:
            break
        if iteration == max_iters:
            break
        responsibilities = np.exp(log_prob - log_norm[:, np.newaxis])
        counts = responsibilities.sum(axis=0)
        safe_counts = np.maximum(counts, WEIGHT_FLOOR)
        weights = np.clip(counts / len(x), WEIGHT_FLOOR, 1 - WEIGHT_FLOOR)
        weights /= weights.sum()
        means = np.where(counts > WEIGHT_FLOOR, (responsibilities * x[:, np.newaxis]).sum(axis=0) / safe_counts, means)
        variances = (responsibilities * (x[:, np.newaxis] - means) ** 2).sum(axis=0) / safe_counts
        variances = np.maximum(variances, VARIANCE_FLOOR)
    order = np.argsort(-means, kind='stable')
    logger.debug('GMM after %d iterations: means=%s variances=%s weights=%s',
                 len(history) - 1, means[order], variances[order], weights[order])
    return BimodalGMM(means[order], variances[order], weights[order], history)


def voicing_factor(x, gmm:BimodalGMM, orientation:VoicingOrientation=VoicingOrientation.voiced_posterior):
    """
    ``v = (1 + p_1/p_2)^-1`` from the weighted component likelihoods. With the default orientation
    ``p_1`` is the unvoiced and ``p_2`` the voiced component, so ``v`` is the voiced posterior;
    ``literal`` swaps the roles. Works on scalars and arrays; results lie in (0,1).
    """
    log_voiced, log_unvoiced = gmm.weighted_log_densities(x)
    if VoicingOrientation(orientation) is VoicingOrientation.voiced_posterior:
        difference = log_voiced - log_unvoiced
    else:
        difference = log_unvoiced - log_voiced
    factor = expit(difference)
    # both densities underflowed to -inf
    factor = np.where(np.isnan(factor), 0.5, factor)
    return float(factor) if np.ndim(factor) == 0 else factor


def energy_fallback(energy:np.ndarray)->np.ndarray:
    """
    Voicing factors for utterances too short to fit a GMM: 1 at or above the midpoint of the
    log-energy range, 0 below it.
    """
    energy = np.asarray(energy, dtype=np.float64)
    if len(energy) == 0:
        return np.zeros(0)
    midpoint = (energy.min() + energy.max()) / 2
    return (energy >= midpoint).astype(np.float64)


def voicing_factors(features:VoicingFeatures, max_iters:int=200, tol:float=1e-6,
                    orientation:VoicingOrientation=VoicingOrientation.voiced_posterior)->np.ndarray:
    """
    The full voicing chain for one utterance: PCA, GMM fit, and per-frame factors. Digitally
    silent frames always get factor 0.
    """
    if len(features) < 4:
        warn(f'Only {len(features)} frames; using an energy threshold instead of a GMM for voicing')
        logger.warning('GMM voicing skipped for a %d-frame utterance', len(features))
        factors = energy_fallback(features.energy)
    else:
        projection = pca_project(features)
        gmm = fit_bimodal_gmm(projection, max_iters, tol)
        factors = np.asarray(voicing_factor(projection, gmm, orientation), dtype=np.float64)
    factors = np.atleast_1d(factors).copy()
    factors[features.energy <= SILENCE_ENERGY] = 0.0
    return factors


def finalize_track(rectified, factors, f0, times, threshold:float=0.5)->PitchTrack:
    """
    Combine rectified path likelihoods with voicing factors: ``V = phi * v``, normalised by its
    utterance maximum (0 everywhere if that maximum is 0). Frames with ``V >= threshold`` are voiced.
    """
    rectified = np.asarray(rectified, dtype=np.float64)
    factors = np.asarray(factors, dtype=np.float64)
    f0 = np.asarray(f0, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    if not len(rectified) == len(factors) == len(f0) == len(times):
        raise ParameterError('finalize_track inputs must have equal lengths')
    combined = rectified * factors
    peak = combined.max() if len(combined) else 0.0
    if peak > 0:
        probability = np.clip(combined / peak, 0.0, 1.0)
    else:
        probability = np.zeros_like(combined)
    return PitchTrack(times, f0, probability, probability >= threshold)
