"""
Degradation protocol (noise at a target SNR, reverberation) and the GPE/VDE metrics, plus the
condition-grid runner behind ``hspitch eval``.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
import logging
import math
import os
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
from warnings import warn
import zlib
import numpy as np
from scipy.signal import fftconvolve
from scipy.stats import linregress
from ..model.audio import AudioBuffer
from ..model.config import TrackerConfig
from ..model.errors import ParameterError
from ..model.track import EvalReport, PitchTrack, ReferenceTrack
from .tracker import track

logger = logging.getLogger(__name__)

ACTIVE_THRESHOLD_DB = -40.0
CLEAN = math.inf


class NoiseKind(str, Enum):
    """
    Built-in seeded noise generators.
    """
    white = 'white'
    pink = 'pink'
    brown = 'brown'

    def __str__(self):
        return self.value


# Noise generation

def _shaped_noise(n_samples:int, seed:int, exponent:float)->np.ndarray:
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(n_samples)
    if exponent == 0 or n_samples < 2:
        return white / (np.std(white) or 1.0)
    spectrum = np.fft.rfft(white)
    bins = np.arange(len(spectrum), dtype=np.float64)
    # power falls as 1/f^exponent; DC is dropped
    shaping = np.zeros_like(bins)
    shaping[1:] = bins[1:] ** (-exponent / 2)
    shaped = np.fft.irfft(spectrum * shaping, n_samples)
    return shaped / (np.std(shaped) or 1.0)


def white_noise(n_samples:int, sample_rate:int, seed:int=0)->AudioBuffer:
    return AudioBuffer(_shaped_noise(n_samples, seed, 0.0), sample_rate)


def pink_noise(n_samples:int, sample_rate:int, seed:int=0)->AudioBuffer:
    return AudioBuffer(_shaped_noise(n_samples, seed, 1.0), sample_rate)


def brown_noise(n_samples:int, sample_rate:int, seed:int=0)->AudioBuffer:
    return AudioBuffer(_shaped_noise(n_samples, seed, 2.0), sample_rate)


_GENERATORS = {
    NoiseKind.white: white_noise,
    NoiseKind.pink: pink_noise,
    NoiseKind.brown: brown_noise,
}


def generate_noise(kind:Union[NoiseKind,str], n_samples:int, sample_rate:int, seed:int=0)->AudioBuffer:
    """
    Unit-variance noise of the given colour.
    """
    return _GENERATORS[NoiseKind(kind)](n_samples, sample_rate, seed)


# SNR mixing

def active_mask(samples:np.ndarray, threshold_db:float=ACTIVE_THRESHOLD_DB)->np.ndarray:
    """
    Samples whose magnitude is within ``threshold_db`` of the peak.
    """
    peak = np.max(np.abs(samples)) if len(samples) else 0.0
    return np.abs(samples) >= peak * 10 ** (threshold_db / 20)


def _fit_noise(noise:np.ndarray, n_samples:int, loop:bool)->np.ndarray:
    if len(noise) >= n_samples:
        return noise[:n_samples]
    if not loop:
        raise ParameterError(f'Noise has {len(noise)} samples, speech needs {n_samples}')
    return np.resize(noise, n_samples)


def snr_gain(speech:np.ndarray, noise:np.ndarray, snr_db:float, active_only:bool=True)->float:
    """
    The factor that brings ``noise`` to ``snr_db`` below ``speech``. Both powers are measured over
    the same samples: the speech-active ones, or all of them when ``active_only`` is off.
    """
    mask = active_mask(speech) if active_only else np.ones(len(speech), dtype=bool)
    speech_power = np.mean(speech[mask] ** 2)
    noise_power = np.mean(noise[mask] ** 2)
    if speech_power == 0:
        raise ParameterError('Cannot set an SNR against silent speech')
    if noise_power == 0:
        raise ParameterError('Noise is silent over the speech-active samples')
    return float(np.sqrt(speech_power / (noise_power * 10 ** (snr_db / 10))))


def mix_noise_at_snr(speech:AudioBuffer, noise:AudioBuffer, snr_db:float,
                     active_only:bool=True, loop_noise:bool=True)->AudioBuffer:
    """
    Add ``noise`` to ``speech`` scaled to the requested SNR.

    Powers are measured over speech-active samples (within 40 dB of the speech peak) unless
    ``active_only`` is off. Shorter noise is looped when ``loop_noise`` is set, otherwise it is an
    error. ``snr_db = inf`` returns the speech unchanged.
    """
    if speech.sample_rate != noise.sample_rate:
        raise ParameterError(f'Sample rate mismatch: speech {speech.sample_rate} Hz, noise {noise.sample_rate} Hz')
    if math.isinf(snr_db) and snr_db > 0:
        return speech
    if not np.any(noise.samples):
        raise ParameterError('Noise is silent')
    fitted = _fit_noise(noise.samples, len(speech), loop_noise)
    gain = snr_gain(speech.samples, fitted, snr_db, active_only)
    return speech.with_samples(speech.samples + gain * fitted)


def measure_snr(clean:AudioBuffer, mixture:AudioBuffer, active_only:bool=True)->float:
    """
    SNR in dB of ``mixture`` relative to the ``clean`` signal it contains.
    """
    if len(clean) != len(mixture):
        raise ParameterError(f'Length mismatch: {len(clean)} vs {len(mixture)} samples')
    residual = mixture.samples - clean.samples
    mask = active_mask(clean.samples) if active_only else np.ones(len(clean), dtype=bool)
    noise_power = np.mean(residual[mask] ** 2)
    if noise_power == 0:
        return math.inf
    return float(10 * np.log10(np.mean(clean.samples[mask] ** 2) / noise_power))


# Reverberation

def convolve_rir(signal:AudioBuffer, rir:AudioBuffer, renormalize:bool=True)->AudioBuffer:
    """
    Full linear convolution with a room impulse response (``len(signal) + len(rir) - 1`` samples).
    With ``renormalize`` the result is scaled back to the input's peak.
    """
    if len(rir) == 0:
        raise ParameterError('Room impulse response is empty')
    if signal.sample_rate != rir.sample_rate:
        raise ParameterError(f'Sample rate mismatch: signal {signal.sample_rate} Hz, RIR {rir.sample_rate} Hz')
    if len(signal) == 0:
        return signal
    wet = fftconvolve(signal.samples, rir.samples, mode='full')
    if renormalize:
        peak_in = np.max(np.abs(signal.samples))
        peak_out = np.max(np.abs(wet))
        if peak_out > 0:
            wet *= peak_in / peak_out
    return signal.with_samples(wet)


def gen_test_rir(t60:float, length:float, sample_rate:int, seed:int=0)->AudioBuffer:
    """
    A synthetic RIR: Gaussian noise under an exponential envelope that falls 60 dB in ``t60``
    seconds, peak-normalised. ``t60 = inf`` gives flat noise.
    """
    if not t60 > 0:
        raise ParameterError(f't60 must be positive, got {t60}')
    n_samples = int(round(length * sample_rate))
    if n_samples < 1:
        raise ParameterError(f'RIR length {length} s is shorter than one sample')
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate
    envelope = np.exp(-t * 3 * np.log(10) / t60)
    rir = rng.standard_normal(n_samples) * envelope
    return AudioBuffer(rir / np.max(np.abs(rir)), sample_rate)


def schroeder_t60(rir:AudioBuffer, fit_range:Tuple[float,float]=(-5.0, -25.0))->float:
    """
    Reverberation time from Schroeder backward integration: fit a line to the energy decay curve
    between the two levels in ``fit_range`` (dB) and extrapolate it to -60 dB.
    """
    energy = rir.samples ** 2
    decay = np.cumsum(energy[::-1])[::-1]
    if len(decay) == 0 or decay[0] == 0:
        raise ParameterError('Cannot measure the decay of a silent RIR')
    with np.errstate(divide='ignore'):
        decay_db = 10 * np.log10(decay / decay[0])
    upper, lower = max(fit_range), min(fit_range)
    selected = (decay_db <= upper) & (decay_db >= lower)
    if selected.sum() < 2:
        raise ParameterError(f'Energy decay never spans {upper}..{lower} dB')
    t = np.arange(len(decay)) / rir.sample_rate
    slope = linregress(t[selected], decay_db[selected]).slope
    if slope >= 0:
        raise ParameterError('Energy decay curve does not decay')
    return float(-60.0 / slope)


# Metrics

def align_to_reference(est:PitchTrack, ref:ReferenceTrack)->np.ndarray:
    """
    For each reference frame, the index of the estimated frame nearest in time. Reference frames
    past either end of the estimate map to the end frame.
    """
    if len(est) < 2:
        return np.zeros(len(ref), dtype=int)
    right = np.clip(np.searchsorted(est.times, ref.times), 1, len(est) - 1)
    left = right - 1
    nearer_left = np.abs(ref.times - est.times[left]) <= np.abs(est.times[right] - ref.times)
    return np.where(nearer_left, left, right)


def _aligned(est:PitchTrack, ref:ReferenceTrack)->Tuple[np.ndarray,np.ndarray]:
    if len(est) == 0:
        return np.zeros(len(ref)), np.zeros(len(ref), dtype=bool)
    index = align_to_reference(est, ref)
    return est.f0[index], est.voiced[index]


def compute_gpe(est:PitchTrack, ref:ReferenceTrack)->EvalReport:
    """
    Gross pitch errors: reference-voiced frames whose estimate is more than 5% off. The estimator's
    own voicing decision is ignored.
    """
    f0, _ = _aligned(est, ref)
    voiced = ref.voiced
    relative = np.abs(f0[voiced] - ref.f0[voiced]) / ref.f0[voiced]
    return EvalReport(n_voiced_ref=int(voiced.sum()), n_gross_errors=int(np.sum(relative > 0.05)))


def compute_vde(est:PitchTrack, ref:ReferenceTrack)->EvalReport:
    """
    Voicing decision errors over all reference frames.
    """
    _, est_voiced = _aligned(est, ref)
    ref_voiced = ref.voiced
    return EvalReport(
        n_v_misclassified=int(np.sum(ref_voiced & ~est_voiced)),
        n_uv_misclassified=int(np.sum(~ref_voiced & est_voiced)),
        n_total=len(ref),
    )


def evaluate_track(est:PitchTrack, ref:ReferenceTrack)->EvalReport:
    return compute_gpe(est, ref).merge(compute_vde(est, ref))


# Condition grid

@dataclass(frozen=True)
class EvalCondition:
    """
    One cell of the evaluation grid. ``noise`` is ``"none"`` for the clean condition.
    """
    utterance:str
    noise:str
    snr_db:float
    reverb:bool

    @property
    def snr_label(self)->str:
        return 'clean' if math.isinf(self.snr_db) else f'{self.snr_db:g}'


@dataclass
class ConditionResult:
    condition:EvalCondition
    report:EvalReport


@dataclass
class Utterance:
    name:str
    audio:AudioBuffer
    reference:ReferenceTrack


@dataclass
class CorpusResult:
    """
    Per-condition results of a grid run, in grid order, and the utterances that were skipped.
    """
    results:List[ConditionResult] = field(default_factory=list)
    skipped:List[Dict[str,str]] = field(default_factory=list)

    def summary(self, keys:Sequence[str]=('noise', 'snr_label', 'reverb'))->List[dict]:
        """
        Mean GPE and VDE per group of conditions sharing ``keys``, in first-seen order. Frame counts
        are summed. NaN GPEs (no voiced reference frames) are left out of the mean.
        """
        groups:Dict[tuple,List[ConditionResult]] = {}
        for result in self.results:
            groups.setdefault(tuple(getattr(result.condition, k) for k in keys), []).append(result)
        rows = []
        for key, members in groups.items():
            gpes = [m.report.gpe for m in members if not math.isnan(m.report.gpe)]
            vdes = [m.report.vde for m in members if not math.isnan(m.report.vde)]
            row = dict(zip(keys, key))
            row.update(
                n_utterances=len(members),
                gpe=float(np.mean(gpes)) if gpes else math.nan,
                vde=float(np.mean(vdes)) if vdes else math.nan,
                n_voiced_ref=sum(m.report.n_voiced_ref for m in members),
                n_gross_errors=sum(m.report.n_gross_errors for m in members),
                n_total=sum(m.report.n_total for m in members),
            )
            rows.append(row)
        return rows


def condition_seed(seed:int, utterance:str, noise:str)->int:
    """
    A per-(utterance, noise) seed. The SNR is left out so every level of one noise type uses the
    same noise realisation.
    """
    return (seed * 1000003 + zlib.crc32(f'{utterance}|{noise}'.encode('utf-8'))) % 2 ** 32


def _noise_for(noise:Union[str,AudioBuffer], n_samples:int, sample_rate:int, seed:int)->AudioBuffer:
    if isinstance(noise, AudioBuffer):
        return noise
    return generate_noise(noise, n_samples, sample_rate, seed)


def degrade(speech:AudioBuffer, noise:Optional[AudioBuffer], snr_db:float, rir:Optional[AudioBuffer]=None,
            renormalize:bool=True, active_only:bool=True)->AudioBuffer:
    """
    Apply the degradation protocol: reverberate speech and noise with the same RIR (if any), cut
    both back to the dry speech length, then mix at ``snr_db``.
    """
    if rir is not None:
        speech_wet = convolve_rir(speech, rir, renormalize)
        speech = speech_wet.with_samples(speech_wet.samples[:len(speech)])
        if noise is not None:
            noise = noise.with_samples(_fit_noise(noise.samples, len(speech), True))
            noise_wet = convolve_rir(noise, rir, renormalize)
            noise = noise_wet.with_samples(noise_wet.samples[:len(speech)])
    if noise is None or (math.isinf(snr_db) and snr_db > 0):
        return speech
    return mix_noise_at_snr(speech, noise, snr_db, active_only)


def run_condition(utterance:Utterance, condition:EvalCondition, noise:Union[str,AudioBuffer,None],
                  rir:Optional[AudioBuffer], config:TrackerConfig, seed:int)->ConditionResult:
    """
    Degrade one utterance for one grid cell, track it and score it against the reference.
    """
    speech = utterance.audio
    noise_audio = None
    if noise is not None and not math.isinf(condition.snr_db):
        noise_audio = _noise_for(noise, len(speech), speech.sample_rate,
                                 condition_seed(seed, utterance.name, condition.noise))
    degraded = degrade(speech, noise_audio, condition.snr_db, rir if condition.reverb else None)
    report = evaluate_track(track(degraded, config), utterance.reference)
    logger.info('%s noise=%s snr=%s reverb=%s: GPE=%.4f VDE=%.4f', utterance.name, condition.noise,
                condition.snr_label, condition.reverb, report.gpe, report.vde)
    return ConditionResult(condition, report)


def _run_job(job):
    return run_condition(*job)


def build_conditions(utterance:str, noises:Sequence[str], snrs:Sequence[float], reverb:bool)->List[EvalCondition]:
    """
    The grid cells for one utterance: the clean condition, then every noise at every SNR, each
    anechoic and (with a RIR) reverberant.
    """
    reverbs = (False, True) if reverb else (False,)
    cells = []
    for is_reverb in reverbs:
        cells.append(EvalCondition(utterance, 'none', CLEAN, is_reverb))
        for noise in noises:
            for snr in snrs:
                cells.append(EvalCondition(utterance, noise, float(snr), is_reverb))
    return cells


def evaluate_corpus(utterances:Sequence[Utterance], noises:Dict[str,Union[str,AudioBuffer]], snrs:Sequence[float],
                    config:TrackerConfig, rir:Optional[AudioBuffer]=None, seed:int=0, workers:int=1)->CorpusResult:
    """
    Run every grid cell for every utterance. Cells are independent, so ``workers > 1`` runs them
    in a process pool; results always come back in grid order.

    :param noises: Noise label to either a :py:class:`NoiseKind` name or loaded noise audio
    """
    if snrs and not noises:
        noises = {NoiseKind.white.value: NoiseKind.white.value}
    jobs = []
    for utterance in utterances:
        for condition in build_conditions(utterance.name, list(noises), snrs, rir is not None):
            jobs.append((utterance, condition, noises.get(condition.noise), rir, config, seed))
    logger.info('Evaluating %d conditions over %d utterances', len(jobs), len(utterances))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_job, jobs))
    else:
        results = [_run_job(job) for job in jobs]
    return CorpusResult(results)


def pair_corpus(speech_dir, ref_dir)->Tuple[List[Tuple[str,Path,Path]],List[Dict[str,str]]]:
    """
    Match each WAV in ``speech_dir`` with the file in ``ref_dir`` that has the same stem.
    Unmatched utterances are skipped with a warning and listed in the second return value.
    """
    speech_dir, ref_dir = Path(speech_dir), Path(ref_dir)
    if not speech_dir.is_dir():
        raise FileNotFoundError(f'Speech directory not found: {os.fspath(speech_dir)}')
    if not ref_dir.is_dir():
        raise FileNotFoundError(f'Reference directory not found: {os.fspath(ref_dir)}')
    references:Dict[str,Path] = {}
    for path in sorted(ref_dir.iterdir()):
        if path.is_file():
            references.setdefault(path.stem, path)
    pairs, skipped = [], []
    for wav in sorted(speech_dir.glob('*.wav')):
        ref = references.get(wav.stem)
        if ref is None:
            warn(f'No reference for {wav.name} in {os.fspath(ref_dir)}; skipping')
            skipped.append({'utterance': wav.stem, 'reason': 'no matching reference'})
            continue
        pairs.append((wav.stem, wav, ref))
    return pairs, skipped
