from __future__ import annotations
from dataclasses import dataclass, field, asdict
import math
import numpy as np


@dataclass
class StatePath:
    """
    One grid index per frame, and the (upsampled) likelihood at that state.
    """
    state_indices:np.ndarray
    scores:np.ndarray

    def __post_init__(self):
        self.state_indices = np.asarray(self.state_indices, dtype=int)
        self.scores = np.asarray(self.scores, dtype=np.float64)

    def __len__(self):
        return len(self.state_indices)

    @property
    def total_score(self)->float:
        return float(np.sum(self.scores))


@dataclass
class PitchTrack:
    """
    The tracker's output, one record per analysis frame.

    Unvoiced frames still carry their decoded F0 candidate so GPE can be scored with voicing
    disabled.
    """
    times:np.ndarray
    f0:np.ndarray
    voicing_prob:np.ndarray
    voiced:np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        self.voicing_prob = np.asarray(self.voicing_prob, dtype=np.float64)
        self.voiced = np.asarray(self.voiced, dtype=bool)
        n = len(self.times)
        if not len(self.f0) == len(self.voicing_prob) == len(self.voiced) == n:
            raise ValueError('PitchTrack fields must all have the same length')

    @classmethod
    def empty(cls)->PitchTrack:
        return cls(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool))

    def __len__(self):
        return len(self.times)

    def rows(self):
        """
        Iterate ``(time_s, f0_hz, voicing_prob, voiced)`` tuples.
        """
        for t, f, p, v in zip(self.times, self.f0, self.voicing_prob, self.voiced):
            yield float(t), float(f), float(p), bool(v)


@dataclass
class ReferenceTrack:
    """
    A ground-truth F0 track on a uniform grid (10 ms for the usual laryngograph references).
    ``f0 == 0`` marks unvoiced frames.
    """
    times:np.ndarray
    f0:np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        if len(self.times) != len(self.f0):
            raise ValueError('Reference times and f0 must have the same length')
        if np.any(self.f0 < 0):
            raise ValueError('Reference f0 values must be non-negative')

    @classmethod
    def on_grid(cls, f0, interval:float=0.01, start:float=0.0)->ReferenceTrack:
        f0 = np.asarray(f0, dtype=np.float64)
        return cls(start + interval * np.arange(len(f0)), f0)

    def __len__(self):
        return len(self.f0)

    @property
    def interval(self)->float:
        if len(self.times) < 2:
            return 0.01
        return float(np.median(np.diff(self.times)))

    @property
    def voiced(self)->np.ndarray:
        return self.f0 > 0


@dataclass
class EvalReport:
    """
    GPE/VDE and the frame counts behind them. A report produced by only one of the metric functions
    leaves the other metric's fields at their defaults; :py:meth:`merge` combines the two halves.
    """
    n_voiced_ref:int = 0
    n_gross_errors:int = 0
    n_v_misclassified:int = 0
    n_uv_misclassified:int = 0
    n_total:int = 0
    extra:dict = field(default_factory=dict)

    @property
    def gpe(self)->float:
        """
        Gross errors over reference-voiced frames; NaN when the reference has no voiced frame.
        """
        if self.n_voiced_ref == 0:
            return math.nan
        return self.n_gross_errors / self.n_voiced_ref

    @property
    def vde(self)->float:
        if self.n_total == 0:
            return math.nan
        return (self.n_v_misclassified + self.n_uv_misclassified) / self.n_total

    def merge(self, other:EvalReport)->EvalReport:
        """
        Combine a GPE-only report and a VDE-only report over the same frames.
        """
        return EvalReport(
            n_voiced_ref=max(self.n_voiced_ref, other.n_voiced_ref),
            n_gross_errors=max(self.n_gross_errors, other.n_gross_errors),
            n_v_misclassified=max(self.n_v_misclassified, other.n_v_misclassified),
            n_uv_misclassified=max(self.n_uv_misclassified, other.n_uv_misclassified),
            n_total=max(self.n_total, other.n_total),
            extra={**self.extra, **other.extra},
        )

    def as_dict(self)->dict:
        info = asdict(self)
        extra = info.pop('extra')
        info['gpe'] = self.gpe
        info['vde'] = self.vde
        info.update(extra)
        return info
