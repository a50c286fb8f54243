from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence
import numpy as np


class Stage(Enum):
    """
    Which step of the likelihood computation produced a column. The stages always run in this order,
    though any of the later ones may be skipped for ablation.
    """
    raw_namdf = 'raw_namdf'
    sigmoid = 'sigmoid'
    harmonic = 'harmonic'
    temporal = 'temporal'


@dataclass
class LikelihoodColumn:
    """
    Per-lag values for one frame. ``values[0]`` belongs to lag ``lag_offset``; there is one entry per
    integer lag.
    """
    values:np.ndarray
    lag_offset:int
    stage:Stage

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValueError(f'Column values must be 1-D, got shape {self.values.shape}')

    def __len__(self):
        return len(self.values)

    @property
    def lags(self)->np.ndarray:
        return np.arange(self.lag_offset, self.lag_offset + len(self.values))

    @property
    def last_lag(self)->int:
        return self.lag_offset + len(self.values) - 1

    def at(self, lag:int)->float:
        return float(self.values[lag - self.lag_offset])


@dataclass
class LikelihoodLattice:
    """
    Columns for every frame of an utterance, stored as one ``(frames, lags)`` matrix so all columns
    share the stage, lag offset and length by construction.
    """
    values:np.ndarray
    lag_offset:int
    stage:Stage
    frame_stride:int
    sample_rate:int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f'Lattice values must be 2-D (frames, lags), got shape {self.values.shape}')

    @classmethod
    def from_columns(cls, columns:Sequence[LikelihoodColumn], frame_stride:int, sample_rate:int)->LikelihoodLattice:
        if not columns:
            raise ValueError('Cannot build a lattice from zero columns (use LikelihoodLattice.empty)')
        first = columns[0]
        for column in columns:
            if column.stage is not first.stage or column.lag_offset != first.lag_offset or len(column) != len(first):
                raise ValueError('All columns of a lattice must share stage, lag offset and length')
        return cls(np.stack([c.values for c in columns]), first.lag_offset, first.stage, frame_stride, sample_rate)

    @classmethod
    def empty(cls, n_lags:int, lag_offset:int, stage:Stage, frame_stride:int, sample_rate:int)->LikelihoodLattice:
        return cls(np.zeros((0, n_lags)), lag_offset, stage, frame_stride, sample_rate)

    def __len__(self):
        return self.values.shape[0]

    @property
    def n_lags(self)->int:
        return self.values.shape[1]

    @property
    def lags(self)->np.ndarray:
        return np.arange(self.lag_offset, self.lag_offset + self.n_lags)

    def column(self, index:int)->LikelihoodColumn:
        return LikelihoodColumn(self.values[index], self.lag_offset, self.stage)

    def columns(self)->Iterator[LikelihoodColumn]:
        for index in range(len(self)):
            yield self.column(index)

    def replace(self, values:np.ndarray, stage:Stage, lag_offset:int=None)->LikelihoodLattice:
        """
        A lattice with the same framing but new values (and usually a new stage).
        """
        return LikelihoodLattice(
            values, self.lag_offset if lag_offset is None else lag_offset, stage, self.frame_stride, self.sample_rate
        )
