from __future__ import annotations
from enum import Enum, IntFlag
from typing import Dict, Iterable, List, Optional, Union
import math
import os
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from .errors import ConfigError
from .grid import GeometricLagGrid
from .params import ToleranceMode, HarmonicWeights, RectifyParams


class ViterbiCostMode(str, Enum):
    """
    ``sum_likelihood`` maximises the summed state likelihood along the path. ``paper_difference``
    maximises the summed frame-to-frame likelihood difference, which telescopes to last-minus-first
    and is only kept for comparison.
    """
    sum_likelihood = 'sum_likelihood'
    paper_difference = 'paper_difference'

    def __str__(self):
        return self.value


class VoicingOrientation(str, Enum):
    """
    ``voiced_posterior`` makes the voicing factor ``p_voiced / (p_voiced + p_unvoiced)``; ``literal``
    uses ``(1 + p_voiced/p_unvoiced)^-1``, i.e. the unvoiced posterior.
    """
    voiced_posterior = 'voiced_posterior'
    literal = 'literal'

    def __str__(self):
        return self.value


class Component(IntFlag):
    """
    Pipeline stages that can be switched off for ablation experiments.
    """
    @classmethod
    def lookup(cls, value):
        if value is None:
            value = 0
        elif isinstance(value, str) and value.isdigit():
            value = int(value)
        return cls(value)
    harmonic_summation = 1 << 0
    temporal_accumulation = 1 << 1
    viterbi = 1 << 2
    rectification = 1 << 3
    voicing = 1 << 4
    all = harmonic_summation | temporal_accumulation | viterbi | rectification | voicing


_STAGES = (Component.harmonic_summation, Component.temporal_accumulation, Component.viterbi,
           Component.rectification, Component.voicing)
_TRUE = {'true', 'yes', 'on', '1'}
_FALSE = {'false', 'no', 'off', '0'}
# fields that accept "auto" to mean "derive from the sample rate"
_AUTO_FIELDS = ('stride', 'temporal_step', 'S', 'J', 'W', 'viterbi_max_jump', 'harmonic_weights')


def _frames(seconds:float, sample_rate:int, stride:int, minimum:int)->int:
    return max(minimum, int(round(seconds * sample_rate / stride)))


class TrackerConfig(BaseModel):
    """
    Every tunable of the tracker. Fields left at ``None`` (written ``auto`` in config files) are
    resolved per sample rate by the ``*_for`` helpers below.
    """
    model_config = ConfigDict(extra='forbid', validate_assignment=True, frozen=False)

    # Preprocessing
    f_min:float = Field(50.0, gt=0)
    f_max:float = Field(400.0, gt=0)
    window_dur:float = Field(0.040, gt=0)
    stride:Optional[int] = Field(None, ge=1)
    lowpass_cutoff:float = Field(1500.0, gt=0)
    lowpass_order:int = Field(4, ge=1)
    # Likelihood
    H:int = Field(4, ge=1)
    harmonic_weights:Optional[List[float]] = None
    r_mode:ToleranceMode = ToleranceMode.proportional
    r:int = Field(1, ge=0)
    r_fraction:float = Field(0.01, ge=0)
    k:float = -8.0
    K:int = Field(2, ge=0)
    temporal_step:Optional[int] = Field(None, ge=1)
    # Decoding
    U:int = Field(2, ge=1)
    viterbi_cost_mode:ViterbiCostMode = ViterbiCostMode.sum_likelihood
    viterbi_max_jump:Optional[int] = Field(None, ge=1)
    max_slew:float = Field(6.0, gt=0)
    # Rectification
    S:Optional[int] = Field(None, ge=1)
    J:Optional[int] = Field(None, ge=0)
    alpha:float = Field(0.3, ge=0, le=1)
    # Voicing
    W:Optional[int] = Field(None, ge=1)
    voicing_threshold:float = Field(0.5, ge=0, le=1)
    eq10_orientation:VoicingOrientation = VoicingOrientation.voiced_posterior
    gmm_max_iters:int = Field(200, ge=1)
    gmm_tol:float = Field(1e-6, ge=0)
    # Ablation switches
    harmonic_summation:bool = True
    temporal_accumulation:bool = True
    viterbi:bool = True
    rectification:bool = True
    voicing:bool = True

    @field_validator(*_AUTO_FIELDS, mode='before')
    @classmethod
    def _parse_auto(cls, value):
        if isinstance(value, str) and value.strip().lower() in ('', 'auto', 'none'):
            return None
        return value

    @field_validator('harmonic_weights', mode='before')
    @classmethod
    def _parse_weights(cls, value):
        if isinstance(value, str):
            if value.strip().lower() in ('', 'auto', 'none'):
                return None
            return [float(part) for part in value.replace(' ', '').split(',') if part]
        return value

    @field_validator('harmonic_summation', 'temporal_accumulation', 'viterbi', 'rectification', 'voicing', mode='before')
    @classmethod
    def _parse_bool(cls, value):
        if isinstance(value, str):
            lowered = value.strip().lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
        return value

    @model_validator(mode='after')
    def _check_ranges(self):
        if self.f_min >= self.f_max:
            raise ValueError(f'f_min ({self.f_min}) must be below f_max ({self.f_max})')
        if self.harmonic_weights is not None:
            if len(self.harmonic_weights) != self.H:
                raise ValueError(f'harmonic_weights needs H={self.H} entries, got {len(self.harmonic_weights)}')
            if any(w < 0 for w in self.harmonic_weights):
                raise ValueError('harmonic_weights must be non-negative')
        return self

    @property
    def components(self)->Component:
        """
        The enabled stages as a :py:class:`Component` flag set.
        """
        flags = Component(0)
        for member in _STAGES:
            if getattr(self, member.name):
                flags |= member
        return flags

    def with_components(self, value:Union[Component,int,str])->TrackerConfig:
        """
        A copy with exactly the given stages enabled.
        """
        value = Component.lookup(value)
        return self.with_overrides({member.name: member in value for member in _STAGES})

    # Sample-rate dependent values

    def stride_for(self, sample_rate:int)->int:
        if self.stride is not None:
            return self.stride
        return max(1, int(round(0.005 * sample_rate)))

    def temporal_step_for(self, sample_rate:int)->int:
        if self.temporal_step is not None:
            return self.temporal_step
        return _frames(0.005, sample_rate, self.stride_for(sample_rate), 1)

    def max_jump_for(self, sample_rate:int, grid:GeometricLagGrid)->int:
        """
        Largest state step between consecutive frames: by default the ``max_slew`` octaves per second
        reachable in one stride, on ``grid``'s spacing.
        """
        if self.viterbi_max_jump is not None:
            return self.viterbi_max_jump
        octaves = self.max_slew * self.stride_for(sample_rate) / sample_rate
        return max(1, math.ceil(octaves / grid.octaves_per_step - 1e-9))

    def rectify_params_for(self, sample_rate:int)->RectifyParams:
        stride = self.stride_for(sample_rate)
        S = self.S if self.S is not None else _frames(0.010, sample_rate, stride, 1)
        J = self.J if self.J is not None else _frames(0.005, sample_rate, stride, 0)
        return RectifyParams(S, J, self.alpha)

    def omega_width_for(self, l_min:int, n_lags:int)->int:
        """
        ``W``: by default the lags spanning one octave above ``l_min``, capped at the column length.
        """
        W = self.W if self.W is not None else l_min
        return max(1, min(W, n_lags))

    def harmonic_weights_obj(self)->HarmonicWeights:
        kwargs = dict(r=self.r, mode=self.r_mode, r_fraction=self.r_fraction)
        if self.harmonic_weights is None:
            return HarmonicWeights.decaying(self.H, **kwargs)
        return HarmonicWeights(self.harmonic_weights, **kwargs)

    # Flat key = value text format

    @classmethod
    def parse(cls, text:str, source:str='<config>')->TrackerConfig:
        return cls.from_mapping(parse_flat(text, source), source)

    @classmethod
    def from_mapping(cls, values:Dict[str,str], source:str='<config>')->TrackerConfig:
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigError(f'Invalid configuration in {source}:\n{e}') from e

    @classmethod
    def from_file(cls, path)->TrackerConfig:
        with open(path, 'r', encoding='utf-8') as f:
            return cls.parse(f.read(), os.fspath(path))

    def with_overrides(self, overrides:Dict[str,str], source:str='--set')->TrackerConfig:
        """
        A copy with the given fields replaced, validating the result as a whole.
        """
        values = self.model_dump()
        values.update(overrides)
        return TrackerConfig.from_mapping(values, source)

    def to_text(self)->str:
        lines = []
        for name, value in self.model_dump().items():
            lines.append(f'{name} = {_format_value(value)}')
        return '\n'.join(lines) + '\n'


def _format_value(value)->str:
    if value is None:
        return 'auto'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return ', '.join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_flat(text:str, source:str='<config>')->Dict[str,str]:
    """
    Parse ``key = value`` lines. ``#`` starts a comment; blank lines are ignored; a key may only
    appear once.
    """
    values = {}
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{source}:{number}: expected "key = value", got {repr(line)}')
        key, value = (part.strip() for part in line.split('=', 1))
        if not key:
            raise ConfigError(f'{source}:{number}: missing key')
        if key in values:
            raise ConfigError(f'{source}:{number}: duplicate key {repr(key)}')
        values[key] = value
    return values


def parse_overrides(assignments:Iterable[str])->Dict[str,str]:
    """
    Turn ``["k=v", ...]`` from ``--set`` into a mapping, later assignments winning.
    """
    values = {}
    for assignment in assignments:
        if '=' not in assignment:
            raise ConfigError(f'--set expects key=value, got {repr(assignment)}')
        key, value = (part.strip() for part in assignment.split('=', 1))
        values[key] = value
    return values


def load_config(path=None, overrides:Dict[str,str]=None)->TrackerConfig:
    """
    Build the effective config: built-in defaults, then the config file (if any), then overrides.
    """
    config = TrackerConfig.from_file(path) if path is not None else TrackerConfig()
    if overrides:
        config = config.with_overrides(overrides)
    return config
