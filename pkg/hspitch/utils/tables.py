"""
Text and array file formats: pitch tracks, reference tracks, lattice dumps and evaluation reports.
"""
from contextlib import contextmanager
import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Iterable, List, Optional, TextIO
import numpy as np
from ..model.audio import LagRange
from ..model.config import TrackerConfig
from ..model.errors import ReferenceFormatError
from ..model.track import PitchTrack, ReferenceTrack

TRACK_COLUMNS = ('time_s', 'f0_hz', 'voicing_prob', 'voiced')
CONDITION_COLUMNS = ('utterance', 'noise', 'snr_db', 'reverb', 'gpe', 'vde', 'n_voiced_ref', 'n_gross_errors',
                     'n_v_misclassified', 'n_uv_misclassified', 'n_total')


@contextmanager
def atomic_path(path):
    """
    Yield a temporary path next to ``path`` and move it into place only if the block succeeds, so a
    failed write never leaves a partial file behind.
    """
    path = Path(path)
    tmp = path.with_name(f'.{path.name}.partial')
    try:
        yield tmp
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _float(value:float, digits:int)->str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return 'nan'
    return f'{value:.{digits}f}'


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def dumps_json(data)->str:
    return json.dumps(_json_safe(data), indent=2, allow_nan=False) + '\n'


# Pitch tracks

def track_csv(track:PitchTrack)->str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(TRACK_COLUMNS)
    for t, f, p, v in track.rows():
        writer.writerow([_float(t, 4), _float(f, 3), _float(p, 6), int(v)])
    return out.getvalue()


def track_json(track:PitchTrack, config:TrackerConfig=None, lags:LagRange=None, sample_rate:int=None,
               source:str=None)->str:
    """
    The track as JSON, with the effective config and lag range next to the frame records.
    """
    data = {}
    if source is not None:
        data['source'] = source
    if sample_rate is not None:
        data['sample_rate'] = sample_rate
    if lags is not None:
        data['lag_range'] = {'l_min': lags.l_min, 'l_max': lags.l_max, 'H': lags.H,
                             'pitch_lag_max': lags.harmonic_max}
    if config is not None:
        data['config'] = config.model_dump(mode='json')
    data['frames'] = [
        {'time_s': round(t, 6), 'f0_hz': round(f, 4), 'voicing_prob': round(p, 6), 'voiced': v}
        for t, f, p, v in track.rows()
    ]
    return dumps_json(data)


def read_track_csv(path)->PitchTrack:
    data = np.loadtxt(path, delimiter=',', skiprows=1, ndmin=2)
    if data.size == 0:
        return PitchTrack.empty()
    return PitchTrack(data[:, 0], data[:, 1], data[:, 2], data[:, 3] != 0)


# Reference tracks

def read_reference(path, interval:float=0.01)->ReferenceTrack:
    """
    Read a reference F0 file: either two columns (time in seconds, F0 in Hz) or one column of F0
    values every ``interval`` seconds. Whitespace or commas separate columns, ``#`` starts a
    comment, and 0 means unvoiced.
    """
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read().replace(',', ' ')
    try:
        data = np.loadtxt(io.StringIO(text), comments='#', ndmin=2)
    except ValueError as e:
        raise ReferenceFormatError(f'Cannot parse reference {os.fspath(path)}: {e}') from e
    if data.size == 0:
        return ReferenceTrack(np.zeros(0), np.zeros(0))
    try:
        if data.shape[1] == 1:
            return ReferenceTrack.on_grid(data[:, 0], interval)
        if data.shape[1] == 2:
            return ReferenceTrack(data[:, 0], data[:, 1])
    except ValueError as e:
        raise ReferenceFormatError(f'Invalid reference {os.fspath(path)}: {e}') from e
    raise ReferenceFormatError(f'Reference {os.fspath(path)} has {data.shape[1]} columns, expected 1 or 2')


def reference_text(ref:ReferenceTrack)->str:
    lines = [f'{t:.3f} {f:.4f}' for t, f in zip(ref.times, ref.f0)]
    return '\n'.join(lines) + '\n'


def write_text(path, text:str):
    with atomic_path(path) as tmp:
        with open(tmp, 'w', encoding='utf-8', newline='') as f:
            f.write(text)


# Lattices

def write_lattice(path, values:np.ndarray, lags:np.ndarray, times:np.ndarray, stage:str, sample_rate:int,
                  stride:int, fmt:str='csv'):
    """
    Dump a ``(frames, lags)`` matrix. CSV files start with ``#`` metadata lines and a header row
    naming the lags; ``npz`` stores the same pieces as named arrays.
    """
    values = np.asarray(values, dtype=np.float64)
    with atomic_path(path) as tmp:
        if fmt == 'npz':
            with open(tmp, 'wb') as f:
                np.savez(f, values=values, lags=np.asarray(lags, dtype=np.float64), times=np.asarray(times),
                         stage=np.array(stage), sample_rate=np.array(sample_rate), stride=np.array(stride))
            return
        if fmt != 'csv':
            raise ValueError(f'Unknown lattice format: {repr(fmt)}')
        with open(tmp, 'w', encoding='utf-8', newline='') as f:
            f.write(f'# stage: {stage}\n# sample_rate: {sample_rate}\n# stride: {stride}\n'
                    f'# lag_offset: {_lag_label(lags[0]) if len(lags) else "none"}\n')
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['time_s'] + [_lag_label(l) for l in lags])
            for t, row in zip(times, values):
                writer.writerow([_float(t, 4)] + [repr(float(v)) for v in row])


def _lag_label(lag:float)->str:
    lag = float(lag)
    return str(int(lag)) if lag.is_integer() else f'{lag:.4f}'


# Evaluation reports

def condition_csv(results:Iterable)->str:
    """
    One row per evaluated condition.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(CONDITION_COLUMNS)
    for result in results:
        c, r = result.condition, result.report
        writer.writerow([c.utterance, c.noise, c.snr_label, int(c.reverb), _float(r.gpe, 6), _float(r.vde, 6),
                         r.n_voiced_ref, r.n_gross_errors, r.n_v_misclassified, r.n_uv_misclassified, r.n_total])
    return out.getvalue()


def summary_csv(rows:List[dict])->str:
    out = io.StringIO()
    if not rows:
        return ''
    writer = csv.writer(out, lineterminator='\n')
    columns = list(rows[0])
    writer.writerow([c.replace('snr_label', 'snr_db') for c in columns])
    for row in rows:
        writer.writerow([
            _float(v, 6) if isinstance(v, float) else int(v) if isinstance(v, bool) else v
            for v in row.values()
        ])
    return out.getvalue()


def report_json(corpus, config:TrackerConfig, seed:int, snrs:List[float], noises:List[str],
                rir:Optional[str]=None)->str:
    """
    The whole evaluation as JSON: settings, per-condition reports, both summaries and skipped items.
    """
    data = {
        'seed': seed,
        'snr_db': list(snrs),
        'noise': list(noises),
        'rir': rir,
        'config': config.model_dump(mode='json'),
        'conditions': [
            {'utterance': r.condition.utterance, 'noise': r.condition.noise, 'snr_db': r.condition.snr_label,
             'reverb': r.condition.reverb, **r.report.as_dict()}
            for r in corpus.results
        ],
        'summary': _rename_snr(corpus.summary()),
        'summary_by_snr': _rename_snr(corpus.summary(('snr_label', 'reverb'))),
        'skipped': corpus.skipped,
    }
    return dumps_json(data)


def _rename_snr(rows:List[dict])->List[dict]:
    return [{('snr_db' if k == 'snr_label' else k): v for k, v in row.items()} for row in rows]
