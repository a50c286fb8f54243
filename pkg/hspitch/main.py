#!/usr/bin/python3
"""
Pitch tracking with NAMDF likelihoods, harmonic summation and Viterbi decoding, plus an evaluation
harness for noisy and reverberant conditions.
"""
import argparse
import logging
import os
from pathlib import Path
import sys
from .model import *
from .tools import *
from .tools.evaluate import Utterance, evaluate_corpus, pair_corpus
from .tools.tracker import UPSAMPLED
from .model.config import parse_overrides
from .utils.audio_io import read_wav, write_wav
from .utils.tables import (condition_csv, read_reference, reference_text, report_json, summary_csv, track_csv,
                           track_json, write_lattice, write_text)

logger = logging.getLogger('hspitch')

USAGE_ERRORS = (OSError, AudioFormatError, ConfigError, ParameterError, ReferenceFormatError)

argp = argparse.ArgumentParser(
    prog='hspitch',
    description=__doc__,
    formatter_class=argparse.RawDescriptionHelpFormatter
)
argp.add_argument('-v', '--verbose', action='store_true', help='Log debug messages')
argp.add_argument('-q', '--quiet', action='store_true', help='Only log warnings and errors')

argp.set_defaults(func=lambda _: argp.print_help())
argp_sub = argp.add_subparsers()


def add_config_arguments(parser:argparse.ArgumentParser, stride:bool=True):
    parser.add_argument('--config', help='Path to a "key = value" tracker config file')
    parser.add_argument('--set', action='append', default=[], metavar='KEY=VALUE',
                        help='Override one config value; may be repeated, later ones win')
    if stride:
        parser.add_argument('--stride', type=int, help='Frame stride in samples (default: 5 ms)')


def config_from_args(args)->TrackerConfig:
    overrides = {}
    if getattr(args, 'stride', None) is not None:
        overrides['stride'] = str(args.stride)
    overrides.update(parse_overrides(args.set))
    return load_config(args.config, overrides)


def emit(output:str, text:str):
    if output == '-':
        sys.stdout.write(text)
    else:
        write_text(output, text)


# hspitch track
argp_track = argp_sub.add_parser('track', help='Estimate the pitch track of a WAV file')
argp_track.add_argument('input', help='Path to the WAV file to track')
argp_track.add_argument('output', help="Path to output track, or '-' to use stdout", default='-', nargs='?')
argp_track.add_argument('--format', choices=('csv', 'json'),
                        help='Output format (default: from the output extension, else csv)')
add_config_arguments(argp_track)
def cli_track(args):
    config = config_from_args(args)
    audio = read_wav(args.input)
    run = run_pipeline(audio, config)
    fmt = args.format or ('json' if args.output.lower().endswith('.json') else 'csv')
    if fmt == 'json':
        text = track_json(run.track, config, run.stack.lags, audio.sample_rate, os.fspath(args.input))
    else:
        text = track_csv(run.track)
    emit(args.output, text)
argp_track.set_defaults(func=cli_track)

# hspitch eval
argp_eval = argp_sub.add_parser('eval', help='Score the tracker on a corpus under noise and reverberation')
argp_eval.add_argument('speech_dir', help='Directory of WAV files')
argp_eval.add_argument('ref_dir', help='Directory of reference F0 files named like the WAV files')
argp_eval.add_argument('output_dir', help='Directory for conditions.csv, summary CSVs and report.json')
argp_eval.add_argument('--noise', action='append', default=[],
                       help='Noise WAV path, or one of white, pink, brown; may be repeated (default: white)')
argp_eval.add_argument('--snr', action='append', type=float, default=[],
                       help='SNR in dB; may be repeated. Without any, only clean speech is scored')
argp_eval.add_argument('--rir', help='Room impulse response WAV; adds a reverberant copy of every condition')
argp_eval.add_argument('--seed', type=int, default=0, help='Seed for generated noise')
argp_eval.add_argument('--workers', type=int, default=1, help='Number of worker processes')
add_config_arguments(argp_eval)
def cli_eval(args):
    config = config_from_args(args)
    pairs, skipped = pair_corpus(args.speech_dir, args.ref_dir)
    utterances = [Utterance(name, read_wav(wav), read_reference(ref)) for name, wav, ref in pairs]
    noises = {}
    for spec in args.noise:
        if spec in NoiseKind.__members__:
            noises[spec] = spec
        else:
            noises[Path(spec).stem] = read_wav(spec)
    if args.snr and not noises:
        noises[NoiseKind.white.value] = NoiseKind.white.value
    rir = read_wav(args.rir) if args.rir else None
    corpus = evaluate_corpus(utterances, noises, args.snr, config, rir, args.seed, args.workers)
    corpus.skipped.extend(skipped)
    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    write_text(output_dir / 'conditions.csv', condition_csv(corpus.results))
    write_text(output_dir / 'summary.csv', summary_csv(corpus.summary()))
    write_text(output_dir / 'summary_by_snr.csv', summary_csv(corpus.summary(('snr_label', 'reverb'))))
    write_text(output_dir / 'report.json', report_json(corpus, config, args.seed, args.snr, list(noises), args.rir))
    for row in corpus.summary(('snr_label', 'reverb')):
        logger.info('snr=%s reverb=%s: mean GPE=%.4f mean VDE=%.4f over %d utterances',
                    row['snr_label'], row['reverb'], row['gpe'], row['vde'], row['n_utterances'])
argp_eval.set_defaults(func=cli_eval)

# hspitch synth
argp_synth = argp_sub.add_parser('synth', help='Generate a synthetic test signal and its reference track')
argp_synth.add_argument('kind', choices=[k.value for k in SynthKind], help='Signal type')
argp_synth.add_argument('output', help='Path to the output WAV')
argp_synth.add_argument('--f0', required=True,
                        help='F0 in Hz, or START:END for a glide (required for chirp); must lie within f_min..f_max')
argp_synth.add_argument('--duration', type=float, default=3.0, help='Voiced duration in seconds')
argp_synth.add_argument('--snr', type=float, help='Add white noise at this SNR in dB')
argp_synth.add_argument('--seed', type=int, default=0, help='Noise seed')
argp_synth.add_argument('--sample-rate', type=int, default=16000, help='Sample rate in Hz')
argp_synth.add_argument('--reference', help='Path for the reference track (default: OUTPUT with a .f0 suffix)')
add_config_arguments(argp_synth, stride=False)
def cli_synth(args):
    try:
        parts = [float(part) for part in args.f0.split(':')]
    except ValueError:
        raise ParameterError(f'Invalid --f0 value: {repr(args.f0)}') from None
    if len(parts) not in (1, 2):
        raise ParameterError(f'Invalid --f0 value: {repr(args.f0)}')
    config = config_from_args(args)
    for f0 in parts:
        if not config.f_min <= f0 <= config.f_max:
            raise ParameterError(f'F0 {f0} Hz is outside the search range {config.f_min}..{config.f_max} Hz')
    f0_end = parts[1] if len(parts) == 2 else None
    audio, reference = synthesize(args.kind, parts[0], f0_end, duration=args.duration, sample_rate=args.sample_rate,
                                  snr_db=args.snr, seed=args.seed)
    reference_path = args.reference or os.fspath(Path(args.output).with_suffix('.f0'))
    write_wav(args.output, audio)
    write_text(reference_path, reference_text(reference))
argp_synth.set_defaults(func=cli_synth)

# hspitch dump-lattice
argp_dump = argp_sub.add_parser('dump-lattice', help='Write the likelihood lattice at one pipeline stage')
argp_dump.add_argument('input', help='Path to the WAV file to analyse')
argp_dump.add_argument('output', help='Path to the output file')
argp_dump.add_argument('--stage', default=Stage.temporal.value,
                       choices=[s.value for s in Stage] + [UPSAMPLED], help='Pipeline stage to dump')
argp_dump.add_argument('--format', choices=('csv', 'npz'),
                       help='Output format (default: from the output extension, else csv)')
add_config_arguments(argp_dump)
def cli_dump_lattice(args):
    config = config_from_args(args)
    audio = read_wav(args.input)
    view = compute_lattice(audio, config, args.stage)
    fmt = args.format or ('npz' if args.output.lower().endswith('.npz') else 'csv')
    write_lattice(args.output, view.values, view.lags, view.times, view.stage, view.sample_rate, view.stride, fmt)
argp_dump.set_defaults(func=cli_dump_lattice)


def configure_logging(verbose:bool=False, quiet:bool=False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')
    logging.getLogger('hspitch').setLevel(level)


def main(argv=None)->int:
    """
    Run the command line. Returns 0 on success, 2 for usage, input or config problems and 1 for
    anything else that goes wrong while processing.
    """
    args = argp.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        args.func(args)
    except USAGE_ERRORS as e:
        print(f'hspitch: error: {e}', file=sys.stderr)
        return 2
    except Exception as e:
        logger.debug('Processing failed', exc_info=True)
        print(f'hspitch: processing failed: {type(e).__name__}: {e}', file=sys.stderr)
        return 1
    return 0
