from .preprocess import lowpass_filter, compute_lag_range, frame_stream
from .likelihood import (namdf, namdf_lattice, sigmoid_transform, sigmoid_lattice, harmonic_summation,
                         harmonic_lattice, temporal_accumulation)
from .decode import geometric_upsample, upsample_lattice, viterbi_decode, argmax_path, path_to_f0
from .postprocess import rectify
from .voicing import (VoicingFeatures, frame_energy, omega_feature, pca_project, fit_bimodal_gmm, voicing_factor,
                      finalize_track)
from .tracker import track, run_pipeline, compute_lattice
from .evaluate import (NoiseKind, generate_noise, white_noise, pink_noise, brown_noise, mix_noise_at_snr, measure_snr, convolve_rir, gen_test_rir,
                       schroeder_t60, compute_gpe, compute_vde, evaluate_track)
from .synth import SynthKind, synthesize
