import sys, os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from hspitch import TrackerConfig, synthesize, track, evaluate_track, white_noise, mix_noise_at_snr

# A 120 Hz vowel-like pulse train, 2 s long, at 8 kHz
audio, reference = synthesize('pulse_train', 120.0, duration=2.0, sample_rate=8000)
config = TrackerConfig()

for snr in (float('inf'), 20.0, 10.0, 0.0):
    noisy = mix_noise_at_snr(audio, white_noise(len(audio), audio.sample_rate, seed=1), snr)
    result = track(noisy, config)
    report = evaluate_track(result, reference)
    print(f'SNR {snr:>5} dB: GPE {report.gpe:.3f}  VDE {report.vde:.3f}  ({len(result)} frames)')

# Same signal with harmonic summation switched off
ablated = config.with_overrides({'harmonic_summation': 'off'})
noisy = mix_noise_at_snr(audio, white_noise(len(audio), audio.sample_rate, seed=1), 0.0)
report = evaluate_track(track(noisy, ablated), reference)
print(f'0 dB without harmonic summation: GPE {report.gpe:.3f}')
