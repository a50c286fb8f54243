import numpy as np
import pytest
from hspitch.model import (AudioBuffer, BimodalGMM, LikelihoodColumn, LikelihoodLattice, ParameterError, Stage,
                           VoicingOrientation)
from hspitch.model.gmm import VARIANCE_FLOOR
from hspitch.tools.preprocess import frame_stream
from hspitch.tools.voicing import (VoicingFeatures, energy_fallback, finalize_track, fit_bimodal_gmm, frame_energy,
                                   omega_feature, omega_lattice, pca_project, principal_component, voicing_factor,
                                   voicing_factors)


def column(values):
    return LikelihoodColumn(np.asarray(values, dtype=float), 20, Stage.temporal)


def test_omega_sliding_window():
    assert omega_feature(column([0, 0, 5, 5, 0]), 2) == pytest.approx(np.log(10))


def test_omega_constant_column():
    assert omega_feature(column(np.full(30, 0.7)), 4) == pytest.approx(np.log(4 * 0.7))


def test_omega_whole_column():
    values = np.array([0.2, 0.5, 0.1, 0.9])
    assert omega_feature(column(values), 4) == pytest.approx(np.log(values.sum()))


def test_omega_zero_column():
    assert omega_feature(column(np.zeros(10)), 3) == pytest.approx(np.log(1e-12))


@pytest.mark.parametrize('W', [0, 6])
def test_omega_window_out_of_range(W):
    with pytest.raises(ParameterError):
        omega_feature(column(np.ones(5)), W)


def test_omega_lattice_matches_columns(rng):
    lattice = LikelihoodLattice(rng.uniform(0, 2, (5, 40)), 20, Stage.temporal, 40, 8000)
    np.testing.assert_allclose(omega_lattice(lattice, 7), [omega_feature(c, 7) for c in lattice.columns()])


def test_frame_energy(rng):
    audio = AudioBuffer(np.concatenate([np.zeros(800), rng.standard_normal(800)]), 8000)
    frames = frame_stream(audio, 0.02, 160)
    energy = frame_energy(audio, frames)
    assert energy[0] == pytest.approx(np.log(1e-12))
    expected = np.log(np.sum((audio.samples[1120:1280] * np.hanning(160)) ** 2) + 1e-12)
    assert energy[7] == pytest.approx(expected)


def test_pca_correlated_features(rng):
    energy = rng.standard_normal(100)
    features = VoicingFeatures(energy, 2 * energy + 3)
    standardized, axis, explained = principal_component(features)
    assert explained == pytest.approx(1.0)
    z = (energy - energy.mean()) / energy.std()
    np.testing.assert_allclose(pca_project(features), np.sqrt(2) * z, atol=1e-9)


def test_pca_two_clusters():
    energy = np.array([-1.0] * 10 + [1.0] * 10)
    projection = pca_project(VoicingFeatures(energy, energy.copy()))
    assert projection[10:].min() - projection[:10].max() == pytest.approx(2 * np.sqrt(2))


def test_pca_follows_energy():
    energy = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    omega = np.array([5.0, 4.0, 3.0, 2.0, 1.0])
    projection = pca_project(VoicingFeatures(energy, omega))
    assert np.all(np.diff(projection) > 0)


def test_pca_degenerate_features():
    features = VoicingFeatures(np.full(8, 2.0), np.full(8, -1.0))
    np.testing.assert_array_equal(pca_project(features), 0.0)


def test_pca_drops_constant_dimension(rng):
    energy = rng.standard_normal(30)
    projection = pca_project(VoicingFeatures(energy, np.full(30, 4.0)))
    np.testing.assert_allclose(projection, (energy - energy.mean()) / energy.std(), atol=1e-9)


def test_pca_affine_invariance(rng):
    energy = rng.standard_normal(50)
    omega = 0.5 * energy + rng.standard_normal(50)
    base = pca_project(VoicingFeatures(energy, omega))
    scaled = pca_project(VoicingFeatures(10 * energy - 4, 0.1 * omega + 7))
    np.testing.assert_array_equal(np.argsort(base), np.argsort(scaled))


def test_gmm_recovers_modes():
    rng = np.random.default_rng(42)
    x = np.concatenate([rng.normal(-3, 1, 1000), rng.normal(3, 1, 1000)])
    gmm = fit_bimodal_gmm(x, 200, 1e-6)
    assert gmm.means[0] == pytest.approx(3, abs=0.2)
    assert gmm.means[1] == pytest.approx(-3, abs=0.2)
    assert gmm.weights.sum() == pytest.approx(1.0)
    assert np.all(np.diff(gmm.log_likelihoods) >= -1e-9)


def test_gmm_identical_points():
    gmm = fit_bimodal_gmm(np.full(20, 1.5))
    assert np.all(gmm.variances >= VARIANCE_FLOOR)
    np.testing.assert_allclose(voicing_factor(np.array([1.5, 0.0, 9.0]), gmm), 0.5)


def test_gmm_needs_four_points():
    with pytest.raises(ParameterError):
        fit_bimodal_gmm([1.0, 2.0, 3.0])


def test_gmm_stops_at_max_iters(rng):
    x = np.concatenate([rng.normal(-1, 1, 200), rng.normal(1, 1, 200)])
    assert fit_bimodal_gmm(x, max_iters=3, tol=0).iterations <= 3


@pytest.fixture
def symmetric_gmm():
    return BimodalGMM([3.0, -3.0], [1.0, 1.0], [0.5, 0.5])


def test_voicing_factor_values(symmetric_gmm):
    assert voicing_factor(3.0, symmetric_gmm) > 0.95
    assert voicing_factor(0.0, symmetric_gmm) == pytest.approx(0.5)
    assert voicing_factor(-3.0, symmetric_gmm) < 0.05


def test_voicing_factor_swap_complement(symmetric_gmm, rng):
    x = rng.uniform(-6, 6, 50)
    total = voicing_factor(x, symmetric_gmm) + voicing_factor(x, symmetric_gmm.swapped())
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_voicing_factor_literal_orientation(symmetric_gmm):
    voiced = voicing_factor(2.0, symmetric_gmm)
    literal = voicing_factor(2.0, symmetric_gmm, VoicingOrientation.literal)
    assert literal == pytest.approx(1 - voiced)


def test_voicing_factor_open_interval(symmetric_gmm):
    values = voicing_factor(np.linspace(-5, 5, 101), symmetric_gmm)
    assert np.all((values > 0) & (values < 1))


def test_energy_fallback():
    np.testing.assert_array_equal(energy_fallback(np.array([-10.0, -2.0, -6.1, -6.0])), [0, 1, 0, 1])


def test_voicing_factors_short_utterance_falls_back():
    features = VoicingFeatures(np.array([-20.0, 1.0, 0.5]), np.zeros(3))
    with pytest.warns(UserWarning):
        factors = voicing_factors(features)
    np.testing.assert_array_equal(factors, [0, 1, 1])


def test_voicing_factors_silence_is_unvoiced(rng):
    energy = np.concatenate([np.full(10, np.log(1e-12)), rng.normal(2, 0.1, 30)])
    omega = np.concatenate([np.full(10, 1.0), rng.normal(3, 0.1, 30)])
    factors = voicing_factors(VoicingFeatures(energy, omega))
    np.testing.assert_array_equal(factors[:10], 0.0)
    assert np.all(factors[10:] > 0.5)


def test_finalize_examples():
    times = np.array([0.0, 0.01])
    track = finalize_track([2.0, 1.0], [1.0, 0.5], [100.0, 100.0], times)
    np.testing.assert_allclose(track.voicing_prob, [1.0, 0.25])
    assert track.voiced.tolist() == [True, False]


def test_finalize_silence():
    track = finalize_track(np.zeros(4), np.ones(4), np.full(4, 120.0), np.arange(4) * 0.01)
    np.testing.assert_array_equal(track.voicing_prob, 0.0)
    assert not track.voiced.any()


def test_finalize_single_frame():
    track = finalize_track([0.3], [0.2], [150.0], [0.02])
    assert track.voicing_prob.tolist() == [1.0]
    assert track.voiced.tolist() == [True]


def test_finalize_threshold():
    track = finalize_track([1.0, 0.7], [1.0, 1.0], [100.0, 100.0], [0.0, 0.01], threshold=0.75)
    assert track.voiced.tolist() == [True, False]


def test_finalize_length_mismatch():
    with pytest.raises(ParameterError):
        finalize_track([1.0], [1.0, 1.0], [100.0], [0.0])
