import numpy as np
import pytest
from hspitch.model import Component, ConfigError, GeometricLagGrid, ToleranceMode, TrackerConfig, ViterbiCostMode, load_config
from hspitch.model.config import parse_flat, parse_overrides


def test_defaults(config):
    assert (config.f_min, config.f_max) == (50.0, 400.0)
    assert config.window_dur == 0.040
    assert config.H == 4
    assert config.k == -8.0
    assert (config.K, config.U) == (2, 2)
    assert config.alpha == 0.3
    assert config.r_mode is ToleranceMode.proportional
    assert config.viterbi_cost_mode is ViterbiCostMode.sum_likelihood
    assert config.components == Component.all


def test_rate_dependent_defaults(config):
    assert config.stride_for(16000) == 80
    assert config.stride_for(8000) == 40
    assert config.temporal_step_for(16000) == 1
    assert config.max_jump_for(16000, GeometricLagGrid.build(40, 320, 2)) == 6
    assert config.max_jump_for(8000, GeometricLagGrid.build(20, 160, 2)) == 3
    params = config.rectify_params_for(16000)
    assert (params.S, params.J, params.alpha) == (2, 1, 0.3)


def test_explicit_values_win(config):
    config = config.with_overrides({'stride': '16', 'S': '5', 'J': '0', 'viterbi_max_jump': '3'})
    assert config.stride_for(16000) == 16
    assert config.max_jump_for(16000, GeometricLagGrid.build(40, 320, 2)) == 3
    params = config.rectify_params_for(16000)
    assert (params.S, params.J) == (5, 0)
    assert config.temporal_step_for(16000) == 5


def test_max_jump_follows_slew(config):
    grid = GeometricLagGrid.build(20, 160, 2)
    assert grid.octaves_per_step == pytest.approx(3 / 280)
    assert config.with_overrides({'max_slew': '12'}).max_jump_for(8000, grid) == 6
    # never below one step per frame
    assert config.with_overrides({'max_slew': '0.01'}).max_jump_for(8000, grid) == 1
    # a longer stride allows a proportionally longer jump
    assert config.with_overrides({'stride': '80'}).max_jump_for(8000, grid) == 6
    with pytest.raises(ConfigError):
        config.with_overrides({'max_slew': '0'})


def test_omega_width(config):
    assert config.omega_width_for(40, 300) == 40
    assert config.omega_width_for(40, 30) == 30
    assert config.with_overrides({'W': '7'}).omega_width_for(40, 300) == 7


def test_default_harmonic_weights(config):
    weights = config.harmonic_weights_obj()
    np.testing.assert_allclose(weights.w, [1 / 2, 1 / 3, 1 / 4, 1 / 5])
    assert weights.mode is ToleranceMode.proportional


def test_parse_text():
    config = TrackerConfig.parse(
        '# tracker settings\n'
        '\n'
        'f_min = 60   # Hz\n'
        'k = -6\n'
        'viterbi = off\n'
        'stride = auto\n'
        'harmonic_weights = 0.5, 0.25, 0.125, 0.0625\n'
        'r_mode = fixed\n'
    )
    assert config.f_min == 60.0
    assert config.k == -6.0
    assert config.viterbi is False
    assert config.stride is None
    assert config.harmonic_weights == [0.5, 0.25, 0.125, 0.0625]
    assert config.harmonic_weights_obj().mode is ToleranceMode.fixed


@pytest.mark.parametrize('text', [
    'bogus = 1\n',
    'f_min = 500\n',
    'K = -1\n',
    'viterbi = perhaps\n',
    'harmonic_weights = 1, 2\n',
    'alpha = 2\n',
    'f_min\n',
    'K = 1\nK = 2\n',
])
def test_invalid_text(text):
    with pytest.raises(ConfigError):
        TrackerConfig.parse(text)


def test_error_names_source_and_line():
    with pytest.raises(ConfigError, match='tracker.conf:2'):
        parse_flat('K = 1\nK = 2\n', 'tracker.conf')


def test_round_trip():
    config = TrackerConfig(f_min=70.0, stride=64, harmonic_weights=[0.4, 0.3, 0.2, 0.1], viterbi=False,
                           viterbi_cost_mode='paper_difference', alpha=0.25)
    assert TrackerConfig.parse(config.to_text()) == config
    assert TrackerConfig.parse(TrackerConfig().to_text()) == TrackerConfig()


def test_load_config_precedence(tmp_path):
    path = tmp_path / 'tracker.conf'
    path.write_text('K = 3\nk = -6\n')
    assert load_config().K == 2
    config = load_config(path, {'K': '4'})
    assert (config.K, config.k) == (4, -6.0)


def test_parse_overrides():
    assert parse_overrides(['K=1', 'k = -4', 'K=2']) == {'K': '2', 'k': '-4'}
    with pytest.raises(ConfigError):
        parse_overrides(['K'])


def test_components():
    config = TrackerConfig().with_components(Component.harmonic_summation | Component.viterbi)
    assert config.harmonic_summation and config.viterbi
    assert not (config.temporal_accumulation or config.rectification or config.voicing)
    assert config.components == Component.harmonic_summation | Component.viterbi


def test_component_lookup():
    assert Component.lookup(None) == Component(0)
    assert Component.lookup('3') == Component.harmonic_summation | Component.temporal_accumulation
    assert Component.lookup(Component.all.value) == Component.all
