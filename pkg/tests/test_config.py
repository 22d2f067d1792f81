import json
from pathlib import Path

import pytest
from pydantic import ValidationError

from bnrobot.config.settings import (Config, ExperimentConfig, SearchConfig, apply_overrides, config,
                                     load_experiment_config, parse_experiment_config)
from bnrobot.utils.errors import ConfigurationError, StorageError

CONFIGS = Path(__file__).resolve().parents[1] / 'configs'


def test_defaults_follow_the_published_protocol():
    cfg = load_experiment_config(None)

    assert cfg == ExperimentConfig()
    assert (cfg.runs, cfg.test_set_size, cfg.success_threshold) == (30, 30, 0.11)
    search = cfg.search
    assert (search.n, search.k, search.no_self) == (20, 3, True)
    assert (search.total_iterations, search.stage1_iterations) == (25000, 5000)
    assert (search.stage1_T, search.stage2_T, search.clap_window) == (500, 1000, (500, 650))
    assert cfg.arena.light == (1.0, 1.0)


def test_shipped_configs_load():
    protocol = load_experiment_config(CONFIGS / 'protocol.json')
    smoke = load_experiment_config(CONFIGS / 'smoke.json')

    assert protocol.search.checkpoint_every == 1000
    assert smoke.runs == 2
    assert smoke.search.total_iterations < protocol.search.total_iterations


def test_schedule_error_names_the_field():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_experiment_config({'search': {'total_iterations': 10, 'stage1_iterations': 20}})
    assert 'stage1_iterations' in str(excinfo.value)
    assert excinfo.value.field == 'search'


def test_reversed_clap_window():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_experiment_config({'search': {'clap_window': [650, 500]}})
    assert excinfo.value.field == 'search.clap_window'


def test_field_errors_carry_the_value():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_experiment_config({'search': {'n': -1}})
    assert excinfo.value.field == 'search.n'
    assert excinfo.value.value == -1


def test_unknown_keys_are_rejected():
    with pytest.raises(ConfigurationError) as excinfo:
        parse_experiment_config({'bogus': 1})
    assert excinfo.value.field == 'bogus'


@pytest.mark.parametrize('search', [
    {'input_nodes': [0, 1, 2, 3]},
    {'output_nodes': [4, 5]},
    {'n': 6},
    {'k': 20},
])
def test_node_layout_is_checked(search):
    with pytest.raises(ConfigurationError):
        parse_experiment_config({'search': search})


def test_manifest_config_section_is_accepted():
    cfg = parse_experiment_config({'format_version': 1, 'config': {'runs': 3}, 'seeds': {}})
    assert cfg.runs == 3


def test_top_level_must_be_an_object():
    with pytest.raises(ConfigurationError):
        parse_experiment_config([1, 2])


def test_missing_config_file(tmp_path):
    with pytest.raises(StorageError):
        load_experiment_config(tmp_path / 'absent.json')


def test_bad_json_reports_the_line(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{\n  "runs": ,\n}\n')
    with pytest.raises(ConfigurationError) as excinfo:
        load_experiment_config(path)
    assert 'line 2' in str(excinfo.value)


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(runs=4, search=SearchConfig(total_iterations=100, stage1_iterations=10))
    path = tmp_path / 'cfg.json'
    path.write_text(cfg.model_dump_json())
    assert load_experiment_config(path) == cfg


def test_seed_override_order(monkeypatch):
    cfg = ExperimentConfig(master_seed=1)
    monkeypatch.setattr(config, 'SEED', 9)

    assert apply_overrides(cfg, seed=5).master_seed == 5
    assert apply_overrides(cfg).master_seed == 9

    monkeypatch.setattr(config, 'SEED', None)
    assert apply_overrides(cfg) == cfg


def test_runtime_config_from_environment(monkeypatch):
    monkeypatch.setenv('BNROBOT_SEED', '42')
    monkeypatch.setenv('BNROBOT_PARALLELISM', '3')
    monkeypatch.setenv('BNROBOT_OUT_DIR', '/tmp/out')
    settings = Config()

    assert settings.SEED == 42
    assert settings.PARALLELISM == 3
    assert settings.get_summary()['out_dir_override'] == '/tmp/out'
    assert settings.validate_config()


def test_runtime_config_ignores_bad_integers(monkeypatch):
    monkeypatch.setenv('BNROBOT_SEED', 'abc')
    assert Config().SEED is None


def test_runtime_config_validation(monkeypatch):
    monkeypatch.setenv('BNROBOT_LOG_LEVEL', 'LOUD')
    assert not Config().validate_config()


def test_config_model_is_frozen():
    cfg = ExperimentConfig()
    with pytest.raises(ValidationError):
        cfg.runs = 3
    assert json.loads(cfg.model_dump_json())['search']['clap_window'] == [500, 650]
