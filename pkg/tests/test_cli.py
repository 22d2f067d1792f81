import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from bnrobot.config.settings import config
from bnrobot.core.network import constant_network, identity_network, random_network
from bnrobot.core.storage import read_json, read_search_log, save_network
from bnrobot.main import cli
from bnrobot.utils.errors import EXIT_VALIDATION

SMOKE = str(Path(__file__).resolve().parents[1] / 'configs' / 'smoke.json')


@pytest.fixture(autouse=True)
def quiet_runtime(monkeypatch):
    monkeypatch.setattr(config, 'ENABLE_FILE_LOGGING', False)
    monkeypatch.setattr(config, 'SEED', None)
    monkeypatch.setattr(config, 'LOG_LEVEL', 'WARNING')


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def network_file(tmp_path):
    def write(net, name='net.json'):
        path = tmp_path / name
        save_network(path, net)
        return str(path)
    return write


def test_check_config(runner):
    result = runner.invoke(cli, ['check-config', '--config', SMOKE])
    assert result.exit_code == 0
    assert 'Configuration Summary:' in result.output
    assert '"total_iterations": 40' in result.output


def test_check_config_rejects_bad_files(runner, tmp_path):
    bad = tmp_path / 'bad.json'
    bad.write_text(json.dumps({'search': {'total_iterations': 5, 'stage1_iterations': 9}}))
    result = runner.invoke(cli, ['check-config', '--config', str(bad)])
    assert result.exit_code == 2
    assert 'stage1_iterations' in result.output


def test_check_config_rejects_bad_runtime_settings(runner, monkeypatch):
    monkeypatch.setattr(config, 'validate_config', lambda: False)
    result = runner.invoke(cli, ['check-config', '--config', SMOKE])
    assert result.exit_code == EXIT_VALIDATION
    assert 'runtime configuration is invalid' in result.output


def test_design_writes_results_and_reruns_from_manifest(runner, tmp_path):
    first = tmp_path / 'first'
    result = runner.invoke(cli, ['design', '--config', SMOKE, '--out', str(first), '--parallelism', '1'])
    assert result.exit_code == 0, result.output
    assert 'success (test median < 0.11)' in result.output

    manifest = read_json(first / 'manifest.json')
    assert manifest['seeds']['master'] == 1
    assert set(manifest['outputs']) >= {'network_000', 'network_001', 'summary', 'trials'}
    assert manifest['performance']['parallelism'] == 1
    assert (first / 'logs' / 'search_000.csv').exists()
    trials = (first / 'trials.csv').read_text().splitlines()
    # two runs of (5 training + 5 test) trials plus the header
    assert len(trials) == 21

    second = tmp_path / 'second'
    result = runner.invoke(cli, ['design', '--config', str(first / 'manifest.json'), '--out', str(second),
                                 '--parallelism', '2'])
    assert result.exit_code == 0, result.output
    assert (second / 'summary.csv').read_bytes() == (first / 'summary.csv').read_bytes()
    assert (second / 'trials.csv').read_bytes() == (first / 'trials.csv').read_bytes()
    for run in (0, 1):
        name = f'networks/run_{run:03d}.json'
        assert (second / name).read_bytes() == (first / name).read_bytes()
    assert read_json(second / 'manifest.json')['digests'] == manifest['digests']


def test_design_twice_into_one_directory(runner, tmp_path):
    out = tmp_path / 'out'
    for _ in range(2):
        result = runner.invoke(cli, ['design', '--config', SMOKE, '--out', str(out), '--parallelism', '1'])
        assert result.exit_code == 0, result.output

    for run in (0, 1):
        rows = read_search_log(out / 'logs' / f'search_{run:03d}.csv')
        assert [r['iteration'] for r in rows] == list(range(41))


def test_design_seed_flag_changes_the_result(runner, tmp_path):
    runner.invoke(cli, ['design', '--config', SMOKE, '--out', str(tmp_path / 'a'), '--parallelism', '1'])
    result = runner.invoke(cli, ['design', '--config', SMOKE, '--seed', '2', '--out', str(tmp_path / 'b'),
                                 '--parallelism', '1', '--format', 'json'])
    assert result.exit_code == 0, result.output
    assert read_json(tmp_path / 'b' / 'manifest.json')['seeds']['master'] == 2
    assert (tmp_path / 'b' / 'summary.json').exists()


def test_design_with_a_bad_config(runner, tmp_path):
    bad = tmp_path / 'bad.json'
    bad.write_text('{"runs": 0}')
    result = runner.invoke(cli, ['design', '--config', str(bad), '--out', str(tmp_path / 'out')])
    assert result.exit_code == 2
    assert 'error:' in result.output


def test_design_with_an_unreadable_config(runner, tmp_path):
    result = runner.invoke(cli, ['design', '--config', str(tmp_path / 'absent.json'), '--out', str(tmp_path)])
    assert result.exit_code == 3


def test_simulate_stopped_robot(runner, network_file, stop_controller, tmp_path):
    path = network_file(stop_controller)
    out = tmp_path / 'trajectory.csv'
    result = runner.invoke(cli, ['simulate', path, '--config', SMOKE, '--out', str(out)])

    assert result.exit_code == 0, result.output
    assert 'E = 1.000000' in result.output
    assert 'antiphototaxis term = 1.000000' in result.output
    assert len(out.read_text().splitlines()) == 201


def test_simulate_phototaxis_stage(runner, network_file, stop_controller, tmp_path):
    path = network_file(stop_controller)
    result = runner.invoke(cli, ['simulate', path, '--config', SMOKE, '--stage', 'phototaxis-only',
                                 '--out', str(tmp_path / 't.csv')])
    assert result.exit_code == 0, result.output
    assert 'antiphototaxis' not in result.output

    result = runner.invoke(cli, ['simulate', path, '--config', SMOKE, '--stage', 'phototaxis-only', '--t-c', '5'])
    assert result.exit_code == 2


@pytest.mark.parametrize('args', [
    ['--t-c', '5000'],
    ['--x', '2.0'],
    ['--perturb-step', '3', '--perturb-angle', '4.0'],
    ['--horizon', '0'],
])
def test_simulate_rejects_bad_trials(runner, network_file, stop_controller, tmp_path, args):
    path = network_file(stop_controller)
    result = runner.invoke(cli, ['simulate', path, '--config', SMOKE, '--out', str(tmp_path / 't.csv')] + args)
    assert result.exit_code == 2
    assert 'error:' in result.output


def test_simulate_is_reproducible(runner, network_file, tmp_path):
    net = random_network(20, 3, seed=5, input_nodes=(0, 1, 2, 3, 4), output_nodes=(5, 6))
    path = network_file(net)
    for name in ('a.csv', 'b.csv'):
        result = runner.invoke(cli, ['simulate', path, '--config', SMOKE, '--seed', '4', '--random-state',
                                     '--perturb-step', '50', '--perturb-angle', '1.5', '--out', str(tmp_path / name)])
        assert result.exit_code == 0, result.output
    assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()


def test_simulate_with_a_malformed_network(runner, tmp_path):
    path = tmp_path / 'net.json'
    path.write_text('{"format_version": 1, "n": 2, "inputs": [[1]], "tables": ["01"]}')
    result = runner.invoke(cli, ['simulate', str(path)])
    assert result.exit_code == 2
    assert 'inputs' in result.output

    result = runner.invoke(cli, ['simulate', str(tmp_path / 'absent.json')])
    assert result.exit_code == 3


def test_analyze_constant_network(runner, network_file):
    result = runner.invoke(cli, ['analyze', network_file(constant_network(3, 0))])
    assert result.exit_code == 0, result.output
    assert '1 attractors over 2^3 states; basins sum to 8' in result.output


def test_analyze_identity_network(runner, network_file):
    result = runner.invoke(cli, ['analyze', network_file(identity_network(3))])
    assert result.exit_code == 0
    assert result.output.startswith('8 attractors over 2^3 states')


def test_analyze_needs_sampled_mode_for_large_networks(runner, network_file):
    path = network_file(random_network(25, 2, seed=1))
    result = runner.invoke(cli, ['analyze', path])
    assert result.exit_code == 4
    assert 'sampled mode' in result.output

    result = runner.invoke(cli, ['analyze', path, '--samples', '20', '--seed', '3'])
    assert result.exit_code == 0, result.output
    assert 'from 20 samples' in result.output


def test_analyze_with_clamped_sensors(runner, network_file):
    net = random_network(12, 2, seed=4, input_nodes=(0, 1, 2, 3, 4), output_nodes=(5, 6))
    result = runner.invoke(cli, ['analyze', network_file(net), '--sector', '3', '--sound', '0'])
    assert result.exit_code == 0, result.output
    assert 'over 2^7 states; basins sum to 128' in result.output

    result = runner.invoke(cli, ['analyze', network_file(net), '--sector', '9'])
    assert result.exit_code == 2

    result = runner.invoke(cli, ['analyze', network_file(identity_network(3), 'plain.json'), '--sound', '1'])
    assert result.exit_code == 2
