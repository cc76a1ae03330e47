"""
Test the experiment harness: configuration files, replicated games, their output files and the command line.
"""

import json
import logging
from itertools import islice
from pathlib import Path

import numpy as np
import pytest

from efkp.bounds import ALPHA
from efkp.exceptions import ConfigError
from efkp.Experiment import OUTPUT_ROOT_VARIABLE, ExperimentConfig, run_experiment
from efkp.reality.registry import make_path_source
from efkp.utils.class_functions import ClassFunction
from efkp.utils.io import iter_path_jsonl, read_rows_csv, write_path_jsonl
from scripts.efkp import main

logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s: %(message)s')


@pytest.fixture(autouse=True)
def no_output_root(monkeypatch):
    monkeypatch.delenv(OUTPUT_ROOT_VARIABLE, raising=False)


def test_config_defaults():
    config = ExperimentConfig()
    assert config.strategy == 'validity'
    assert config.k_max == 10 ** 4
    assert config.alpha == 1.
    assert ExperimentConfig(strategy='sharpness').alpha == ALPHA
    assert config.params.D_override is None
    assert config.resolve_output_dir() is None


@pytest.mark.parametrize('kwargs', [
    {'strategy': 'martingale'},
    {'reentry_mode': 'never'},
    {'delta': 1.5},
    {'replications': 0},
    {'D': -1.},
    {'path': 'nonsense'},
    {'strategy': 'sharpness', 'thresholds': (4., 1.)},
    {'strategy': 'sharpness', 'thresholds': ()},
    {'k_min': 0},
])
def test_invalid_config(kwargs: dict):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_config_from_dict():
    config = ExperimentConfig.from_dict({'horizon': '200', 'check_bounds': 'yes', 'k_max': '1e3', 'D': 'none'})
    assert config.horizon == 200
    assert config.check_bounds is True
    assert config.k_max == 1000
    assert config.D is None
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'horizon': 'ten'})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'colour': 'blue'})


def test_config_file_round_trip(tmp_path):
    config = ExperimentConfig(strategy='sharpness', path='omega-C-margin:C=2,seed=3', horizon=50, D=0.5, beta=2.,
                              check_bounds=True)
    config.to_file(tmp_path / 'config.ini')
    assert ExperimentConfig.from_file(tmp_path / 'config.ini') == config
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / 'missing.ini')
    (tmp_path / 'empty.ini').write_text('[other]\nhorizon = 3\n')
    with pytest.raises(ConfigError):
        ExperimentConfig.from_file(tmp_path / 'empty.ini')


def test_config_thresholds(tmp_path):
    config = ExperimentConfig(strategy='sharpness', thresholds=[1, 10, 1e6], k_min=3)
    assert config.thresholds == (1., 10., 1e6)
    config.to_file(tmp_path / 'config.ini')
    assert 'thresholds = 1.0, 10.0, 1000000.0' in (tmp_path / 'config.ini').read_text()
    assert ExperimentConfig.from_file(tmp_path / 'config.ini') == config

    config = ExperimentConfig.from_dict({'strategy': 'sharpness', 'thresholds': '1, 10, 1e6'})
    assert config.thresholds == (1., 10., 1e6)
    skeptic = config.make_skeptic()
    assert [skeptic.schedule.threshold(k) for k in (1, 2, 3)] == [1., 10., 1e6]
    assert skeptic.schedule.threshold(4) == np.inf
    assert ExperimentConfig.from_dict({'strategy': 'sharpness', 'thresholds': 'none'}).thresholds is None
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({'strategy': 'sharpness', 'thresholds': '1, ten'})


def test_zero_proportion_keeps_capital():
    config = ExperimentConfig(strategy='constant', gamma=0., path='uniform-bounded', horizon=100, replications=10)
    bundle = run_experiment(config)
    assert bundle.output_dir is None
    assert len(bundle.replications) == 10
    assert bundle.summary['mean_capital'] == 1.
    assert bundle.summary['std_capital'] == 0.
    assert bundle.errors == 0
    assert bundle.exit_code == 0


def test_replay_with_illegal_move(tmp_path):
    file = tmp_path / 'path.jsonl'
    file.write_text('{"c": 1.0, "x": 0.5}\n{"c": 1.0, "x": 2.0}\n{"c": 1.0, "x": 0.0}\n')
    kwargs = dict(strategy='constant', gamma=0.1, path=f'replay-file:file={file}', horizon=3)
    bundle = run_experiment(ExperimentConfig(strict=True, **kwargs))
    assert bundle.errors == 1
    assert bundle.replications[0]['error'].startswith('ProtocolViolation')
    assert bundle.replications[0]['rounds'] == 1
    assert np.isclose(bundle.replications[0]['capital'], 1.05)
    assert bundle.exit_code == 1
    assert run_experiment(ExperimentConfig(strict=False, **kwargs)).exit_code == 0


def test_replay_exhausted(tmp_path):
    file = tmp_path / 'path.jsonl'
    file.write_text('{"c": 1.0, "x": 0.5}\n')
    bundle = run_experiment(ExperimentConfig(strategy='constant', path=f'replay-file:file={file}', horizon=5))
    assert bundle.replications[0]['error'].startswith('PathExhaustedError')
    assert bundle.replications[0]['rounds'] == 1


def test_output_files(tmp_path):
    out = tmp_path / 'out'
    config = ExperimentConfig(strategy='sharpness', path='bernoulli-symmetric', horizon=100, replications=2, D=1.,
                              beta=2., check_bounds=True, output_dir=str(out))
    bundle = run_experiment(config)
    assert bundle.output_dir == out
    for index in range(2):
        for prefix in ('trajectory', 'bounds', 'cycles'):
            assert (out / f'{prefix}_{index:05d}.csv').exists()
    assert len(read_rows_csv(out / 'trajectory_00000.csv')) == 100
    cycles = read_rows_csv(out / 'cycles_00000.csv')
    assert cycles[0]['k'] == '1'
    assert len(read_rows_csv(out / 'replications.csv')) == 2
    assert ExperimentConfig.from_file(out / 'config.ini') == config
    with open(out / 'summary.json') as f:
        summary = json.load(f)
    assert summary['replications'] == 2
    assert summary['config']['strategy'] == 'sharpness'
    assert main(['verify', str(out)]) == 0


def test_replications_are_reproducible(tmp_path):
    texts = []
    for name in ('a', 'b'):
        config = ExperimentConfig(strategy='validity', path='uniform-bounded:c_max=0.01', horizon=50,
                                  replications=3, k_max=100, output_dir=str(tmp_path / name))
        run_experiment(config)
        texts.append([(tmp_path / name / f'trajectory_{i:05d}.csv').read_text() for i in range(3)])
    assert texts[0] == texts[1]
    # replications draw different paths
    assert texts[0][0] != texts[0][1]


def test_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ROOT_VARIABLE, str(tmp_path))
    assert ExperimentConfig(strategy='constant', path='uniform-bounded', seed=3).resolve_output_dir() == \
        tmp_path / 'constant-uniform-bounded-3'
    assert ExperimentConfig(output_dir='relative').resolve_output_dir() == tmp_path / 'relative'
    assert ExperimentConfig(output_dir=str(tmp_path / 'x')).resolve_output_dir() == tmp_path / 'x'


def test_validity_run_has_no_violations():
    config = ExperimentConfig(strategy='validity', psi='upper', k_max=200, path='uniform-bounded:c_max=0.01',
                              horizon=200, check_bounds=True, strict=True)
    bundle = run_experiment(config)
    assert bundle.violations == 0
    assert bundle.summary['min_capital'] > 0
    assert bundle.summary['max_accounting_error'] < 1e-10
    assert bundle.exit_code == 0


def test_validity_mean_is_preserved():
    config = ExperimentConfig(strategy='validity', path='bernoulli-symmetric', horizon=200, k_max=200,
                              replications=300, processes=2, record_ledger=False, seed=11)
    summary = run_experiment(config).summary
    assert summary['replications'] == 300
    assert summary['errors'] == 0
    assert summary['std_capital'] > 0
    assert abs(summary['mean_capital'] - 1.) <= 3 * summary['stderr_capital']


def test_full_size_mean_config():
    config = ExperimentConfig.from_file(Path(__file__).parents[2] / 'experiments' / 'martingale_mean.ini')
    assert (config.strategy, config.path) == ('validity', 'bernoulli-symmetric')
    assert (config.replications, config.horizon, config.k_max) == (10 ** 5, 10 ** 4, 10 ** 4)
    assert config.processes > 1 and not config.record_ledger


def test_parallel_matches_sequential():
    kwargs = dict(strategy='constant', gamma=0.005, path='uniform-bounded', horizon=100, replications=4)
    sequential = run_experiment(ExperimentConfig(processes=1, **kwargs))
    parallel = run_experiment(ExperimentConfig(processes=2, **kwargs))
    assert [r['capital'] for r in sequential.replications] == [r['capital'] for r in parallel.replications]


def test_cli_sharpness_run(tmp_path, capsys):
    out = tmp_path / 'sharpness'
    code = main(['sharpness-run', '--horizon', '50', '--path', 'omega-C-margin:C=2', '--D', '1', '--beta', '2',
                 '--C-max', '2', '--out', str(out)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary['replications'] == 1
    assert np.isclose(summary['initial_capital'], ALPHA)
    assert (out / 'cycles_00000.csv').exists()


def test_cli_sharpness_thresholds(tmp_path, capsys):
    path = tmp_path / 'alternating.jsonl'
    write_path_jsonl(path, [(1., 1.), (1., -1.)] * 30)
    out = tmp_path / 'thresholds'
    code = main(['sharpness-run', '--horizon', '60', '--path', f'replay-file:file={path}', '--D', '1',
                 '--thresholds', '1', '10', '1e6', '--out', str(out)])
    assert code == 0
    assert json.loads(capsys.readouterr().out)['replications'] == 1
    config = ExperimentConfig.from_file(out / 'config.ini')
    assert config.thresholds == (1., 10., 1e6)
    # unit moves cross n_2 = 10 in round 10 and never reach n_3
    cycles = read_rows_csv(out / 'cycles_00000.csv')
    assert [int(row['k']) for row in cycles] == [1, 2]
    assert int(cycles[1]['tau_k']) == 10


def test_cli_class_fn(capsys):
    assert main(['class-fn', '--psi', 'upper', '--at', '1e6', '--integral', '16', '1e4']) == 0
    output = json.loads(capsys.readouterr().out)
    assert np.isclose(output['values']['1000000.0'], ClassFunction.upper()(1e6))
    assert output['integral']['value'] > 0


def test_cli_generate_path(tmp_path):
    out = tmp_path / 'path.jsonl'
    assert main(['generate-path', '--path', 'uniform-bounded', '--horizon', '20', '--seed', '1', '--out', str(out)]) == 0
    expected = list(islice(make_path_source('uniform-bounded', rng=np.random.default_rng(1)), 20))
    assert list(iter_path_jsonl(out)) == expected


def test_cli_run_and_errors(tmp_path):
    ExperimentConfig(strategy='constant', gamma=0.01, path='uniform-bounded', horizon=20).to_file(tmp_path / 'a.ini')
    assert main(['run', str(tmp_path / 'a.ini')]) == 0
    (tmp_path / 'b.ini').write_text('[experiment]\nstrategy = martingale\n')
    assert main(['run', str(tmp_path / 'b.ini')]) == 1
    assert main(['verify', str(tmp_path)]) == 1
    assert main([]) == 0
