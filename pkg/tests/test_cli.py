#!/usr/bin/env python3
"""
测试命令行入口：配置文件、退出码与输出文件
"""
import csv
import json
import logging
import math
import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from chaoscomm import cli
from chaoscomm.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, ExperimentConfig, build_parser, load_config, main
from chaoscomm.common.exceptions import ChaosCommException, ConfigException

logging.basicConfig(level=logging.DEBUG, format='%(asctime)s [%(levelname)s] %(name)s: %(message)s')

SMALL_RUN = ['--blocks', '4', '--block-len', '20', '--d-max', '6', '--workers', '1']


def _read_csv(path):
    with open(path, newline='') as fh:
        return list(csv.DictReader(fh))


def test_config_round_trip():
    config = ExperimentConfig(scheme='bw', map='logistic', maps=('tent', 'bsm'), sigma2=(1.0, 0.5, 0.25),
                              gamma0=2.5, m_r=4, n=500, w=18, block_len=100, n_blocks=10, pe_res=1e-4,
                              d_max=30, q_max=12, t_flush=50, master_seed=99, d0=4, k=0.5, tsb_n=3,
                              output_dir='out dir', equal_power=False)
    assert ExperimentConfig.parse(config.serialize()) == config
    assert ExperimentConfig.parse(ExperimentConfig().serialize()) == ExperimentConfig()


def test_config_parse_comments_and_errors():
    config = ExperimentConfig.parse('# campaign\nscheme = bw\n\nsigma2=0.3,0.6  # two points\n')
    assert config.scheme == 'bw'
    assert config.sigma2 == (0.3, 0.6)
    with pytest.raises(ConfigException):
        ExperimentConfig.parse('colour=blue\n')
    with pytest.raises(ConfigException):
        ExperimentConfig.parse('gamma0=big\n')
    with pytest.raises(ConfigException):
        ExperimentConfig.parse('just words\n')
    with pytest.raises(ConfigException):
        ExperimentConfig.parse('sigma2=-1\n')
    with pytest.raises(ConfigException):
        ExperimentConfig.parse('d0=2\n')
    assert ExperimentConfig.parse('equal_power = no\n').equal_power is False
    assert ExperimentConfig.parse('equal_power=True\n').equal_power is True
    with pytest.raises(ConfigException):
        ExperimentConfig.parse('equal_power=maybe\n')


def test_flags_override_config_file(tmp_path):
    path = tmp_path / 'exp.cfg'
    path.write_text('gamma0=3.0\nmap=tent\n')
    args = build_parser().parse_args(['bounds', '--config', str(path)])
    config = load_config(args)
    assert config.gamma0 == 3.0 and config.map == 'tent'
    args = build_parser().parse_args(['bounds', '--config', str(path), '--gamma0', '4'])
    config = load_config(args)
    assert config.gamma0 == 4.0 and config.map == 'tent'
    args = build_parser().parse_args(['bounds'])
    assert load_config(args) == ExperimentConfig()
    args = build_parser().parse_args(['simulate', '--config', str(path), '--plain-power'])
    config = load_config(args)
    assert config.equal_power is False
    assert config.campaign(0.5).equal_power is False


def test_bounds_command(tmp_path, capsys):
    code = main(['bounds', '--scheme', 'size', '--map', 'bsm', '--gamma0', '2', '--d0', '3', '--sigma2', '0.2',
                 '--d-max', '10', '--out', str(tmp_path)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert 'sigma2_sup' in out
    rows = {row['quantity']: row['value'] for row in _read_csv(tmp_path / 'bounds.csv')}
    assert float(rows['beta']) == pytest.approx(1.0)
    assert float(rows['sigma2_sup']) == pytest.approx(0.2361, abs=5e-4)
    curves = _read_csv(tmp_path / 'bounds_curves.csv')
    assert {row['curve'] for row in curves} >= {'tsb', 'size_error_bound'}


def test_bounds_not_satisfied(tmp_path, capsys):
    code = main(['bounds', '--map', 'logistic', '--sigma2', '0.2', '--d-max', '4', '--out', str(tmp_path)])
    assert code == EXIT_OK
    assert 'not satisfied' in capsys.readouterr().out


def test_tsb_command(tmp_path, capsys):
    code = main(['tsb', '--map', 'bsm', '--sigma2', '0.2', '--tsb-n', '1', '--d-max', '5', '--out', str(tmp_path)])
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / 'tsb.csv')
    assert [int(row['d']) for row in rows] == [1, 2, 3, 4, 5]
    assert float(rows[1]['bound']) == pytest.approx(math.exp(-5.0), rel=1e-9)
    assert capsys.readouterr().out.startswith('sigma2,n,d,bound,stderr')


def test_simulate_outputs_are_reproducible(tmp_path):
    args = ['simulate', '--scheme', 'size', '--map', 'tent', '--sigma2', '0.5', '--out', str(tmp_path)] + SMALL_RUN
    names = ['ber_by_position.csv', 'ber_avg.csv', 'efficiency_hist.csv', 'summary.json']
    assert main(args) == EXIT_OK
    first = {name: (tmp_path / name).read_bytes() for name in names}
    assert main(args) == EXIT_OK
    second = {name: (tmp_path / name).read_bytes() for name in names}
    assert first == second

    summary = json.loads(first['summary.json'])
    assert summary['blocks'] == 4
    assert summary['master_seed'] == ExperimentConfig().master_seed
    assert summary['config']['map_name'] == 'tent'
    assert summary['mean_d'] >= 1.0
    assert summary['config']['equal_power'] is True
    assert isinstance(summary['snr_measured_db'], float)
    rows = _read_csv(tmp_path / 'ber_avg.csv')
    assert [int(row['d']) for row in rows] == list(range(1, 7))
    positions = _read_csv(tmp_path / 'ber_by_position.csv')
    assert all(int(row['errors']) <= int(row['trials']) for row in positions)


def test_sweep_command(tmp_path, capsys):
    code = main(['sweep', '--scheme', 'bw', '--maps', 'tent,logistic', '--sigma2', '0.5,0.25',
                 '--out', str(tmp_path)] + SMALL_RUN)
    assert code == EXIT_OK
    rows = _read_csv(tmp_path / 'sweep.csv')
    assert [(row['map'], float(row['sigma2'])) for row in rows] == [
        ('tent', 0.5), ('tent', 0.25), ('logistic', 0.5), ('logistic', 0.25)]
    assert all(row['scheme'] == 'bw' for row in rows)


def test_control_threshold(tmp_path, capsys):
    path = tmp_path / 'plant.txt'
    path.write_text('0 1\n-2 3\n')
    assert main(['control-threshold', str(path)]) == EXIT_OK
    assert float(capsys.readouterr().out) == pytest.approx(2.5404, abs=5e-4)
    assert main(['control-threshold', str(tmp_path / 'missing.txt')]) == EXIT_CONFIG


def test_exit_codes(tmp_path, monkeypatch):
    assert main(['bounds', '--bogus']) == EXIT_CONFIG
    assert main([]) == EXIT_CONFIG
    assert main(['bounds', '--sigma2', '-1', '--out', str(tmp_path)]) == EXIT_CONFIG
    assert main(['simulate', '--sigma2', '0.5,0.25', '--out', str(tmp_path)]) == EXIT_CONFIG
    assert main(['bounds', '--config', str(tmp_path / 'none.cfg')]) == EXIT_CONFIG

    def broken(*args, **kwargs):
        raise ChaosCommException('worker crashed')

    monkeypatch.setattr(cli, 'run_campaign', broken)
    assert main(['simulate', '--sigma2', '0.5', '--out', str(tmp_path)] + SMALL_RUN) == EXIT_RUNTIME
