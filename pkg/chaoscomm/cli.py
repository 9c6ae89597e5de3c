# -*- coding: utf-8 -*-
"""
Command-line frontend.

    python -m chaoscomm bounds --scheme size --map bsm --gamma0 2 --d0 3
    python -m chaoscomm tsb --map bsm --sigma2 0.2 --tsb-n 1 --d-max 20
    python -m chaoscomm simulate --scheme bw --map logistic --sigma2 0.5 --blocks 1000 --out results
    python -m chaoscomm sweep --scheme size --sigma2 1,0.5,0.25 --blocks 1000
    python -m chaoscomm control-threshold matrix.txt

Settings come from the defaults, then a key=value file given with --config,
then the flags. Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from chaoscomm import __version__
from chaoscomm.analysis import compute_bounds, required_exponent, tsb_estimate
from chaoscomm.channel.channel_sim import CampaignConfig, fit_anytime_exponent, run_campaign
from chaoscomm.chaotic_maps import MapKind, MapModel
from chaoscomm.common.constants import (DEFAULT_BLOCK_LEN, DEFAULT_D0, DEFAULT_D_MAX, DEFAULT_EVAL_WIDTH,
                                        DEFAULT_GAMMA0, DEFAULT_K, DEFAULT_MASTER_SEED, DEFAULT_MAX_RUN,
                                        DEFAULT_N_BLOCKS, DEFAULT_PE_RES, DEFAULT_Q_MAX, DEFAULT_T_FLUSH,
                                        DEFAULT_TRAJECTORY_LEN, MAP_NAMES, SCHEMES)
from chaoscomm.common.exceptions import ChaosCommException, ConfigException
from chaoscomm.common.loggers import init_log

logger = logging.getLogger('chaoscomm')

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = 'size'
    map: str = 'bsm'
    maps: Tuple[str, ...] = MAP_NAMES
    sigma2: Tuple[float, ...] = (0.5,)
    gamma0: float = DEFAULT_GAMMA0
    equal_power: bool = True
    m_r: int = DEFAULT_MAX_RUN
    n: int = DEFAULT_TRAJECTORY_LEN
    w: int = DEFAULT_EVAL_WIDTH
    block_len: int = DEFAULT_BLOCK_LEN
    n_blocks: int = DEFAULT_N_BLOCKS
    pe_res: float = DEFAULT_PE_RES
    d_max: int = DEFAULT_D_MAX
    q_max: int = DEFAULT_Q_MAX
    t_flush: int = DEFAULT_T_FLUSH
    master_seed: int = DEFAULT_MASTER_SEED
    d0: int = DEFAULT_D0
    k: float = DEFAULT_K
    tsb_n: int = 1
    output_dir: str = 'results'

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigException('scheme must be one of {}, got {!r}'.format(', '.join(SCHEMES), self.scheme))
        for name in (self.map,) + tuple(self.maps):
            if name not in MAP_NAMES:
                raise ConfigException('map must be one of {}, got {!r}'.format(', '.join(MAP_NAMES), name))
        if not self.maps:
            raise ConfigException('maps must not be empty')
        if not self.sigma2:
            raise ConfigException('sigma2 needs at least one value')
        for value in self.sigma2:
            if not (value > 0) or not math.isfinite(value):
                raise ConfigException('sigma2 values must be positive, got {}'.format(value))
        if not (self.gamma0 > 0):
            raise ConfigException('gamma0 must be positive, got {}'.format(self.gamma0))
        if not (0.0 < self.pe_res < 0.5):
            raise ConfigException('pe_res must be in (0, 0.5), got {}'.format(self.pe_res))
        if not (1 <= self.w <= 52):
            raise ConfigException('w must be in [1, 52], got {}'.format(self.w))
        if self.n <= self.w:
            raise ConfigException('n must exceed w, got n={} w={}'.format(self.n, self.w))
        for name in ('m_r', 'block_len', 'n_blocks', 'd_max', 'q_max', 'tsb_n'):
            if getattr(self, name) < 1:
                raise ConfigException('{} must be >= 1, got {}'.format(name, getattr(self, name)))
        if self.t_flush < 0 or self.master_seed < 0:
            raise ConfigException('t_flush and master_seed must be >= 0')
        if self.d0 <= 2:
            raise ConfigException('d0 must be > 2, got {}'.format(self.d0))
        if not (self.k > 0):
            raise ConfigException('k must be positive, got {}'.format(self.k))

    def map_model(self, name=None):
        return MapModel(MapKind.from_name(name or self.map), self.w)

    def campaign(self, sigma2, map_name=None) -> CampaignConfig:
        return CampaignConfig(scheme=self.scheme, map_name=map_name or self.map, sigma2=sigma2, gamma0=self.gamma0,
                              m_r=self.m_r, trajectory_len=self.n, eval_width=self.w, block_len=self.block_len,
                              pe_res=self.pe_res, d_max=self.d_max, q_max=self.q_max, t_flush=self.t_flush,
                              master_seed=self.master_seed, equal_power=self.equal_power)

    def serialize(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                text = ','.join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append('{}={}'.format(f.name, text))
        return '\n'.join(lines) + '\n'

    @classmethod
    def parse(cls, text, base=None) -> 'ExperimentConfig':
        """
        Read flat key=value lines; blank lines and '#' comments are ignored.
        :param text: file contents
        :param base: config whose values are overridden, defaults when None
        """
        values = {}
        for number, raw in enumerate(text.splitlines(), 1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigException('line {}: expected key=value, got {!r}'.format(number, raw))
            key, value = (part.strip() for part in line.split('=', 1))
            values[key] = value
        return (base or cls()).updated(values)

    def updated(self, values) -> 'ExperimentConfig':
        """Copy with string or typed values replacing fields."""
        types = {f.name: f.type for f in dataclasses.fields(self)}
        changes = {}
        for key, value in values.items():
            key = key.replace('-', '_')
            if key not in types:
                raise ConfigException('unknown setting {!r}'.format(key))
            try:
                changes[key] = _convert(types[key], value)
            except (TypeError, ValueError) as e:
                raise ConfigException('invalid value {!r} for {}: {}'.format(value, key, e))
        return dataclasses.replace(self, **changes)


_BOOLEANS = {'true': True, 'yes': True, '1': True, 'false': False, 'no': False, '0': False}


def _convert(kind, value):
    if not isinstance(value, str):
        return tuple(value) if isinstance(value, list) else value
    if kind in (Tuple[float, ...], 'Tuple[float, ...]'):
        return tuple(float(v) for v in value.split(',') if v.strip())
    if kind in (Tuple[str, ...], 'Tuple[str, ...]'):
        return tuple(v.strip().lower() for v in value.split(',') if v.strip())
    if kind in (bool, 'bool'):
        text = value.strip().lower()
        if text not in _BOOLEANS:
            raise ValueError('expected one of {}'.format(', '.join(sorted(_BOOLEANS))))
        return _BOOLEANS[text]
    if kind in (int, 'int'):
        return int(value)
    if kind in (float, 'float'):
        return float(value)
    return value.strip()


def _fmt(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    with open(path, 'w', newline='') as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    logger.info('Wrote {}'.format(path))


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _output_dir(config):
    os.makedirs(config.output_dir, exist_ok=True)
    return config.output_dir


def cmd_bounds(config: ExperimentConfig, out=None):
    """Print β, γ̄, σ²_sup and write bounds.csv and bounds_curves.csv."""
    out = out or sys.stdout
    reports = [compute_bounds(config.scheme, config.map_model(), s2, gamma0=config.gamma0, d0=config.d0,
                              m_r=config.m_r, K=config.k, d_max=config.d_max, tsb_n=config.tsb_n)
               for s2 in config.sigma2]
    scalar_rows, curve_rows = [], []
    for report in reports:
        out.write('# scheme={} map={} sigma2={}\n'.format(report.scheme, report.map, _fmt(report.sigma2)))
        for name, value in report.scalar_rows():
            out.write('{:<16} {}\n'.format(name, 'not satisfied' if name == 'beta' and value is None
                                           else _fmt(value)))
            scalar_rows.append((report.sigma2, name, value))
        for curve, points in report.curves.items():
            curve_rows.extend((report.sigma2, curve, d, v) for d, v in points)
    directory = _output_dir(config)
    _write_csv(os.path.join(directory, 'bounds.csv'), ['sigma2', 'quantity', 'value'], scalar_rows)
    _write_csv(os.path.join(directory, 'bounds_curves.csv'), ['sigma2', 'curve', 'd', 'value'], curve_rows)
    return reports


def cmd_tsb(config: ExperimentConfig, out=None):
    """CSV of the tangential-sphere bound against d, for bit n = tsb_n."""
    out = out or sys.stdout
    rows = []
    for s2 in config.sigma2:
        for d in range(1, config.d_max + 1):
            est = tsb_estimate(config.tsb_n, d, s2, config.map_model(), config.gamma0)
            rows.append((s2, config.tsb_n, d, est.value, est.stderr))
    header = ['sigma2', 'n', 'd', 'bound', 'stderr']
    out.write(','.join(header) + '\n')
    for row in rows:
        out.write(','.join(_fmt(v) for v in row) + '\n')
    _write_csv(os.path.join(_output_dir(config), 'tsb.csv'), header, rows)
    return rows


def _summary(config, campaign, metrics):
    fit = fit_anytime_exponent(metrics)
    return {
        'mean_d': _json_safe(metrics.mean_d),
        'std_d': _json_safe(metrics.std_d),
        'snr_db': _json_safe(metrics.snr_db(campaign.sigma2)),
        'snr_measured_db': _json_safe(metrics.snr_measured_db(campaign.sigma2)),
        'residual_rate': metrics.residual_rate,
        'blocks': metrics.blocks,
        'failed_blocks': dict(sorted(metrics.failures.items())),
        'anytime_exponent': _json_safe(fit.exponent) if fit else None,
        'anytime_fit_r2': _json_safe(fit.r2) if fit else None,
        'config': dataclasses.asdict(campaign),
        'experiment': {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(config).items()},
        'master_seed': campaign.master_seed,
        'code_version': __version__,
    }


def cmd_simulate(config: ExperimentConfig, workers=None):
    """Run one campaign and write the BER, efficiency and summary files."""
    if len(config.sigma2) != 1:
        raise ConfigException('simulate takes a single sigma2 value, use sweep for a list')
    campaign = config.campaign(config.sigma2[0])
    metrics = run_campaign(campaign, config.n_blocks, workers=workers)
    directory = _output_dir(config)

    rows = []
    for position in range(metrics.block_len):
        for d in range(metrics.d_max):
            if metrics.trials[position, d]:
                rows.append((position + 1, d + 1, int(metrics.errors[position, d]), int(metrics.trials[position, d])))
    _write_csv(os.path.join(directory, 'ber_by_position.csv'), ['bit_index', 'd', 'errors', 'trials'], rows)

    avg = metrics.ber_avg()
    _write_csv(os.path.join(directory, 'ber_avg.csv'), ['d', 'p_err'],
               [(d + 1, float(p)) for d, p in enumerate(avg) if not np.isnan(p)])
    _write_csv(os.path.join(directory, 'efficiency_hist.csv'), ['q', 'count'],
               [(q, int(c)) for q, c in enumerate(metrics.efficiency_hist) if q > 0])

    summary = _summary(config, campaign, metrics)
    path = os.path.join(directory, 'summary.json')
    with open(path, 'w') as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write('\n')
    logger.info('Wrote {}'.format(path))
    return summary


SWEEP_HEADER = ['scheme', 'map', 'sigma2', 'mean_d', 'std_d', 'snr_db', 'residual_rate', 'anytime_exponent',
                'fit_r2', 'blocks', 'failed_blocks']


def cmd_sweep(config: ExperimentConfig, workers=None, out=None):
    """Mean/std of the modulation efficiency and SNR for maps × σ², one row each."""
    out = out or sys.stdout
    rows = []
    for map_name in config.maps:
        for s2 in config.sigma2:
            campaign = config.campaign(s2, map_name)
            metrics = run_campaign(campaign, config.n_blocks, workers=workers)
            fit = fit_anytime_exponent(metrics)
            rows.append((config.scheme, map_name, s2, metrics.mean_d, metrics.std_d, metrics.snr_db(s2),
                         metrics.residual_rate, fit.exponent if fit else None, fit.r2 if fit else None,
                         metrics.blocks, sum(metrics.failures.values())))
    out.write(','.join(SWEEP_HEADER) + '\n')
    for row in rows:
        out.write(','.join(_fmt(v) for v in row) + '\n')
    _write_csv(os.path.join(_output_dir(config), 'sweep.csv'), SWEEP_HEADER, rows)
    return rows


def cmd_control_threshold(path, out=None):
    """Print the anytime exponent required to stabilize the plant matrix stored in `path`."""
    out = out or sys.stdout
    try:
        matrix = np.atleast_2d(np.loadtxt(path, dtype=float))
    except (OSError, ValueError) as e:
        raise ConfigException('cannot read matrix from {}: {}'.format(path, e))
    value = required_exponent(matrix)
    out.write('{}\n'.format(_fmt(value)))
    return value


def _config_flags(parser):
    group = parser.add_argument_group('experiment settings (override --config)')
    s = argparse.SUPPRESS
    group.add_argument('--config', default=s, help='key=value settings file')
    group.add_argument('--scheme', choices=SCHEMES, default=s)
    group.add_argument('--map', choices=MAP_NAMES, default=s)
    group.add_argument('--maps', default=s, help='comma separated maps for sweep')
    group.add_argument('--sigma2', default=s, help='noise variance, comma separated list allowed')
    group.add_argument('--gamma0', type=float, default=s)
    group.add_argument('--plain-power', dest='equal_power', action='store_false', default=s,
                       help='size scheme: keep Γ₀·2^q for the logistic map instead of equalizing symbol power')
    group.add_argument('--mr', dest='m_r', type=int, default=s, help='maximum run length (BSM, bw scheme)')
    group.add_argument('--n', dest='n', type=int, default=s, help='reference trajectory length N')
    group.add_argument('--w', dest='w', type=int, default=s, help='evaluation width W in bits')
    group.add_argument('--block-len', type=int, default=s)
    group.add_argument('--blocks', dest='n_blocks', type=int, default=s)
    group.add_argument('--pe-res', type=float, default=s)
    group.add_argument('--d-max', type=int, default=s)
    group.add_argument('--q-max', type=int, default=s)
    group.add_argument('--t-flush', type=int, default=s)
    group.add_argument('--seed', dest='master_seed', type=int, default=s)
    group.add_argument('--d0', type=int, default=s)
    group.add_argument('--k', type=float, default=s)
    group.add_argument('--tsb-n', type=int, default=s)
    group.add_argument('--out', dest='output_dir', default=s)
    parser.add_argument('--workers', type=int, default=None, help='worker processes (capped by CHAOSCOMM_THREADS)')
    parser.add_argument('-v', '--verbose', action='store_true')


def build_parser():
    parser = argparse.ArgumentParser(prog='chaoscomm', description='Chaos-based anytime-reliable coded modulation')
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (('bounds', 'analytic constants and bound curves'),
                            ('tsb', 'tangential-sphere bound against the delay'),
                            ('simulate', 'Monte-Carlo campaign for one configuration'),
                            ('sweep', 'campaigns over maps and noise variances')):
        _config_flags(sub.add_parser(name, help=help_text))
    control = sub.add_parser('control-threshold', help='anytime exponent needed to stabilize a plant')
    control.add_argument('matrix', help='whitespace separated square matrix')
    control.add_argument('-v', '--verbose', action='store_true')
    return parser


def load_config(args) -> ExperimentConfig:
    """defaults < --config file < flags"""
    config = ExperimentConfig()
    options = vars(args)
    path = options.get('config')
    if path:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigException('cannot read config file {}: {}'.format(path, e))
        config = ExperimentConfig.parse(text, config)
    names = {f.name for f in dataclasses.fields(ExperimentConfig)}
    return config.updated({k: v for k, v in options.items() if k in names})


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG
    init_log(logging.DEBUG if args.verbose else logging.INFO)
    try:
        if args.command == 'control-threshold':
            cmd_control_threshold(args.matrix)
            return EXIT_OK
        config = load_config(args)
        if args.command == 'bounds':
            cmd_bounds(config)
        elif args.command == 'tsb':
            cmd_tsb(config)
        elif args.command == 'simulate':
            cmd_simulate(config, workers=args.workers)
        elif args.command == 'sweep':
            cmd_sweep(config, workers=args.workers)
    except ConfigException as e:
        logger.error('Configuration error: {}'.format(e))
        return EXIT_CONFIG
    except ChaosCommException as e:
        logger.error('Run failed: {}'.format(e), exc_info=True)
        return EXIT_RUNTIME
    except Exception as e:
        logger.error('Unexpected failure: {}'.format(e), exc_info=True)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
