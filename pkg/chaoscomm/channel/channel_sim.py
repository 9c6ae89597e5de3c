# -*- coding: utf-8 -*-
"""
AWGN channel and Monte-Carlo block campaigns.

Every block draws its bits and noise from its own substream
SeedSequence(master_seed, spawn_key=(1, block_index)); the adaptive-bandwidth
reference pair comes from spawn_key=(0,). Blocks are simulated in fixed-size
chunks and merged in chunk order, so a campaign gives identical Metrics for
any number of worker processes.
"""

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from multiprocessing import Pool
from typing import Optional

import numpy as np

from chaoscomm.channel.scheme_strategy import SchemeFactory, SchemeStrategy
from chaoscomm.codec.reliability import hard_decisions
from chaoscomm.common.constants import (DEFAULT_BLOCK_LEN, DEFAULT_D_MAX, DEFAULT_EVAL_WIDTH, DEFAULT_GAMMA0,
                                        DEFAULT_MASTER_SEED, DEFAULT_MAX_RUN, DEFAULT_PE_RES, DEFAULT_Q_MAX,
                                        DEFAULT_T_FLUSH, DEFAULT_TRAJECTORY_LEN, MAP_NAMES, SCHEMES)
from chaoscomm.common.exceptions import (InvalidParameterError, QueueOverflowException,
                                         TrajectoryExhaustedException)
from chaoscomm.common.util import check_positive, worker_count

logger = logging.getLogger('chaoscomm')

# blocks per task; fixed so that merge order does not depend on the worker count
CHUNK_BLOCKS = 25

FAILURE_OVERFLOW = 'queue_overflow'
FAILURE_EXHAUSTED = 'trajectory_exhausted'
FAILURE_FLUSH = 'flush'


@dataclass(frozen=True)
class CampaignConfig:
    scheme: str = 'size'
    map_name: str = 'bsm'
    sigma2: float = 0.5
    gamma0: float = DEFAULT_GAMMA0
    m_r: int = DEFAULT_MAX_RUN
    trajectory_len: int = DEFAULT_TRAJECTORY_LEN
    eval_width: int = DEFAULT_EVAL_WIDTH
    block_len: int = DEFAULT_BLOCK_LEN
    pe_res: float = DEFAULT_PE_RES
    d_max: int = DEFAULT_D_MAX
    q_max: int = DEFAULT_Q_MAX
    t_flush: int = DEFAULT_T_FLUSH
    master_seed: int = DEFAULT_MASTER_SEED
    normalized: bool = True
    # adaptive-size: Γ_q rescaled so that every map has the symbol power of a uniform one
    equal_power: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidParameterError('scheme must be one of {}, got {}'.format(SCHEMES, self.scheme))
        if self.map_name not in MAP_NAMES:
            raise InvalidParameterError('map must be one of {}, got {}'.format(MAP_NAMES, self.map_name))
        check_positive(self.sigma2, 'sigma2')
        check_positive(self.gamma0, 'gamma0')
        if not (0.0 < self.pe_res < 0.5):
            raise InvalidParameterError('pe_res must be in (0, 0.5), got {}'.format(self.pe_res))
        for name in ('block_len', 'd_max', 'q_max', 'eval_width', 'm_r'):
            if int(getattr(self, name)) < 1:
                raise InvalidParameterError('{} must be >= 1, got {}'.format(name, getattr(self, name)))
        if self.t_flush < 0:
            raise InvalidParameterError('t_flush must be >= 0, got {}'.format(self.t_flush))
        if self.trajectory_len <= self.eval_width:
            raise InvalidParameterError('trajectory_len N={} must exceed W={}'.format(
                self.trajectory_len, self.eval_width))
        if self.master_seed < 0:
            raise InvalidParameterError('master_seed must be >= 0, got {}'.format(self.master_seed))


def block_seed(master_seed, block_index):
    return np.random.SeedSequence(master_seed, spawn_key=(1, block_index))


def reference_seed(master_seed):
    return np.random.SeedSequence(master_seed, spawn_key=(0,))


def awgn(samples, sigma2, rng):
    """
    Add i.i.d. zero-mean Gaussian noise of variance σ² to every component.
    :param samples: real scalar or vector
    :param sigma2: noise variance, 0 returns the samples unchanged
    :param rng: numpy Generator
    :return: array of the same shape
    """
    s = np.asarray(samples, dtype=float)
    if sigma2 < 0:
        raise InvalidParameterError('sigma2 must be >= 0, got {}'.format(sigma2))
    if sigma2 == 0:
        return s.copy()
    return s + rng.normal(0.0, math.sqrt(sigma2), size=s.shape)


@lru_cache(maxsize=8)
def strategy_for(config: CampaignConfig) -> SchemeStrategy:
    """Scheme strategy of a campaign; the reference pair depends only on the master seed."""
    rng = np.random.default_rng(reference_seed(config.master_seed))
    return SchemeFactory.create_scheme(config.scheme, config.map_name, config.eval_width, gamma0=config.gamma0,
                                       q_max=config.q_max, trajectory_len=config.trajectory_len, m_r=config.m_r,
                                       normalized=config.normalized, rng=rng,
                                       equal_power=config.equal_power)


@dataclass
class BlockResult:
    """
    errors[k, d−1] / observed[k, d−1]: estimate of bit k+1 at delay d was wrong / was seen.
    delay[k]: delay at which bit k+1 was released, −1 if never.
    """
    bits: np.ndarray
    errors: np.ndarray
    observed: np.ndarray
    delay: np.ndarray
    efficiency: np.ndarray
    energy: float
    nominal_energy: float
    info_steps: int
    channel_uses: int
    released_errors: int
    released_total: int
    failure: Optional[str] = None


def _fill_remaining(errors, observed, ks, t_last, d_max):
    """Count pending bits ks (1-based) as wrong at every delay after t_last."""
    for k in ks:
        first = t_last - k + 1  # delays 1..first already recorded
        if first < d_max:
            errors[k - 1, first:] = True
            observed[k - 1, first:] = True


def _cap_released(errors, observed, delay, t_last, d_max):
    """A released bit k is only seen at delays up to t_last − k + 1, the last channel use of the block."""
    for k in np.flatnonzero(delay > 0) + 1:
        last = t_last - k + 1
        if last < d_max:
            errors[k - 1, last:] = False
            observed[k - 1, last:] = False


def simulate_block(config: CampaignConfig, seed, strategy: SchemeStrategy = None) -> BlockResult:
    """
    Encode, transmit, decode and release one block of config.block_len random
    bits with ideal feedback, followed by up to t_flush channel uses without
    new bits. Queue overflow and trajectory exhaustion end the block and are
    recorded in BlockResult.failure.
    :param config:
    :param seed: int or SeedSequence of this block
    :param strategy: defaults to strategy_for(config)
    :return:
    """
    strategy = strategy or strategy_for(config)
    rng = np.random.default_rng(seed)
    length, d_max = config.block_len, config.d_max
    bits = rng.integers(0, 2, size=length, dtype=np.int8)
    enc = strategy.new_encoder()
    dec = strategy.new_decoder(config.sigma2, config.pe_res)
    errors = np.zeros((length, d_max), dtype=bool)
    observed = np.zeros((length, d_max), dtype=bool)
    delay = np.full(length, -1, dtype=np.int64)
    efficiency = []
    energy = nominal = 0.0
    released_errors = released_total = 0
    failure = None
    t = 0
    try:
        for t in range(1, length + config.t_flush + 1):
            info = t <= length
            if not info and enc.q == 0:
                t -= 1
                break
            s = enc.encode_step(int(bits[t - 1]) if info else None)
            if info:
                efficiency.append(enc.q)
                energy += strategy.energy(s)
                nominal += strategy.nominal_energy(enc)
            dec.update(awgn(s, config.sigma2, rng), extend=info)

            # estimates of every pending bit at its current delay
            ks = np.arange(dec.epsilon, dec.epsilon + dec.q)
            ds = t - ks + 1
            seen = ds <= d_max
            if np.any(seen):
                est = hard_decisions(dec.llr)
                observed[ks[seen] - 1, ds[seen] - 1] = True
                errors[ks[seen] - 1, ds[seen] - 1] = est[seen] != bits[ks[seen] - 1]

            first = dec.epsilon
            released, _ = strategy.prune(dec, enc)
            for offset, bit in enumerate(released):
                k = first + offset
                d = t - k + 1
                delay[k - 1] = d
                wrong = bit != bits[k - 1]
                released_total += 1
                released_errors += int(wrong)
                if d <= d_max:
                    errors[k - 1, d - 1:] = wrong
                    observed[k - 1, d - 1:] = True
        _cap_released(errors, observed, delay, dec.time, d_max)
        if dec.q > 0:
            failure = FAILURE_FLUSH
            logger.warning('Block left {} bits unresolved after {} flush steps'.format(dec.q, config.t_flush))
            _fill_remaining(errors, observed, range(dec.epsilon, dec.epsilon + dec.q), t, d_max)
    except (QueueOverflowException, TrajectoryExhaustedException) as e:
        failure = FAILURE_OVERFLOW if isinstance(e, QueueOverflowException) else FAILURE_EXHAUSTED
        logger.warning('Block failed at channel use {}: {}'.format(t, e))
        # estimates up to t−1 are recorded; bits never transmitted stay unobserved
        _cap_released(errors, observed, delay, dec.time, d_max)
        _fill_remaining(errors, observed, range(dec.epsilon, dec.epsilon + dec.q), t - 1, d_max)
    return BlockResult(bits=bits, errors=errors, observed=observed, delay=delay,
                       efficiency=np.asarray(efficiency, dtype=np.int64), energy=energy, nominal_energy=nominal,
                       info_steps=len(efficiency), channel_uses=dec.time, released_errors=released_errors,
                       released_total=released_total, failure=failure)


@dataclass
class Metrics:
    block_len: int
    d_max: int
    blocks: int = 0
    errors: np.ndarray = None
    trials: np.ndarray = None
    efficiency_hist: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    efficiency_sum: int = 0
    efficiency_sq_sum: int = 0
    info_steps: int = 0
    energy: float = 0.0
    nominal_energy: float = 0.0
    released_errors: int = 0
    released_total: int = 0
    failures: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.errors is None:
            self.errors = np.zeros((self.block_len, self.d_max), dtype=np.int64)
        if self.trials is None:
            self.trials = np.zeros((self.block_len, self.d_max), dtype=np.int64)

    def _add_hist(self, hist):
        if hist.size > self.efficiency_hist.size:
            self.efficiency_hist = np.pad(self.efficiency_hist, (0, hist.size - self.efficiency_hist.size))
        self.efficiency_hist[:hist.size] += hist

    def add(self, result: BlockResult):
        self.blocks += 1
        self.errors += result.errors & result.observed
        self.trials += result.observed
        if result.efficiency.size:
            self._add_hist(np.bincount(result.efficiency))
        self.efficiency_sum += int(result.efficiency.sum())
        self.efficiency_sq_sum += int((result.efficiency ** 2).sum())
        self.info_steps += result.info_steps
        self.energy += result.energy
        self.nominal_energy += result.nominal_energy
        self.released_errors += result.released_errors
        self.released_total += result.released_total
        if result.failure:
            self.failures[result.failure] = self.failures.get(result.failure, 0) + 1
        return self

    def merge(self, other: 'Metrics'):
        if (other.block_len, other.d_max) != (self.block_len, self.d_max):
            raise InvalidParameterError('Cannot merge metrics of different shapes')
        self.blocks += other.blocks
        self.errors += other.errors
        self.trials += other.trials
        self._add_hist(other.efficiency_hist)
        self.efficiency_sum += other.efficiency_sum
        self.efficiency_sq_sum += other.efficiency_sq_sum
        self.info_steps += other.info_steps
        self.energy += other.energy
        self.nominal_energy += other.nominal_energy
        self.released_errors += other.released_errors
        self.released_total += other.released_total
        for key, count in other.failures.items():
            self.failures[key] = self.failures.get(key, 0) + count
        return self

    def ber_by_position(self):
        """P_n^d(e) per bit position n (rows) and delay d (columns), nan where unobserved."""
        with np.errstate(invalid='ignore', divide='ignore'):
            return np.where(self.trials > 0, self.errors / np.maximum(self.trials, 1), np.nan)

    def ber_avg(self):
        """P^d(e) averaged over positions, nan for delays never observed."""
        errors, trials = self.errors.sum(axis=0), self.trials.sum(axis=0)
        return np.where(trials > 0, errors / np.maximum(trials, 1), np.nan)

    @property
    def mean_d(self):
        """Mean modulation efficiency over information steps."""
        return self.efficiency_sum / self.info_steps if self.info_steps else float('nan')

    @property
    def std_d(self):
        if not self.info_steps:
            return float('nan')
        var = self.efficiency_sq_sum / self.info_steps - self.mean_d ** 2
        return math.sqrt(max(var, 0.0))

    def snr_db(self, sigma2):
        """
        E_s/σ² in dB, E_s being the mean over information steps of the expected
        symbol energy at the queue state of the step (E_d[E_s(d)]).
        """
        if not self.info_steps or self.nominal_energy <= 0:
            return float('nan')
        return 10.0 * math.log10(self.nominal_energy / self.info_steps / sigma2)

    def snr_measured_db(self, sigma2):
        """Same ratio with the energy of the symbols actually sent."""
        if not self.info_steps or self.energy <= 0:
            return float('nan')
        return 10.0 * math.log10(self.energy / self.info_steps / sigma2)

    @property
    def residual_rate(self):
        return self.released_errors / self.released_total if self.released_total else 0.0


@dataclass(frozen=True)
class AnytimeFit:
    slope: float
    intercept: float
    r2: float
    d_first: int
    d_last: int

    @property
    def exponent(self):
        return -self.slope


def fit_anytime_exponent(metrics: Metrics, min_errors=20) -> Optional[AnytimeFit]:
    """
    Least-squares line through ln P^d(e) over the pre-floor range: the delays,
    from d = 1 on, whose averaged error count is at least min_errors.
    :return: None when fewer than three delays qualify
    """
    errors = metrics.errors.sum(axis=0)
    p = metrics.ber_avg()
    ds = []
    for d in range(metrics.d_max):
        if errors[d] < min_errors or not p[d] > 0:
            break
        ds.append(d)
    if len(ds) < 3:
        return None
    x = np.asarray(ds, dtype=float) + 1.0
    y = np.log(p[ds])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return AnytimeFit(float(slope), float(intercept), r2, int(x[0]), int(x[-1]))


def _run_chunk(task):
    config, start, stop = task
    strategy = strategy_for(config)
    metrics = Metrics(config.block_len, config.d_max)
    for index in range(start, stop):
        metrics.add(simulate_block(config, block_seed(config.master_seed, index), strategy))
    return metrics


def run_campaign(config: CampaignConfig, n_blocks, workers=None) -> Metrics:
    """
    Simulate n_blocks independent blocks and aggregate their metrics.
    :param config:
    :param n_blocks: number of blocks, >= 1
    :param workers: worker processes, capped by CHAOSCOMM_THREADS; None means all allowed
    :return:
    """
    if int(n_blocks) < 1:
        raise InvalidParameterError('n_blocks must be >= 1, got {}'.format(n_blocks))
    workers = worker_count(workers)
    tasks = [(config, start, min(start + CHUNK_BLOCKS, n_blocks)) for start in range(0, n_blocks, CHUNK_BLOCKS)]
    workers = min(workers, len(tasks))
    logger.info('Campaign start: {} blocks, {} workers, config={}'.format(n_blocks, workers, asdict(config)))
    start_time = time.time()
    metrics = Metrics(config.block_len, config.d_max)
    if workers == 1:
        for task in tasks:
            metrics.merge(_run_chunk(task))
    else:
        with Pool(processes=workers) as pool:
            # imap keeps task order, so the merge order is fixed
            for chunk in pool.imap(_run_chunk, tasks):
                metrics.merge(chunk)
    elapsed = time.time() - start_time
    logger.info('Campaign done in {:.2f}s: mean_d={:.4f}, residual_rate={:.3g}, failures={}'.format(
        elapsed, metrics.mean_d, metrics.residual_rate, metrics.failures))
    return metrics
