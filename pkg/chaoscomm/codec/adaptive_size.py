# -*- coding: utf-8 -*-
"""
Adaptive-size chaos-based coded modulation.

The transmitter keeps the queue of bits not yet reliably decoded and sends one
real symbol per channel use: the pending bits are quantized over 2^q levels
of the chaotic sample and scaled by Γ_q = Γ₀·2^q, optionally rescaled so that
every map spends the symbol power of a uniform one. The receiver runs the exact
maximum-likelihood search on the tree of leaf cells grown since the last
release, and feeds back the index ε of the oldest unreliable bit.
"""

import logging
import math
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from chaoscomm.chaotic_maps import (MapModel, cell_index, demap_index_to_bits,
                                    index_of_suffix, leaf_bit_table,
                                    quantized_level, quantized_levels)
from chaoscomm.codec.reliability import estimate_at_delay, hard_decisions, reliable_prefix_length
from chaoscomm.common.constants import DEFAULT_GAMMA0, DEFAULT_PE_RES, DEFAULT_Q_MAX
from chaoscomm.common.exceptions import InvalidParameterError, QueueOverflowException
from chaoscomm.common.util import check_bits, check_positive

logger = logging.getLogger('chaoscomm')


@lru_cache(maxsize=128)
def gamma_scale(map_model: MapModel, q):
    """
    c_q in Γ_q = c_q·Γ₀·2^q. With equal power the levels of a non-uniform map
    are rescaled to the variance of the uniform mid-cell levels, (1 − 4^−q)/12,
    so every map spends the same E_s(q). 1 for BSM and tent.
    """
    if map_model.uniform:
        return 1.0
    uniform = (1.0 - 4.0 ** -q) / 12.0
    return math.sqrt(uniform / float(np.var(quantized_levels(map_model, q))))


def _gamma(map_model, gamma0, q, equal_power):
    gamma = gamma0 * float(1 << q)
    return gamma * gamma_scale(map_model, q) if equal_power else gamma


def symbol_value(map_model, gamma0, index, q, equal_power=False):
    """
    s = Γ_q·(Q(ι, q) − 1/2), the level centered on the mean 1/2 of the invariant law
    """
    return _gamma(map_model, gamma0, q, equal_power) * (quantized_level(map_model, index, q) - 0.5)


def symbol_table(map_model, gamma0, q, equal_power=False):
    """Symbols of all 2^q leaf cells ordered by cell index."""
    return _gamma(map_model, gamma0, q, equal_power) * (quantized_levels(map_model, q) - 0.5)


@lru_cache(maxsize=256)
def symbol_energy(map_model, gamma0, q, equal_power=False):
    """
    E_s(q): mean energy of the 2^q symbols of a queue of length q, each cell
    being equally likely for uniform information bits.
    """
    return float(np.mean(symbol_table(map_model, gamma0, q, equal_power) ** 2))


class SizeEncoderState(object):
    """
    Transmitter side of the adaptive-size scheme.
    """

    def __init__(self, map_model: MapModel, gamma0=DEFAULT_GAMMA0, q_max=DEFAULT_Q_MAX, equal_power=False):
        self.map = map_model
        self.gamma0 = check_positive(float(gamma0), 'gamma0')
        self.equal_power = bool(equal_power)
        if int(q_max) < 1:
            raise InvalidParameterError('q_max must be >= 1, got {}'.format(q_max))
        self.q_max = int(q_max)
        self.queue = []
        # 1-based index of the oldest bit not reliably decoded
        self.epsilon = 1
        self.n = 0

    @property
    def q(self):
        return len(self.queue)

    def encode_step(self, new_bit=None):
        """
        Push the next information bit (None during the flush phase) and return s_n.
        :param new_bit: 0, 1 or None
        :return: the transmitted symbol
        """
        if new_bit is not None:
            bit, = check_bits((new_bit,))
            if len(self.queue) + 1 > self.q_max:
                raise QueueOverflowException('Bit queue would exceed q_max={} at bit {}'.format(
                    self.q_max, self.n + 1))
            self.queue.append(bit)
            self.n += 1
        if not self.queue:
            raise InvalidParameterError('Nothing left to transmit')
        return self.symbol()

    def symbol(self):
        return symbol_value(self.map, self.gamma0, cell_index(self.map, self.queue), len(self.queue),
                            self.equal_power)

    def discard(self, count):
        """
        Drop the first `count` pending bits after feedback. Equivalent to δ
        symbolic shifts of the chaotic sample.
        """
        if count < 0 or count > len(self.queue):
            raise InvalidParameterError('Cannot discard {} of {} pending bits'.format(count, len(self.queue)))
        del self.queue[:count]
        self.epsilon += count
        return self.epsilon


class SizeDecoderState(object):
    """
    Exact ML tree decoder. metrics[ι−1] is the accumulated squared distance of
    the leaf cell ι at the current depth q, relative to the best leaf.
    """

    def __init__(self, map_model: MapModel, sigma2, gamma0=DEFAULT_GAMMA0, pe_res=DEFAULT_PE_RES, equal_power=False):
        self.map = map_model
        self.sigma2 = check_positive(float(sigma2), 'sigma2')
        self.gamma0 = check_positive(float(gamma0), 'gamma0')
        self.equal_power = bool(equal_power)
        self.pe_res = float(pe_res)
        self.metrics = np.zeros(1)
        self.q = 0
        self.llr = np.zeros(0)
        self.epsilon = 1
        self.time = 0
        # bit index -> (decision, time of release)
        self.decided = {}

    def update(self, r, extend=True):
        """
        Account for the received sample r_n.
        :param r: received sample
        :param extend: False during the flush phase, when no new bit was pushed
        :return: LLRs of the pending bits, oldest first
        """
        r = float(r)
        if not math.isfinite(r):
            raise InvalidParameterError('Received sample must be finite, got {}'.format(r))
        if extend:
            self.q += 1
            self.metrics = np.repeat(self.metrics, 2)
        elif self.q == 0:
            raise InvalidParameterError('No pending bit to decode')
        self.time += 1
        self.metrics = self.metrics + (r - symbol_table(self.map, self.gamma0, self.q, self.equal_power)) ** 2
        self.metrics -= self.metrics.min()
        self._compute_llr()
        return self.llr

    def _compute_llr(self):
        if self.q == 0:
            self.llr = np.zeros(0)
            return
        w = -self.metrics / (2.0 * self.sigma2)
        table = leaf_bit_table(self.map, self.q)
        llr = np.empty(self.q)
        for j in range(self.q):
            col = table[:, j]
            llr[j] = logsumexp(w[col]) - logsumexp(w[~col])
        self.llr = llr

    def best_path(self):
        """Bits of the leaf with the smallest metric."""
        if self.q == 0:
            return ()
        return demap_index_to_bits(self.map, int(np.argmin(self.metrics)) + 1, self.q)

    def release(self, decisions):
        """
        Keep only leaves consistent with the released decisions and re-root the
        tree at the remaining suffix.
        """
        k = len(decisions)
        if k == 0:
            return
        if k > self.q:
            raise InvalidParameterError('Cannot release {} of {} pending bits'.format(k, self.q))
        table = leaf_bit_table(self.map, self.q)
        mask = np.all(table[:, :k] == np.asarray(decisions, dtype=bool), axis=1)
        kept = self.metrics[mask]
        rest = self.q - k
        if rest == 0:
            self.metrics = np.zeros(1)
        else:
            indices = np.flatnonzero(mask) + 1
            metrics = np.empty(1 << rest)
            metrics[index_of_suffix(self.map, indices, self.q, k) - 1] = kept
            self.metrics = metrics - metrics.min()
        for offset, bit in enumerate(decisions):
            self.decided[self.epsilon + offset] = (int(bit), self.time)
        logger.debug('Released bits {}..{} at time {}'.format(self.epsilon, self.epsilon + k - 1, self.time))
        self.epsilon += k
        self.q = rest
        self._compute_llr()


def reliability_prune(dec: SizeDecoderState, enc: SizeEncoderState = None):
    """
    Release the maximal reliable prefix and apply the same feedback to the encoder.
    :param dec:
    :param enc: None when only the receiver side is simulated
    :return: (released bits, new ε)
    """
    k = reliable_prefix_length(dec.llr, dec.pe_res)
    if k == 0:
        return (), dec.epsilon
    released = tuple(int(b) for b in hard_decisions(dec.llr[:k]))
    dec.release(released)
    if enc is not None:
        enc.discard(k)
        if enc.epsilon != dec.epsilon:
            raise InvalidParameterError('Encoder and decoder disagree on epsilon ({} != {})'.format(
                enc.epsilon, dec.epsilon))
    return released, dec.epsilon


__all__ = ['SizeEncoderState', 'SizeDecoderState', 'symbol_value', 'symbol_table', 'symbol_energy',
           'gamma_scale', 'reliability_prune', 'estimate_at_delay']
