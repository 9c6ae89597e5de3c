# -*- coding: utf-8 -*-
"""
Adaptive-bandwidth chaos-based coded modulation.

Two reference trajectories are agreed in advance, the second generated from
the bitwise complement of the first itinerary. A pending bit of age a is sent
on its own orthogonal dimension as sample a of the trajectory selected by the
bit, so the transmitted vector grows with the number of pending bits. The
receiver accumulates, per bit, the squared distance to both hypotheses.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from chaoscomm.chaotic_maps import MapKind, MapModel, trajectory
from chaoscomm.codec.reliability import estimate_at_delay, hard_decisions, reliable_prefix_length
from chaoscomm.common.constants import DEFAULT_MAX_RUN, DEFAULT_PE_RES, DEFAULT_TRAJECTORY_LEN
from chaoscomm.common.exceptions import InvalidParameterError, TrajectoryExhaustedException
from chaoscomm.common.util import check_bits, check_positive

logger = logging.getLogger('chaoscomm')


@dataclass(frozen=True, eq=False)
class RefTrajectories:
    """
    traj0/traj1 hold f^(j)(z⁽⁰⁾), f^(j)(z⁽¹⁾) for j = 0..N−W; sig0/sig1 are the
    same samples in transmitted units (2z − 1 when normalized).
    """
    map: MapModel
    u0: np.ndarray
    u1: np.ndarray
    traj0: np.ndarray
    traj1: np.ndarray
    normalized: bool = True
    m_r: int = None
    sig0: np.ndarray = field(init=False, repr=False)
    sig1: np.ndarray = field(init=False, repr=False)
    de2_curve: np.ndarray = field(init=False, repr=False)
    mean_power: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.traj0) != len(self.traj1):
            raise InvalidParameterError('Reference trajectories differ in length')
        scale = (lambda z: 2.0 * z - 1.0) if self.normalized else (lambda z: np.array(z, dtype=float))
        sig0, sig1 = scale(self.traj0), scale(self.traj1)
        # de2_curve[d] = Σ_{j=1}^{d} (sig1[j] − sig0[j])²
        de2 = np.concatenate(([0.0], np.cumsum((sig1[1:] - sig0[1:]) ** 2)))
        # energy of the age-a component averaged over the bit value
        power = 0.5 * (sig0 ** 2 + sig1 ** 2)
        for name, arr in (('u0', self.u0), ('u1', self.u1), ('traj0', self.traj0), ('traj1', self.traj1),
                          ('sig0', sig0), ('sig1', sig1), ('de2_curve', de2),
                          ('mean_power', power)):
            arr = np.array(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def max_age(self):
        """Largest age a pending bit may reach."""
        return len(self.traj0) - 1

    def signal(self, bit):
        return self.sig1 if bit else self.sig0


def _constrain_runs(bits, m_r):
    """Flip every bit that would extend a run of identical bits beyond m_r."""
    out = np.array(bits, dtype=np.int8)
    run = 1
    for i in range(1, len(out)):
        if out[i] == out[i - 1]:
            if run >= m_r:
                out[i] ^= 1
                run = 1
            else:
                run += 1
        else:
            run = 1
    return out


def max_run_length(bits):
    bits = np.asarray(bits)
    if bits.size == 0:
        return 0
    # boundaries where the value changes
    edges = np.flatnonzero(np.diff(bits)) + 1
    bounds = np.concatenate(([0], edges, [bits.size]))
    return int(np.max(np.diff(bounds)))


def gen_initial_conditions(map_model: MapModel, n=DEFAULT_TRAJECTORY_LEN, m_r=DEFAULT_MAX_RUN, rng=None,
                           normalized=True, constrain_runs=None) -> RefTrajectories:
    """
    Draw the reference itinerary u0 (u1 is its complement) and precompute both
    trajectories symbolically.
    :param map_model:
    :param n: itinerary length N, must exceed the evaluation width W
    :param m_r: maximum run length, enforced for BSM unless constrain_runs says otherwise
    :param rng: numpy Generator
    :param normalized: transmit 2z − 1 instead of z
    :param constrain_runs: None means "only for BSM"
    :return:
    """
    if n <= map_model.eval_width:
        raise InvalidParameterError('Trajectory length N={} must exceed W={}'.format(n, map_model.eval_width))
    if constrain_runs is None:
        constrain_runs = map_model.kind is MapKind.BSM
    rng = rng if rng is not None else np.random.default_rng()
    u0 = rng.integers(0, 2, size=n, dtype=np.int8)
    if constrain_runs:
        if m_r is None or int(m_r) < 1:
            raise InvalidParameterError('Maximum run length must be >= 1, got {}'.format(m_r))
        u0 = _constrain_runs(u0, int(m_r))
    u1 = (1 - u0).astype(np.int8)
    ref = RefTrajectories(map=map_model, u0=u0, u1=u1, traj0=trajectory(map_model, u0),
                          traj1=trajectory(map_model, u1), normalized=normalized,
                          m_r=int(m_r) if constrain_runs else None)
    logger.debug('Reference trajectories: map={}, N={}, m_r={}, usable ages={}'.format(
        map_model.kind.value, n, ref.m_r, ref.max_age))
    return ref


class BwEncoderState(object):
    """
    Transmitter side of the adaptive-bandwidth scheme. queue and ages are kept
    oldest first; the transmitted vector is ordered newest first (age 1 first).
    """

    def __init__(self, ref: RefTrajectories):
        self.ref = ref
        self.queue = []
        self.ages = []
        self.epsilon = 1
        self.n = 0

    @property
    def q(self):
        return len(self.queue)

    def encode_step(self, new_bit=None):
        """
        :param new_bit: 0, 1 or None during the flush phase
        :return: vector s_n with one component per pending bit
        """
        if new_bit is not None:
            bit, = check_bits((new_bit,))
            self.queue.append(bit)
            self.ages.append(0)
            self.n += 1
        if not self.queue:
            raise InvalidParameterError('Nothing left to transmit')
        self.ages = [a + 1 for a in self.ages]
        if self.ages[0] > self.ref.max_age:
            raise TrajectoryExhaustedException('Bit {} pending for {} steps, trajectories allow {}'.format(
                self.epsilon, self.ages[0], self.ref.max_age))
        return np.array([self.ref.signal(b)[a] for b, a in zip(reversed(self.queue), reversed(self.ages))])

    def discard(self, count):
        if count < 0 or count > len(self.queue):
            raise InvalidParameterError('Cannot discard {} of {} pending bits'.format(count, len(self.queue)))
        del self.queue[:count]
        del self.ages[:count]
        self.epsilon += count
        return self.epsilon


class BwDecoderState(object):
    """
    Per-bit correlation receiver. d0[k]/d1[k] accumulate the squared distances
    of pending bit k (oldest first) to the 0 and 1 hypotheses.
    """

    def __init__(self, ref: RefTrajectories, sigma2, pe_res=DEFAULT_PE_RES):
        self.ref = ref
        self.sigma2 = check_positive(float(sigma2), 'sigma2')
        self.pe_res = float(pe_res)
        self.d0 = np.zeros(0)
        self.d1 = np.zeros(0)
        self.ages = np.zeros(0, dtype=np.int64)
        self.llr = np.zeros(0)
        self.epsilon = 1
        self.time = 0
        self.decided = {}

    @property
    def q(self):
        return len(self.d0)

    def update(self, r, extend=True):
        """
        :param r: received vector, newest bit first
        :param extend: False during the flush phase
        :return: LLRs of the pending bits, oldest first
        """
        r = np.asarray(r, dtype=float).ravel()
        expected = self.q + (1 if extend else 0)
        if expected == 0:
            raise InvalidParameterError('No pending bit to decode')
        if r.size != expected:
            raise InvalidParameterError('Received vector has {} components, {} bits are pending'.format(
                r.size, expected))
        if not np.all(np.isfinite(r)):
            raise InvalidParameterError('Received samples must be finite')
        if extend:
            self.d0 = np.append(self.d0, 0.0)
            self.d1 = np.append(self.d1, 0.0)
            self.ages = np.append(self.ages, 0)
        self.ages = self.ages + 1
        if self.ages[0] > self.ref.max_age:
            raise TrajectoryExhaustedException('Bit {} pending for {} steps, trajectories allow {}'.format(
                self.epsilon, self.ages[0], self.ref.max_age))
        self.time += 1
        r = r[::-1]
        self.d0 = self.d0 + (r - self.ref.sig0[self.ages]) ** 2
        self.d1 = self.d1 + (r - self.ref.sig1[self.ages]) ** 2
        self.llr = (self.d0 - self.d1) / (2.0 * self.sigma2)
        return self.llr

    def release(self, decisions):
        k = len(decisions)
        if k > self.q:
            raise InvalidParameterError('Cannot release {} of {} pending bits'.format(k, self.q))
        for offset, bit in enumerate(decisions):
            self.decided[self.epsilon + offset] = (int(bit), self.time)
        self.epsilon += k
        self.d0, self.d1 = self.d0[k:], self.d1[k:]
        self.ages = self.ages[k:]
        self.llr = self.llr[k:]


def reliability_prune(dec: BwDecoderState, enc: BwEncoderState = None):
    """
    Same prefix rule as the adaptive-size scheme; accumulators of released bits are dropped.
    :return: (released bits, new ε)
    """
    k = reliable_prefix_length(dec.llr, dec.pe_res)
    if k == 0:
        return (), dec.epsilon
    released = tuple(int(b) for b in hard_decisions(dec.llr[:k]))
    dec.release(released)
    if enc is not None:
        enc.discard(k)
    return released, dec.epsilon


def dE2(ref: RefTrajectories, d):
    """
    Squared Euclidean distance between the two transmitted trajectories over ages 1..d.
    """
    d = int(d)
    if d < 0 or d > ref.max_age:
        raise InvalidParameterError('d must be in 0..{}, got {}'.format(ref.max_age, d))
    return float(ref.de2_curve[d])


def error_prob_exact(de2_value, sigma2):
    """
    P = ½·erfc(d_E / (2·√(2σ²))), the pairwise error probability of the two hypotheses.
    """
    if de2_value < 0:
        raise InvalidParameterError('Squared distance must be >= 0, got {}'.format(de2_value))
    check_positive(sigma2, 'sigma2')
    if math.isinf(de2_value):
        return 0.0
    return float(0.5 * erfc(math.sqrt(de2_value) / (2.0 * math.sqrt(2.0 * sigma2))))


def error_prob_bound(de2_value, sigma2):
    """Chernoff-type bound ½·e^(−d_E²/(8σ²)) on error_prob_exact."""
    check_positive(sigma2, 'sigma2')
    return 0.5 * math.exp(-de2_value / (8.0 * sigma2))


__all__ = ['RefTrajectories', 'gen_initial_conditions', 'max_run_length', 'BwEncoderState',
           'BwDecoderState', 'reliability_prune', 'dE2', 'error_prob_exact', 'error_prob_bound',
           'estimate_at_delay']
