# -*- coding: utf-8 -*-
"""
Release rule shared by both schemes: the oldest pending bits are released as
long as each of them is reliable, i.e. its posterior error estimate
1/(1 + e^|LLR|) does not exceed the residual floor.
"""

import numpy as np
from scipy.special import expit

from chaoscomm.common.exceptions import InvalidParameterError


def residual_error_estimate(llr):
    """
    Posterior probability that the hard decision sign(LLR) is wrong.
    :param llr: scalar or array of log P(b=1)/P(b=0)
    :return:
    """
    return expit(-np.abs(np.asarray(llr, dtype=float)))


def hard_decisions(llr):
    # an exact tie decodes to 0
    return (np.asarray(llr, dtype=float) > 0).astype(np.int8)


def reliable_prefix_length(llr, pe_res):
    """
    Length of the maximal prefix of pending bits that are all reliable.
    :param llr: LLRs ordered from the oldest pending bit
    :param pe_res: residual error floor
    :return:
    """
    llr = np.asarray(llr, dtype=float)
    if llr.size == 0:
        return 0
    unreliable = residual_error_estimate(llr) > pe_res
    if not unreliable.any():
        return int(llr.size)
    return int(np.argmax(unreliable))


def estimate_at_delay(dec, bit_index, time=None):
    """
    Current estimate of bit `bit_index` held by a decoder of either scheme: the
    frozen decision of a released bit, otherwise the sign of its LLR at the
    decoder's current time.
    """
    if bit_index in dec.decided:
        return dec.decided[bit_index][0]
    pending = bit_index - dec.epsilon
    if not (0 <= pending < dec.q):
        raise InvalidParameterError('Bit {} is not pending at time {}'.format(bit_index, dec.time))
    if time is not None and time != dec.time:
        raise InvalidParameterError('Estimates of pending bits exist only at the current time {}'.format(dec.time))
    return int(hard_decisions(dec.llr[pending]))
