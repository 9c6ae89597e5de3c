# -*- coding: utf-8 -*-
"""
/*
 * Licensed to the Apache Software Foundation (ASF) under one or more
 * contributor license agreements.  See the NOTICE file distributed with
 * this work for additional information regarding copyright ownership.
 * The ASF licenses this file to You under the Apache License, Version 2.0
 * (the "License"); you may not use this file except in compliance with
 * the License.  You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
"""

import logging
import math
import os

from chaoscomm.common.constants import THREADS_ENV
from chaoscomm.common.exceptions import InvalidParameterError

logger = logging.getLogger('chaoscomm')


def bits_to_int(bits):
    """
    convert a bit sequence (MSB first) to its natural binary value
    :param bits:
    :return:
    """
    num = 0
    for b in bits:
        num = (num << 1) | (int(b) & 1)
    return num


def int_to_bits(num, length):
    """
    convert num to a bit list of the given length (MSB first)
    :param num:
    :param length:
    :return:
    """
    bits = []
    for _ in range(length):
        bits.append(num & 1)  # 获取最低位
        num = num >> 1
    return list(reversed(bits))


def gray_encode(num):
    return num ^ (num >> 1)


def gray_decode(num):
    """
    inverse of the binary-reflected Gray code
    :param num:
    :return:
    """
    shift = num >> 1
    while shift:
        num ^= shift
        shift >>= 1
    return num


def gray_decode_bits(bits):
    """
    a_1 = b_1, a_j = a_{j-1} XOR b_j
    :param bits:
    :return: list of decoded bits
    """
    decoded = []
    acc = 0
    for b in bits:
        acc ^= int(b) & 1
        decoded.append(acc)
    return decoded


def check_bits(bits):
    """
    确认序列只包含0和1
    :param bits:
    :return: the bits as a tuple of ints
    """
    result = tuple(int(b) for b in bits)
    for b in result:
        if b not in (0, 1):
            raise InvalidParameterError('Bit sequence must contain only 0 and 1, got {}'.format(b))
    return result


def check_unit_interval(x, name='x'):
    if not (0.0 <= x <= 1.0):
        raise InvalidParameterError('{} must lie in [0, 1], got {}'.format(name, x))
    return float(x)


def check_positive(value, name, allow_inf=False):
    """
    :param allow_inf: accept +inf, for quantities with a defined limit there
    """
    if not (value > 0) or not (allow_inf or math.isfinite(value)):
        raise InvalidParameterError('{} must be a positive {}number, got {}'.format(
            name, '' if allow_inf else 'finite ', value))
    return value


def worker_count(requested=None):
    """
    Number of worker processes: the request, capped by CHAOSCOMM_THREADS and the cpu count.
    :param requested: None means as many as allowed
    :return: a positive integer
    """
    cap = os.cpu_count() or 1
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            logger.warning('Ignoring invalid {}={!r}'.format(THREADS_ENV, env))
    if requested is None:
        return cap
    return max(1, min(int(requested), cap))
