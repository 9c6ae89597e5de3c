#!/usr/bin/env python3
"""
测试公共工具：位序列转换、格雷码、参数检查、并行度与日志
"""
import io
import logging
import os
import sys

import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from chaoscomm.common.constants import THREADS_ENV
from chaoscomm.common.exceptions import ChaosCommException, ConfigException, InvalidParameterError
from chaoscomm.common.loggers import LOGGER_NAME, init_log
from chaoscomm.common.util import (bits_to_int, check_bits, check_positive, check_unit_interval, gray_decode,
                                   gray_decode_bits, gray_encode, int_to_bits, worker_count)


def test_bit_conversion():
    assert bits_to_int([1, 0, 1]) == 5
    assert int_to_bits(5, 5) == [0, 0, 1, 0, 1]
    for num in range(64):
        assert bits_to_int(int_to_bits(num, 6)) == num


def test_gray_code():
    assert [gray_encode(i) for i in range(4)] == [0, 1, 3, 2]
    for num in range(256):
        assert gray_decode(gray_encode(num)) == num
        bits = int_to_bits(gray_encode(num), 8)
        assert bits_to_int(gray_decode_bits(bits)) == num


def test_checks():
    assert check_bits([0, 1, 1]) == (0, 1, 1)
    with pytest.raises(InvalidParameterError):
        check_bits([0, 3])
    assert check_unit_interval(0.5) == 0.5
    with pytest.raises(InvalidParameterError):
        check_unit_interval(1.5)
    assert check_positive(2.0, 'x') == 2.0
    for bad in (0.0, -1.0, float('inf'), float('nan')):
        with pytest.raises(InvalidParameterError):
            check_positive(bad, 'x')
    assert check_positive(float('inf'), 'x', allow_inf=True) == float('inf')
    for bad in (0.0, float('nan'), float('-inf')):
        with pytest.raises(InvalidParameterError):
            check_positive(bad, 'x', allow_inf=True)


def test_exception_hierarchy():
    assert issubclass(InvalidParameterError, ChaosCommException)
    assert issubclass(InvalidParameterError, ValueError)
    assert issubclass(ConfigException, ChaosCommException)


def test_worker_count(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, '2')
    assert worker_count() == 2
    assert worker_count(8) == 2
    assert worker_count(0) == 1
    monkeypatch.setenv(THREADS_ENV, 'many')
    assert worker_count(1) == 1
    monkeypatch.delenv(THREADS_ENV)
    assert worker_count() == (os.cpu_count() or 1)


def test_init_log_writes_plain_text_to_stream():
    stream = io.StringIO()
    logger = init_log(logging.DEBUG, stream=stream)
    assert logger.name == LOGGER_NAME
    logger.debug('campaign %s', 'started')
    text = stream.getvalue()
    assert 'DEBUG' in text and 'campaign started' in text
    assert '\033[' not in text
    # a second call replaces the handler instead of adding one
    init_log(logging.INFO, stream=stream)
    assert sum(1 for h in logger.handlers if getattr(h, '_chaoscomm', False)) == 1
