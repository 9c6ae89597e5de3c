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

import sys
from datetime import datetime

LOGGER_NAME = 'chaoscomm'

_LEVEL_COLORS = {
    'ERROR': 31,
    'WARNING': 33,
    'INFO': 32,
}


class ChaosFormatter(logging.Formatter):
    """
    Millisecond timestamps and a colored, padded level name.
    """

    def __init__(self, fmt=None, datefmt=None, color=True):
        super().__init__(fmt, datefmt)
        self.color = color

    def formatTime(self, record, datefmt=None):
        ct = datetime.fromtimestamp(record.created)
        if datefmt:
            return ct.strftime(datefmt)
        t = ct.strftime("%Y-%m-%d %H:%M:%S")
        return "%s.%03d" % (t, record.msecs)

    def format(self, record):
        level_name = record.levelname.ljust(7)
        if self.color:
            color = _LEVEL_COLORS.get(record.levelname, 34)
            level_name = '\033[{0}m{1}\033[0m'.format(color, level_name)
        # the record is shared by every handler, restore it afterwards
        original = record.levelname
        record.levelname = level_name
        try:
            return logging.Formatter.format(self, record)
        finally:
            record.levelname = original


def init_log(level=logging.INFO, stream=None):
    """
    初始化chaoscomm的日志配置
    :param level: logging level of the 'chaoscomm' logger
    :param stream: defaults to stderr so that CSV written to stdout stays clean
    :return: the configured logger
    """
    stream = stream or sys.stderr
    color = hasattr(stream, 'isatty') and stream.isatty()
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        if getattr(handler, '_chaoscomm', False):
            logger.removeHandler(handler)
    console_handler = logging.StreamHandler(stream)
    console_handler._chaoscomm = True
    if color:
        fmt = ('%(asctime)s %(levelname)s \033[35m%(process)-5d\033[0m --- [%(processName)15s] '
               '\033[33m%(lineno)-4d\033[0m \033[36m%(filename)s\033[0m: %(message)s')
    else:
        fmt = '%(asctime)s %(levelname)s %(process)-5d --- [%(processName)15s] %(lineno)-4d %(filename)s: %(message)s'
    console_handler.setFormatter(ChaosFormatter(fmt, color=color))
    logger.addHandler(console_handler)
    logger.setLevel(level)
    return logger
