import os
import sys

import pytest

# 添加父目录到路径中，以便导入模块
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

SLOW_ENV = 'CHAOSCOMM_SLOW'


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long Monte-Carlo campaigns, run with {}=1'.format(SLOW_ENV))


def pytest_collection_modifyitems(config, items):
    if os.environ.get(SLOW_ENV):
        return
    skip_slow = pytest.mark.skip(reason='set {}=1 to run long campaigns'.format(SLOW_ENV))
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)
