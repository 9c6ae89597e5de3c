from typing import Any

from dify_plugin import ToolProvider

from chaoscomm.common.constants import DEFAULT_N_BLOCKS

# 单次调用允许的最大仿真块数
MAX_BLOCKS_LIMIT = 100000
MAX_WORKERS_LIMIT = 64


def _int_credential(credentials: dict[str, Any], key: str, default: int, upper: int) -> int:
    value = credentials.get(key, default)
    if value in (None, ''):
        return default
    try:
        number = int(value)
    except (TypeError, ValueError):
        raise ValueError(f"Invalid {key} value: {value}. Must be a positive integer")
    if number <= 0:
        raise ValueError(f"{key} must be a positive integer")
    if number > upper:
        raise ValueError(f"{key} cannot exceed {upper}")
    return number


class ChaosCommProvider(ToolProvider):
    def _validate_credentials(self, credentials: dict[str, Any]) -> None:
        """
        Validate simulation limits
        验证仿真资源限制
        """
        # 每次仿真的块数上限
        _int_credential(credentials, 'max_blocks', DEFAULT_N_BLOCKS * 2, MAX_BLOCKS_LIMIT)
        # 并行进程数
        _int_credential(credentials, 'workers', 1, MAX_WORKERS_LIMIT)
