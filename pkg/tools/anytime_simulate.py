import json
import logging
import math
import time
from collections.abc import Generator
from typing import Any

from dify_plugin import Tool
from dify_plugin.entities.tool import ToolInvokeMessage

from chaoscomm.channel.channel_sim import CampaignConfig, fit_anytime_exponent, run_campaign
from chaoscomm.common.constants import (DEFAULT_BLOCK_LEN, DEFAULT_D_MAX, DEFAULT_GAMMA0, DEFAULT_MASTER_SEED,
                                        DEFAULT_MAX_RUN, DEFAULT_N_BLOCKS)
from chaoscomm.common.exceptions import ChaosCommException


def _finite(value):
    return value if value is None or math.isfinite(value) else None


class AnytimeSimulateTool(Tool):
    """Tool for running a Monte-Carlo campaign of one modulation scheme"""

    def _invoke(self, tool_parameters: dict[str, Any]) -> Generator[ToolInvokeMessage, None, None]:
        # 添加容错处理，如果runtime不存在则使用默认值
        if hasattr(self, 'runtime') and self.runtime and hasattr(self.runtime, 'credentials'):
            credentials = self.runtime.credentials
            max_blocks = int(credentials.get("max_blocks") or DEFAULT_N_BLOCKS * 2)
            workers = int(credentials.get("workers") or 1)
        else:
            # 测试环境或runtime不可用时使用默认值
            max_blocks = DEFAULT_N_BLOCKS * 2
            workers = 1

        sigma2 = tool_parameters.get("sigma2")
        if sigma2 in (None, ""):
            yield self.create_text_message("Error: Noise variance sigma2 must be provided")
            return

        try:
            n_blocks = int(tool_parameters.get("n_blocks") or DEFAULT_N_BLOCKS)
            config = CampaignConfig(
                scheme=(tool_parameters.get("scheme") or "size").strip().lower(),
                map_name=(tool_parameters.get("map") or "bsm").strip().lower(),
                sigma2=float(sigma2),
                gamma0=float(tool_parameters.get("gamma0") or DEFAULT_GAMMA0),
                m_r=int(tool_parameters.get("m_r") or DEFAULT_MAX_RUN),
                block_len=int(tool_parameters.get("block_len") or DEFAULT_BLOCK_LEN),
                d_max=int(tool_parameters.get("d_max") or DEFAULT_D_MAX),
                master_seed=int(tool_parameters.get("seed") or DEFAULT_MASTER_SEED),
            )
        except (TypeError, ValueError) as e:
            yield self.create_text_message(f"Error: Invalid simulation parameter: {e}")
            return

        if n_blocks > max_blocks:
            yield self.create_text_message(f"Error: n_blocks {n_blocks} exceeds the configured limit {max_blocks}")
            return

        try:
            start_time = time.time()
            metrics = run_campaign(config, n_blocks, workers=workers)
            elapsed_time = time.time() - start_time
            logging.info(f"Simulation completed, elapsed time: {elapsed_time:.2f} seconds")

            fit = fit_anytime_exponent(metrics)
            result = {
                "scheme": config.scheme,
                "map": config.map_name,
                "sigma2": config.sigma2,
                "blocks": metrics.blocks,
                "mean_d": _finite(metrics.mean_d),
                "std_d": _finite(metrics.std_d),
                "snr_db": _finite(metrics.snr_db(config.sigma2)),
                "snr_measured_db": _finite(metrics.snr_measured_db(config.sigma2)),
                "residual_rate": metrics.residual_rate,
                "failed_blocks": metrics.failures,
                "anytime_exponent": fit.exponent if fit else None,
                "ber_avg": [[d + 1, float(p)] for d, p in enumerate(metrics.ber_avg()) if not math.isnan(p)],
            }
            yield self.create_text_message(json.dumps(result, ensure_ascii=False, indent=2))
        except ChaosCommException as e:
            error_message = f"Simulation failed: {e}"
            logging.error(error_message)
            yield self.create_text_message(error_message)
        except Exception as e:
            error_message = f"Simulation exception: {str(e)}"
            logging.error(error_message, exc_info=True)
            yield self.create_text_message(error_message)
