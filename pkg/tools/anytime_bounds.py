import json
import logging
from collections.abc import Generator
from typing import Any

from dify_plugin import Tool
from dify_plugin.entities.tool import ToolInvokeMessage

from chaoscomm.analysis import compute_bounds
from chaoscomm.chaotic_maps import MapKind, MapModel
from chaoscomm.common.constants import DEFAULT_D0, DEFAULT_D_MAX, DEFAULT_GAMMA0, DEFAULT_K, DEFAULT_MAX_RUN
from chaoscomm.common.exceptions import ChaosCommException


class AnytimeBoundsTool(Tool):
    """Tool for evaluating the analytic anytime-reliability bounds"""

    def _invoke(self, tool_parameters: dict[str, Any]) -> Generator[ToolInvokeMessage, None, None]:
        scheme = (tool_parameters.get("scheme") or "size").strip().lower()
        map_name = (tool_parameters.get("map") or "bsm").strip().lower()
        sigma2 = tool_parameters.get("sigma2")

        if sigma2 in (None, ""):
            yield self.create_text_message("Error: Noise variance sigma2 must be provided")
            return

        try:
            sigma2 = float(sigma2)
            gamma0 = float(tool_parameters.get("gamma0") or DEFAULT_GAMMA0)
            d0 = int(tool_parameters.get("d0") or DEFAULT_D0)
            m_r = int(tool_parameters.get("m_r") or DEFAULT_MAX_RUN)
            k = float(tool_parameters.get("k") or DEFAULT_K)
            d_max = int(tool_parameters.get("d_max") or DEFAULT_D_MAX)
        except (TypeError, ValueError) as e:
            yield self.create_text_message(f"Error: Invalid numeric parameter: {e}")
            return

        try:
            logging.info(f"Start computing bounds: scheme={scheme}, map={map_name}, sigma2={sigma2}, "
                         f"gamma0={gamma0}, d0={d0}, m_r={m_r}")
            report = compute_bounds(scheme, MapModel(MapKind.from_name(map_name)), sigma2, gamma0=gamma0, d0=d0,
                                    m_r=m_r, K=k, d_max=d_max)
            result = report.to_dict()
            result["satisfied"] = report.satisfied
            yield self.create_text_message(json.dumps(result, ensure_ascii=False, indent=2))
        except ChaosCommException as e:
            error_message = f"Bounds computation failed: {e}"
            logging.error(error_message)
            yield self.create_text_message(error_message)
        except Exception as e:
            error_message = f"Bounds computation exception: {str(e)}"
            logging.error(error_message, exc_info=True)
            yield self.create_text_message(error_message)
