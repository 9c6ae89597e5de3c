import logging
from dify_plugin import Plugin, DifyPluginEnv

# 设置日志级别为info，仿真过程日志较多
logging.basicConfig(level=logging.INFO)

# 蒙特卡洛仿真耗时较长，放宽请求超时
plugin = Plugin(DifyPluginEnv(MAX_REQUEST_TIMEOUT=600))

if __name__ == '__main__':
    plugin.run()
