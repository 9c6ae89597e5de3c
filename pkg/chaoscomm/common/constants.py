# -*- coding: utf-8 -*-
"""
Default parameters of the toolkit. The values reproduce the reference
experiment setup (200-bit blocks, 20-bit quantizer, residual floor 1e-5).
"""

# 映射器在无限比特序列上求值时使用的前缀位数
DEFAULT_EVAL_WIDTH = 20
# 自适应尺寸方案中待确认比特队列的上限
DEFAULT_Q_MAX = 20
# 比特被认为可靠的残余误码率门限
DEFAULT_PE_RES = 1e-5

# Reference trajectory length of the adaptive-bandwidth scheme
DEFAULT_TRAJECTORY_LEN = 1000
DEFAULT_BLOCK_LEN = 200
# 信息比特发送完之后最多额外的信道使用次数
DEFAULT_T_FLUSH = 100
DEFAULT_D_MAX = 60
DEFAULT_N_BLOCKS = 1000
DEFAULT_MASTER_SEED = 20240601

# Γ_j = Γ₀·2^j
DEFAULT_GAMMA0 = 2.0
# Maximum run of identical bits in the BSM reference sequence
DEFAULT_MAX_RUN = 5
DEFAULT_D0 = 3
DEFAULT_K = 1.0

# TSB: exact enumeration of prefixes up to this depth, sampling above
TSB_EXACT_MAX_DEPTH = 12
TSB_SAMPLES = 10000
# Grid used when minimizing the tent/logistic separation constant
TAIL_GRID_POINTS = 100000
# Right end of the half-open interval [1/6, 1/2)
TENT_INTERVAL_EPS = 1e-12

SIGMA2_SUP_BRACKET = (1.0, 1e6)
SIGMA2_SUP_XTOL = 1e-10

# 并行进程数的环境变量
THREADS_ENV = 'CHAOSCOMM_THREADS'

SCHEMES = ('size', 'bw')
MAP_NAMES = ('bsm', 'tent', 'logistic')
