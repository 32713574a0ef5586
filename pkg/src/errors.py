"""预编码库的异常层级。

- ConfigurationError: 配置非法（星座阶数、平滑参数、实验配置、配置文件未知键等）
- DomainError: 参数越界或维度不符（判决增益 d ≤ 0、比特长度不整除、非星座点等）
- RankDeficientChannelError: ZF 需要的 H·Hᴴ 不可逆
"""

import numpy as np


class PrecodingError(Exception):
    """所有库内异常的基类。"""


class ConfigurationError(PrecodingError, ValueError):
    """配置非法，在开始任何计算之前抛出。"""


class DomainError(PrecodingError, ValueError):
    """输入不在操作的定义域内。"""


class RankDeficientChannelError(PrecodingError, np.linalg.LinAlgError):
    """信道矩阵行不满秩，无法构造零迫预编码。"""
