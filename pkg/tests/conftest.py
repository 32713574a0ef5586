"""公共 fixture：小规模信道实例、快速求解器配置。"""

from pathlib import Path

import numpy as np
import pytest

from src.config.schemas import SolverConfig
from src.phy.channel import Channel, rayleigh_channel
from src.phy.constellation import QamConstellation, make_constellation

CONFIGS_DIR = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def qam16() -> QamConstellation:
    return make_constellation(2)


@pytest.fixture
def small_instance(rng: np.random.Generator, qam16: QamConstellation) -> tuple[Channel, np.ndarray]:
    """N=8, K=2, T=4 的 16-QAM 实例。"""
    channel = rayleigh_channel(2, 8, rng)
    S = qam16.sample((2, 4), rng)
    return channel, S


@pytest.fixture
def fast_solver() -> SolverConfig:
    return SolverConfig(max_iters=200, seed=5)


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS_DIR
