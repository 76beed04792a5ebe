import numpy as np
import pytest

from app.features.basis import ModeLayout
from app.features.fftie import FftieSchedule
from app.features.model import ModelParams


@pytest.fixture
def layout3() -> ModeLayout:
    return ModeLayout(3)


@pytest.fixture
def disordered_params() -> ModelParams:
    """L=3 model with every coupling and on-site term switched on."""
    return ModelParams(
        J_tau=1.0,
        J_upsilon=0.7,
        U_tau_site=[0.3, -0.1, 0.25],
        U_upsilon_site=[-0.4, 0.15, 0.05],
        U_cross=-0.2,
        U_q=0.3,
        J_q_tau=0.05,
    )


@pytest.fixture
def short_schedule() -> FftieSchedule:
    return FftieSchedule(n_cycles=40, record_stride=4)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
