import math

import numpy as np
import pytest

from qd_discord.phonon import BathConfig, DephasingKernels, MaterialParams


@pytest.fixture(scope="session")
def gaas():
    return MaterialParams()


@pytest.fixture(scope="session")
def kernels_77_d6(gaas):
    return DephasingKernels(gaas, BathConfig(77.0, 6.0, 0.0))


@pytest.fixture(scope="session")
def kernels_77_inf(gaas):
    return DephasingKernels(gaas, BathConfig(77.0, math.inf, 0.0))


@pytest.fixture(scope="session")
def kernels_3_d6(gaas):
    return DephasingKernels(gaas, BathConfig(3.0, 6.0, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
