import os

import numpy as np
import pytest

import pyblanket


def get_workers():
    return int(os.environ.get("PYBLANKET_WORKERS", "1"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cfg():
    """Cheap optimizer settings; enough for qubit regions."""
    return pyblanket.OptimizerConfig(restarts=3, max_iters=400, seed=7)


@pytest.fixture
def full_scale():
    """Worker count for the 8-site runs; skipped unless asked for."""
    if not os.environ.get("PYBLANKET_FULL_SCALE"):
        pytest.skip("PYBLANKET_FULL_SCALE env var not set")
    return get_workers()
