from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from helpers import RATES, TRADEOFFS, make_instance
from topk.ingestion import random_instance
from topk.model import PolicyParams

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile("default")


@pytest.fixture
def worked_instance():
    """Utilities [10, 5] and [4, 3]"""
    return make_instance([10.0, 5.0], [4.0, 3.0])


@pytest.fixture
def worked_params():
    """k = 2, p = 0.5, lambda = 2"""
    return PolicyParams(selection_rate=0.5, quota=2, tradeoff=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def random_problems():
    """Deterministic batch drawn like the acceptance instance set"""
    generator = np.random.default_rng(2024)
    batch = []
    for _ in range(80):
        instance = random_instance(generator)
        rate = float(generator.choice(RATES))
        tradeoff = float(generator.choice(TRADEOFFS))
        batch.append((instance, PolicyParams.from_rate(rate, instance.total_candidates, tradeoff)))
    return batch


@pytest.fixture
def data_dir():
    return DATA_DIR
