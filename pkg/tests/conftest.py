"""Shared fixtures."""

import numpy as np
import pytest

from src.config import FieldConfig, OracleConfig, config
from src.models.poset import GridPoset


@pytest.fixture(autouse=True)
def reset_config():
    """Every test starts over F_2 with the default oracle settings."""
    field, oracle = config.field, config.oracle
    config.field = FieldConfig(prime=2)
    yield
    config.field, config.oracle = field, oracle


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def line():
    return GridPoset.line(0, 5)


@pytest.fixture
def small_oracle():
    """Endpoints in [0, 4]: box [-1, 5], safe window [-2, 10]."""
    config.oracle = OracleConfig(endpoint_lo=0, endpoint_hi=4, window_lo=-2, window_hi=10, trials=4, seed=7)
    return config.oracle
