import numpy as np
import pytest
from hypothesis import settings

from gridcorr import PricePanel

# Keep property tests reproducible run to run.
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_panel(rng):
    return PricePanel.from_values(rng.standard_normal((6, 120)))


def make_panel(values):
    return PricePanel.from_values(np.asarray(values, dtype=float))
