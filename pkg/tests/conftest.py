import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# numerics-heavy properties blow the default deadline on slow machines
settings.register_profile(
    "decolab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("decolab")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
