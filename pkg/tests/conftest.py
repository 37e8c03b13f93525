import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from quadsector.quad_field import make_field

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def k2():
    return make_field(2)


@pytest.fixture(scope="session")
def k3():
    return make_field(3)
