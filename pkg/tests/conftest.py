import functools
import os

import pytest
from hypothesis import HealthCheck, settings

from poissonlr.exact.presentation import builtin

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@functools.lru_cache(maxsize=None)
def pres(name):
    """Built-in presentations are immutable in practice; share one per name."""
    return builtin(name)


@pytest.fixture
def circle():
    return pres("circle")


@pytest.fixture
def line():
    return pres("line")


@pytest.fixture
def canonical1():
    return pres("canonical1")


@pytest.fixture
def canonical2():
    return pres("canonical2")


@pytest.fixture
def current():
    return pres("current-circle")
