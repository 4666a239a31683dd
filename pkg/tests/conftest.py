import pytest

from pairchar.config.config_loader import load_settings
from pairchar.fock_oracle.oracle import CutoffPolicy


@pytest.fixture(scope="session")
def settings():
    return load_settings()


@pytest.fixture(scope="session")
def policy(settings):
    return CutoffPolicy.from_settings(settings)
