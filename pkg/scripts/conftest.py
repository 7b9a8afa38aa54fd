# conftest.py
import pytest

from src.core.model import HypergeometricModel, build_curve
from src.storage.storage import InMemoryStorage
from src.utils.constants import suite_models


@pytest.fixture(scope="session")
def suite():
    return {name: spec.to_model() for name, spec in suite_models().items()}


@pytest.fixture(scope="session")
def simple_model(suite) -> HypergeometricModel:
    return suite["simple"]


@pytest.fixture(scope="session")
def monotone_model(suite) -> HypergeometricModel:
    return suite["monotone"]


@pytest.fixture(scope="session")
def simple_curve(simple_model):
    return build_curve(simple_model, "exact")


@pytest.fixture(scope="session")
def monotone_curve(monotone_model):
    return build_curve(monotone_model, "exact")


@pytest.fixture
def storage():
    return InMemoryStorage()
