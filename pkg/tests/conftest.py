import pytest

from helpers import synthetic_documents


@pytest.fixture
def small_docs():
    return synthetic_documents(12, seed=3)
