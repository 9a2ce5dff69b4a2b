import numpy as np
import pytest

from ragarena.dense.embed import HashEmbedder, embed
from ragarena.errors import ValidationError


def test_deterministic_and_unit_norm():
    e = HashEmbedder(dimension=64)
    a = e.embed("same text")
    b = e.embed("same text")
    np.testing.assert_array_equal(a, b)
    assert a.dtype == np.float32
    assert a.shape == (64,)
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-6)


def test_distinct_texts_nearly_orthogonal():
    e = HashEmbedder(dimension=768)
    sims = []
    for i in range(20):
        u = e.embed(f"text number {i}")
        v = e.embed(f"text number {i + 100}")
        sims.append(abs(float(u @ v)))
    # random unit vectors in 768 dims concentrate near 0 similarity
    assert max(sims) < 0.2


class _BadShape:
    dimension = 8

    def embed(self, text):
        return np.zeros(4, dtype=np.float32)


class _BadNorm:
    dimension = 4

    def embed(self, text):
        return np.full(4, 0.9, dtype=np.float32)


def test_contract_enforced():
    assert embed("x", HashEmbedder(dimension=16)).shape == (16,)
    with pytest.raises(ValidationError, match="shape"):
        embed("x", _BadShape())
    with pytest.raises(ValidationError, match="norm"):
        embed("x", _BadNorm())
