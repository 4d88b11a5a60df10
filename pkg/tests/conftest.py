import numpy as np
import pytest

from qsmlab.streams import stream


@pytest.fixture
def rng():
    return stream(987654321, 0)


def random_hermitian(dim: int, seed: int) -> np.ndarray:
    r = stream(seed, 0)
    a = r.standard_normal((dim, dim)) + 1j * r.standard_normal((dim, dim))
    return a + a.conj().T


def random_unit_vector(dim: int, seed: int) -> np.ndarray:
    r = stream(seed, 1)
    v = r.standard_normal(dim) + 1j * r.standard_normal(dim)
    return v / np.linalg.norm(v)
