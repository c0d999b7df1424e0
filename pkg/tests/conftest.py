import numpy as np
import pytest

from dqwsearch import WavefunctionField


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def make_delta(m: int, component: str, p: int, q: int) -> WavefunctionField:
    """State with a single unit amplitude in one component at one node."""
    psi_l = np.zeros((m, m), dtype=np.complex128)
    psi_r = np.zeros((m, m), dtype=np.complex128)
    (psi_l if component == "l" else psi_r)[p, q] = 1.0
    return WavefunctionField(m, psi_l, psi_r)


def random_state(m: int, seed: int) -> WavefunctionField:
    """Normalized complex field from a fixed seed."""
    gen = np.random.default_rng(seed)
    psi_l = gen.normal(size=(m, m)) + 1j * gen.normal(size=(m, m))
    psi_r = gen.normal(size=(m, m)) + 1j * gen.normal(size=(m, m))
    norm = np.sqrt(np.sum(np.abs(psi_l) ** 2) + np.sum(np.abs(psi_r) ** 2))
    return WavefunctionField(m, psi_l / norm, psi_r / norm)
