import numpy as np
import pytest

from qcost.qmat import DensityMatrix, SubsystemDims, vector_state


@pytest.fixture
def two_qubits():
    return SubsystemDims(("A", "B"), (2, 2))


@pytest.fixture
def three_qubits():
    return SubsystemDims(("A", "B", "C"), (2, 2, 2))


def bell_vector() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)


def bell_dm() -> DensityMatrix:
    return vector_state(bell_vector(), SubsystemDims(("A", "B"), (2, 2)))


def random_hermitian(n: int, seed: int) -> np.ndarray:
    gen = np.random.default_rng(seed)
    m = gen.normal(size=(n, n)) + 1j * gen.normal(size=(n, n))
    return (m + m.conj().T) / 2.0


def random_unit_vector(n: int, seed: int) -> np.ndarray:
    gen = np.random.default_rng(seed)
    v = gen.normal(size=n) + 1j * gen.normal(size=n)
    return v / np.linalg.norm(v)
