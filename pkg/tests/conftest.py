
import numpy as np
import pytest
from hypothesis import strategies as st

from toricsim.pauli import PauliString

SITE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(p: PauliString) -> np.ndarray:
    """Independent matrix oracle: i^phase * kron of site matrices, qubit 0 lowest bit."""
    out = np.ones((1, 1), dtype=complex)
    for q in range(p.n_qubits):
        x = (p.x_mask >> q) & 1
        z = (p.z_mask >> q) & 1
        letter = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)]
        out = np.kron(SITE[letter], out)
    return (1j ** p.phase) * out


@st.composite
def paulis(draw, n=None, max_qubits=64):
    n = n if n is not None else draw(st.integers(1, max_qubits))
    full = (1 << n) - 1
    return PauliString(
        n,
        draw(st.integers(0, full)),
        draw(st.integers(0, full)),
        draw(st.integers(0, 3)),
    )


def random_pauli(rng: np.random.Generator, n: int, hermitian: bool = True) -> PauliString:
    bits = rng.integers(0, 2, size=(2, n))
    x = sum(int(b) << k for k, b in enumerate(bits[0]))
    z = sum(int(b) << k for k, b in enumerate(bits[1]))
    phase = int(rng.choice([0, 2])) if hermitian else int(rng.integers(0, 4))
    return PauliString(n, x, z, phase)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def calibrated():
    from toricsim.experiment import calibrated_noise

    return calibrated_noise()
