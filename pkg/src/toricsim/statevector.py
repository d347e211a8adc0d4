"""Dense pure- and mixed-state engine used as the exact oracle.

Amplitude index bit ``q`` is qubit ``q`` (little-endian), so basis label
``|b_{n-1} ... b_1 b_0>`` sits at index ``sum(b_q << q)``. Polarisation
mapping for the four-photon experiment: H is 0, V is 1.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .lattice import S, ToricLattice
from .pauli import PauliString

MAX_QUBITS = 20
NORM_TOL = 1e-12

GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]).astype(complex),
    "S_inv": np.diag([1, -1j]).astype(complex),
}


def _check_unitary(u: np.ndarray) -> None:
    if u.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-10):
        raise ValueError("gate is not unitary")


def _parity(indices: np.ndarray, mask: int) -> np.ndarray:
    return (np.bitwise_count(indices & mask) & 1).astype(np.int64)


class StateVector:
    """Normalised pure state on up to :data:`MAX_QUBITS` qubits."""

    def __init__(self, amplitudes: np.ndarray, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size))) if amps.size else 0
        if amps.size != 1 << n or n < 1:
            raise ValueError(f"amplitude count {amps.size} is not a power of two")
        if n > MAX_QUBITS:
            raise ValueError(f"{n} qubits exceeds the dense limit of {MAX_QUBITS}")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalise the zero vector")
            amps = amps / norm
        elif abs(norm - 1) > 1e-9:
            raise ValueError(f"state is not normalised (norm {norm})")
        self.n_qubits = n
        self.amplitudes = amps

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {n_qubits}")
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1
        return cls(amps)

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit {qubit} out of range for {self.n_qubits} qubits")

    def apply_gate(self, u: np.ndarray | str, qubit: int) -> StateVector:
        """Apply a single-qubit unitary (matrix or name in :data:`GATES`)."""
        u = GATES[u] if isinstance(u, str) else np.asarray(u, dtype=complex)
        _check_unitary(u)
        self._check_qubit(qubit)
        n = self.n_qubits
        psi = self.amplitudes.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
        out = np.einsum("ab,ibj->iaj", u, psi)
        return StateVector(out.reshape(-1))

    def apply_pauli_string(self, p: PauliString) -> StateVector:
        """Apply ``p`` exactly, global phase included."""
        if p.n_qubits != self.n_qubits:
            raise ValueError(f"operator has {p.n_qubits} qubits, state has {self.n_qubits}")
        return StateVector(pauli_action(p, self.amplitudes))

    def apply_pauli_sequence(self, ops: Iterable[PauliString]) -> StateVector:
        st = self
        for op in ops:
            st = st.apply_pauli_string(op)
        return st

    def expectation(self, p: PauliString) -> complex:
        """``<psi|p|psi>``; real for Hermitian ``p``."""
        if p.n_qubits != self.n_qubits:
            raise ValueError(f"operator has {p.n_qubits} qubits, state has {self.n_qubits}")
        return complex(np.vdot(self.amplitudes, pauli_action(p, self.amplitudes)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


def pauli_action(p: PauliString, amps: np.ndarray) -> np.ndarray:
    """``p @ amps`` using index arithmetic (no dense operator)."""
    idx = np.arange(amps.size, dtype=np.int64)
    # i^{phase + #Y} X^x Z^z |b> = i^{...} (-1)^{|b & z|} |b ^ x>
    coeff = 1j ** ((p.phase + p.y_mask.bit_count()) % 4)
    signs = 1 - 2 * _parity(idx, p.z_mask)
    out = np.empty_like(amps)
    out[idx ^ p.x_mask] = coeff * signs * amps
    return out


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>``."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def vacuum_dense(lat: ToricLattice) -> StateVector:
    """Literal product construction: ``prod_s (1 + C_s)/sqrt(2) |0...0>``."""
    if lat.qubit_count > MAX_QUBITS:
        raise ValueError(f"{lat.qubit_count} qubits exceeds the dense limit of {MAX_QUBITS}")
    amps = StateVector.zero(lat.qubit_count).amplitudes
    for pid in lat.ids(S):
        amps = (amps + pauli_action(lat.plaquette_operator(pid), amps)) / np.sqrt(2)
    return StateVector(amps)


def energy(st: StateVector, lat: ToricLattice) -> float:
    """``<H>`` for ``H = -sum`` of every plaquette operator."""
    if st.n_qubits != lat.qubit_count:
        raise ValueError(f"state has {st.n_qubits} qubits, lattice has {lat.qubit_count}")
    return -sum(st.expectation(term).real for term in lat.terms())


def ghz(phi: float, n_qubits: int = 4) -> StateVector:
    """``(|0...0> + e^{i phi} |1...1>)/sqrt(2)``."""
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[-1] = np.exp(1j * phi) / np.sqrt(2)
    return StateVector(amps)


class DensityMatrix:
    """Four-qubit mixed state (16 x 16)."""

    def __init__(self, rho: np.ndarray):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (16, 16):
            raise ValueError(f"density matrices are limited to 4 qubits, got shape {rho.shape}")
        self.rho = rho
        self.n_qubits = 4

    @classmethod
    def maximally_mixed(cls) -> DensityMatrix:
        return cls(np.eye(16, dtype=complex) / 16)

    def __repr__(self) -> str:
        return f"DensityMatrix(trace={self.trace:.6f})"

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def is_physical(self, tol: float = 1e-10) -> bool:
        herm = np.allclose(self.rho, self.rho.conj().T, atol=tol)
        return herm and abs(self.trace - 1) < tol and min_eigenvalue(self) >= -tol

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.rho @ op))

    def probabilities(self) -> np.ndarray:
        return np.clip(np.diag(self.rho).real, 0, None)

    def coherence(self) -> complex:
        """``rho_{HHHH,VVVV} = <0000| rho |1111>``."""
        return complex(self.rho[0, 15])

    def fidelity(self, target: StateVector) -> float:
        v = target.amplitudes
        return float(np.vdot(v, self.rho @ v).real)


def min_eigenvalue(rho: DensityMatrix) -> float:
    return float(np.linalg.eigvalsh((rho.rho + rho.rho.conj().T) / 2).min())


def _as_density(state: StateVector | DensityMatrix) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if state.n_qubits != 4:
        raise ValueError(f"expected a 4-qubit state, got {state.n_qubits} qubits")
    return state.density_matrix()


def sigma_gamma(gamma: float) -> np.ndarray:
    """``cos(gamma) Y + sin(gamma) X``."""
    return np.cos(gamma) * GATES["Y"] + np.sin(gamma) * GATES["X"]


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Tensor product with ``mats[0]`` on qubit 0 (lowest index bit)."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(m, out)
    return out


def correlation_curve(state: StateVector | DensityMatrix, gammas: Iterable[float]) -> list[float]:
    """``<c_xy(gamma)>`` of a four-qubit state for each angle."""
    if isinstance(state, StateVector) and state.n_qubits != 4:
        raise ValueError(f"expected a 4-qubit state, got {state.n_qubits} qubits")
    out = []
    for g in gammas:
        op = kron_all([sigma_gamma(g)] * 4)
        if isinstance(state, StateVector):
            val = np.vdot(state.amplitudes, op @ state.amplitudes)
        else:
            val = np.trace(state.rho @ op)
        out.append(float(val.real))
    return out


def z_populations(state: StateVector | DensityMatrix) -> np.ndarray:
    """Sixteen Z-basis outcome probabilities, little-endian over H/V."""
    return _as_density(state).probabilities()


def outcome_label(index: int, n_qubits: int = 4) -> str:
    """``"HHVH"``-style label; character ``q`` is qubit ``q``."""
    return "".join("V" if (index >> q) & 1 else "H" for q in range(n_qubits))
