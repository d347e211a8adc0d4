"""Sign-tracked stabilizer tableau for Pauli and single-qubit Clifford evolution.

The state is held as ``n`` independent, mutually commuting Hermitian Pauli
generators with explicit signs. Global phase is not represented; every
observable of interest (plaquette eigenvalues, the GHZ^0 / GHZ^pi class) lives
in the generator signs.
"""
from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

from .lattice import S, ToricLattice
from .pauli import PauliString, commutes

# U P U^dagger for each single-qubit Clifford, as (sign, letter)
CLIFFORD_TABLES: dict[str, dict[str, tuple[int, str]]] = {
    "H": {"X": (1, "Z"), "Y": (-1, "Y"), "Z": (1, "X")},
    "S": {"X": (1, "Y"), "Y": (-1, "X"), "Z": (1, "Z")},
    "S_inv": {"X": (-1, "Y"), "Y": (1, "X"), "Z": (1, "Z")},
    "X": {"X": (1, "X"), "Y": (-1, "Y"), "Z": (-1, "Z")},
    "Y": {"X": (-1, "X"), "Y": (1, "Y"), "Z": (-1, "Z")},
    "Z": {"X": (-1, "X"), "Y": (-1, "Y"), "Z": (1, "Z")},
}

_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def _row(p: PauliString) -> int:
    return (p.x_mask << p.n_qubits) | p.z_mask


class StabilizerState:
    """Joint +1 eigenstate of a list of signed Pauli generators.

    Instances are treated as immutable values; every operation returns a new
    state, so snapshots are free to hand to another worker.
    """

    def __init__(self, generators: Sequence[PauliString], check: bool = True):
        if not generators:
            raise ValueError("need at least one generator")
        self.n_qubits = generators[0].n_qubits
        self.generators: tuple[PauliString, ...] = tuple(generators)
        if check:
            self.validate()

    def validate(self) -> None:
        """Raise ``ValueError`` unless the generators define a unique state."""
        gens = self.generators
        if len(gens) != self.n_qubits:
            raise ValueError(f"{len(gens)} generators for {self.n_qubits} qubits")
        for g in gens:
            if g.n_qubits != self.n_qubits:
                raise ValueError("generators of mixed size")
            if not g.is_hermitian:
                raise ValueError(f"generator {g} is not Hermitian")
        for a in range(len(gens)):
            for b in range(a + 1, len(gens)):
                if commutes(gens[a], gens[b]) < 0:
                    raise ValueError(f"generators {a} and {b} anticommute")
        if len(self._pivots) != self.n_qubits:
            raise ValueError("generators are not independent")

    def __repr__(self) -> str:
        return f"StabilizerState({[str(g) for g in self.generators]})"

    def __eq__(self, other: object) -> bool:
        # same state iff every generator of one is a +1 element of the other
        if not isinstance(other, StabilizerState) or other.n_qubits != self.n_qubits:
            return NotImplemented
        return all(self.expectation(g) == 1 for g in other.generators)

    @property
    def signs(self) -> list[int]:
        return [g.sign for g in self.generators]

    @cached_property
    def _pivots(self) -> dict[int, tuple[int, int]]:
        """Row echelon form: pivot bit -> (reduced row, mask of generators used)."""
        pivots: dict[int, tuple[int, int]] = {}
        for k, g in enumerate(self.generators):
            row, used = _row(g), 1 << k
            while row:
                top = row.bit_length() - 1
                if top not in pivots:
                    pivots[top] = (row, used)
                    break
                prow, pused = pivots[top]
                row ^= prow
                used ^= pused
        return pivots

    def _check(self, p: PauliString) -> None:
        if p.n_qubits != self.n_qubits:
            raise ValueError(f"operator has {p.n_qubits} qubits, state has {self.n_qubits}")

    # -- evolution --------------------------------------------------------

    def apply_pauli(self, p: PauliString) -> StabilizerState:
        """Apply the Pauli operator ``p``: anticommuting generators flip sign."""
        self._check(p)
        gens = [g if commutes(g, p) > 0 else -g for g in self.generators]
        return StabilizerState(gens, check=False)

    def apply_clifford1(self, gate: str, qubit: int) -> StabilizerState:
        """Conjugate every generator by a single-qubit Clifford on ``qubit``."""
        if gate not in CLIFFORD_TABLES:
            raise ValueError(f"unknown gate {gate!r}; expected one of {sorted(CLIFFORD_TABLES)}")
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit {qubit} out of range for {self.n_qubits} qubits")
        table = CLIFFORD_TABLES[gate]
        bit = 1 << qubit
        gens = []
        for g in self.generators:
            letter = g.letter(qubit)
            if letter == "I":
                gens.append(g)
                continue
            sign, image = table[letter]
            x, z = _BITS[image]
            gens.append(PauliString(
                g.n_qubits,
                (g.x_mask & ~bit) | (x * bit),
                (g.z_mask & ~bit) | (z * bit),
                g.phase + (0 if sign > 0 else 2),
            ))
        return StabilizerState(gens, check=False)

    # -- readout ----------------------------------------------------------

    def expectation(self, p: PauliString) -> int:
        """``+1``/``-1`` if ``+p``/``-p`` stabilizes the state, else 0."""
        self._check(p)
        if not p.is_hermitian:
            raise ValueError(f"{p} is not Hermitian")
        if any(commutes(g, p) < 0 for g in self.generators):
            return 0
        # p commutes with a maximal abelian group, so it lies in it up to sign
        row, used = _row(p), 0
        pivots = self._pivots
        while row:
            prow, pused = pivots[row.bit_length() - 1]
            row ^= prow
            used ^= pused
        prod = PauliString.identity(self.n_qubits)
        k = 0
        while used:
            if used & 1:
                prod = prod * self.generators[k]
            used >>= 1
            k += 1
        return 1 if prod.phase == p.phase else -1

    def expectations(self, ops: Iterable[PauliString]) -> list[int]:
        return [self.expectation(op) for op in ops]


def vacuum(lat: ToricLattice) -> StabilizerState:
    """Stabilizer vacuum: every plaquette operator has eigenvalue +1.

    Generators are the S plaquettes followed by an independent subset of the P
    plaquettes, taken in plaquette order. On the minimal instance this is
    ``{+XXXX, +Z1Z2, +Z2Z3, +Z3Z4}``.
    """
    gens: list[PauliString] = []
    pivots: dict[int, int] = {}
    ordered = sorted(lat.plaquettes, key=lambda p: p.kind != S)
    for plaq in ordered:
        op = lat.plaquette_operator(plaq.id)
        row = _row(op)
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                gens.append(op)
                break
            row ^= pivots[top]
    return StabilizerState(gens)


def product_zero_state(n_qubits: int) -> StabilizerState:
    """``|00...0>``, stabilized by every single-qubit Z."""
    return StabilizerState([PauliString.single(n_qubits, "Z", q) for q in range(n_qubits)])
