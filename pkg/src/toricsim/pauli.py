"""Exact n-qubit Pauli algebra on integer bit masks.

A :class:`PauliString` stores the X and Z components as Python integers used as
bit sets (bit ``q`` is qubit ``q``; qubit 0 is the lowest-order position) and a
global power of ``i``::

    P = i**phase * P_0 (x) P_1 (x) ... (x) P_{n-1}

where each site factor is the Hermitian Pauli picked by its bits::

    (x, z) = (0, 0) -> I,  (1, 0) -> X,  (0, 1) -> Z,  (1, 1) -> Y

and ``Y = i X Z`` site-locally. With this convention a Hermitian Pauli string
always has an even ``phase`` (0 for ``+``, 2 for ``-``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}

_PHASE_TOKENS = {
    "+": 0, "+1": 0, "1": 0,
    "i": 1, "+i": 1,
    "-": 2, "-1": 2,
    "-i": 3,
}
_PHASE_PREFIX = {0: "", 1: "i ", 2: "- ", 3: "-i "}
_SITE_RE = re.compile(r"^([IXYZ])(\d+)$")


@dataclass(frozen=True)
class PauliString:
    """Immutable Pauli operator with exact ``i``-power phase."""

    n_qubits: int
    x_mask: int = 0
    z_mask: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise ValueError(f"n_qubits must be positive, got {self.n_qubits}")
        full = (1 << self.n_qubits) - 1
        if self.x_mask < 0 or self.z_mask < 0 or self.x_mask & ~full or self.z_mask & ~full:
            raise ValueError("bit masks exceed the qubit count")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction helpers -------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits)

    @classmethod
    def single(cls, n_qubits: int, letter: str, qubit: int) -> PauliString:
        """Single-site Pauli ``letter`` on ``qubit``."""
        if not 0 <= qubit < n_qubits:
            raise IndexError(f"qubit {qubit} out of range for {n_qubits} qubits")
        x, z = _LETTER_BITS[letter.upper()]
        return cls(n_qubits, x << qubit, z << qubit)

    @classmethod
    def from_sites(cls, n_qubits: int, letter: str, qubits: Iterable[int]) -> PauliString:
        """Product of the same letter on every listed qubit (duplicates cancel)."""
        out = cls(n_qubits)
        for q in qubits:
            out = out * cls.single(n_qubits, letter, q)
        return out

    # properties -----------------------------------------------------------

    @property
    def y_mask(self) -> int:
        return self.x_mask & self.z_mask

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def sign(self) -> int:
        """``+1`` or ``-1`` for Hermitian strings."""
        if not self.is_hermitian:
            raise ValueError(f"{render(self)} is not Hermitian")
        return 1 if self.phase == 0 else -1

    def letter(self, qubit: int) -> str:
        return _BITS_LETTER[((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)]

    def unsigned(self) -> PauliString:
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, 0)

    def with_phase(self, phase: int) -> PauliString:
        return PauliString(self.n_qubits, self.x_mask, self.z_mask, phase)

    def adjoint(self) -> PauliString:
        # site factors are Hermitian, only the scalar is conjugated
        return self.with_phase(-self.phase)

    def __neg__(self) -> PauliString:
        return self.with_phase(self.phase + 2)

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def __str__(self) -> str:
        return render(self)


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits")


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Operator product ``a @ b`` with exact phase."""
    _check_sizes(a, b)
    # Rewrite both in X^x Z^z form (each Y contributes a factor i), commute
    # Z^{z_a} past X^{x_b} for a sign (-1)^{|z_a & x_b|}, then convert back.
    x = a.x_mask ^ b.x_mask
    z = a.z_mask ^ b.z_mask
    phase = (
        a.phase + b.phase
        + a.y_mask.bit_count() + b.y_mask.bit_count()
        + 2 * (a.z_mask & b.x_mask).bit_count()
        - (x & z).bit_count()
    )
    return PauliString(a.n_qubits, x, z, phase)


def commutes(a: PauliString, b: PauliString) -> int:
    """Return ``+1`` if ``ab = ba`` and ``-1`` if ``ab = -ba``."""
    _check_sizes(a, b)
    overlap = (a.x_mask & b.z_mask).bit_count() + (a.z_mask & b.x_mask).bit_count()
    return -1 if overlap % 2 else 1


def parse(text: str, n_qubits: int, base: int = 0) -> PauliString:
    """Parse text such as ``"Z1 X3"`` or ``"-i Y0"``.

    Site tokens are a letter followed by a qubit label; ``base`` is the label of
    qubit 0 (the minimal plaquette is written with labels 1..4, so ``base=1``).
    An optional leading phase token is one of ``+ - i -i`` (``-1``/``+1`` also
    accepted, as is the Unicode minus sign). ``"I"`` alone is the identity.
    """
    tokens = text.replace("−", "-").split()
    phase = 0
    if tokens and tokens[0] in _PHASE_TOKENS:
        phase = _PHASE_TOKENS[tokens.pop(0)]
    out = PauliString(n_qubits, phase=phase)
    if tokens == ["I"]:
        return out
    if not tokens:
        raise ValueError(f"empty Pauli spec {text!r}")
    for tok in tokens:
        m = _SITE_RE.match(tok)
        if not m:
            raise ValueError(f"malformed Pauli token {tok!r} in {text!r}")
        qubit = int(m.group(2)) - base
        if not 0 <= qubit < n_qubits:
            raise IndexError(f"qubit label {m.group(2)} out of range in {text!r}")
        out = out * PauliString.single(n_qubits, m.group(1), qubit)
    return out


def render(p: PauliString, base: int = 0) -> str:
    """Inverse of :func:`parse`; identity sites are omitted."""
    sites = [f"{p.letter(q)}{q + base}" for q in range(p.n_qubits) if (p.support >> q) & 1]
    body = " ".join(sites) if sites else "I"
    return _PHASE_PREFIX[p.phase] + body
