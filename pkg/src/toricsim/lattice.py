"""Planar open-boundary toric-code geometry with qubits on vertices.

Vertices form a ``width x height`` grid; vertex ``(i, j)`` is qubit
``j * width + i``. Faces of the grid are indexed by their lower-left corner
``(i, j)`` with ``-1 <= i < width`` and ``-1 <= j < height`` so that the ring of
faces just outside the grid is included. Faces are checkerboard coloured:
``(i + j)`` even is an S face (``XXXX``), odd is a P face (``ZZZZ``).

Boundary treatment: every P face is kept, truncated to the vertices that exist
(two on an edge, one at a corner). S faces are kept only when all four
vertices exist. A truncated S face would share a single vertex with the
neighbouring truncated P face and anticommute with it, so at most one colour
can be truncated; keeping the P truncations makes the plaquette set generate
exactly the stabiliser group of the product state built from the S faces.
A ``2 x 2`` grid reproduces the single-plaquette minimal instance: one S face
and its four links.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .pauli import PauliString, parse, render

S = "S"
P = "P"
E = "E"
M = "M"

_ANYON_KIND = {E: S, M: P}
_STRING_LETTER = {E: "Z", M: "X"}


# virtual node for the anyon-absorbing boundary in string searches
BOUNDARY = -1


@dataclass(frozen=True)
class Plaquette:
    id: int
    kind: str
    qubits: tuple[int, ...]
    coord: tuple[int, int]

    @property
    def truncated(self) -> bool:
        return len(self.qubits) < 4


@dataclass(frozen=True)
class StringPath:
    """Open string of single-qubit Z (``E``) or X (``M``) rotations."""

    kind: str
    qubits: tuple[int, ...]
    operator: PauliString


class ToricLattice:
    """Immutable vertex lattice with two-coloured plaquettes.

    Args:
        width, height: vertex grid dimensions.

    Attributes:
        label_base: label of qubit 0 in Pauli text (0 for grids).
    """

    label_base = 0

    def __init__(self, width: int, height: int):
        if width < 2 or height < 2:
            raise ValueError("lattice needs at least 2x2 vertices")
        self.width = width
        self.height = height
        self.qubit_count = width * height
        self.plaquettes: tuple[Plaquette, ...] = tuple(
            Plaquette(k, kind, qubits, coord)
            for k, (kind, qubits, coord) in enumerate(self._faces())
        )
        self._operators = tuple(self._make_operator(p) for p in self.plaquettes)

    def _faces(self) -> list[tuple[str, tuple[int, ...], tuple[int, int]]]:
        faces = []
        for j in range(-1, self.height):
            for i in range(-1, self.width):
                corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]  # counter-clockwise
                qubits = tuple(
                    self.qubit(x, y) for x, y in corners
                    if 0 <= x < self.width and 0 <= y < self.height
                )
                kind = S if (i + j) % 2 == 0 else P
                if kind == S and len(qubits) < 4:
                    continue
                faces.append((kind, qubits, (i, j)))
        return faces

    def _make_operator(self, plaq: Plaquette) -> PauliString:
        letter = "X" if plaq.kind == S else "Z"
        return PauliString.from_sites(self.qubit_count, letter, plaq.qubits)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(width={self.width}, height={self.height})"

    def qubit(self, i: int, j: int) -> int:
        return j * self.width + i

    def coords(self, qubit: int) -> tuple[int, int]:
        return qubit % self.width, qubit // self.width

    def plaquette(self, pid: int) -> Plaquette:
        if not isinstance(pid, int) or not 0 <= pid < len(self.plaquettes):
            raise KeyError(f"unknown plaquette id {pid!r}")
        return self.plaquettes[pid]

    def ids(self, kind: str) -> list[int]:
        return [p.id for p in self.plaquettes if p.kind == kind]

    def plaquettes_of(self, qubit: int) -> list[int]:
        return [p.id for p in self.plaquettes if qubit in p.qubits]

    def pauli(self, text: str) -> PauliString:
        """Parse Pauli text using this lattice's qubit labels."""
        return parse(text, self.qubit_count, base=self.label_base)

    def render(self, p: PauliString) -> str:
        return render(p, base=self.label_base)

    def descriptor(self) -> dict:
        return {"type": "grid", "width": self.width, "height": self.height}

    # -- operators --------------------------------------------------------

    def plaquette_operator(self, pid: int) -> PauliString:
        """``XX..`` on an S plaquette, ``ZZ..`` on a P plaquette."""
        return self._operators[self.plaquette(pid).id]

    def anyon_occupancy(self, applied: PauliString) -> dict[int, bool]:
        """Occupation of every plaquette after applying ``applied`` to the vacuum.

        A plaquette is occupied iff ``applied`` anticommutes with its operator;
        e anyons show up on S plaquettes and m anyons on P plaquettes.
        """
        if applied.n_qubits != self.qubit_count:
            raise ValueError(
                f"operator has {applied.n_qubits} qubits, lattice has {self.qubit_count}"
            )
        # inline symplectic product: the plaquette operators are pure X or Z
        out = {}
        for plaq, op in zip(self.plaquettes, self._operators):
            overlap = (applied.x_mask & op.z_mask).bit_count() + (
                applied.z_mask & op.x_mask
            ).bit_count()
            out[plaq.id] = bool(overlap % 2)
        return out

    def occupied(self, applied: PauliString) -> set[int]:
        return {pid for pid, occ in self.anyon_occupancy(applied).items() if occ}

    def string_between(self, kind: str, start: int, end: int) -> StringPath:
        """Shortest string whose endpoints are the plaquettes ``start`` and ``end``.

        ``kind`` is ``"E"`` (Z-string between S plaquettes) or ``"M"`` (X-string
        between P plaquettes). A qubit that touches only one plaquette of the
        colour sits on a boundary that absorbs that anyon type, so a string may
        leave through one such qubit and re-enter through another. Among
        shortest paths the lexicographically smallest qubit sequence is
        returned.
        """
        if kind not in _ANYON_KIND:
            raise ValueError(f"anyon kind must be 'E' or 'M', got {kind!r}")
        want = _ANYON_KIND[kind]
        for pid in (start, end):
            if self.plaquette(pid).kind != want:
                raise ValueError(f"{kind} anyons live on {want} plaquettes; {pid} is not one")

        # plaquettes of one colour are joined through shared vertices; the
        # boundary is one extra node
        graph: dict[int, list[tuple[int, int]]] = {pid: [] for pid in self.ids(want)}
        graph[BOUNDARY] = []
        for q in range(self.qubit_count):
            ends = [pid for pid in self.plaquettes_of(q) if self.plaquettes[pid].kind == want]
            if len(ends) == 1:
                ends.append(BOUNDARY)
            if len(ends) == 2:
                a, b = ends
                graph[a].append((q, b))
                graph[b].append((q, a))

        dist = {end: 0}
        queue = deque([end])
        while queue:
            node = queue.popleft()
            for _, nxt in graph[node]:
                if nxt not in dist:
                    dist[nxt] = dist[node] + 1
                    queue.append(nxt)
        if start not in dist:
            raise ValueError(f"no path between plaquettes {start} and {end}")

        path = []
        node = start
        while node != end:
            q, node = min(
                (q, nxt) for q, nxt in graph[node] if dist.get(nxt) == dist[node] - 1
            )
            path.append(q)
        op = PauliString.from_sites(self.qubit_count, _STRING_LETTER[kind], path)
        return StringPath(kind, tuple(path), op)

    def loop_around(self, region: int | Iterable[int]) -> PauliString:
        """X-loop enclosing the given S plaquette(s): the product of their ``C_s``."""
        ids = [region] if isinstance(region, int) else list(region)
        out = PauliString.identity(self.qubit_count)
        for pid in ids:
            if self.plaquette(pid).kind != S:
                raise ValueError(f"plaquette {pid} is not an S plaquette")
            out = out * self.plaquette_operator(pid)
        return out

    def terms(self) -> list[PauliString]:
        """All Hamiltonian terms (every plaquette operator)."""
        return list(self._operators)


class MinimalInstance(ToricLattice):
    """One S plaquette on qubits labelled 1..4 counter-clockwise plus its four links.

    Plaquette 0 is the S plaquette; plaquettes 1..4 are the links
    ``(1,2), (2,3), (3,4), (4,1)``.
    """

    label_base = 1
    _CCW = {(0, 0): 0, (1, 0): 1, (1, 1): 2, (0, 1): 3}

    def __init__(self):
        super().__init__(2, 2)
        s = [p for p in self.plaquettes if p.kind == S]
        links = {tuple(sorted(p.qubits)): p for p in self.plaquettes if p.kind == P}
        order = [(0, 1), (1, 2), (2, 3), (0, 3)]
        ordered = s + [links[pair] for pair in order]
        self.plaquettes = tuple(
            Plaquette(k, p.kind, p.qubits, p.coord) for k, p in enumerate(ordered)
        )
        self._operators = tuple(self._make_operator(p) for p in self.plaquettes)

    def __repr__(self) -> str:
        return "MinimalInstance()"

    def qubit(self, i: int, j: int) -> int:
        return self._CCW[(i, j)]

    def coords(self, qubit: int) -> tuple[int, int]:
        return next(c for c, q in self._CCW.items() if q == qubit)

    def descriptor(self) -> dict:
        return {"type": "minimal"}

    @property
    def s_plaquette(self) -> int:
        return 0

    @property
    def links(self) -> list[PauliString]:
        return [self.plaquette_operator(k) for k in range(1, 5)]

    @property
    def c_s(self) -> PauliString:
        return self.plaquette_operator(0)


def from_descriptor(desc: dict) -> ToricLattice:
    """Build a lattice from ``{"type": "minimal"}`` or ``{"type": "grid", ...}``."""
    kind = desc.get("type")
    if kind == "minimal":
        return MinimalInstance()
    if kind == "grid":
        return ToricLattice(int(desc["width"]), int(desc["height"]))
    raise ValueError(f"unknown lattice type {kind!r}")


def gf2_rank(rows: Sequence[int]) -> int:
    """Rank over GF(2) of integers read as bit vectors."""
    pivots: dict[int, int] = {}
    rank = 0
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                rank += 1
                break
            row ^= pivots[top]
    return rank
