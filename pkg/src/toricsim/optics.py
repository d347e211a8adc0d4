"""Fock-space linear optics for the four-photon GHZ source.

Optical elements act linearly on creation operators. A Fock state is kept as a
map from occupation vectors (photons per :class:`ModeLabel`, in the fixed
order of :data:`MODES`) to amplitudes; elements are applied by expanding each
branch's creation-operator monomial exactly, including the bosonic
``sqrt(n!)`` factors.

Conventions:
    * HWP at angle ``t``: ``H -> cos2t H + sin2t V``, ``V -> sin2t H - cos2t V``
      (``t = pi/8`` maps H to + and V to -).
    * PBS: H is transmitted (``in1 -> out1``, ``in2 -> out2``), V is reflected
      (``in1 -> out2``, ``in2 -> out1``), no reflection phase.
    * BS: symmetric 50:50, ``in1 -> (out1 + i out2)/sqrt2``,
      ``in2 -> (i out1 + out2)/sqrt2`` for both polarisations.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .statevector import StateVector

SPATIAL = ("a", "b", "1", "2", "3", "4")
POLARIZATIONS = ("H", "V")
MAX_PHOTONS = 4
NORM_TOL = 1e-10


@dataclass(frozen=True, order=True)
class ModeLabel:
    spatial: str
    polarization: str

    def __post_init__(self):
        if self.spatial not in SPATIAL or self.polarization not in POLARIZATIONS:
            raise ValueError(f"unknown mode {self.spatial}{self.polarization}")

    def __str__(self) -> str:
        return f"{self.spatial}{self.polarization}"


MODES: tuple[ModeLabel, ...] = tuple(ModeLabel(s, p) for s in SPATIAL for p in POLARIZATIONS)
MODE_INDEX = {m: k for k, m in enumerate(MODES)}
N_MODES = len(MODES)


def mode(spatial: str, polarization: str) -> int:
    return MODE_INDEX[ModeLabel(str(spatial), polarization)]


class EmptyPostselection(ValueError):
    """The state has no weight on the post-selected subspace."""


class FockState:
    """Superposition over occupation vectors of :data:`MODES`."""

    def __init__(self, branches: Mapping[tuple[int, ...], complex], tol: float = 1e-14):
        clean = {}
        for occ, amp in branches.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != N_MODES or min(occ) < 0:
                raise ValueError(f"bad occupation vector {occ}")
            if sum(occ) > MAX_PHOTONS:
                raise ValueError(f"more than {MAX_PHOTONS} photons in {occ}")
            if abs(amp) > tol:
                clean[occ] = complex(amp)
        self.branches: dict[tuple[int, ...], complex] = dict(sorted(clean.items()))

    @classmethod
    def from_modes(cls, terms: Iterable[tuple[complex, Mapping[str, int]]]) -> FockState:
        """Build from ``(amplitude, {"aH": 2, "bV": 2})`` pairs."""
        branches: dict[tuple[int, ...], complex] = defaultdict(complex)
        for amp, occ in terms:
            vec = [0] * N_MODES
            for name, n in occ.items():
                vec[mode(name[:-1], name[-1])] += n
            branches[tuple(vec)] += amp
        return cls(branches)

    def __repr__(self) -> str:
        return f"FockState({len(self.branches)} branches, norm={self.norm:.6f})"

    def __str__(self) -> str:
        parts = []
        for occ, amp in self.branches.items():
            label = " ".join(
                f"{MODES[k]}" + (f"^{n}" if n > 1 else "") for k, n in enumerate(occ) if n
            )
            parts.append(f"({amp.real:+.4f}{amp.imag:+.4f}j)|{label}>")
        return " + ".join(parts) or "0"

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.branches.values()))

    def photon_numbers(self) -> set[int]:
        return {sum(occ) for occ in self.branches}

    def amplitude(self, occ: Mapping[str, int]) -> complex:
        vec = [0] * N_MODES
        for name, n in occ.items():
            vec[mode(name[:-1], name[-1])] += n
        return self.branches.get(tuple(vec), 0j)

    def normalized(self) -> FockState:
        return FockState({k: v / self.norm for k, v in self.branches.items()})


# -- creation-operator polynomials ------------------------------------------

Monomial = tuple[int, ...]  # sorted mode indices, one entry per photon


def _occupation_to_monomial(occ: Sequence[int]) -> Monomial:
    return tuple(k for k, n in enumerate(occ) for _ in range(n))


def _monomial_to_occupation(mono: Monomial) -> tuple[int, ...]:
    occ = [0] * N_MODES
    for k in mono:
        occ[k] += 1
    return tuple(occ)


def _factorial_norm(occ: Sequence[int]) -> float:
    return math.sqrt(math.prod(math.factorial(n) for n in occ))


def polynomial_to_fock(poly: Mapping[Monomial, complex]) -> FockState:
    """Fock state ``sum_c c * prod(a_k^dagger) |0>`` (unnormalised)."""
    branches: dict[tuple[int, ...], complex] = defaultdict(complex)
    for mono, coeff in poly.items():
        occ = _monomial_to_occupation(mono)
        branches[occ] += coeff * _factorial_norm(occ)
    return FockState(branches)


def multiply_polynomials(p: Mapping[Monomial, complex], q: Mapping[Monomial, complex]) -> dict:
    out: dict[Monomial, complex] = defaultdict(complex)
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            out[tuple(sorted(m1 + m2))] += c1 * c2
    return dict(out)


# -- elements ---------------------------------------------------------------

ModeMap = dict[int, list[tuple[int, complex]]]


@dataclass(frozen=True)
class HWP:
    spatial: str
    angle: float

    def mode_map(self) -> ModeMap:
        c, s = math.cos(2 * self.angle), math.sin(2 * self.angle)
        h, v = mode(self.spatial, "H"), mode(self.spatial, "V")
        return {h: [(h, c), (v, s)], v: [(h, s), (v, -c)]}


@dataclass(frozen=True)
class PBS:
    in1: str
    in2: str
    out1: str
    out2: str

    def mode_map(self) -> ModeMap:
        return {
            mode(self.in1, "H"): [(mode(self.out1, "H"), 1)],
            mode(self.in2, "H"): [(mode(self.out2, "H"), 1)],
            mode(self.in1, "V"): [(mode(self.out2, "V"), 1)],
            mode(self.in2, "V"): [(mode(self.out1, "V"), 1)],
        }


@dataclass(frozen=True)
class BS:
    in1: str
    in2: str
    out1: str
    out2: str

    def mode_map(self) -> ModeMap:
        r = 1 / math.sqrt(2)
        out = {}
        for pol in POLARIZATIONS:
            o1, o2 = mode(self.out1, pol), mode(self.out2, pol)
            out[mode(self.in1, pol)] = [(o1, r), (o2, 1j * r)]
            out[mode(self.in2, pol)] = [(o1, 1j * r), (o2, r)]
        return out


Element = HWP | PBS | BS


def apply_element(st: FockState, element: Element) -> FockState:
    """Transform every creation operator through ``element``.

    Output modes that are not also inputs must be empty, otherwise the element
    would not act unitarily on the populated modes.
    """
    mapping = element.mode_map()
    fresh = {k for images in mapping.values() for k, _ in images} - set(mapping)
    for occ in st.branches:
        if any(occ[k] for k in fresh):
            raise ValueError(f"{element} routes photons into occupied mode(s)")

    out: dict[Monomial, complex] = defaultdict(complex)
    for occ, amp in st.branches.items():
        images = [mapping.get(k, [(k, 1)]) for k in _occupation_to_monomial(occ)]
        scale = amp / _factorial_norm(occ)
        for choice in itertools.product(*images):
            coeff = scale
            for _, c in choice:
                coeff *= c
            out[tuple(sorted(k for k, _ in choice))] += coeff
    return polynomial_to_fock(out)


def apply_chain(st: FockState, elements: Iterable[Element]) -> FockState:
    for el in elements:
        st = apply_element(st, el)
    return st


def spdc_second_order(weighting: str = "equal") -> FockState:
    """Second-order SPDC emission into spatial modes a and b.

    ``weighting="equal"`` gives the three branches
    ``|2H>_a|2V>_b + |2V>_a|2H>_b + |HV>_a|HV>_b`` with equal amplitudes.
    ``weighting="bosonic"`` squares the pair-emission operator
    ``a_H^dag b_V^dag + a_V^dag b_H^dag`` and normalises the result.
    """
    if weighting == "equal":
        amp = 1 / math.sqrt(3)
        return FockState.from_modes([
            (amp, {"aH": 2, "bV": 2}),
            (amp, {"aV": 2, "bH": 2}),
            (amp, {"aH": 1, "aV": 1, "bH": 1, "bV": 1}),
        ])
    if weighting == "bosonic":
        pair = {
            tuple(sorted((mode("a", "H"), mode("b", "V")))): 1,
            tuple(sorted((mode("a", "V"), mode("b", "H")))): 1,
        }
        return polynomial_to_fock(multiply_polynomials(pair, pair)).normalized()
    raise ValueError(f"unknown weighting {weighting!r}")


def ghz_source_chain(hwp_angle: float = math.pi / 8) -> list[Element]:
    """HWP in mode b, PBS overlapping a and b, then a BS splitting each PBS output.

    The PBS outputs are named 1 and 3; modes 2 and 4 enter the beam splitters
    empty.
    """
    return [
        HWP("b", hwp_angle),
        PBS("a", "b", "1", "3"),
        BS("1", "2", "1", "2"),
        BS("3", "4", "3", "4"),
    ]


def postselect_one_per_mode(st: FockState) -> tuple[StateVector, float]:
    """Project on exactly one photon in each of modes 1-4.

    Returns the renormalised four-qubit state (qubit ``q`` is mode ``q+1``,
    H -> 0, V -> 1) and the probability of the post-selection event.
    """
    out_modes = [(mode(str(q + 1), "H"), mode(str(q + 1), "V")) for q in range(4)]
    others = [k for k in range(N_MODES) if not any(k in pair for pair in out_modes)]
    amps = np.zeros(16, dtype=complex)
    for occ, amp in st.branches.items():
        if any(occ[k] for k in others):
            continue
        if any(occ[h] + occ[v] != 1 for h, v in out_modes):
            continue
        index = sum(occ[v] << q for q, (_, v) in enumerate(out_modes))
        amps[index] += amp
    prob = float(np.sum(np.abs(amps) ** 2))
    if prob <= 1e-15:
        raise EmptyPostselection("no branch has one photon in each of modes 1-4")
    return StateVector(amps, normalize=True), prob


def mode_matrix(elements: Iterable[Element]) -> np.ndarray:
    """Single-photon transfer matrix ``U[out, in]`` of a chain over all modes."""
    total = np.eye(N_MODES, dtype=complex)
    for el in elements:
        step = np.eye(N_MODES, dtype=complex)
        for src, images in el.mode_map().items():
            step[:, src] = 0
            for dst, c in images:
                step[dst, src] += c
        total = step @ total
    return total


def element_from_dict(desc: Mapping) -> Element:
    """Element from a scenario descriptor such as ``{"type": "HWP", "mode": "b", "angle": 0.39}``."""
    kind = desc.get("type")
    if kind == "HWP":
        return HWP(str(desc["mode"]), float(desc["angle"]))
    if kind in ("PBS", "BS"):
        cls = PBS if kind == "PBS" else BS
        ins, outs = desc["inputs"], desc["outputs"]
        return cls(str(ins[0]), str(ins[1]), str(outs[0]), str(outs[1]))
    raise ValueError(f"unknown optical element {kind!r}")


def element_to_dict(el: Element) -> dict:
    if isinstance(el, HWP):
        return {"type": "HWP", "mode": el.spatial, "angle": el.angle}
    return {
        "type": type(el).__name__,
        "inputs": [el.in1, el.in2],
        "outputs": [el.out1, el.out2],
    }
