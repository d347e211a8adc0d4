"""Built-in scenario suite: every state of the four-photon anyon table plus braiding checks."""
from __future__ import annotations

from .scenarios import SCHEMA, Scenario

MINIMAL = {"type": "minimal"}
READOUT = {"correlation": True, "z_populations": True, "occupancy": True}


def _z(q: int) -> dict:
    return {"op": "pauli", "pauli": "Z", "qubit": q}


def _gate(gate: str, q: int) -> dict:
    return {"op": "clifford", "gate": gate, "qubit": q}


LOOP = {"op": "loop", "plaquettes": [0]}


def _table_row(name: str, description: str, ops: list, phase_pi: float, **extra) -> dict:
    measurements = dict(READOUT)
    expect = {"phase_pi": phase_pi, "fidelity": 1.0, "witness": True,
              "occupied": [0] if phase_pi else []}
    if "overlap" in extra:
        reference, value = extra.pop("overlap")
        measurements["overlap"] = {"reference": reference}
        expect["overlap"] = value
    doc = {
        "schema": SCHEMA,
        "name": name,
        "description": description,
        "lattice": MINIMAL,
        "backend": "both",
        "operations": ops,
        "measurements": measurements,
        "expect": expect,
    }
    doc.update(extra)
    return doc


def _table() -> list[dict]:
    rows = [_table_row("vacuum", "anyonic vacuum |xi> = GHZ^0", [], 0.0)]
    for q in range(1, 5):
        rows.append(_table_row(
            f"e_q{q}", f"single e anyon created by Z{q}",
            [_z(q)], 1.0,
        ))
    for q in (2, 3, 4):
        rows.append(_table_row(
            f"string_q1q{q}", f"string Z1 Z{q} passing through the empty plaquette",
            [_z(1), _z(q)], 0.0,
        ))
    for a, b in ((2, 4), (3, 4), (1, 4)):
        rows.append(_table_row(
            f"populated_q{a}q{b}", f"string Z{a} Z{b} through the plaquette holding e = Z1|xi>",
            [_z(1), _z(a), _z(b)], 1.0,
        ))
    rows.append(_table_row(
        "loop_empty", "m loop C_s around the unpopulated plaquette", [LOOP], 0.0,
        overlap=([], [1.0, 0.0]),
    ))
    rows.append(_table_row(
        "loop_populated", "Z4 C_s Z4: loop around a populated plaquette, anyon removed",
        [_z(4), LOOP, _z(4)], 0.0,
        overlap=([], [-1.0, 0.0]),
    ))
    for q in range(1, 5):
        rows.append(_table_row(
            f"interference_q{q}",
            f"(Z{q})^(1/2) C_s (Z{q})^(-1/2): interference revealing the braiding phase",
            [_gate("S_inv", q), LOOP, _gate("S", q)], 1.0,
            overlap=([_z(q)], [0.0, -1.0]),
        ))
    rows.append(_table_row(
        "alt_path", "(Z1)^(1/2) C_s (Z3)^(-1/2): alternative anyon path",
        [_gate("S_inv", 3), LOOP, _gate("S", 1)], 1.0,
        overlap=([_z(1)], [0.0, -1.0]),
    ))
    return rows


TABLE_ROWS = [doc["name"] for doc in _table()]


def _extras() -> list[dict]:
    grid = {"type": "grid", "width": 4, "height": 4}
    # 4x4 grid: S plaquettes 3, 5, 8, 11, 13; region {3, 8} gives a six-qubit loop
    deformed = {"op": "loop", "plaquettes": [3, 8]}
    inside = {"op": "string", "kind": "E", "from": 5, "to": 8}
    outside = {"op": "string", "kind": "E", "from": 5, "to": 13}
    return [
        {
            "schema": SCHEMA,
            "name": "braiding_minimal",
            "description": "C_s Z1|xi> = -Z1|xi>: global braiding phase on the minimal instance",
            "lattice": MINIMAL,
            "backend": "both",
            "operations": [_z(1), LOOP],
            "measurements": {"overlap": {"reference": [_z(1)]}, "energy": True, "occupancy": True},
            "expect": {"overlap": [-1.0, 0.0], "energy": -3.0, "occupied": [0]},
        },
        {
            "schema": SCHEMA,
            "name": "braiding_lattice_inside",
            "description": "deformed six-qubit m loop on a 4x4 lattice enclosing one e anyon",
            "lattice": grid,
            "backend": "both",
            "operations": [inside, deformed],
            "measurements": {"overlap": {"reference": [inside]}, "occupancy": True, "energy": True},
            "expect": {"overlap": [-1.0, 0.0], "occupied": [5, 8], "energy": -13.0},
        },
        {
            "schema": SCHEMA,
            "name": "braiding_lattice_outside",
            "description": "same deformed loop with both e anyons outside it",
            "lattice": grid,
            "backend": "both",
            "operations": [outside, deformed],
            "measurements": {"overlap": {"reference": [outside]}, "occupancy": True},
            "expect": {"overlap": [1.0, 0.0], "occupied": [5, 13]},
        },
        {
            "schema": SCHEMA,
            "name": "source_ghz",
            "description": "post-selected output of the SPDC / HWP / PBS / BS chain",
            "lattice": MINIMAL,
            "backend": "statevector",
            "source": {"weighting": "equal"},
            "operations": [],
            "measurements": {"correlation": True, "z_populations": True},
            "expect": {"phase_pi": 0.0, "fidelity": 1.0, "success_probability": 1 / 24},
        },
        {
            "schema": SCHEMA,
            "name": "vacuum_noisy",
            "description": "vacuum with calibrated noise and finite count statistics",
            "lattice": MINIMAL,
            "backend": "statevector",
            "operations": [],
            "measurements": {"correlation": True, "z_populations": True},
            "noise": "calibrated",
            "sampling": {"events_per_setting": 20000, "z_events": 100000, "seed": 2008,
                         "bootstrap": 1000},
            "expect": {
                "visibility": {"value": 0.683, "tol": 0.015},
                "P_HHHH": {"value": 0.412, "tol": 0.02},
                "P_VVVV": {"value": 0.396, "tol": 0.02},
                "fidelity": {"value": 0.7455, "tol": 0.01},
                "phase_pi": {"value": 0.0, "tol": 0.03},
                "witness": True,
            },
        },
    ]


def _all() -> dict[str, dict]:
    return {doc["name"]: doc for doc in _table() + _extras()}


def list_builtins() -> list[str]:
    return list(_all())


def builtin(name: str) -> Scenario:
    docs = _all()
    if name not in docs:
        raise KeyError(f"unknown built-in scenario {name!r}")
    return Scenario.from_dict(docs[name])


def builtin_doc(name: str) -> dict:
    return _all()[name]
