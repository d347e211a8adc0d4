"""Declarative scenarios: prepare, manipulate and measure anyonic states.

A scenario is one JSON document::

    {
      "schema": "toricsim.scenario/1",
      "name": "interference_q1",
      "lattice": {"type": "minimal"},
      "backend": "both",
      "operations": [
        {"op": "clifford", "gate": "S_inv", "qubit": 1},
        {"op": "loop", "plaquettes": [0]},
        {"op": "clifford", "gate": "S", "qubit": 1}
      ],
      "measurements": {"correlation": true, "z_populations": true,
                       "overlap": {"reference": [{"op": "pauli", "pauli": "Z", "qubit": 1}]}},
      "expect": {"phase_pi": 1.0, "fidelity": 1.0, "overlap": [0, -1]}
    }

Operations: ``pauli`` (``pauli`` letter + ``qubit``, or ``text`` such as
``"X1 X2"``), ``clifford`` (``gate`` in H, S, S_inv, X, Y, Z + ``qubit``),
``loop`` (product of the listed S plaquettes' ``C_s``) and ``string``
(``kind`` E or M between plaquettes ``from`` and ``to``). Qubits use the
lattice's labels (1..4 on the minimal instance, 0-based on grids).

Optional blocks: ``source`` replaces the lattice vacuum with the post-selected
output of an optical chain, ``noise`` (NoiseModel fields, or ``"calibrated"``)
and ``sampling`` (``events_per_setting``, ``z_events``, ``seed``,
``bootstrap``) switch to simulated count data.
"""
from __future__ import annotations

import copy
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import experiment as ex
from . import optics
from .lattice import ToricLattice, from_descriptor
from .pauli import PauliString
from .stabilizer import CLIFFORD_TABLES, StabilizerState
from .stabilizer import vacuum as stabilizer_vacuum
from .statevector import (
    DensityMatrix,
    StateVector,
    correlation_curve,
    energy,
    inner_product,
    outcome_label,
    vacuum_dense,
    z_populations,
)

SCHEMA = "toricsim.scenario/1"
REPORT_SCHEMA = "toricsim.report/1"
BACKENDS = ("stabilizer", "statevector", "both")
MEASUREMENTS = ("correlation", "z_populations", "occupancy", "energy", "overlap", "plaquettes")
DEFAULT_TOL = {
    "phase_pi": 1e-9 / math.pi,
    "fidelity": 1e-9,
    "overlap": 1e-10,
    "energy": 1e-9,
    "visibility": 1e-9,
    "P_HHHH": 1e-9,
    "P_VVVV": 1e-9,
    "success_probability": 1e-10,
}


class ScenarioError(ValueError):
    """Scenario document violates the schema or references missing sites."""


class BackendError(ScenarioError):
    """A measurement needs a backend the scenario did not select."""


@dataclass
class Scenario:
    name: str
    lattice: dict
    backend: str = "both"
    operations: list = field(default_factory=list)
    measurements: dict = field(default_factory=dict)
    expect: dict = field(default_factory=dict)
    noise: Any = None
    sampling: dict | None = None
    source: dict | None = None
    description: str = ""

    @classmethod
    def from_dict(cls, doc: dict) -> Scenario:
        if not isinstance(doc, dict):
            raise ScenarioError("scenario must be a JSON object")
        if doc.get("schema") != SCHEMA:
            raise ScenarioError(f"schema must be {SCHEMA!r}, got {doc.get('schema')!r}")
        unknown = set(doc) - {
            "schema", "name", "lattice", "backend", "operations", "measurements",
            "expect", "noise", "sampling", "source", "description",
        }
        if unknown:
            raise ScenarioError(f"unknown scenario keys {sorted(unknown)}")
        if "name" not in doc or "lattice" not in doc:
            raise ScenarioError("scenario needs 'name' and 'lattice'")
        sc = cls(
            name=str(doc["name"]),
            lattice=dict(doc["lattice"]),
            backend=doc.get("backend", "both"),
            operations=list(doc.get("operations", [])),
            measurements=dict(doc.get("measurements", {})),
            expect=dict(doc.get("expect", {})),
            noise=doc.get("noise"),
            sampling=doc.get("sampling"),
            source=doc.get("source"),
            description=doc.get("description", ""),
        )
        sc.validate()
        return sc

    @classmethod
    def from_json(cls, text: str) -> Scenario:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        doc = {"schema": SCHEMA, "name": self.name, "lattice": self.lattice, "backend": self.backend,
               "operations": self.operations, "measurements": self.measurements}
        for key in ("expect", "noise", "sampling", "source", "description"):
            val = getattr(self, key)
            if val:
                doc[key] = val
        return doc

    def build_lattice(self) -> ToricLattice:
        try:
            return from_descriptor(self.lattice)
        except (KeyError, TypeError, ValueError) as err:
            raise ScenarioError(f"bad lattice descriptor {self.lattice}: {err}") from None

    def validate(self) -> None:
        if self.backend not in BACKENDS:
            raise ScenarioError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        unknown = set(self.measurements) - set(MEASUREMENTS)
        if unknown:
            raise ScenarioError(f"unknown measurements {sorted(unknown)}")
        lat = self.build_lattice()
        resolve_operations(self.operations, lat)
        if "overlap" in self.measurements:
            ref = self.measurements["overlap"]
            if not isinstance(ref, dict):
                raise ScenarioError("overlap measurement needs {'reference': [...]}")
            resolve_operations(ref.get("reference", []), lat)
        four = lat.qubit_count == 4
        if ("correlation" in self.measurements or "z_populations" in self.measurements) and not four:
            raise ScenarioError("correlation and z-population measurements need a 4-qubit lattice")
        if (self.noise or self.sampling or self.source) and not four:
            raise ScenarioError("noise, sampling and optical sources need a 4-qubit lattice")
        if self.backend == "stabilizer":
            dense_only = [m for m in ("overlap", "energy") if m in self.measurements]
            if self.noise or self.sampling:
                dense_only.append("noise/sampling")
            if self.source:
                dense_only.append("optical source")
            if dense_only:
                raise BackendError(
                    f"scenario {self.name!r}: {', '.join(dense_only)} need the statevector "
                    "engine; use backend 'statevector' or 'both'"
                )
        if self.noise is not None and self.noise != "calibrated":
            ex.NoiseModel.from_dict(self.noise)
        if self.sampling is not None:
            n = self.sampling.get("events_per_setting", 0)
            if not isinstance(n, int) or n <= 0:
                raise ScenarioError("sampling.events_per_setting must be a positive integer")


# -- operations -------------------------------------------------------------


def _qubit(op: dict, lat: ToricLattice) -> int:
    try:
        q = int(op["qubit"]) - lat.label_base
    except (KeyError, TypeError, ValueError):
        raise ScenarioError(f"operation {op} needs an integer 'qubit'") from None
    if not 0 <= q < lat.qubit_count:
        raise ScenarioError(f"qubit {op['qubit']} not in lattice")
    return q


def resolve_operations(ops: Iterable[dict], lat: ToricLattice) -> list[tuple]:
    """Turn operation dicts into ``("pauli", PauliString)`` / ``("clifford", gate, q)``."""
    out = []
    for op in ops:
        kind = op.get("op") if isinstance(op, dict) else None
        try:
            if kind == "pauli":
                if "text" in op:
                    p = lat.pauli(op["text"])
                else:
                    p = PauliString.single(lat.qubit_count, str(op["pauli"]), _qubit(op, lat))
                out.append(("pauli", p))
            elif kind == "clifford":
                gate = op.get("gate")
                if gate not in CLIFFORD_TABLES:
                    raise ScenarioError(f"unknown Clifford gate {gate!r}")
                out.append(("clifford", gate, _qubit(op, lat)))
            elif kind == "loop":
                out.append(("pauli", lat.loop_around([int(k) for k in op["plaquettes"]])))
            elif kind == "string":
                path = lat.string_between(str(op["kind"]), int(op["from"]), int(op["to"]))
                out.append(("pauli", path.operator))
            else:
                raise ScenarioError(f"unknown operation {op!r}")
        except ScenarioError:
            raise
        except (KeyError, IndexError, TypeError, ValueError) as err:
            raise ScenarioError(f"bad operation {op!r}: {err}") from None
    return out


def run_stabilizer(lat: ToricLattice, ops: Sequence[tuple]) -> StabilizerState:
    st = stabilizer_vacuum(lat)
    for op in ops:
        st = st.apply_pauli(op[1]) if op[0] == "pauli" else st.apply_clifford1(op[1], op[2])
    return st


def run_statevector(lat: ToricLattice, ops: Sequence[tuple], start: StateVector | None = None) -> StateVector:
    st = vacuum_dense(lat) if start is None else start
    for op in ops:
        st = st.apply_pauli_string(op[1]) if op[0] == "pauli" else st.apply_gate(op[1], op[2])
    return st


# -- stabilizer-side four-qubit readout ------------------------------------


def stabilizer_correlation_curve(st: StabilizerState, gammas: Iterable[float]) -> list[float]:
    """``<c_xy(gamma)>`` by expanding the product into 16 X/Y Pauli strings."""
    terms = []
    for letters in itertools.product("YX", repeat=4):
        p = PauliString(4)
        for q, letter in enumerate(letters):
            p = p * PauliString.single(4, letter, q)
        terms.append((letters.count("Y"), st.expectation(p)))
    out = []
    for g in gammas:
        c, s = math.cos(g), math.sin(g)
        out.append(float(sum(val * c**ny * s ** (4 - ny) for ny, val in terms)))
    return out


def stabilizer_z_populations(st: StabilizerState) -> np.ndarray:
    """Populations from the 16 Z-string expectations (inverse Walsh transform)."""
    probs = np.zeros(16)
    for mask in range(16):
        val = st.expectation(PauliString(4, 0, mask))
        for b in range(16):
            probs[b] += val * (-1) ** (b & mask).bit_count()
    return probs / 16


def _occupancy(values: Sequence[float], lat: ToricLattice) -> dict:
    occ = {}
    for plaq, v in zip(lat.plaquettes, values):
        occ[str(plaq.id)] = "occupied" if v < -1 + 1e-9 else "vacuum" if v > 1 - 1e-9 else "indefinite"
    return {
        "plaquettes": occ,
        "e": [p.id for p, v in zip(lat.plaquettes, values) if p.kind == "S" and v < -1 + 1e-9],
        "m": [p.id for p, v in zip(lat.plaquettes, values) if p.kind == "P" and v < -1 + 1e-9],
    }


# -- run --------------------------------------------------------------------


def _clean(x):
    """JSON-friendly, rounded copy so reports are byte-stable."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return round(float(x), 12) + 0.0
    return x


def _expected(spec) -> tuple[Any, float | None]:
    if isinstance(spec, dict):
        return spec["value"], spec.get("tol")
    return spec, None


def _check(name: str, spec, observed, default_tol: float | None) -> dict:
    want, tol = _expected(spec)
    tol = default_tol if tol is None else tol
    if name == "phase_pi":
        dist = ex.phase_distance(math.pi * observed, math.pi * want) / math.pi
        passed = dist <= tol
    elif isinstance(want, bool):
        passed = bool(observed) == want
    elif name == "occupied":
        passed = sorted(observed) == sorted(want)
    elif isinstance(want, (list, tuple)):
        passed = all(abs(o - w) <= tol for o, w in zip(observed, want))
    else:
        passed = abs(observed - want) <= tol
    return {"name": name, "expected": want, "observed": observed, "tolerance": tol, "passed": bool(passed)}


@dataclass
class Report:
    scenario: str
    data: dict

    @property
    def passed(self) -> bool:
        return self.data["passed"]

    @property
    def results(self) -> dict:
        return self.data["results"]

    def to_json(self) -> str:
        return json.dumps(self.data, indent=2, sort_keys=True) + "\n"


def run(scenario: Scenario | dict, seed: int | None = None, backend: str | None = None) -> Report:
    """Execute a scenario and collect every requested measurement."""
    sc = Scenario.from_dict(scenario) if isinstance(scenario, dict) else scenario
    if backend is not None and backend != sc.backend:
        sc = copy.deepcopy(sc)
        sc.backend = backend
        sc.validate()
    lat = sc.build_lattice()
    ops = resolve_operations(sc.operations, lat)
    meas = sc.measurements
    results: dict[str, Any] = {}
    use_stab = sc.backend in ("stabilizer", "both")
    use_dense = sc.backend in ("statevector", "both")

    stab = run_stabilizer(lat, ops) if use_stab else None
    dense = None
    if use_dense:
        start = None
        if sc.source:
            start = _prepare_source(sc.source, results)
        dense = run_statevector(lat, ops, start)

    plaq_ops = lat.terms()
    vals_stab = stab.expectations(plaq_ops) if stab else None
    vals_dense = [dense.expectation(p).real for p in plaq_ops] if dense else None
    if "plaquettes" in meas or sc.backend == "both":
        block = {}
        if vals_stab is not None:
            block["stabilizer"] = vals_stab
        if vals_dense is not None:
            block["statevector"] = vals_dense
        if vals_stab is not None and vals_dense is not None:
            block["agree"] = all(abs(a - b) < 1e-9 for a, b in zip(vals_stab, vals_dense))
        results["plaquettes"] = block
    if "occupancy" in meas:
        results["occupancy"] = _occupancy(vals_stab if vals_stab is not None else vals_dense, lat)
    if "energy" in meas:
        results["energy"] = energy(dense, lat)
    if "overlap" in meas:
        ref_ops = resolve_operations(meas["overlap"].get("reference", []), lat)
        ref = run_statevector(lat, ref_ops)
        ov = inner_product(ref, dense)
        results["overlap"] = [ov.real, ov.imag]

    noise = None
    if sc.noise is not None:
        noise = ex.calibrated_noise() if sc.noise == "calibrated" else ex.NoiseModel.from_dict(sc.noise)
    want_curve = "correlation" in meas
    want_pop = "z_populations" in meas
    if want_curve or want_pop:
        corr = meas.get("correlation")
        gammas = corr.get("gammas") if isinstance(corr, dict) else None
        gammas = [float(g) for g in gammas] if gammas else ex.default_gammas()
        if dense is not None:
            state: StateVector | DensityMatrix = dense
            if noise is not None:
                state = ex.apply_noise(dense, noise)
            if sc.sampling:
                _sampled_readout(state, gammas, sc.sampling, seed, results, want_curve, want_pop)
            else:
                _exact_readout(correlation_curve(state, gammas), z_populations(state),
                               gammas, results, want_curve, want_pop)
            if stab is not None and noise is None:
                cross = stabilizer_correlation_curve(stab, gammas)
                results["cross_check"] = {
                    "correlation_agree": bool(np.allclose(cross, correlation_curve(dense, gammas), atol=1e-9)),
                    "z_populations_agree": bool(np.allclose(stabilizer_z_populations(stab), z_populations(dense), atol=1e-12)),
                }
        else:
            _exact_readout(stabilizer_correlation_curve(stab, gammas), stabilizer_z_populations(stab),
                           gammas, results, want_curve, want_pop)

    checks = _run_checks(sc.expect, results)
    data = {
        "schema": REPORT_SCHEMA,
        "scenario": sc.name,
        "description": sc.description,
        "backend": sc.backend,
        "lattice": lat.descriptor(),
        "noise": noise.to_dict() if noise else None,
        "seed": _seed(sc, seed),
        "results": results,
        "checks": checks,
        "passed": all(c["passed"] for c in checks)
        and results.get("plaquettes", {}).get("agree", True)
        and all(results.get("cross_check", {}).values()),
    }
    return Report(sc.name, _clean(data))


def _seed(sc: Scenario, seed: int | None) -> int | None:
    if seed is not None:
        return int(seed)
    if sc.sampling:
        return int(sc.sampling.get("seed", 0))
    return None


def _prepare_source(source: dict, results: dict) -> StateVector:
    fock = optics.spdc_second_order(source.get("weighting", "equal"))
    chain_desc = source.get("chain")
    chain = [optics.element_from_dict(d) for d in chain_desc] if chain_desc else optics.ghz_source_chain()
    psi, prob = optics.postselect_one_per_mode(optics.apply_chain(fock, chain))
    results["source"] = {
        "success_probability": prob,
        "chain": [optics.element_to_dict(el) for el in chain],
    }
    return psi


def _with_fidelity(results: dict, vis: float, pops: np.ndarray | None) -> None:
    if pops is None:
        return
    f, witness = ex.fidelity_and_witness(min(vis, 1.0), float(pops[0]), float(pops[15]))
    results["fidelity"] = {"F": f, "witness": witness}


def _exact_readout(curve, pops, gammas, results, want_curve, want_pop) -> None:
    pops = np.asarray(pops)
    if want_pop:
        results["z_populations"] = {
            "outcome": [outcome_label(k) for k in range(16)],
            "probability": list(pops),
            "c_z": float(pops @ ex.PARITY),
        }
    if want_curve:
        fit = ex.fourier_fit((g, v, 1.0) for g, v in zip(gammas, curve))
        results["correlation"] = {
            "gamma": gammas,
            "value": curve,
            "stderr": [0.0] * len(gammas),
            "fit": fit.to_dict(),
        }
        _with_fidelity(results, fit.visibility, pops if want_pop else None)


def _sampled_readout(state, gammas, sampling, seed, results, want_curve, want_pop) -> None:
    seed = int(sampling.get("seed", 0)) if seed is None else int(seed)
    n = int(sampling["events_per_setting"])
    records = ex.measure(state, gammas, n, seed, z_events=sampling.get("z_events"))
    z_rec, ang = records[0], records[1:]
    boot = ex.error_bars(records if want_curve else [z_rec],
                         n_boot=int(sampling.get("bootstrap", 1000)), seed=seed)
    results["counts"] = [{"gamma": r.setting, "counts": list(r.counts)} for r in records]
    results["uncertainties"] = boot
    if want_pop:
        c_z, c_err = ex.estimate_correlation(z_rec)
        results["z_populations"] = {
            "outcome": [outcome_label(k) for k in range(16)],
            "probability": list(z_rec.frequencies),
            "c_z": c_z,
            "c_z_stderr": c_err,
        }
    if want_curve:
        pts = ex.fit_points(ang)
        fit = ex.fourier_fit(pts)
        results["correlation"] = {
            "gamma": [p[0] for p in pts],
            "value": [p[1] for p in pts],
            "stderr": [ex.estimate_correlation(r)[1] for r in ang],
            "fit": fit.to_dict(),
        }
        _with_fidelity(results, fit.visibility, z_rec.frequencies if want_pop else None)


def _run_checks(expect: dict, results: dict) -> list[dict]:
    getters = {
        "phase_pi": lambda r: r["correlation"]["fit"]["phase_pi"],
        "visibility": lambda r: r["correlation"]["fit"]["visibility"],
        "fidelity": lambda r: r["fidelity"]["F"],
        "witness": lambda r: r["fidelity"]["witness"],
        "P_HHHH": lambda r: r["z_populations"]["probability"][0],
        "P_VVVV": lambda r: r["z_populations"]["probability"][15],
        "overlap": lambda r: r["overlap"],
        "energy": lambda r: r["energy"],
        "occupied": lambda r: r["occupancy"]["e"] + r["occupancy"]["m"],
        "success_probability": lambda r: r["source"]["success_probability"],
    }
    checks = []
    for name, spec in expect.items():
        if name not in getters:
            raise ScenarioError(f"unknown expectation {name!r}")
        try:
            observed = getters[name](results)
        except KeyError:
            raise ScenarioError(f"expectation {name!r} needs a measurement the scenario lacks") from None
        checks.append(_check(name, spec, observed, DEFAULT_TOL.get(name)))
    return checks


def run_many(scenarios: Sequence[Scenario], seed: int | None = None, workers: int | None = None) -> list[Report]:
    """Run independent scenarios, possibly in parallel; output keeps input order."""
    if workers == 1 or len(scenarios) < 2:
        return [run(sc, seed=seed) for sc in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: run(sc, seed=seed), scenarios))


# -- exports ----------------------------------------------------------------


def curve_csv(report: Report) -> str:
    corr = report.results["correlation"]
    lines = ["gamma,value,stderr"]
    lines += [f"{g!r},{v!r},{s!r}" for g, v, s in zip(corr["gamma"], corr["value"], corr["stderr"])]
    return "\n".join(lines) + "\n"


def population_csv(report: Report) -> str:
    pops = report.results["z_populations"]
    lines = ["outcome,probability"]
    lines += [f"{o},{p!r}" for o, p in zip(pops["outcome"], pops["probability"])]
    return "\n".join(lines) + "\n"


def counts_csv(report: Report) -> str:
    records = [ex.CountRecord(c["gamma"], c["counts"]) for c in report.results["counts"]]
    return ex.records_to_csv(records)


def export(report: Report, fmt: str) -> dict[str, str]:
    """Serialise a report: ``{"json": ...}`` or one CSV per available table."""
    fmt = fmt.lower()
    stem = report.scenario
    if fmt == "json":
        return {f"{stem}.json": report.to_json()}
    if fmt == "csv":
        files = {}
        if "correlation" in report.results:
            files[f"{stem}_curve.csv"] = curve_csv(report)
        if "z_populations" in report.results:
            files[f"{stem}_populations.csv"] = population_csv(report)
        if "counts" in report.results:
            files[f"{stem}_counts.csv"] = counts_csv(report)
        return files
    raise ValueError(f"unknown export format {fmt!r}; expected json or csv")
