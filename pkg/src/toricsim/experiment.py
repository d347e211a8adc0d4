"""Noise model, count sampling and the GHZ estimation pipeline.

The pipeline mirrors a four-photon polarisation experiment: Z-basis
populations, parity correlations ``<c_xy(gamma)>`` at a schedule of analyser
angles, a weighted least-squares fit of the even Fourier harmonics up to
order four, and the fidelity ``F = (V + P_HHHH + P_VVVV)/2`` used as a
genuine four-partite entanglement witness (``F > 1/2``).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .statevector import (
    GATES,
    DensityMatrix,
    StateVector,
    ghz,
    kron_all,
)

Z_BASIS = "z"
N_OUTCOMES = 16
DEFAULT_SETTINGS = 16

# parity (-1)^{popcount} of each of the 16 outcome indices
PARITY = 1 - 2 * (np.bitwise_count(np.arange(N_OUTCOMES)) & 1).astype(float)


def default_gammas(n: int = DEFAULT_SETTINGS) -> list[float]:
    """``n`` equidistant analyser angles over ``[0, pi)``."""
    return [math.pi * k / n for k in range(n)]


def wrap_phase(phi: float) -> float:
    """Wrap to ``(-pi, pi]``."""
    out = math.pi - (math.pi - phi) % (2 * math.pi)
    return out


def phase_distance(a: float, b: float) -> float:
    """Absolute circular distance between two angles."""
    return abs(wrap_phase(a - b))


# -- noise ------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Three-parameter noise on a four-qubit state.

    Attributes:
        white: admixture of the maximally mixed state.
        dephasing: fractional loss of the HHHH/VVVV coherence.
        tilt: population imbalance between HHHH (+) and VVVV (-).
    """

    white: float = 0.0
    dephasing: float = 0.0
    tilt: float = 0.0

    def __post_init__(self):
        if not 0 <= self.white <= 1:
            raise ValueError(f"white noise fraction {self.white} outside [0, 1]")
        if not 0 <= self.dephasing <= 1:
            raise ValueError(f"dephasing strength {self.dephasing} outside [0, 1]")
        if not -1 <= self.tilt <= 1:
            raise ValueError(f"population tilt {self.tilt} outside [-1, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> NoiseModel:
        return cls(float(d.get("white", 0)), float(d.get("dephasing", 0)), float(d.get("tilt", 0)))

    def to_dict(self) -> dict:
        return asdict(self)


def apply_noise(rho: DensityMatrix | StateVector, nm: NoiseModel) -> DensityMatrix:
    """``(1 - white) * D(rho) + white * 1/16``.

    ``D`` first reweights the HHHH and VVVV amplitudes by ``sqrt(1 +- tilt)``
    (renormalised filter) and then applies a Z phase flip on qubit 0 with
    probability ``dephasing/2``, which multiplies the HHHH/VVVV coherence by
    ``1 - dephasing``. Each step is completely positive, so physical inputs
    stay physical.
    """
    if isinstance(rho, StateVector):
        rho = rho.density_matrix()
    r = rho.rho.copy()
    if nm.tilt:
        k = np.ones(N_OUTCOMES)
        k[0] = math.sqrt(1 + nm.tilt)
        k[15] = math.sqrt(1 - nm.tilt)
        r = (k[:, None] * r) * k[None, :]
        tr = np.trace(r).real
        if tr <= 0:
            raise ValueError("tilt removes all weight from the state")
        r = r / tr
    if nm.dephasing:
        z0 = kron_all([GATES["Z"], GATES["I"], GATES["I"], GATES["I"]])
        q = nm.dephasing / 2
        r = (1 - q) * r + q * (z0 @ r @ z0)
    if nm.white:
        r = (1 - nm.white) * r + nm.white * np.eye(N_OUTCOMES) / N_OUTCOMES
    return DensityMatrix(r)


def ghz_observables(rho: DensityMatrix) -> dict[str, float]:
    """Exact ``V = 2|rho_HHHH,VVVV|``, ``P_HHHH``, ``P_VVVV`` and the phase."""
    c = rho.coherence()
    return {
        "V": 2 * abs(c),
        "P_HHHH": float(rho.rho[0, 0].real),
        "P_VVVV": float(rho.rho[15, 15].real),
        # rho_{0,15} = e^{-i phi}/2 for GHZ^phi
        "phi": wrap_phase(-math.atan2(c.imag, c.real)) if abs(c) > 0 else 0.0,
    }


def calibrate(
    targets: dict[str, float], phi: float = 0.0, x0: Sequence[float] = (0.1, 0.1, 0.0)
) -> NoiseModel:
    """Least-squares fit of the noise parameters to ``V``, ``P_HHHH``, ``P_VVVV``."""
    base = ghz(phi)
    keys = ("V", "P_HHHH", "P_VVVV")

    def resid(p):
        obs = ghz_observables(apply_noise(base, NoiseModel(*p)))
        return [obs[k] - targets[k] for k in keys]

    sol = least_squares(resid, x0, bounds=([0, 0, -1], [1, 1, 1]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return NoiseModel(*(float(v) for v in sol.x))


def load_calibration() -> dict:
    """Stored calibration: targets plus the fitted :class:`NoiseModel` parameters."""
    text = resources.files("toricsim").joinpath("data/calibration.json").read_text()
    return json.loads(text)


def calibrated_noise() -> NoiseModel:
    return NoiseModel.from_dict(load_calibration()["noise"])


# -- sampling ---------------------------------------------------------------


def _basis_rows(gamma: float) -> np.ndarray:
    # rows are <+gamma| and <-gamma| with |+-gamma> = (|0> +- i e^{-i gamma} |1>)/sqrt2,
    # the eigenvectors of cos(gamma) Y + sin(gamma) X
    phase = 1j * np.exp(-1j * gamma)
    kets = np.array([[1, phase], [1, -phase]]) / np.sqrt(2)
    return kets.conj()


def outcome_probabilities(state: DensityMatrix | StateVector, setting: float | str) -> np.ndarray:
    """Probabilities of the 16 product outcomes; bit ``q`` set means qubit ``q`` gave -1."""
    rho = state.density_matrix() if isinstance(state, StateVector) else state
    if rho.n_qubits != 4:
        raise ValueError("outcome probabilities need a 4-qubit state")
    if setting == Z_BASIS:
        probs = rho.probabilities()
    else:
        try:
            gamma = float(setting)
        except (TypeError, ValueError):
            raise ValueError(f"invalid measurement setting {setting!r}") from None
        w = kron_all([_basis_rows(gamma)] * 4)
        probs = np.einsum("ij,jk,ik->i", w, rho.rho, w.conj()).real
    probs = np.clip(probs, 0, None)
    return probs / probs.sum()


@dataclass
class CountRecord:
    """Outcome counts of one measurement setting (``"z"`` or an angle)."""

    setting: float | str
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (N_OUTCOMES,) or (self.counts < 0).any():
            raise ValueError("counts must be 16 nonnegative integers")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def is_z(self) -> bool:
        return self.setting == Z_BASIS

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total


def _rng(seed: int | np.random.Generator | np.random.SeedSequence | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_counts(
    state: DensityMatrix | StateVector,
    setting: float | str,
    n_events: int,
    seed: int | np.random.Generator | np.random.SeedSequence | None = None,
) -> CountRecord:
    """Multinomial draw of ``n_events`` detection events in the given setting."""
    if n_events <= 0:
        raise ValueError("n_events must be positive")
    probs = outcome_probabilities(state, setting)
    counts = _rng(seed).multinomial(n_events, probs)
    return CountRecord(setting if setting == Z_BASIS else float(setting), counts)


def measure(
    state: DensityMatrix | StateVector,
    gammas: Sequence[float],
    events_per_setting: int,
    seed: int,
    z_events: int | None = None,
) -> list[CountRecord]:
    """One Z-basis record followed by one record per angle, each on its own stream."""
    streams = np.random.SeedSequence(seed).spawn(len(gammas) + 1)
    records = [sample_counts(state, Z_BASIS, z_events or events_per_setting, streams[0])]
    for g, ss in zip(gammas, streams[1:]):
        records.append(sample_counts(state, g, events_per_setting, ss))
    return records


def records_to_csv(records: Iterable[CountRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["gamma", "outcome_index", "count"])
    for rec in records:
        setting = rec.setting if rec.is_z else repr(float(rec.setting))
        for k, c in enumerate(rec.counts):
            w.writerow([setting, k, int(c)])
    return buf.getvalue()


def records_from_csv(text: str) -> list[CountRecord]:
    rows: dict[str, np.ndarray] = {}
    for row in csv.DictReader(io.StringIO(text)):
        key = row["gamma"]
        rows.setdefault(key, np.zeros(N_OUTCOMES, dtype=np.int64))[int(row["outcome_index"])] = int(row["count"])
    return [CountRecord(k if k == Z_BASIS else float(k), v) for k, v in rows.items()]


# -- estimators -------------------------------------------------------------


def estimate_correlation(rec: CountRecord) -> tuple[float, float]:
    """Mean of the four-fold product of +-1 outcomes and its binomial standard error."""
    n = rec.total
    if n == 0:
        raise ValueError("empty count record")
    value = float(rec.counts @ PARITY) / n
    return value, math.sqrt(max(1 - value * value, 0.0) / n)


FIT_COLUMNS = ("a0", "a1", "b1", "a2", "b2")


def _design(gammas: np.ndarray) -> np.ndarray:
    g = np.asarray(gammas, dtype=float)
    return np.column_stack([
        np.ones_like(g), np.cos(2 * g), np.sin(2 * g), np.cos(4 * g), np.sin(4 * g)
    ])


@dataclass
class FitResult:
    """Even Fourier components up to order four plus the derived visibility and phase.

    ``a2 = V cos(phi)`` and ``b2 = -V sin(phi)``, so the order-four part of the
    curve is ``V cos(4 gamma + phi)``.
    """

    coefficients: dict[str, float]
    visibility: float
    phase: float
    stderr: dict[str, float]
    chi2: float = 0.0
    covariance: np.ndarray = field(default=None, repr=False)

    @property
    def phase_pi(self) -> float:
        return self.phase / math.pi

    def to_dict(self) -> dict:
        return {
            "coefficients": self.coefficients,
            "visibility": self.visibility,
            "phase": self.phase,
            "phase_pi": self.phase_pi,
            "stderr": self.stderr,
            "chi2": self.chi2,
        }


def fourier_fit(points: Iterable[tuple[float, float, float]]) -> FitResult:
    """Weighted least squares of ``sum_k a_k cos(2k g) + b_k sin(2k g)``, ``k <= 2``.

    Args:
        points: ``(gamma, value, sigma)`` triples; ``sigma`` must be positive.

    Raises:
        ValueError: fewer than five distinct angles or a singular design.
    """
    pts = np.array(list(points), dtype=float).reshape(-1, 3)
    g, y, sigma = pts[:, 0], pts[:, 1], pts[:, 2]
    if (sigma <= 0).any():
        raise ValueError("sigma must be positive")
    if len(np.unique(np.round(np.mod(g, math.pi), 12))) < 5:
        raise ValueError("need at least five distinct angles in [0, pi)")
    a = _design(g)
    w = 1 / sigma**2
    normal = a.T @ (w[:, None] * a)
    if np.linalg.matrix_rank(normal, tol=1e-10 * np.abs(normal).max()) < a.shape[1]:
        raise ValueError("rank-deficient design: angles too few or clustered")
    cov = np.linalg.inv(normal)
    beta = cov @ (a.T @ (w * y))
    resid = y - a @ beta
    chi2 = float(np.sum(w * resid**2))

    coeffs = dict(zip(FIT_COLUMNS, (float(v) for v in beta)))
    a2, b2 = coeffs["a2"], coeffs["b2"]
    vis = math.hypot(a2, b2)
    phi = wrap_phase(math.atan2(-b2, a2))
    stderr = {k: float(math.sqrt(cov[i, i])) for i, k in enumerate(FIT_COLUMNS)}
    # first-order propagation from (a2, b2)
    c = cov[3:, 3:]
    if vis > 0:
        jv = np.array([a2, b2]) / vis
        jp = np.array([b2, -a2]) / vis**2
        stderr["visibility"] = float(math.sqrt(max(jv @ c @ jv, 0.0)))
        stderr["phase"] = float(math.sqrt(max(jp @ c @ jp, 0.0)))
    else:
        stderr["visibility"] = float(math.sqrt(max(c[0, 0], c[1, 1])))
        stderr["phase"] = math.pi
    return FitResult(coeffs, vis, phi, stderr, chi2, cov)


def fidelity_and_witness(visibility: float, p_hhhh: float, p_vvvv: float) -> tuple[float, bool]:
    """GHZ fidelity ``(V + P_HHHH + P_VVVV)/2`` and whether it exceeds 1/2."""
    for name, v in (("visibility", visibility), ("P_HHHH", p_hhhh), ("P_VVVV", p_vvvv)):
        if not 0 <= v <= 1 + 1e-12:
            raise ValueError(f"{name}={v} outside [0, 1]")
    f = (visibility + p_hhhh + p_vvvv) / 2
    return f, f > 0.5


def fit_points(records: Iterable[CountRecord]) -> list[tuple[float, float, float]]:
    """``(gamma, value, sigma)`` per angle record; sigma floored at ``1/N``."""
    out = []
    for rec in records:
        if rec.is_z:
            continue
        v, s = estimate_correlation(rec)
        out.append((float(rec.setting), v, max(s, 1 / rec.total)))
    return out


def analyze(records: Sequence[CountRecord]) -> dict[str, float]:
    """Central values of every derived quantity available from ``records``."""
    out: dict[str, float] = {}
    z = [r for r in records if r.is_z]
    if z:
        freq = z[0].frequencies
        out["P_HHHH"] = float(freq[0])
        out["P_VVVV"] = float(freq[15])
        out["c_z"] = estimate_correlation(z[0])[0]
    pts = fit_points(records)
    if len(pts) >= 5:
        fit = fourier_fit(pts)
        out["V"] = fit.visibility
        out["phi"] = fit.phase
        if z:
            out["F"], _ = fidelity_and_witness(
                min(fit.visibility, 1.0), out["P_HHHH"], out["P_VVVV"]
            )
    return out


def error_bars(
    records: Sequence[CountRecord], n_boot: int = 1000, seed: int = 0
) -> dict[str, float]:
    """Nonparametric bootstrap standard deviations of the :func:`analyze` quantities.

    Each record is resampled multinomially from its own observed frequencies;
    the Fourier fit reuses the weights of the original data so the resampled
    fits are a single matrix product.
    """
    if not records:
        raise ValueError("empty record batch")
    rng = np.random.default_rng(seed)
    draws = [rng.multinomial(r.total, r.frequencies, size=n_boot) for r in records]
    central = analyze(records)
    samples: dict[str, np.ndarray] = {}

    z_idx = [k for k, r in enumerate(records) if r.is_z]
    if z_idx:
        d = draws[z_idx[0]] / records[z_idx[0]].total
        samples["P_HHHH"] = d[:, 0]
        samples["P_VVVV"] = d[:, 15]
        samples["c_z"] = d @ PARITY

    ang = [k for k, r in enumerate(records) if not r.is_z]
    if len(ang) >= 5:
        pts = fit_points([records[k] for k in ang])
        g = np.array([p[0] for p in pts])
        w = 1 / np.array([p[2] for p in pts]) ** 2
        a = _design(g)
        solve = np.linalg.solve(a.T @ (w[:, None] * a), (a * w[:, None]).T)
        vals = np.column_stack([draws[k] @ PARITY / records[k].total for k in ang])
        beta = vals @ solve.T
        vis = np.hypot(beta[:, 3], beta[:, 4])
        phi = np.arctan2(-beta[:, 4], beta[:, 3])
        samples["V"] = vis
        # spread about the central phase, unwrapped
        samples["phi"] = np.angle(np.exp(1j * (phi - central["phi"])))
        if z_idx:
            samples["F"] = (np.minimum(vis, 1.0) + samples["P_HHHH"] + samples["P_VVVV"]) / 2
    return {k: float(np.std(v, ddof=1)) if n_boot > 1 else 0.0 for k, v in samples.items()}
