import math

import numpy as np
import pytest

from toricsim.experiment import (
    PARITY,
    Z_BASIS,
    CountRecord,
    NoiseModel,
    analyze,
    apply_noise,
    calibrate,
    default_gammas,
    error_bars,
    estimate_correlation,
    fidelity_and_witness,
    fit_points,
    fourier_fit,
    ghz_observables,
    load_calibration,
    measure,
    outcome_probabilities,
    phase_distance,
    records_from_csv,
    records_to_csv,
    sample_counts,
    wrap_phase,
)
from toricsim.statevector import StateVector, correlation_curve, ghz


def _closed_form(nm: NoiseModel) -> dict:
    # GHZ^0 through tilt filter, coherence damping and white admixture, by hand
    w, d, t = nm.white, nm.dephasing, nm.tilt
    return {
        "V": (1 - w) * (1 - d) * math.sqrt(1 - t * t),
        "P_HHHH": (1 - w) * (1 + t) / 2 + w / 16,
        "P_VVVV": (1 - w) * (1 - t) / 2 + w / 16,
    }


def _random_state(rng, n=4):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(v, normalize=True)


def test_zero_noise_is_identity(rng):
    st = _random_state(rng)
    assert np.allclose(apply_noise(st, NoiseModel()).rho, st.density_matrix().rho)


def test_noise_keeps_states_physical(rng):
    for _ in range(1000):
        nm = NoiseModel(rng.random(), rng.random(), rng.uniform(-0.99, 0.99))
        rho = apply_noise(_random_state(rng), nm)
        assert rho.is_physical(tol=1e-10)


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(white=1.5)
    with pytest.raises(ValueError):
        NoiseModel(dephasing=-0.1)
    with pytest.raises(ValueError):
        NoiseModel(tilt=2)
    nm = NoiseModel(0.1, 0.2, 0.3)
    assert NoiseModel.from_dict(nm.to_dict()) == nm


def test_observables_match_closed_form(rng):
    for _ in range(50):
        nm = NoiseModel(rng.random(), rng.random(), rng.uniform(-0.9, 0.9))
        obs = ghz_observables(apply_noise(ghz(0.0), nm))
        for k, v in _closed_form(nm).items():
            assert obs[k] == pytest.approx(v, abs=1e-12)


def test_fidelity_identity(rng):
    # (V + P_HHHH + P_VVVV)/2 equals <GHZ|rho|GHZ> for GHZ-diagonal noise
    for phi in (0.0, math.pi, 1.1):
        for _ in range(20):
            nm = NoiseModel(rng.random(), rng.random(), rng.uniform(-0.9, 0.9))
            rho = apply_noise(ghz(phi), nm)
            obs = ghz_observables(rho)
            f, _ = fidelity_and_witness(obs["V"], obs["P_HHHH"], obs["P_VVVV"])
            assert f == pytest.approx(rho.fidelity(ghz(phi)), abs=1e-12)
            assert phase_distance(obs["phi"], phi) < 1e-12


def test_stored_calibration_reproduces_targets(calibrated):
    cal = load_calibration()
    obs = _closed_form(calibrated)
    for k, v in cal["targets"].items():
        assert obs[k] == pytest.approx(v, abs=1e-9)
    f, ok = fidelity_and_witness(obs["V"], obs["P_HHHH"], obs["P_VVVV"])
    assert f == pytest.approx(0.7455, abs=1e-9) and ok


def test_calibrate_recovers_stored_values(calibrated):
    nm = calibrate(load_calibration()["targets"])
    for k in ("white", "dephasing", "tilt"):
        assert getattr(nm, k) == pytest.approx(getattr(calibrated, k), abs=1e-7)


def test_fidelity_and_witness_examples():
    f, ok = fidelity_and_witness(0.683, 0.412, 0.396)
    assert f == pytest.approx(0.7455) and ok
    assert fidelity_and_witness(1, 0.5, 0.5) == (1.0, True)
    assert fidelity_and_witness(0, 0.5, 0.5) == (0.5, False)
    with pytest.raises(ValueError):
        fidelity_and_witness(1.2, 0.5, 0.5)


def test_phase_helpers():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    assert phase_distance(math.pi - 0.01, -math.pi + 0.01) == pytest.approx(0.02)
    assert default_gammas(4) == pytest.approx([0, math.pi / 4, math.pi / 2, 3 * math.pi / 4])


def test_outcome_probabilities_examples():
    g = ghz(0.0)
    z = outcome_probabilities(g, Z_BASIS)
    assert z[0] == pytest.approx(0.5) and z[15] == pytest.approx(0.5)
    # at gamma = 0 every qubit is read in Y; GHZ^0 has <YYYY> = +1
    p = outcome_probabilities(g, 0.0)
    assert p @ PARITY == pytest.approx(1)
    assert p @ PARITY == pytest.approx(correlation_curve(g, [0.0])[0])
    with pytest.raises(ValueError):
        outcome_probabilities(g, "x")


def test_parity_expectation_matches_curve(rng):
    st = _random_state(rng)
    for gamma in default_gammas():
        p = outcome_probabilities(st, gamma)
        assert p @ PARITY == pytest.approx(correlation_curve(st, [gamma])[0], abs=1e-12)


def test_sampling_is_deterministic():
    a = sample_counts(ghz(0.0), 0.3, 1000, seed=7)
    b = sample_counts(ghz(0.0), 0.3, 1000, seed=7)
    assert np.array_equal(a.counts, b.counts) and a.total == 1000
    recs = measure(ghz(0.0), default_gammas(), 100, seed=3, z_events=500)
    assert recs[0].is_z and recs[0].total == 500
    assert [r.total for r in recs[1:]] == [100] * 16
    again = measure(ghz(0.0), default_gammas(), 100, seed=3, z_events=500)
    assert all(np.array_equal(x.counts, y.counts) for x, y in zip(recs, again))
    with pytest.raises(ValueError):
        sample_counts(ghz(0.0), 0.0, 0)


def test_estimate_correlation_examples():
    even = np.zeros(16, dtype=int)
    even[0] = 10
    assert estimate_correlation(CountRecord(0.0, even)) == (1.0, 0.0)
    mixed = np.zeros(16, dtype=int)
    mixed[0], mixed[1] = 3, 1
    v, s = estimate_correlation(CountRecord(0.0, mixed))
    assert v == pytest.approx(0.5) and s == pytest.approx(math.sqrt(0.75 / 4))
    with pytest.raises(ValueError):
        estimate_correlation(CountRecord(0.0, np.zeros(16, dtype=int)))
    with pytest.raises(ValueError):
        CountRecord(0.0, np.ones(15, dtype=int))


def test_large_sample_consistency(calibrated):
    rho = apply_noise(ghz(0.0), calibrated)
    for gamma in (0.0, 0.5, 1.2):
        exact = correlation_curve(rho, [gamma])[0]
        v, s = estimate_correlation(sample_counts(rho, gamma, 10**6, seed=11))
        assert abs(v - exact) < 4 * s


def test_fit_exact_curves():
    g = default_gammas()
    fit = fourier_fit([(x, math.cos(4 * x), 0.01) for x in g])
    assert fit.visibility == pytest.approx(1, abs=1e-12)
    assert fit.phase == pytest.approx(0, abs=1e-12)
    fit = fourier_fit([(x, 0.683 * math.cos(4 * x + math.pi), 0.01) for x in g])
    assert fit.visibility == pytest.approx(0.683, abs=1e-12)
    assert phase_distance(fit.phase, math.pi) < 1e-12
    assert fit.phase_pi == pytest.approx(1)
    curve = [(x, 0.1 + 0.2 * math.sin(2 * x) + 0.5 * math.cos(4 * x - 0.4), 0.01) for x in g]
    fit = fourier_fit(curve)
    assert fit.coefficients["b1"] == pytest.approx(0.2)
    assert fit.phase == pytest.approx(-0.4)
    assert fit.chi2 == pytest.approx(0, abs=1e-12)


def test_fit_errors():
    with pytest.raises(ValueError):
        fourier_fit([(x, 1.0, 0.1) for x in default_gammas(4)])
    with pytest.raises(ValueError):
        # angles repeat modulo pi
        fourier_fit([(x, 1.0, 0.1) for x in [0, 0.5, 1, 1.5, math.pi]])
    with pytest.raises(ValueError):
        fourier_fit([(x, 1.0, 0.0) for x in default_gammas()])


def test_sigma_floor():
    pts = fit_points([CountRecord(0.0, np.eye(16, dtype=int)[0] * 20), CountRecord(Z_BASIS, np.ones(16))])
    assert pts == [(0.0, 1.0, 1 / 20)]


def test_analyze_and_bootstrap(calibrated):
    rho = apply_noise(ghz(0.0), calibrated)
    recs = measure(rho, default_gammas(), 20000, seed=2008, z_events=100000)
    out = analyze(recs)
    assert out["V"] == pytest.approx(0.683, abs=0.015)
    assert out["P_HHHH"] == pytest.approx(0.412, abs=0.02)
    assert out["F"] == pytest.approx(0.7455, abs=0.01)
    bars = error_bars(recs, n_boot=200, seed=1)
    assert bars == error_bars(recs, n_boot=200, seed=1)
    assert 0 < bars["V"] < 0.01
    assert 0 < bars["phi"] < 0.03


def test_bootstrap_zero_width_for_deterministic_counts():
    recs = [CountRecord(Z_BASIS, np.eye(16, dtype=int)[0] * 100)]
    recs += [CountRecord(g, np.eye(16, dtype=int)[0] * 100) for g in default_gammas()]
    bars = error_bars(recs, n_boot=50)
    assert all(v == pytest.approx(0, abs=1e-12) for k, v in bars.items() if k != "phi")


def test_bootstrap_matches_binomial_error(calibrated):
    rho = apply_noise(ghz(0.0), calibrated)
    rec = sample_counts(rho, Z_BASIS, 10**4, seed=5)
    _, analytic = estimate_correlation(rec)
    boot = error_bars([rec], n_boot=2000, seed=2)["c_z"]
    assert boot == pytest.approx(analytic, rel=0.2)


def test_csv_round_trip():
    recs = measure(ghz(0.0), default_gammas(), 50, seed=1, z_events=70)
    text = records_to_csv(recs)
    assert text.splitlines()[0] == "gamma,outcome_index,count"
    back = records_from_csv(text)
    assert [r.setting for r in back] == [r.setting for r in recs]
    assert all(np.array_equal(a.counts, b.counts) for a, b in zip(recs, back))
