import numpy as np
import pytest

from toricsim.lattice import MinimalInstance, ToricLattice
from toricsim.pauli import PauliString
from toricsim.stabilizer import CLIFFORD_TABLES, StabilizerState, product_zero_state, vacuum
from toricsim.statevector import GATES, StateVector, vacuum_dense

from conftest import dense, random_pauli


def test_minimal_vacuum_generators():
    m = MinimalInstance()
    st = vacuum(m)
    assert [m.render(g) for g in st.generators] == ["X1 X2 X3 X4", "Z1 Z2", "Z2 Z3", "Z3 Z4"]
    assert st.signs == [1, 1, 1, 1]


def test_expectation_examples():
    m = MinimalInstance()
    st = vacuum(m)
    assert st.expectation(m.pauli("X1")) == 0
    assert st.expectation(m.pauli("Z1 Z4")) == 1
    assert st.expectation(m.pauli("Z1 Z3")) == 1
    assert st.expectation(m.pauli("- Z1 Z3")) == -1
    # Y1 Y2 X3 X4 = -(X1X2X3X4)(Z1Z2)
    assert st.expectation(m.pauli("Y1 Y2 X3 X4")) == -1
    with pytest.raises(ValueError):
        st.expectation(m.pauli("i Z1"))


def test_apply_pauli_flips_anticommuting_signs():
    m = MinimalInstance()
    st = vacuum(m).apply_pauli(m.pauli("Z1"))
    assert st.signs == [-1, 1, 1, 1]
    assert st.expectation(m.c_s) == -1
    back = st.apply_pauli(m.pauli("Z1"))
    assert back == vacuum(m)


def test_clifford_tables_match_matrices():
    for gate, table in CLIFFORD_TABLES.items():
        u = GATES[gate]
        for letter, (sign, image) in table.items():
            lhs = u @ GATES[letter] @ u.conj().T
            assert np.allclose(lhs, sign * GATES[image])


def test_interference_sequence_changes_sign_class():
    m = MinimalInstance()
    st = vacuum(m).apply_clifford1("S_inv", 0).apply_pauli(m.c_s).apply_clifford1("S", 0)
    ghz_pi = StabilizerState([-m.c_s, m.pauli("Z1 Z2"), m.pauli("Z2 Z3"), m.pauli("Z3 Z4")])
    assert st == ghz_pi


def test_validate_errors():
    with pytest.raises(ValueError):
        StabilizerState([])
    with pytest.raises(ValueError):
        StabilizerState([PauliString.single(2, "Z", 0)])
    with pytest.raises(ValueError):
        StabilizerState([PauliString.single(2, "Z", 0), PauliString.single(2, "X", 0)])
    with pytest.raises(ValueError):
        StabilizerState([PauliString.single(2, "Z", 0)] * 2)
    with pytest.raises(ValueError):
        StabilizerState([PauliString(2, 0, 1, 1), PauliString.single(2, "Z", 1)])
    st = product_zero_state(3)
    with pytest.raises(IndexError):
        st.apply_clifford1("H", 3)
    with pytest.raises(ValueError):
        st.apply_clifford1("T", 0)


@pytest.mark.parametrize("w,h", [(2, 2), (2, 3), (3, 3), (3, 4), (4, 4), (6, 6)])
def test_vacuum_stabilizes_every_plaquette(w, h):
    lat = ToricLattice(w, h)
    st = vacuum(lat)
    st.validate()
    assert all(v == 1 for v in st.expectations(lat.terms()))


def test_random_evolution_keeps_valid_generators(rng):
    lat = ToricLattice(4, 4)
    st = vacuum(lat)
    gates = list(CLIFFORD_TABLES)
    for _ in range(200):
        if rng.random() < 0.5:
            st = st.apply_pauli(random_pauli(rng, 16))
        else:
            st = st.apply_clifford1(gates[rng.integers(len(gates))], int(rng.integers(16)))
    st.validate()


def _dense_expect(st: StateVector, p: PauliString) -> float:
    return float(np.vdot(st.amplitudes, dense(p) @ st.amplitudes).real)


@pytest.mark.parametrize("w,h", [(2, 2), (2, 3), (3, 3)])
def test_agrees_with_statevector(w, h, rng):
    # dense matrices are the oracle for every Pauli of weight <= 4
    lat = ToricLattice(w, h)
    n = lat.qubit_count
    gates = list(CLIFFORD_TABLES)
    for _ in range(5):
        st, sv = vacuum(lat), vacuum_dense(lat)
        for _ in range(8):
            if rng.random() < 0.5:
                p = random_pauli(rng, n)
                st, sv = st.apply_pauli(p), sv.apply_pauli_string(p)
            else:
                g, q = gates[rng.integers(len(gates))], int(rng.integers(n))
                st, sv = st.apply_clifford1(g, q), sv.apply_gate(g, q)
        for _ in range(60):
            p = random_pauli(rng, n)
            if p.weight > 4:
                continue
            assert st.expectation(p) == pytest.approx(_dense_expect(sv, p), abs=1e-10)
