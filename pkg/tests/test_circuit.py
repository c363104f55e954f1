import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_circuit
from vqcompile.circuit import (
    Circuit,
    GatePlacement,
    Topology,
    circuit_unitary,
    ibmq_ourense,
    load_circuit,
    save_circuit,
    validate_circuit,
)
from vqcompile.errors import ParameterArityError, QubitIndexError
from vqcompile.gates import GateId, embed, gate_matrix, is_unitary

P = GatePlacement


def test_empty_circuit_is_identity():
    assert np.array_equal(circuit_unitary(Circuit(2)), np.eye(4))


def test_rz_angles_add():
    c = Circuit(1, (P(GateId.RZ, (0,), (0.3,)), P(GateId.RZ, (0,), (0.9,))))
    assert np.allclose(circuit_unitary(c), gate_matrix(GateId.RZ, [1.2]), atol=1e-14)


def test_three_gate_circuit_matches_reverse_product():
    c = Circuit(2, (P(GateId.RY, (1,), (0.4,)), P(GateId.CNOT, (1, 0)), P(GateId.RZ, (0,), (2.2,))))
    mats = [embed(gate_matrix(g.gate, g.theta), g.qubits, 2) for g in c.gates]
    assert np.allclose(circuit_unitary(c), mats[2] @ mats[1] @ mats[0], atol=1e-14)


def test_placement_validation():
    with pytest.raises(QubitIndexError):
        Circuit(2, (P(GateId.CNOT, (0, 0)),))
    with pytest.raises(QubitIndexError):
        Circuit(2, (P(GateId.RZ, (2,), (0.0,)),))
    with pytest.raises(QubitIndexError):
        Circuit(3, (P(GateId.CNOT_ALL, (0,)),))
    with pytest.raises(ParameterArityError):
        Circuit(2, (P(GateId.RZ, (0,)),))


def test_counts():
    c = Circuit.from_structure(
        4, [(GateId.CNOT_ALL, ()), (GateId.RZ, (1,)), (GateId.CNOT, (0, 3)), (GateId.RY_BLOCK, ())]
    )
    assert c.num_gates == 4
    assert c.num_params == 5
    assert c.cnot_count == 4
    assert c.primitive_count == 3 + 1 + 1 + 4


def test_with_theta_arity():
    c = Circuit.from_structure(2, [(GateId.RZ, (0,)), (GateId.CNOT, (0, 1))])
    assert c.with_theta([0.5]).theta().tolist() == [0.5]
    with pytest.raises(ParameterArityError):
        c.with_theta([0.5, 0.1])


def test_json_round_trip(tmp_path, rng):
    c = random_circuit(3, 8, rng)
    save_circuit(c, tmp_path / "c.json")
    assert load_circuit(tmp_path / "c.json") == c
    assert json.loads((tmp_path / "c.json").read_text())["n"] == 3


def test_full_topology_pairs():
    for n in (2, 3, 5):
        assert len(Topology.full(n).allowed_pairs) == n * (n - 1)


def test_ourense_line():
    t = ibmq_ourense(3)
    assert t.allowed_pairs == {(0, 1), (1, 0), (1, 2), (2, 1)}
    bad = Circuit(3, (P(GateId.CNOT, (0, 2)),))
    assert validate_circuit(bad, t) == [(0, (0, 2))]
    assert validate_circuit(Circuit(3, (P(GateId.CNOT, (1, 0)),)), t) == []
    singles = Circuit.from_structure(3, [(GateId.RZ, (q,)) for q in range(3)])
    assert validate_circuit(singles, t) == []


def test_block_violation_reported():
    t = Topology.from_edges(3, [(0, 1)])
    c = Circuit.from_structure(3, [(GateId.CNOT_ALL, ())])
    assert validate_circuit(c, t) == [(0, (1, 2))]


def test_topology_rejects_bad_pairs():
    with pytest.raises(QubitIndexError):
        Topology(2, frozenset({(0, 0)}))
    with pytest.raises(QubitIndexError):
        Topology(2, frozenset({(0, 2)}))


@given(st.integers(1, 3), st.integers(0, 10), st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_concatenation_distributes(n, l1, l2, seed):
    rng = np.random.default_rng(seed)
    c1, c2 = random_circuit(n, l1, rng), random_circuit(n, l2, rng)
    u = circuit_unitary(c1 + c2)
    assert np.allclose(u, circuit_unitary(c2) @ circuit_unitary(c1), atol=1e-12, rtol=0)
    assert is_unitary(u)
