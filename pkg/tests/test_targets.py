import json

import numpy as np
import pytest

from vqcompile.circuit import circuit_unitary
from vqcompile.cost import hst_cost
from vqcompile.errors import NotUnitaryError, UnknownTargetError
from vqcompile.gates import is_unitary
from vqcompile.targets import (
    TargetSpec,
    layered_unitary,
    parse_target,
    save_unitary,
    target_unitary,
    wsp3_reference_circuit,
)

NAMES = ["cz", "cs", "ch", "cnot", "xx3pi2", "qft2", "qft3", "ccnot", "wsp3", "identity3", "layered:4"]


@pytest.mark.parametrize("name", NAMES)
def test_builtin_targets_unitary(name):
    u = target_unitary(name)
    assert is_unitary(u)
    assert hst_cost(u, u) < 1e-12


def test_cz_and_qft2():
    assert np.array_equal(target_unitary("cz"), np.diag([1, 1, 1, -1]))
    want = 0.5 * np.array([[1, 1, 1, 1], [1, 1j, -1, -1j], [1, -1, 1, -1], [1, -1j, -1, 1j]])
    assert np.allclose(target_unitary("qft2"), want, atol=1e-15)


def test_cs_vs_cz():
    assert abs(hst_cost(target_unitary("cz"), target_unitary("cs")) - 0.375) < 1e-14


def test_ccnot_truth_table():
    # controls are the two most significant qubits, the target is qubit 0
    u = target_unitary("ccnot")
    perm = list(range(8))
    perm[6], perm[7] = 7, 6
    assert np.array_equal(u, np.eye(8)[:, perm])


def test_wsp3_prepares_w_state():
    u = target_unitary("wsp3")
    w = np.zeros(8)
    w[[1, 2, 4]] = 1 / np.sqrt(3)
    assert np.allclose(u[:, 0], w, atol=1e-14)
    c = wsp3_reference_circuit()
    assert c.num_gates == 7 and c.cnot_count == 3
    assert np.allclose(circuit_unitary(c), u)


def test_layered_reproducible():
    assert np.array_equal(layered_unitary(4, 3), target_unitary("layered:4:3"))
    assert not np.allclose(layered_unitary(4, 3), layered_unitary(4, 4))


def test_parse_target():
    assert parse_target("qft:3") == TargetSpec("qft", 3)
    assert parse_target("Toffoli") == TargetSpec("ccnot")
    with pytest.raises(UnknownTargetError):
        parse_target("swap")
    with pytest.raises(UnknownTargetError):
        target_unitary("qft0")


def test_matrix_files(tmp_path):
    u = target_unitary("ch")
    save_unitary(u, tmp_path / "ch.json")
    assert np.array_equal(target_unitary(str(tmp_path / "ch.json")), u)
    bad = {"n": 1, "re": [[1, 1], [0, 1]], "im": [[0, 0], [0, 0]]}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    with pytest.raises(NotUnitaryError):
        target_unitary(str(tmp_path / "bad.json"))
