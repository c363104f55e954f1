import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import haar_unitary, random_circuit
from vqcompile.circuit import Circuit, circuit_unitary
from vqcompile.cost import CostKind, cost
from vqcompile.errors import ParameterArityError
from vqcompile.gates import GateId, gate_matrix
from vqcompile.optimize import (
    Init,
    Landscape,
    OptimizerSettings,
    optimize,
    reduce_angles,
    reference_descend,
    shift_gradient,
)
from vqcompile.targets import target_unitary

RZ = Circuit.from_structure(1, [(GateId.RZ, (0,))])
# ten-gate, three-CNOT QFT2 structure with five RZ angles
QFT2_STRUCTURE = [
    (GateId.RZ, (0,)), (GateId.RZ, (1,)), (GateId.RX_HALF_PI, (1,)), (GateId.RZ, (1,)),
    (GateId.CNOT, (0, 1)), (GateId.RZ, (1,)), (GateId.CNOT, (1, 0)), (GateId.CNOT, (0, 1)),
    (GateId.RX_HALF_PI, (1,)), (GateId.RZ, (1,)),
]


def finite_difference(structure, target, kind, theta, h=1e-5):
    out = np.empty_like(theta)
    for l in range(theta.size):
        e = np.zeros_like(theta)
        e[l] = h
        f = lambda t: cost(target, circuit_unitary(structure.with_theta(t)), kind)  # noqa: E731
        out[l] = (f(theta + e) - f(theta - e)) / (2 * h)
    return out


def test_gradient_zero_at_identity():
    assert np.allclose(shift_gradient(RZ, np.eye(2), "global", [0.0]), [0.0], atol=1e-15)


def test_gradient_half():
    g = shift_gradient(RZ, gate_matrix(GateId.RZ, [0.0]), "global", [np.pi / 2])
    assert abs(g[0] - 0.5) < 1e-12


def test_gradient_arity():
    with pytest.raises(ParameterArityError):
        shift_gradient(RZ, np.eye(2), "global", [0.0, 1.0])


def test_settings_validation():
    for bad in (dict(step_size=0), dict(tolerance=-1), dict(restarts=0), dict(step_growth=0.9)):
        with pytest.raises(ValueError):
            OptimizerSettings(**bad)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.sampled_from(list(CostKind)))
def test_shift_matches_finite_differences(n, seed, kind):
    rng = np.random.default_rng(seed)
    c = random_circuit(n, 8, rng, gates=(GateId.RZ, GateId.RY, GateId.CNOT, GateId.RX_HALF_PI))
    if c.num_params == 0:
        return
    u = haar_unitary(1 << n, rng)
    theta = c.theta()
    g = shift_gradient(c, u, kind, theta)
    assert np.max(np.abs(g - finite_difference(c, u, kind, theta))) < 1e-6


@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.sampled_from(list(CostKind)))
def test_compiled_gradient_matches_reference(n, seed, kind):
    rng = np.random.default_rng(seed)
    alphabet = (GateId.RZ, GateId.RY, GateId.CNOT, GateId.RX_HALF_PI)
    if n >= 3:
        alphabet += (GateId.RZ_BLOCK, GateId.RY_BLOCK, GateId.CNOT_ALL)
    structure = []
    for _ in range(10):
        g = alphabet[rng.integers(len(alphabet))]
        if g is GateId.CNOT and n == 1:
            g = GateId.RY
        if g.is_block:
            structure.append((g, ()))
        elif g is GateId.CNOT:
            structure.append((g, tuple(int(q) for q in rng.choice(n, 2, replace=False))))
        else:
            structure.append((g, (int(rng.integers(n)),)))
    c = Circuit.from_structure(n, structure)
    u = haar_unitary(1 << n, rng)
    land = Landscape(c, u, kind)
    theta = rng.uniform(0, 2 * np.pi, c.num_params)
    f_ref, g_ref = land.value_and_grad(theta)
    f, g = land.fast_value_and_grad(theta)
    assert abs(f - f_ref) < 1e-12
    assert np.allclose(g, g_ref, atol=1e-12, rtol=0)
    assert abs(f - cost(u, circuit_unitary(c.with_theta(theta)), kind)) < 1e-12
    if c.num_params:
        assert np.allclose(g, shift_gradient(c, u, kind, theta), atol=1e-12, rtol=0)


def test_compiled_descent_matches_reference():
    rng = np.random.default_rng(4)
    c = random_circuit(2, 8, rng)
    u = target_unitary("ch")
    land = Landscape(c, u, "global")
    start = rng.uniform(0, 2 * np.pi, c.num_params)
    s = OptimizerSettings(max_iterations=200)
    t1, f1, i1 = land.descend(start, s)
    t2, f2, i2 = reference_descend(land, start, s)
    assert i1 == i2
    assert abs(f1 - f2) < 1e-10
    assert np.allclose(t1, t2, atol=1e-8)


def test_single_rz():
    u = gate_matrix(GateId.RZ, [1.234])
    out = optimize(RZ, u, "global", rng=0)
    assert out.cost < 1e-8
    # RZ is only fixed up to the global phase -1, so theta is determined mod 2 pi
    d = (out.theta[0] - 1.234) % (2 * np.pi)
    assert min(d, 2 * np.pi - d) < 1e-3


def test_parameter_free_structure():
    # the standard CNOT matrix has its control on the high qubit
    c = Circuit.from_structure(2, [(GateId.CNOT, (1, 0))])
    out = optimize(c, target_unitary("cnot"), "global", rng=0)
    assert out.cost == 0 and out.iterations_used == 0 and out.theta.size == 0


def test_qft2_structure_compiles():
    c = Circuit.from_structure(2, QFT2_STRUCTURE)
    assert c.num_params == 5 and c.cnot_count == 3
    out = optimize(c, target_unitary("qft2"), "global", rng=0)
    assert out.cost < 1e-3


def test_seed_determinism():
    rng = np.random.default_rng(9)
    c = random_circuit(2, 6, rng)
    u = target_unitary("cs")
    a = optimize(c, u, "global", rng=np.random.default_rng(3))
    b = optimize(c, u, "global", rng=np.random.default_rng(3))
    assert a.cost == b.cost and np.array_equal(a.theta, b.theta)
    assert a.iterations_used == b.iterations_used and a.restart_index == b.restart_index


@given(st.integers(0, 2**32 - 1), st.sampled_from(list(CostKind)))
def test_never_worse_than_start(seed, kind):
    rng = np.random.default_rng(seed)
    c = random_circuit(2, 6, rng)
    if c.num_params == 0:
        return
    u = haar_unitary(4, rng)
    start = c.theta()
    s = OptimizerSettings(restarts=1, init=Init.ZEROS, max_iterations=50)
    out = optimize(c.with_theta(np.zeros(c.num_params)), u, kind, s, rng=0)
    land = Landscape(c, u, kind)
    assert out.cost <= land.cost(np.zeros(c.num_params)) + 1e-15
    theta, f, _ = land.descend(start, s)
    assert f <= land.cost(start) + 1e-15
    # reported cost is the recomputed cost at the reported angles
    assert abs(out.cost - cost(u, circuit_unitary(c.with_theta(out.theta)), kind)) < 1e-12


def test_plain_halving_available():
    s = OptimizerSettings(step_growth=1.0)
    out = optimize(RZ, gate_matrix(GateId.RZ, [0.3]), "global", s, rng=1)
    assert out.cost < 1e-6


def test_reduce_angles():
    assert np.allclose(reduce_angles([-0.5, 7.0]), [2 * np.pi - 0.5, 7.0 - 2 * np.pi])
