import numpy as np
import pytest
from hypothesis import settings

from vqcompile.circuit import Circuit, GatePlacement
from vqcompile.gates import GateId

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(n: int, length: int, rng: np.random.Generator, gates=None) -> Circuit:
    gates = gates or (GateId.RX_HALF_PI, GateId.RZ, GateId.RY, GateId.CNOT)
    out = []
    for _ in range(length):
        g = gates[rng.integers(len(gates))]
        if g is GateId.CNOT and n < 2:
            g = GateId.RZ
        if g is GateId.CNOT:
            c, t = rng.choice(n, size=2, replace=False)
            out.append(GatePlacement(g, (int(c), int(t))))
        else:
            q = int(rng.integers(n))
            out.append(GatePlacement(g, (q,), tuple(rng.uniform(0, 2 * np.pi, g.param_count(n)))))
    return Circuit(n, tuple(out))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key, (ok, detail) in test_acceptance.RESULTS.items():
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {detail}")
