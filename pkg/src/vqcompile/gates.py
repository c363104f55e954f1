"""Gate alphabet, gate matrices and tensor embedding.

Conventions used everywhere in the package:

* Basis ordering is ``|q_{n-1} ... q_1 q_0>`` with qubit 0 the least
  significant bit, so ``embed(X, (0,), 2) == kron(I, X)``.
* A k-qubit local matrix acting on ``qubits = (a, b, ...)`` treats
  ``qubits[0]`` as its most significant local bit. For CNOT this means
  ``qubits = (control, target)`` with the textbook 4x4 matrix.
* Rotations are ``R_a(theta) = exp(-i theta sigma_a / 2)``.
* ``XX(theta) = exp(-i (theta / 2) X (x) X)``.
"""
from __future__ import annotations

from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ParameterArityError, QubitIndexError, UnknownGateError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
RX_HALF_PI = np.array([[1, -1j], [-1j, 1]], dtype=complex) / np.sqrt(2)

PAULI = {"X": X, "Y": Y, "Z": Z}


class GateId(str, Enum):
    RX_HALF_PI = "RX_HALF_PI"
    RZ = "RZ"
    RY = "RY"
    CNOT = "CNOT"
    RZ_BLOCK = "RZ_BLOCK"
    RY_BLOCK = "RY_BLOCK"
    CNOT_ALL = "CNOT_ALL"
    CNOT_EVEN = "CNOT_EVEN"
    CNOT_ODD = "CNOT_ODD"
    CNOT_EVEN_BIDIRECT = "CNOT_EVEN_BIDIRECT"

    def __str__(self) -> str:
        return self.value

    @property
    def is_block(self) -> bool:
        return self in _BLOCKS

    def arity(self, n: int) -> int:
        if self.is_block:
            return n
        return 2 if self is GateId.CNOT else 1

    def param_count(self, n: int) -> int:
        if self in (GateId.RZ, GateId.RY):
            return 1
        if self in (GateId.RZ_BLOCK, GateId.RY_BLOCK):
            return n
        return 0


_BLOCKS = frozenset(
    {
        GateId.RZ_BLOCK,
        GateId.RY_BLOCK,
        GateId.CNOT_ALL,
        GateId.CNOT_EVEN,
        GateId.CNOT_ODD,
        GateId.CNOT_EVEN_BIDIRECT,
    }
)

# generator axis of each parameterised primitive
ROTATION_AXIS = {GateId.RZ: "Z", GateId.RY: "Y"}


def parse_gate(name: str | GateId) -> GateId:
    if isinstance(name, GateId):
        return name
    try:
        return GateId(str(name).upper())
    except ValueError:
        raise UnknownGateError(f"unknown gate {name!r}") from None


def rotation(axis: str, theta: float) -> np.ndarray:
    """``exp(-i theta sigma / 2)`` for a Pauli axis ``'X'``, ``'Y'`` or ``'Z'``."""
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * PAULI[axis]


def xx(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * np.eye(4) - 1j * np.sin(theta / 2) * np.kron(X, X)


def block_primitives(gate: GateId, n: int) -> list[tuple[GateId, tuple[int, ...]]]:
    """Expand a block gate into its (gate, qubits) primitives in application order.

    Rotation blocks put parameter ``i`` on qubit ``i``.
    """
    if gate is GateId.RZ_BLOCK:
        return [(GateId.RZ, (i,)) for i in range(n)]
    if gate is GateId.RY_BLOCK:
        return [(GateId.RY, (i,)) for i in range(n)]
    if gate is GateId.CNOT_ALL:
        return [(GateId.CNOT, (i, i + 1)) for i in range(n - 1)]
    if gate is GateId.CNOT_EVEN:
        return [(GateId.CNOT, (i, i + 1)) for i in range(0, n - 1, 2)]
    if gate is GateId.CNOT_ODD:
        return [(GateId.CNOT, (i, i + 1)) for i in range(1, n - 1, 2)]
    if gate is GateId.CNOT_EVEN_BIDIRECT:
        out = []
        for k, i in enumerate(range(0, n - 1, 2)):
            out.append((GateId.CNOT, (i, i + 1) if k % 2 == 0 else (i + 1, i)))
        return out
    raise UnknownGateError(f"{gate} is not a block gate")


def cnot_count(gate: GateId, n: int) -> int:
    if gate is GateId.CNOT:
        return 1
    if gate.is_block and gate not in (GateId.RZ_BLOCK, GateId.RY_BLOCK):
        return len(block_primitives(gate, n))
    return 0


def check_qubits(qubits: Sequence[int], n: int) -> None:
    for q in qubits:
        if not 0 <= q < n:
            raise QubitIndexError(f"qubit {q} out of range for width {n}")
    if len(set(qubits)) != len(qubits):
        raise QubitIndexError(f"repeated qubit in {tuple(qubits)}")


@lru_cache(maxsize=None)
def _embed_index(qubits: tuple[int, ...], n: int) -> tuple[np.ndarray, np.ndarray]:
    d = 1 << n
    idx = np.arange(d)
    k = len(qubits)
    local = np.zeros(d, dtype=np.intp)
    mask = 0
    for j, q in enumerate(qubits):
        local |= ((idx >> q) & 1) << (k - 1 - j)
        mask |= 1 << q
    rest = idx & ~mask
    same = rest[:, None] == rest[None, :]
    return local, same


def embed(g: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Lift a 2x2 or 4x4 matrix acting on ``qubits`` to the full 2^n space."""
    qubits = tuple(int(q) for q in qubits)
    check_qubits(qubits, n)
    if g.shape != (1 << len(qubits),) * 2:
        raise ParameterArityError(
            f"matrix of shape {g.shape} does not act on {len(qubits)} qubit(s)"
        )
    local, same = _embed_index(qubits, n)
    return np.where(same, g[local[:, None], local[None, :]], 0).astype(complex)


def _base_matrix(gate: GateId, theta: Sequence[float]) -> np.ndarray:
    if gate is GateId.RX_HALF_PI:
        return RX_HALF_PI.copy()
    if gate is GateId.CNOT:
        return CNOT.copy()
    return rotation(ROTATION_AXIS[gate], float(theta[0]))


def gate_matrix(
    gate: GateId | str, theta: Sequence[float] = (), n: int | None = None
) -> np.ndarray:
    """Matrix of ``gate``: 2x2 or 4x4 for primitives, 2^n x 2^n for blocks."""
    gate = parse_gate(gate)
    theta = list(theta)
    if gate.is_block:
        if n is None:
            raise ParameterArityError(f"{gate} needs the circuit width n")
        if len(theta) != gate.param_count(n):
            raise ParameterArityError(
                f"{gate} on {n} qubits takes {gate.param_count(n)} angle(s), got {len(theta)}"
            )
        out = np.eye(1 << n, dtype=complex)
        for i, (prim, qubits) in enumerate(block_primitives(gate, n)):
            angles = [theta[i]] if prim.param_count(n) else []
            out = embed(_base_matrix(prim, angles), qubits, n) @ out
        return out
    if len(theta) != gate.param_count(1):
        raise ParameterArityError(
            f"{gate} takes {gate.param_count(1)} angle(s), got {len(theta)}"
        )
    return _base_matrix(gate, theta)


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol)
