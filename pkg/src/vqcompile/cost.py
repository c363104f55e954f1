"""Hilbert-Schmidt test costs.

Two routes compute the same numbers:

* algebraic: ``1 - |Tr(V^dag U)|^2 / d^2`` and, for the local variant, the
  per-qubit probability ``||Tr_j(U V^dag)||_F^2 / (2 d)``;
* simulated: a 2n-qubit state vector run of the test circuit (Bell pairs
  between systems A and B, ``U`` on A, ``V*`` on B, Bell pairs undone).

The optimizer uses the algebraic route; the simulator exists to check it.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConsistencyError, DimensionError, SizeLimitError
from .gates import CNOT, H

CLAMP_EPS = 1e-12
DEFAULT_SIM_QUBIT_CAP = 16


class CostKind(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"

    def __str__(self) -> str:
        return self.value


def default_cost_kind(n: int) -> CostKind:
    return CostKind.GLOBAL if n <= 3 else CostKind.LOCAL


def _clamp(value: float) -> float:
    if value < 0.0:
        if value < -CLAMP_EPS:
            raise ConsistencyError(f"cost {value!r} is negative beyond round-off")
        return 0.0
    return float(value)


def _dims(u: np.ndarray, v: np.ndarray) -> tuple[int, int]:
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"shape mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    n = d.bit_length() - 1
    if 1 << n != d or n < 1:
        raise DimensionError(f"dimension {d} is not 2^n")
    return d, n


def hst_cost(u: np.ndarray, v: np.ndarray) -> float:
    """Global cost ``1 - |Tr(V^dag U)|^2 / d^2``; zero iff V = e^{i phi} U."""
    d, _ = _dims(u, v)
    overlap = np.vdot(v, u)  # sum conj(V_ij) U_ij == Tr(V^dag U)
    return _clamp(1.0 - abs(overlap) ** 2 / d**2)


def partial_trace_norms(w: np.ndarray, n: int) -> np.ndarray:
    """``||Tr_j(W)||_F^2`` for every qubit j (qubit 0 least significant)."""
    t = w.reshape((2,) * (2 * n))
    out = np.empty(n)
    for j in range(n):
        ax = n - 1 - j
        pt = np.trace(t, axis1=ax, axis2=n + ax)
        out[j] = np.vdot(pt, pt).real
    return out


def local_probabilities(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Probability that qubits j and j+n both read 0, for each j."""
    d, n = _dims(u, v)
    return partial_trace_norms(u @ v.conj().T, n) / (2 * d)


def lhst_cost(u: np.ndarray, v: np.ndarray) -> float:
    """Local cost ``1 - mean_j p_j``."""
    return _clamp(1.0 - float(np.mean(local_probabilities(u, v))))


def cost(u: np.ndarray, v: np.ndarray, kind: CostKind | str = CostKind.GLOBAL) -> float:
    if CostKind(kind) is CostKind.LOCAL:
        return lhst_cost(u, v)
    return hst_cost(u, v)


@dataclass(frozen=True)
class HSTOutcome:
    all_zeros: float
    local_probabilities: tuple[float, ...]


def _apply(state: np.ndarray, g: np.ndarray, qubits: tuple[int, ...], nq: int) -> np.ndarray:
    # state has shape (2,)*nq with axis a holding qubit nq-1-a
    k = len(qubits)
    axes = [nq - 1 - q for q in qubits]
    gt = g.reshape((2,) * (2 * k))
    out = np.tensordot(gt, state, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def hst_probability(
    u: np.ndarray, v: np.ndarray, max_qubits: int = DEFAULT_SIM_QUBIT_CAP
) -> HSTOutcome:
    """Simulate the 2n-qubit Hilbert-Schmidt test circuit.

    System A is qubits 0..n-1, system B is qubits n..2n-1.
    """
    d, n = _dims(u, v)
    nq = 2 * n
    if nq > max_qubits:
        raise SizeLimitError(f"{nq} simulated qubits exceeds the cap of {max_qubits}")
    state = np.zeros((2,) * nq, dtype=complex)
    state[(0,) * nq] = 1.0
    for i in range(n):
        state = _apply(state, H, (i,), nq)
        state = _apply(state, CNOT, (i, i + n), nq)
    # register B holds the high bits: psi[b, a]
    psi = state.reshape(d, d)
    psi = v.conj() @ psi @ u.T
    state = psi.reshape((2,) * nq)
    for i in range(n):
        state = _apply(state, CNOT, (i, i + n), nq)
        state = _apply(state, H, (i,), nq)
    probs = np.abs(state) ** 2
    local = []
    for i in range(n):
        idx = [slice(None)] * nq
        idx[nq - 1 - i] = 0
        idx[nq - 1 - (i + n)] = 0
        local.append(float(probs[tuple(idx)].sum()))
    return HSTOutcome(float(probs[(0,) * nq]), tuple(local))
