"""Built-in target unitaries and unitary matrix files."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import Circuit, GatePlacement, circuit_unitary
from .errors import NotUnitaryError, UnknownTargetError
from .gates import CNOT, H, GateId, X, is_unitary, xx

# angle putting amplitude sqrt(2/3) on |1>:  RY(a)|0> = sqrt(1/3)|0> + sqrt(2/3)|1>
_W_SPLIT = 2 * np.arcsin(np.sqrt(2 / 3))


def wsp3_reference_circuit() -> Circuit:
    """Seven-gate W-state preparation circuit defining the WSP3 target.

    Acting on |000> it yields (|001> + |010> + |100>) / sqrt(3). Only the
    CNOT pairs (1,2), (1,0) and (2,1) are used, so it fits a 0-1-2 line.
    """
    P = GatePlacement
    return Circuit(
        3,
        (
            P(GateId.RY, (1,), (_W_SPLIT,)),
            P(GateId.RY, (2,), (np.pi / 4,)),
            P(GateId.CNOT, (1, 2)),
            P(GateId.RY, (2,), (-np.pi / 4,)),
            P(GateId.RY, (0,), (np.pi,)),
            P(GateId.CNOT, (1, 0)),
            P(GateId.CNOT, (2, 1)),
        ),
    )


def qft_matrix(n: int) -> np.ndarray:
    d = 1 << n
    j, k = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return np.exp(2j * np.pi * j * k / d) / np.sqrt(d)


def layered_unitary(n: int, seed: int = 0) -> np.ndarray:
    """``RZ_BLOCK(theta') CNOT_ODD CNOT_EVEN RZ_BLOCK(theta)`` with angles drawn from [0, 2 pi)."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, n)
    theta2 = rng.uniform(0, 2 * np.pi, n)
    c = Circuit(
        n,
        (
            GatePlacement(GateId.RZ_BLOCK, (), theta),
            GatePlacement(GateId.CNOT_EVEN),
            GatePlacement(GateId.CNOT_ODD),
            GatePlacement(GateId.RZ_BLOCK, (), theta2),
        ),
    )
    return circuit_unitary(c)


def _controlled(u: np.ndarray) -> np.ndarray:
    # control on the most significant qubit
    d = u.shape[0]
    out = np.eye(2 * d, dtype=complex)
    out[d:, d:] = u
    return out


_FIXED = {
    "cz": lambda: np.diag([1, 1, 1, -1]).astype(complex),
    "cs": lambda: np.diag([1, 1, 1, 1j]).astype(complex),
    "ch": lambda: _controlled(H),
    "cnot": lambda: CNOT.copy(),
    "xx3pi2": lambda: xx(3 * np.pi / 2),
    "ccnot": lambda: _controlled(_controlled(X)),
    "wsp3": lambda: circuit_unitary(wsp3_reference_circuit()),
}
_ALIASES = {"toffoli": "ccnot", "xx_3pi_2": "xx3pi2", "cx": "cnot"}


@dataclass(frozen=True)
class TargetSpec:
    """A named target (``name``, plus ``n``/``seed`` where relevant) or a matrix file."""

    name: str
    n: int | None = None
    seed: int = 0
    path: str | None = None

    def __str__(self) -> str:
        if self.path:
            return self.path
        if self.name == "layered":
            return f"layered:{self.n}:{self.seed}"
        if self.name in ("qft", "identity"):
            return f"{self.name}:{self.n}"
        return self.name


def parse_target(text: str) -> TargetSpec:
    """Parse ``cz``, ``qft2``, ``qft:3``, ``identity2``, ``layered:4[:seed]`` or a ``.json`` path."""
    raw = text.strip()
    if raw.lower().endswith(".json"):
        return TargetSpec("file", path=raw)
    t = raw.lower()
    t = _ALIASES.get(t, t)
    if t in _FIXED:
        return TargetSpec(t)
    m = re.fullmatch(r"(qft|identity|layered):?(\d+)(?::(\d+))?", t)
    if m and (m.group(3) is None or m.group(1) == "layered"):
        return TargetSpec(m.group(1), int(m.group(2)), int(m.group(3) or 0))
    raise UnknownTargetError(f"unknown target {text!r}")


def target_unitary(spec: TargetSpec | str) -> np.ndarray:
    if isinstance(spec, str):
        spec = parse_target(spec)
    if spec.path is not None:
        return load_unitary(spec.path)
    if spec.name in _FIXED:
        return _FIXED[spec.name]()
    if spec.n is None or spec.n < 1:
        raise UnknownTargetError(f"target {spec.name} needs a qubit count")
    if spec.name == "qft":
        return qft_matrix(spec.n)
    if spec.name == "identity":
        return np.eye(1 << spec.n, dtype=complex)
    if spec.name == "layered":
        return layered_unitary(spec.n, spec.seed)
    raise UnknownTargetError(f"unknown target {spec.name!r}")


def num_qubits(u: np.ndarray) -> int:
    d = u.shape[0]
    n = d.bit_length() - 1
    if d < 2 or 1 << n != d:
        raise NotUnitaryError(f"dimension {d} is not a power of two")
    return n


def unitary_to_json(u: np.ndarray) -> dict:
    return {"n": num_qubits(u), "re": u.real.tolist(), "im": u.imag.tolist()}


def unitary_from_json(data: dict) -> np.ndarray:
    try:
        u = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        n = int(data["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise NotUnitaryError(f"malformed matrix data: {exc}") from exc
    if u.shape != (1 << n, 1 << n):
        raise NotUnitaryError(f"matrix shape {u.shape} does not match n={n}")
    if not is_unitary(u):
        raise NotUnitaryError("matrix is not unitary to 1e-10")
    return u


def save_unitary(u: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(json.dumps(unitary_to_json(u)) + "\n")


def load_unitary(path: str | Path) -> np.ndarray:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UnknownTargetError(f"cannot read matrix file {path}: {exc}") from exc
    return unitary_from_json(data)

