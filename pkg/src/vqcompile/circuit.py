"""Circuits, topologies and circuit-to-unitary evaluation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterArityError, QubitIndexError, VQCError
from .gates import (
    GateId,
    block_primitives,
    check_qubits,
    cnot_count,
    embed,
    gate_matrix,
    parse_gate,
)


@dataclass(frozen=True)
class GatePlacement:
    gate: GateId
    qubits: tuple[int, ...] = ()
    theta: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gate", parse_gate(self.gate))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))

    def validate(self, n: int) -> None:
        if self.gate.is_block:
            if self.qubits:
                raise QubitIndexError(f"block gate {self.gate} takes no qubit tuple")
        else:
            if len(self.qubits) != self.gate.arity(n):
                raise QubitIndexError(
                    f"{self.gate} acts on {self.gate.arity(n)} qubit(s), got {self.qubits}"
                )
            check_qubits(self.qubits, n)
        if len(self.theta) != self.gate.param_count(n):
            raise ParameterArityError(
                f"{self.gate} takes {self.gate.param_count(n)} angle(s), got {len(self.theta)}"
            )

    def matrix(self, n: int) -> np.ndarray:
        """Full 2^n x 2^n matrix of this placement."""
        if self.gate.is_block:
            return gate_matrix(self.gate, self.theta, n)
        return embed(gate_matrix(self.gate, self.theta), self.qubits, n)

    def label(self) -> str:
        if self.gate.is_block:
            return str(self.gate)
        return f"{self.gate}({','.join(map(str, self.qubits))})"

    def to_json(self) -> dict:
        return {"gate": self.gate.value, "qubits": list(self.qubits), "theta": list(self.theta)}


@dataclass(frozen=True)
class Circuit:
    """Gate placements on ``n`` qubits; ``gates[0]`` is applied first."""

    n: int
    gates: tuple[GatePlacement, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1:
            raise QubitIndexError("a circuit needs at least one qubit")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            g.validate(self.n)

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise QubitIndexError("cannot concatenate circuits of different width")
        return Circuit(self.n, self.gates + other.gates)

    @property
    def num_gates(self) -> int:
        return len(self.gates)

    @property
    def num_params(self) -> int:
        return sum(g.gate.param_count(self.n) for g in self.gates)

    @property
    def cnot_count(self) -> int:
        return sum(cnot_count(g.gate, self.n) for g in self.gates)

    @property
    def primitive_count(self) -> int:
        """Gate count with blocks expanded into their constituent gates."""
        return sum(
            len(block_primitives(g.gate, self.n)) if g.gate.is_block else 1
            for g in self.gates
        )

    def theta(self) -> np.ndarray:
        return np.array([t for g in self.gates for t in g.theta], dtype=float)

    def with_theta(self, theta: Sequence[float]) -> "Circuit":
        theta = list(theta)
        if len(theta) != self.num_params:
            raise ParameterArityError(
                f"circuit has {self.num_params} parameter(s), got {len(theta)}"
            )
        out, k = [], 0
        for g in self.gates:
            p = g.gate.param_count(self.n)
            out.append(GatePlacement(g.gate, g.qubits, theta[k : k + p]))
            k += p
        return Circuit(self.n, tuple(out))

    def structure(self) -> tuple[tuple[GateId, tuple[int, ...]], ...]:
        return tuple((g.gate, g.qubits) for g in self.gates)

    def to_json(self) -> dict:
        return {"n": self.n, "gates": [g.to_json() for g in self.gates]}

    @classmethod
    def from_json(cls, data: dict) -> "Circuit":
        try:
            n = int(data["n"])
            gates = [
                GatePlacement(g["gate"], tuple(g.get("qubits", ())), tuple(g.get("theta", ())))
                for g in data["gates"]
            ]
        except (KeyError, TypeError) as exc:
            raise VQCError(f"malformed circuit data: {exc}") from exc
        return cls(n, tuple(gates))

    @classmethod
    def from_structure(
        cls, n: int, structure: Iterable[tuple[GateId | str, Sequence[int]]]
    ) -> "Circuit":
        """Circuit with every angle set to zero."""
        gates = []
        for gate, qubits in structure:
            gate = parse_gate(gate)
            gates.append(GatePlacement(gate, tuple(qubits), (0.0,) * gate.param_count(n)))
        return cls(n, tuple(gates))


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Return ``G_L ... G_2 G_1`` for the circuit's placements."""
    u = np.eye(1 << c.n, dtype=complex)
    for g in c.gates:
        u = g.matrix(c.n) @ u
    return u


def save_circuit(c: Circuit, path: str | Path) -> None:
    Path(path).write_text(json.dumps(c.to_json(), indent=2) + "\n")


def load_circuit(path: str | Path) -> Circuit:
    return Circuit.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class Topology:
    """Allowed (control, target) CNOT pairs on ``n`` qubits."""

    n: int
    allowed_pairs: frozenset[tuple[int, int]]
    name: str = "custom"

    def __post_init__(self):
        pairs = frozenset((int(a), int(b)) for a, b in self.allowed_pairs)
        for a, b in pairs:
            if not (0 <= a < self.n and 0 <= b < self.n) or a == b:
                raise QubitIndexError(f"invalid pair {(a, b)} for {self.n} qubits")
        object.__setattr__(self, "allowed_pairs", pairs)

    @classmethod
    def full(cls, n: int) -> "Topology":
        pairs = {(a, b) for a in range(n) for b in range(n) if a != b}
        return cls(n, frozenset(pairs), "full")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], name: str = "custom") -> "Topology":
        """Bidirectional topology from undirected edges; edges touching qubits >= n are dropped."""
        pairs = set()
        for a, b in edges:
            if a < n and b < n:
                pairs |= {(a, b), (b, a)}
        return cls(n, frozenset(pairs), name)

    def allows(self, control: int, target: int) -> bool:
        return (control, target) in self.allowed_pairs

    def to_json(self) -> dict:
        return {"n": self.n, "name": self.name, "pairs": sorted(map(list, self.allowed_pairs))}

    @classmethod
    def from_json(cls, data: dict) -> "Topology":
        return cls(int(data["n"]), frozenset(tuple(p) for p in data["pairs"]), data.get("name", "custom"))


# ibmq_ourense coupling map (T shape): 0-1, 1-2, 1-3, 3-4
IBMQ_OURENSE_EDGES = ((0, 1), (1, 2), (1, 3), (3, 4))


def ibmq_ourense(n: int = 3) -> Topology:
    """The ibmq_ourense coupling restricted to its first ``n`` qubits (n <= 5)."""
    if not 1 <= n <= 5:
        raise QubitIndexError("ibmq_ourense has 5 qubits")
    return Topology.from_edges(n, IBMQ_OURENSE_EDGES, "ibmq_ourense")


def placement_pairs(g: GatePlacement, n: int) -> list[tuple[int, int]]:
    """(control, target) pairs of every CNOT a placement contains."""
    if g.gate is GateId.CNOT:
        return [tuple(g.qubits)]
    if g.gate.is_block:
        return [q for prim, q in block_primitives(g.gate, n) if prim is GateId.CNOT]
    return []


def validate_circuit(c: Circuit, t: Topology) -> list[tuple[int, tuple[int, int]]]:
    """List of ``(gate index, (control, target))`` violations; empty means ok."""
    if c.n != t.n:
        raise QubitIndexError(f"circuit width {c.n} != topology width {t.n}")
    bad = []
    for i, g in enumerate(c.gates):
        for pair in placement_pairs(g, c.n):
            if not t.allows(*pair):
                bad.append((i, pair))
    return bad
