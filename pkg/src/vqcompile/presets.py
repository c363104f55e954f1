"""Named alphabets, exploration schedules, hyperparameter sets and topologies."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .circuit import Topology, ibmq_ourense
from .errors import ConfigError
from .gates import GateId, parse_gate

G = GateId

ALPHABETS: dict[str, tuple[GateId, ...]] = {
    "ibm2q": (G.RX_HALF_PI, G.RZ, G.CNOT),
    "rzry": (G.RZ, G.RY, G.CNOT),
    "blocks": (
        G.RZ_BLOCK,
        G.RY_BLOCK,
        G.CNOT_ALL,
        G.CNOT_EVEN,
        G.CNOT_ODD,
        G.CNOT_EVEN_BIDIRECT,
    ),
    "rz_only": (G.RZ,),
}


@dataclass(frozen=True)
class EpsilonSchedule:
    """Ordered (epsilon, episode count) stages."""

    stages: tuple[tuple[float, int], ...]

    def __post_init__(self):
        stages = tuple((float(e), int(c)) for e, c in self.stages)
        if not stages:
            raise ConfigError("schedule needs at least one stage")
        for e, c in stages:
            if not 0.0 <= e <= 1.0 or c < 0:
                raise ConfigError(f"bad stage ({e}, {c})")
        object.__setattr__(self, "stages", stages)

    @property
    def total(self) -> int:
        return sum(c for _, c in self.stages)

    def epsilons(self):
        """Epsilon of every episode in order."""
        for e, c in self.stages:
            for _ in range(c):
                yield e

    def scaled(self, factor: float) -> "EpsilonSchedule":
        return EpsilonSchedule(tuple((e, max(1, round(c * factor))) for e, c in self.stages))

    def to_json(self) -> list:
        return [[e, c] for e, c in self.stages]

    @classmethod
    def from_json(cls, data) -> "EpsilonSchedule":
        try:
            return cls(tuple((e, c) for e, c in data))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed schedule: {exc}") from exc


_EPS = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)
SCHEDULES = {
    "table1": EpsilonSchedule(tuple(zip(_EPS, (1500, 100, 100, 100, 150, 150, 150, 150, 150, 150)))),
    "table3": EpsilonSchedule(tuple(zip(_EPS, (3000, 200, 200, 200, 300, 300, 300, 300, 300, 300)))),
}


@dataclass(frozen=True)
class Hyperparameters:
    alpha: float
    gamma: float
    K: int


HYPERPARAMETERS = {
    "small-n": Hyperparameters(0.02, 0.9, 128),
    "large-n": Hyperparameters(0.2, 1.0, 128),
}


def parse_alphabet(text: str) -> tuple[GateId, ...]:
    """Preset name, comma-separated gate names, or a JSON file holding a list of names."""
    if text in ALPHABETS:
        return ALPHABETS[text]
    try:
        if text.endswith(".json"):
            names = json.loads(Path(text).read_text())
        else:
            names = [t for t in text.split(",") if t.strip()]
        gates = tuple(parse_gate(str(t).strip()) for t in names)
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"unknown alphabet {text!r}: {exc}") from exc
    if not gates:
        raise ConfigError(f"empty alphabet {text!r}")
    return gates


def parse_schedule(text: str) -> EpsilonSchedule:
    """Preset name, ``eps:count,...`` or a JSON file of ``[eps, count]`` pairs."""
    if text in SCHEDULES:
        return SCHEDULES[text]
    try:
        if text.endswith(".json"):
            return EpsilonSchedule.from_json(json.loads(Path(text).read_text()))
        pairs = [p.split(":") for p in text.split(",") if p.strip()]
        return EpsilonSchedule(tuple((float(e), int(c)) for e, c in pairs))
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"unknown schedule {text!r}: {exc}") from exc


def parse_topology(text: str, n: int) -> Topology:
    """``full``, ``ibmq_ourense`` (restricted to the first n qubits) or a JSON file."""
    if text == "full":
        return Topology.full(n)
    if text == "ibmq_ourense":
        return ibmq_ourense(n)
    try:
        topo = Topology.from_json(json.loads(Path(text).read_text()))
    except (OSError, json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"unknown topology {text!r}: {exc}") from exc
    if topo.n != n:
        raise ConfigError(f"topology has {topo.n} qubits, target has {n}")
    return topo
