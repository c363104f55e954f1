"""Exhaustive minimal-length search, used to certify what the agent should find."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .agent import ActionSpace
from .circuit import Circuit, Topology
from .cost import CostKind
from .errors import SizeLimitError
from .gates import GateId
from .optimize import OptimizerSettings, optimize
from .targets import num_qubits

log = logging.getLogger(__name__)

DEFAULT_MAX_QUBITS = 2
DEFAULT_MAX_LENGTH = 6
# extra restarts: a missed global minimum here would be a false certificate
ORACLE_SETTINGS = OptimizerSettings(step_size=0.1, max_iterations=1000, restarts=8)


@dataclass
class OracleReport:
    minimal_length: int | None
    witness: Circuit | None
    witness_cost: float | None
    best_cost_by_length: dict[int, float] = field(default_factory=dict)
    structures_evaluated: int = 0

    def to_json(self, target: str, threshold: float, max_length: int) -> dict:
        return {
            "target": target,
            "threshold": threshold,
            "max_length": max_length,
            "minimal_length": self.minimal_length,
            "best_cost_by_length": {str(k): v for k, v in self.best_cost_by_length.items()},
            "structures_evaluated": self.structures_evaluated,
            "witness": None if self.witness is None else self.witness.to_json(),
        }


def minimal_length(
    target: np.ndarray,
    alphabet: tuple[GateId, ...],
    topology: Topology | None = None,
    max_length: int = 5,
    threshold: float = 1e-3,
    kind: CostKind | str = CostKind.GLOBAL,
    settings: OptimizerSettings = ORACLE_SETTINGS,
    seed: int = 0,
    max_qubits: int = DEFAULT_MAX_QUBITS,
    length_cap: int = DEFAULT_MAX_LENGTH,
) -> OracleReport:
    """Smallest L <= ``max_length`` at which some L-gate structure reaches ``threshold``.

    Every action sequence of each length is optimised, shortest first; the
    scan ends at the first witness. Empty circuits are not considered.
    """
    n = num_qubits(target)
    if n > max_qubits or max_length > length_cap:
        raise SizeLimitError(
            f"oracle limited to n <= {max_qubits}, L <= {length_cap} (got n={n}, L={max_length})"
        )
    topology = topology or Topology.full(n)
    space = ActionSpace(alphabet, topology, max_length)
    report = OracleReport(None, None, None)
    for L in range(1, max_length + 1):
        best = np.inf
        for actions in itertools.product(range(space.size), repeat=L):
            structure = space.circuit(actions)
            rng = np.random.default_rng([seed, 3, *actions])
            out = optimize(structure, target, kind, settings, rng)
            report.structures_evaluated += 1
            best = min(best, out.cost)
            if out.cost < threshold:
                report.best_cost_by_length[L] = best
                report.minimal_length = L
                report.witness = structure.with_theta(out.theta)
                report.witness_cost = out.cost
                log.info("length %d: witness after %d structures", L, report.structures_evaluated)
                return report
        report.best_cost_by_length[L] = float(best)
        log.info("length %d: best cost %.3e", L, best)
    return report
