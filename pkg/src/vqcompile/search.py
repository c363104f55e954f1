"""The structure search loop: episodes, replay memory, and best-circuit tracking."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .agent import (
    ActionSpace,
    QTablePair,
    ReplayEntry,
    replay_minibatch,
    select_action_id,
    terminal_reward,
)
from .circuit import Circuit, Topology
from .cost import CostKind, default_cost_kind
from .errors import ConfigError
from .gates import GateId, parse_gate
from .optimize import OptimizerSettings, optimize
from .presets import EpsilonSchedule
from .targets import TargetSpec, num_qubits, parse_target, target_unitary

log = logging.getLogger(__name__)

TERMINAL_MODES = ("full", "shaped")


@dataclass(frozen=True)
class SearchConfig:
    target: TargetSpec
    alphabet: tuple[GateId, ...]
    topology: Topology
    L: int
    schedule: EpsilonSchedule
    alpha: float = 0.02
    gamma: float = 0.9
    K: int = 128
    lam: float = 0.0
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    cost_kind: CostKind | None = None
    q_init_samples: int = 100
    seed: int = 0
    terminal_reward_mode: str = "full"
    # stop once best_cost drops below this; None runs the whole schedule
    stop_cost: float | None = None

    def __post_init__(self):
        if isinstance(self.target, str):
            object.__setattr__(self, "target", parse_target(self.target))
        object.__setattr__(self, "alphabet", tuple(parse_gate(g) for g in self.alphabet))
        if self.cost_kind is not None:
            object.__setattr__(self, "cost_kind", CostKind(self.cost_kind))
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha={self.alpha} outside [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma={self.gamma} outside [0, 1]")
        if self.K < 1 or self.L < 1:
            raise ConfigError("K and L must be >= 1")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.q_init_samples < 1:
            raise ConfigError("q_init_samples must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.terminal_reward_mode not in TERMINAL_MODES:
            raise ConfigError(f"terminal_reward_mode must be one of {TERMINAL_MODES}")
        if not self.alphabet:
            raise ConfigError("empty alphabet")

    def resolved(self) -> "SearchConfig":
        """Copy with the cost kind filled in from the qubit count."""
        if self.cost_kind is not None:
            return self
        return replace(self, cost_kind=default_cost_kind(self.topology.n))

    def to_json(self) -> dict:
        c = self.resolved()
        t = c.target
        return {
            "target": {"name": t.name, "n": t.n, "seed": t.seed, "path": t.path},
            "alphabet": [g.value for g in c.alphabet],
            "topology": c.topology.to_json(),
            "L": c.L,
            "schedule": c.schedule.to_json(),
            "alpha": c.alpha,
            "gamma": c.gamma,
            "K": c.K,
            "lambda": c.lam,
            "optimizer": c.optimizer.to_json(),
            "cost_kind": c.cost_kind.value,
            "q_init_samples": c.q_init_samples,
            "seed": c.seed,
            "terminal_reward_mode": c.terminal_reward_mode,
            "stop_cost": c.stop_cost,
        }

    @classmethod
    def from_json(cls, data: dict) -> "SearchConfig":
        try:
            t = data["target"]
            target = t if isinstance(t, str) else TargetSpec(t["name"], t.get("n"), t.get("seed", 0), t.get("path"))
            return cls(
                target=target,
                alphabet=tuple(data["alphabet"]),
                topology=Topology.from_json(data["topology"]),
                L=int(data["L"]),
                schedule=EpsilonSchedule.from_json(data["schedule"]),
                alpha=float(data.get("alpha", 0.02)),
                gamma=float(data.get("gamma", 0.9)),
                K=int(data.get("K", 128)),
                lam=float(data.get("lambda", 0.0)),
                optimizer=OptimizerSettings(**data.get("optimizer", {})),
                cost_kind=data.get("cost_kind"),
                q_init_samples=int(data.get("q_init_samples", 100)),
                seed=int(data.get("seed", 0)),
                terminal_reward_mode=data.get("terminal_reward_mode", "full"),
                stop_cost=data.get("stop_cost"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc


@dataclass(frozen=True)
class EpisodeRecord:
    actions: tuple[int, ...]
    cost: float
    reward: float
    epsilon: float


@dataclass
class SearchResult:
    best_circuit: Circuit
    best_cost: float
    best_reward: float
    episode_log: list[EpisodeRecord]
    q_snapshot: dict[str, list[float]]
    replay: list[ReplayEntry]
    q0: float
    evaluations: int
    space: ActionSpace = field(repr=False)
    qtables: QTablePair | None = field(default=None, repr=False)

    @property
    def episodes(self) -> int:
        return len(self.episode_log)

    def structure_of(self, record: EpisodeRecord) -> list[str]:
        return [self.space.actions[a].key() for a in record.actions]

    def greedy_structure(self) -> tuple[int, ...]:
        """Action ids of the rollout that follows argmax(Q1 + Q2), lowest id on ties."""
        q = self.qtables.q1 + self.qtables.q2
        sid, out = 0, []
        for count in range(self.space.L):
            a = int(np.argmax(q[sid]))
            out.append(a)
            sid = self.space.next_id(count, a)
        return tuple(out)

    def summary(self) -> dict:
        return {
            "best_cost": self.best_cost,
            "best_reward": self.best_reward,
            "n_gates": self.best_circuit.num_gates,
            "n_cnot": self.best_circuit.cnot_count,
            "episodes": self.episodes,
            "evaluations": self.evaluations,
            "q0": self.q0,
        }


class Evaluator:
    """Optimises structures once each; the angle RNG is derived from the structure.

    Because the RNG depends only on (seed, structure), memoising changes no
    result: the same structure always gets the same angles and cost.
    """

    def __init__(self, config: SearchConfig, space: ActionSpace, target: np.ndarray):
        self.config = config
        self.space = space
        self.target = target
        self.kind = config.cost_kind
        self.cache: dict[tuple[int, ...], tuple[np.ndarray, float]] = {}

    def __call__(self, actions: tuple[int, ...]) -> tuple[Circuit, float]:
        hit = self.cache.get(actions)
        structure = self.space.circuit(actions)
        if hit is None:
            rng = np.random.default_rng([self.config.seed, 2, *actions])
            out = optimize(structure, self.target, self.kind, self.config.optimizer, rng)
            hit = (out.theta, out.cost)
            self.cache[actions] = hit
        return structure.with_theta(hit[0]), hit[1]


def _setup(config: SearchConfig):
    config = config.resolved()
    target = target_unitary(config.target)
    n = num_qubits(target)
    if config.topology.n != n:
        raise ConfigError(f"topology has {config.topology.n} qubits, target has {n}")
    space = ActionSpace(config.alphabet, config.topology, config.L)
    return config, space, Evaluator(config, space, target)


def _random_mean_reward(config, space, evaluate, rng) -> float:
    total = 0.0
    for _ in range(config.q_init_samples):
        actions = tuple(int(a) for a in rng.integers(space.size, size=config.L))
        circuit, c = evaluate(actions)
        total += terminal_reward(c, circuit, config.lam)
    return total / config.q_init_samples


def init_q(config: SearchConfig, rng=None) -> float:
    """Mean terminal reward of ``q_init_samples`` uniformly random L-gate structures."""
    config, space, evaluate = _setup(config)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng([config.seed, 1])
    return _random_mean_reward(config, space, evaluate, rng)


def run_search(
    config: SearchConfig, progress: Callable[[int, EpisodeRecord], None] | None = None
) -> SearchResult:
    """Double Q-learning over L-gate structures; deterministic per ``config.seed``."""
    config, space, evaluate = _setup(config)
    q0 = _random_mean_reward(config, space, evaluate, np.random.default_rng([config.seed, 1]))
    rng = np.random.default_rng([config.seed, 0])
    qt = QTablePair(space, q0)
    terminal_full = config.terminal_reward_mode == "full"
    replay: list[ReplayEntry] = []
    episode_log: list[EpisodeRecord] = []
    best_reward = -math.inf
    best: tuple[Circuit, float] | None = None
    log.info("search start: %d actions, L=%d, q0=%.6f", space.size, config.L, q0)
    for eps in config.schedule.epsilons():
        sid, acts = 0, []
        for count in range(config.L):
            a = select_action_id(sid, qt, eps, rng)
            acts.append(a)
            sid = space.next_id(count, a)
        actions = tuple(acts)
        circuit, c = evaluate(actions)
        r = terminal_reward(c, circuit, config.lam)
        replay.append(ReplayEntry(actions, r, space))
        record = EpisodeRecord(actions, c, r, eps)
        episode_log.append(record)
        if r > best_reward:
            best_reward, best = r, (circuit, c)
        if progress is not None:
            progress(len(episode_log), record)
        batch = [replay[i] for i in rng.integers(len(replay), size=config.K)]
        replay_minibatch(qt, batch, config.alpha, config.gamma, rng, terminal_full)
        if config.stop_cost is not None and best[1] < config.stop_cost:
            log.info("stop: cost %.3e after %d episodes", best[1], len(episode_log))
            break
    if best is None:
        raise ConfigError("schedule has no episodes")
    log.info("search done: best cost %.3e, %d structures optimised", best[1], len(evaluate.cache))
    return SearchResult(
        best_circuit=best[0],
        best_cost=best[1],
        best_reward=best_reward,
        episode_log=episode_log,
        q_snapshot=qt.snapshot(),
        replay=replay,
        q0=q0,
        evaluations=len(evaluate.cache),
        space=space,
        qtables=qt,
    )
