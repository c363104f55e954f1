"""MDP encoding of circuit construction and the tabular double Q-learning update.

A state is ``(last gate, last qubits, gate count)``; START has count 0 and a
state with count L has no actions left (the next step is termination).
Internally states and actions are integers so the tables are dense arrays:
action ids follow :attr:`ActionSpace.actions` and a state reached by action
``a`` at count ``k`` has id ``1 + (k - 1) * A + a`` (START is 0).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .circuit import Circuit, Topology
from .errors import InvalidStateError
from .gates import GateId, block_primitives, parse_gate


class StateTag(str, Enum):
    START = "START"
    INTERMEDIATE = "INTERMEDIATE"
    TERMINAL = "TERMINAL"


@dataclass(frozen=True)
class ActionId:
    gate: GateId
    qubits: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gate", parse_gate(self.gate))
        object.__setattr__(self, "qubits", tuple(self.qubits))

    def key(self) -> str:
        return f"{self.gate.value}({','.join(map(str, self.qubits))})"

    @classmethod
    def from_key(cls, text: str) -> "ActionId":
        name, _, rest = text.partition("(")
        inner = rest.rstrip(")")
        qubits = tuple(int(q) for q in inner.split(",")) if inner else ()
        return cls(GateId(name), qubits)


@dataclass(frozen=True)
class AgentState:
    tag: StateTag
    last_gate: GateId | None = None
    last_qubits: tuple[int, ...] = ()
    gate_count: int = 0

    def __post_init__(self):
        tag = StateTag(self.tag)
        object.__setattr__(self, "tag", tag)
        if tag is StateTag.START and (self.gate_count != 0 or self.last_gate is not None):
            raise InvalidStateError("START carries no gate and count 0")
        if tag is StateTag.INTERMEDIATE and (self.last_gate is None or self.gate_count < 1):
            raise InvalidStateError("INTERMEDIATE needs a last gate and count >= 1")

    def step(self, action: ActionId) -> "AgentState":
        if self.tag is StateTag.TERMINAL:
            raise InvalidStateError("no transitions out of TERMINAL")
        return AgentState(StateTag.INTERMEDIATE, action.gate, action.qubits, self.gate_count + 1)

    def key(self) -> str:
        if self.tag is StateTag.INTERMEDIATE:
            return f"{ActionId(self.last_gate, self.last_qubits).key()}@{self.gate_count}"
        return f"{self.tag.value}@{self.gate_count}"

    @classmethod
    def from_key(cls, text: str) -> "AgentState":
        head, _, count = text.rpartition("@")
        if head in (StateTag.START.value, StateTag.TERMINAL.value):
            return cls(StateTag(head), gate_count=int(count))
        a = ActionId.from_key(head)
        return cls(StateTag.INTERMEDIATE, a.gate, a.qubits, int(count))


START = AgentState(StateTag.START)


def _alphabet_actions(n: int, alphabet: Sequence[GateId], topology: Topology) -> list[ActionId]:
    actions = []
    for gate in alphabet:
        gate = parse_gate(gate)
        if gate.is_block:
            pairs = [q for p, q in block_primitives(gate, n) if p is GateId.CNOT]
            if all(topology.allows(*q) for q in pairs):
                actions.append(ActionId(gate, ()))
        elif gate.arity(n) == 1:
            actions.extend(ActionId(gate, (q,)) for q in range(n))
        else:
            actions.extend(
                ActionId(gate, (c, t))
                for c in range(n)
                for t in range(n)
                if c != t and topology.allows(c, t)
            )
    return actions


class ActionSpace:
    """Fixed action list for one (alphabet, topology, L) plus state numbering."""

    def __init__(self, alphabet: Iterable[GateId | str], topology: Topology, L: int):
        if L < 1:
            raise ValueError("L must be >= 1")
        self.alphabet = tuple(parse_gate(g) for g in alphabet)
        self.topology = topology
        self.n = topology.n
        self.L = L
        self.actions = _alphabet_actions(self.n, self.alphabet, topology)
        if not self.actions:
            raise InvalidStateError("alphabet and topology admit no actions")
        self.index = {a: i for i, a in enumerate(self.actions)}
        self.size = len(self.actions)
        self.num_states = 1 + L * self.size

    def state_id(self, s: AgentState) -> int:
        if s.tag is StateTag.START:
            return 0
        if s.tag is StateTag.TERMINAL:
            raise InvalidStateError("TERMINAL has no table row")
        if not 1 <= s.gate_count <= self.L:
            raise InvalidStateError(f"gate count {s.gate_count} outside [1, {self.L}]")
        a = self.index[ActionId(s.last_gate, s.last_qubits)]
        return 1 + (s.gate_count - 1) * self.size + a

    def state_of(self, sid: int) -> AgentState:
        if sid == 0:
            return START
        k, a = divmod(sid - 1, self.size)
        act = self.actions[a]
        return AgentState(StateTag.INTERMEDIATE, act.gate, act.qubits, k + 1)

    def next_id(self, count: int, action_index: int) -> int:
        """Id of the state reached by ``action_index`` from a state with ``count`` gates."""
        return 1 + count * self.size + action_index

    def available(self, s: AgentState) -> list[ActionId]:
        if s.tag is StateTag.TERMINAL:
            raise InvalidStateError("TERMINAL state has no action space")
        return [] if s.gate_count >= self.L else list(self.actions)

    def circuit(self, action_indices: Sequence[int]) -> Circuit:
        return Circuit.from_structure(
            self.n, [(self.actions[a].gate, self.actions[a].qubits) for a in action_indices]
        )


def action_space(
    s: AgentState, alphabet: Iterable[GateId | str], topology: Topology, L: int
) -> list[ActionId]:
    """Actions available in ``s``; empty once ``s`` holds L gates."""
    return ActionSpace(alphabet, topology, L).available(s)


class QTablePair:
    """Two Q tables sharing the default value ``q0``.

    Rows are state ids, columns action ids. ``written`` tracks entries that
    have been assigned; everything else still reads as ``q0``.
    """

    def __init__(self, space: ActionSpace, q0: float = 0.0):
        self.space = space
        self.q0 = float(q0)
        shape = (space.num_states, space.size)
        self.q1 = np.full(shape, self.q0)
        self.q2 = np.full(shape, self.q0)
        self.written = np.zeros(shape, dtype=bool)

    def _table(self, which: int) -> np.ndarray:
        return self.q1 if which == 1 else self.q2

    def get(self, which: int, s: AgentState, a: ActionId) -> float:
        return float(self._table(which)[self.space.state_id(s), self.space.index[a]])

    def set(self, which: int, s: AgentState, a: ActionId, value: float) -> None:
        sid, aid = self.space.state_id(s), self.space.index[a]
        self._table(which)[sid, aid] = value
        self.written[sid, aid] = True

    def snapshot(self) -> dict[str, list[float]]:
        """``"state|action" -> [q1, q2]`` for every written entry."""
        out = {}
        for sid, aid in zip(*np.nonzero(self.written)):
            key = f"{self.space.state_of(int(sid)).key()}|{self.space.actions[aid].key()}"
            out[key] = [float(self.q1[sid, aid]), float(self.q2[sid, aid])]
        return out


@dataclass(frozen=True)
class ReplayEntry:
    """A finished episode: its action ids and terminal reward."""

    actions: tuple[int, ...]
    r_T: float
    space: ActionSpace = field(repr=False, compare=False)

    def __post_init__(self):
        if len(self.actions) != self.space.L:
            raise InvalidStateError(
                f"trajectory has {len(self.actions)} actions, expected L={self.space.L}"
            )

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def trajectory(self) -> list[tuple[AgentState, ActionId]]:
        out, s = [], START
        for a in self.actions:
            act = self.space.actions[a]
            out.append((s, act))
            s = s.step(act)
        return out

    @classmethod
    def from_trajectory(
        cls, space: ActionSpace, trajectory: Sequence[tuple[AgentState, ActionId]], r_T: float
    ) -> "ReplayEntry":
        s = START
        ids = []
        for state, act in trajectory:
            if state != s:
                raise InvalidStateError(f"inconsistent trajectory at {state.key()}")
            ids.append(space.index[act])
            s = s.step(act)
        return cls(tuple(ids), float(r_T), space)

    def to_json(self) -> dict:
        return {
            "trajectory": [
                {"state": s.key(), "action": a.key()} for s, a in self.trajectory
            ],
            "r_T": self.r_T,
        }


def _pick_max(row: np.ndarray, u: float) -> int:
    """Index of a maximum of ``row``; among ties the ``floor(u * count)``-th one."""
    best = np.flatnonzero(row == row.max())
    return int(best[min(int(u * best.size), best.size - 1)])


def select_action(
    s: AgentState, qtables: QTablePair, epsilon: float, rng: np.random.Generator
) -> ActionId:
    """Epsilon-greedy choice over ``Q1 + Q2``; greedy ties are broken uniformly."""
    space = qtables.space
    if not space.available(s):
        raise InvalidStateError(f"no actions available in {s.key()}")
    return space.actions[select_action_id(space.state_id(s), qtables, epsilon, rng)]


def select_action_id(sid: int, qtables: QTablePair, epsilon: float, rng: np.random.Generator) -> int:
    if rng.random() < epsilon:
        return int(rng.integers(qtables.space.size))
    return _pick_max(qtables.q1[sid] + qtables.q2[sid], rng.random())


def terminal_reward(cost: float, circuit: Circuit, lam: float = 0.0) -> float:
    """``1 - C`` minus ``lam * n_CNOT / L`` (block CNOTs counted individually)."""
    if circuit.num_gates == 0:
        raise InvalidStateError("reward needs a nonempty circuit")
    r = 1.0 - cost
    if lam:
        r -= lam * circuit.cnot_count / circuit.num_gates
    return r


def shaped_rewards(r_T: float, L: int, terminal_full: bool = True) -> list[float]:
    """``r_T / L`` on each of the first L-1 transitions, ``r_T`` on the last.

    With ``terminal_full=False`` the last transition also gets ``r_T / L``.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    step = r_T / L
    return [step] * (L - 1) + [r_T if terminal_full else step]


def double_q_update(
    qtables: QTablePair,
    entry: ReplayEntry,
    alpha: float,
    gamma: float,
    rng: np.random.Generator,
    terminal_full: bool = True,
) -> QTablePair:
    """One pass of double Q-learning over a stored trajectory (in place).

    A single draw ``y`` picks the table for the whole pass: ``y < 0.5``
    updates Q1, bootstrapping through Q2 at Q1's argmax, otherwise the mirror.
    The pass consumes L+1 uniforms: ``y`` then one tie-break per transition.
    """
    space = qtables.space
    L = len(entry)
    draws = rng.random(L + 1)
    rewards = shaped_rewards(entry.r_T, L, terminal_full)
    if draws[0] < 0.5:
        upd, ev = qtables.q1, qtables.q2
    else:
        upd, ev = qtables.q2, qtables.q1
    sid = 0
    for t, a in enumerate(entry.actions):
        nxt = space.next_id(t, a)
        boot = ev[nxt, _pick_max(upd[nxt], draws[t + 1])] if t + 1 < space.L else 0.0
        upd[sid, a] = (1 - alpha) * upd[sid, a] + alpha * (rewards[t] + gamma * boot)
        qtables.written[sid, a] = True
        sid = nxt
    return qtables


def replay_minibatch(
    qtables: QTablePair,
    entries: Sequence[ReplayEntry],
    alpha: float,
    gamma: float,
    rng: np.random.Generator,
    terminal_full: bool = True,
) -> QTablePair:
    """:func:`double_q_update` over each entry in turn, compiled.

    Consumes the random stream exactly as the sequential calls would.
    """
    if not entries:
        return qtables
    L = qtables.space.L
    actions = np.array([e.actions for e in entries], dtype=np.int64).reshape(len(entries), L)
    r_T = np.array([e.r_T for e in entries], dtype=float)
    draws = rng.random((len(entries), L + 1))
    _kernels.replay_updates(
        qtables.q1, qtables.q2, qtables.written, actions, r_T, draws,
        float(alpha), float(gamma), qtables.space.size, bool(terminal_full),
    )
    return qtables
