import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import chisquare

from vqcompile.agent import (
    START,
    ActionId,
    ActionSpace,
    AgentState,
    QTablePair,
    ReplayEntry,
    StateTag,
    action_space,
    double_q_update,
    replay_minibatch,
    select_action,
    shaped_rewards,
    terminal_reward,
)
from vqcompile.circuit import Circuit, Topology, ibmq_ourense
from vqcompile.errors import InvalidStateError
from vqcompile.gates import GateId
from vqcompile.presets import ALPHABETS

IBM = ALPHABETS["ibm2q"]
RZRY = ALPHABETS["rzry"]


class FixedDraws:
    """Stands in for a Generator whose uniforms are given up front."""

    def __init__(self, values):
        self.values = list(values)

    def random(self, size=None):
        out = [self.values.pop(0) for _ in range(size or 1)]
        return np.array(out) if size else out[0]


def space(L=3, alphabet=IBM, topo=None):
    return ActionSpace(alphabet, topo or Topology.full(2), L)


def test_action_counts():
    assert len(action_space(START, IBM, Topology.full(2), 5)) == 6
    assert len(action_space(START, RZRY, Topology.full(3), 7)) == 12
    acts = action_space(START, RZRY, ibmq_ourense(3), 7)
    assert len(acts) == 10
    cnots = {a.qubits for a in acts if a.gate is GateId.CNOT}
    assert cnots == {(0, 1), (1, 0), (1, 2), (2, 1)}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_count_formula(n):
    # p one-qubit types, q two-qubit types: n p + q n (n - 1)
    assert len(action_space(START, IBM, Topology.full(n), 2)) == 2 * n + n * (n - 1)


def test_block_actions():
    acts = action_space(START, ALPHABETS["blocks"], Topology.full(4), 3)
    assert len(acts) == 6 and all(a.qubits == () for a in acts)


def test_action_space_edges():
    s = AgentState(StateTag.INTERMEDIATE, GateId.RZ, (0,), 3)
    assert action_space(s, IBM, Topology.full(2), 3) == []
    with pytest.raises(InvalidStateError):
        action_space(AgentState(StateTag.TERMINAL, gate_count=3), IBM, Topology.full(2), 3)
    q = QTablePair(space(3), 0.0)
    with pytest.raises(InvalidStateError):
        select_action(s, q, 0.5, np.random.default_rng(0))


def test_state_validation_and_keys():
    with pytest.raises(InvalidStateError):
        AgentState(StateTag.START, gate_count=1)
    with pytest.raises(InvalidStateError):
        AgentState(StateTag.INTERMEDIATE, None, (), 1)
    s = START.step(ActionId(GateId.CNOT, (0, 1)))
    assert s.key() == "CNOT(0,1)@1"
    assert AgentState.from_key(s.key()) == s
    assert AgentState.from_key(START.key()) == START


def test_state_numbering_round_trip():
    sp = space(4)
    for sid in range(sp.num_states):
        assert sp.state_id(sp.state_of(sid)) == sid


def test_uniform_when_epsilon_one():
    sp = space()
    q = QTablePair(sp, 0.0)
    q.q1[0, 2] = 5.0
    rng = np.random.default_rng(0)
    counts = np.zeros(sp.size)
    for _ in range(10_000):
        counts[sp.index[select_action(START, q, 1.0, rng)]] += 1
    assert chisquare(counts).pvalue > 1e-3


def test_greedy_unique_max():
    sp = space()
    q = QTablePair(sp, 0.0)
    q.q2[0, 4] = 0.1
    rng = np.random.default_rng(0)
    assert all(sp.index[select_action(START, q, 0.0, rng)] == 4 for _ in range(200))


def test_greedy_ties_split_evenly():
    sp = space()
    q = QTablePair(sp, 0.0)
    q.q1[0, 1] = q.q1[0, 3] = 1.0
    rng = np.random.default_rng(2024)
    picks = [sp.index[select_action(START, q, 0.0, rng)] for _ in range(10_000)]
    assert set(picks) == {1, 3}
    assert abs(picks.count(1) / len(picks) - 0.5) < 0.05


def test_terminal_reward_examples():
    c = Circuit.from_structure(
        2, [(GateId.CNOT, (0, 1)), (GateId.CNOT, (1, 0))] + [(GateId.RX_HALF_PI, (0,))] * 6
    )
    assert terminal_reward(0.0, c, 0.0) == 1.0
    assert abs(terminal_reward(0.0, c, 0.1) - 0.975) < 1e-15
    assert abs(terminal_reward(0.375, c, 0.0) - 0.625) < 1e-15
    with pytest.raises(InvalidStateError):
        terminal_reward(0.0, Circuit(2), 0.0)


def test_block_cnots_counted_in_penalty():
    c = Circuit.from_structure(4, [(GateId.CNOT_ALL, ()), (GateId.RZ_BLOCK, ())])
    assert abs(terminal_reward(0.0, c, 0.1) - (1 - 0.1 * 3 / 2)) < 1e-15


@given(st.floats(0, 1), st.integers(2, 10), st.floats(0.01, 1))
def test_penalty_prefers_fewer_cnots(c, length, lam):
    fewer = Circuit.from_structure(2, [(GateId.CNOT, (0, 1))] + [(GateId.RX_HALF_PI, (0,))] * (length - 1))
    more = Circuit.from_structure(2, [(GateId.CNOT, (0, 1))] * 2 + [(GateId.RX_HALF_PI, (0,))] * (length - 2))
    assert terminal_reward(c, fewer, lam) > terminal_reward(c, more, lam)


def test_shaped_rewards():
    assert shaped_rewards(1.0, 5) == [0.2, 0.2, 0.2, 0.2, 1.0]
    assert shaped_rewards(0.0, 4) == [0.0] * 4
    assert shaped_rewards(1.0, 5, terminal_full=False) == [0.2] * 5


@given(st.floats(-1, 1), st.integers(1, 20))
def test_shaped_total(r, L):
    assert abs(sum(shaped_rewards(r, L)) - r * (2 * L - 1) / L) < 1e-12


def test_update_example():
    sp = space(2)
    q = QTablePair(sp, 0.0)
    a0, a1 = 0, 3
    nxt = sp.next_id(0, a0)
    q.q1[0, a0] = 0.5
    q.q1[nxt, a1] = 1.0  # unique argmax of Q1 at s'
    q.q2[nxt, a1] = 0.6
    entry = ReplayEntry((a0, a1), 0.2, sp)  # first shaped reward 0.2 / 2 = 0.1
    double_q_update(q, entry, 0.02, 0.9, FixedDraws([0.1, 0.0, 0.0]))
    assert abs(q.q1[0, a0] - 0.5028) < 1e-15


def test_alpha_zero_and_one():
    sp = space(3)
    q = QTablePair(sp, 0.4)
    entry = ReplayEntry((1, 2, 5), 0.8, sp)
    double_q_update(q, entry, 0.0, 0.9, np.random.default_rng(0))
    assert np.all(q.q1 == 0.4) and np.all(q.q2 == 0.4)
    double_q_update(q, entry, 1.0, 0.9, FixedDraws([0.9, 0.0, 0.0, 0.0]))
    last = sp.next_id(1, 2)
    assert q.q2[last, 5] == 0.8
    assert np.all(q.q1 == 0.4)


def test_replay_entry_consistency():
    sp = space(3)
    with pytest.raises(InvalidStateError):
        ReplayEntry((0, 1), 0.5, sp)
    e = ReplayEntry((0, 4, 2), 0.5, sp)
    assert ReplayEntry.from_trajectory(sp, e.trajectory, 0.5) == e
    counts = [s.gate_count for s, _ in e.trajectory]
    assert counts == [0, 1, 2]
    doc = e.to_json()
    assert doc["trajectory"][1] == {"state": "RX_HALF_PI(0)@1", "action": "CNOT(0,1)"}
    bad = [e.trajectory[0], e.trajectory[2]]
    with pytest.raises(InvalidStateError):
        ReplayEntry.from_trajectory(sp, bad, 0.5)


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.booleans())
def test_minibatch_matches_sequential(seed, L, full):
    sp = space(L)
    gen = np.random.default_rng(seed)
    entries = [ReplayEntry(tuple(int(a) for a in gen.integers(sp.size, size=L)), float(gen.random()), sp)
               for _ in range(12)]
    a, b = QTablePair(sp, 0.3), QTablePair(sp, 0.3)
    # coarse values so greedy ties actually occur
    a.q1[:] = b.q1[:] = gen.integers(0, 3, a.q1.shape) / 4
    a.q2[:] = b.q2[:] = gen.integers(0, 3, a.q2.shape) / 4
    r1, r2 = np.random.default_rng(seed), np.random.default_rng(seed)
    replay_minibatch(a, entries, 0.2, 0.9, r1, full)
    for e in entries:
        double_q_update(b, e, 0.2, 0.9, r2, full)
    assert np.array_equal(a.q1, b.q1) and np.array_equal(a.q2, b.q2)
    assert np.array_equal(a.written, b.written)
    assert r1.random() == r2.random()


@given(st.integers(0, 2**32 - 1))
def test_update_locality(seed):
    sp = space(4)
    gen = np.random.default_rng(seed)
    e = ReplayEntry(tuple(int(a) for a in gen.integers(sp.size, size=4)), float(gen.random()), sp)
    q = QTablePair(sp, 0.1)
    q.q1[:] = gen.random(q.q1.shape)
    q.q2[:] = gen.random(q.q2.shape)
    before1, before2 = q.q1.copy(), q.q2.copy()
    double_q_update(q, e, 0.5, 0.9, gen)
    keys = {(sp.state_id(s), sp.index[a]) for s, a in e.trajectory}
    changed = set(zip(*np.nonzero((q.q1 != before1) | (q.q2 != before2))))
    assert changed <= keys
    assert set(zip(*np.nonzero(q.written))) == keys


def test_snapshot_keys():
    sp = space(2)
    q = QTablePair(sp, 0.5)
    q.set(1, START, sp.actions[2], 0.7)
    assert q.snapshot() == {"START@0|RZ(0)": [0.7, 0.5]}
    assert q.get(2, START, sp.actions[2]) == 0.5
