"""Angle optimisation for a fixed circuit structure.

Gradients use the parameter-shift rule

    dC/dtheta_l = (C(theta + pi/2 e_l) - C(theta - pi/2 e_l)) / 2

which is exact for rotations ``exp(-i theta sigma / 2)``. :func:`shift_gradient`
evaluates it literally by rebuilding the circuit; :class:`Landscape` computes
the same shifted costs from cached prefix/suffix products and is what the
descent loop uses.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from .circuit import Circuit, circuit_unitary
from .cost import CostKind, _clamp, cost, partial_trace_norms
from .errors import DimensionError, ParameterArityError
from .gates import ROTATION_AXIS, GateId, block_primitives, embed, gate_matrix

HALF_PI = np.pi / 2


class Init(str, Enum):
    RANDOM_UNIFORM_0_2PI = "random_uniform_0_2pi"
    ZEROS = "zeros"


@dataclass(frozen=True)
class OptimizerSettings:
    step_size: float = 0.1
    # factor applied to the step after every accepted move; 1.0 means halving only
    step_growth: float = 1.2
    max_iterations: int = 500
    tolerance: float = 1e-8
    restarts: int = 4
    init: Init = Init.RANDOM_UNIFORM_0_2PI

    def __post_init__(self):
        object.__setattr__(self, "init", Init(self.init))
        if self.step_size <= 0 or self.tolerance <= 0:
            raise ValueError("step_size and tolerance must be positive")
        if self.step_growth < 1.0:
            raise ValueError("step_growth must be >= 1")
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("restarts and max_iterations must be >= 1")

    def to_json(self) -> dict:
        d = asdict(self)
        d["init"] = self.init.value
        return d


@dataclass(frozen=True)
class OptimizationOutcome:
    theta: np.ndarray
    cost: float
    iterations_used: int
    restart_index: int


def shift_gradient(
    structure: Circuit,
    target: np.ndarray,
    kind: CostKind | str,
    theta: Sequence[float],
) -> np.ndarray:
    """Parameter-shift gradient from 2P explicit cost evaluations."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (structure.num_params,):
        raise ParameterArityError(
            f"structure has {structure.num_params} parameter(s), got {theta.shape}"
        )
    grad = np.empty_like(theta)
    for l in range(theta.size):
        shifted = theta.copy()
        shifted[l] += HALF_PI
        plus = cost(target, circuit_unitary(structure.with_theta(shifted)), kind)
        shifted[l] -= 2 * HALF_PI
        minus = cost(target, circuit_unitary(structure.with_theta(shifted)), kind)
        grad[l] = 0.5 * (plus - minus)
    return grad


def _pauli_action(axis: str, q: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """(perm, phase) with ``(Sigma_q M)[i] = phase[i] * M[perm[i]]``."""
    idx = np.arange(d)
    bit = (idx >> q) & 1
    if axis == "Z":
        return idx, (1 - 2 * bit).astype(complex)
    if axis == "Y":
        return idx ^ (1 << q), np.where(bit == 0, -1j, 1j)
    return idx ^ (1 << q), np.ones(d, dtype=complex)


class Landscape:
    """Cost of one structure as a function of its angle vector.

    The circuit is flattened into primitive operations: fixed matrices
    (adjacent ones merged) and single-angle rotations. With prefix products
    ``A_k`` and suffix products ``B_k`` the unitary with rotation k at angle
    ``phi`` is ``cos(phi/2) B_k A_{k-1} - i sin(phi/2) B_k Sigma_k A_{k-1}``,
    so each shifted cost costs O(d^2) for the global test.
    """

    def __init__(self, structure: Circuit, target: np.ndarray, kind: CostKind | str):
        self.n = structure.n
        self.d = 1 << self.n
        if target.shape != (self.d, self.d):
            raise DimensionError(f"target shape {target.shape} does not match {self.n} qubits")
        self.kind = CostKind(kind)
        self.target = np.asarray(target, dtype=complex)
        self.target_dag = self.target.conj().T
        self.num_params = structure.num_params
        ops: list = []  # ("fixed", matrix) | ("rot", param_index, perm, phase)
        k = 0
        for g in structure.gates:
            prims = block_primitives(g.gate, self.n) if g.gate.is_block else [(g.gate, g.qubits)]
            for prim, qubits in prims:
                if prim in ROTATION_AXIS:
                    perm, phase = _pauli_action(ROTATION_AXIS[prim], qubits[0], self.d)
                    ops.append(("rot", k, perm, phase))
                    k += 1
                else:
                    m = embed(gate_matrix(prim), qubits, self.n)
                    if ops and ops[-1][0] == "fixed":
                        ops[-1] = ("fixed", m @ ops[-1][1])
                    else:
                        ops.append(("fixed", m))
        self.ops = ops
        self._packed = None

    def _op_matrix_apply(self, op, theta, m: np.ndarray) -> np.ndarray:
        """``op @ m``."""
        if op[0] == "fixed":
            return op[1] @ m
        _, k, perm, phase = op
        c, s = np.cos(theta[k] / 2), np.sin(theta[k] / 2)
        return c * m - 1j * s * (phase[:, None] * m[perm])

    def _right_apply(self, op, theta, m: np.ndarray) -> np.ndarray:
        """``m @ op``."""
        if op[0] == "fixed":
            return m @ op[1]
        _, k, perm, phase = op
        c, s = np.cos(theta[k] / 2), np.sin(theta[k] / 2)
        # (m Sigma)[:, j] = m[:, perm[j]] * phase[perm[j]]
        return c * m - 1j * s * (m[:, perm] * phase[perm][None, :])

    def unitary(self, theta: Sequence[float]) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        u = np.eye(self.d, dtype=complex)
        for op in self.ops:
            u = self._op_matrix_apply(op, theta, u)
        return u

    def cost(self, theta: Sequence[float]) -> float:
        return cost(self.target, self.unitary(theta), self.kind)

    def _check(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.num_params,):
            raise ParameterArityError(
                f"structure has {self.num_params} parameter(s), got {theta.shape}"
            )
        return theta

    def shifted_costs(self, theta: Sequence[float]) -> tuple[float, np.ndarray, np.ndarray]:
        """Cost at theta and at theta +- pi/2 e_l for every l."""
        theta = self._check(theta)
        prefixes = []
        a = np.eye(self.d, dtype=complex)
        for op in self.ops:
            prefixes.append(a)
            a = self._op_matrix_apply(op, theta, a)
        v = a
        plus = np.empty(self.num_params)
        minus = np.empty(self.num_params)
        d2 = float(self.d) ** 2
        if self.kind is CostKind.GLOBAL:
            value = _clamp(1.0 - abs(np.vdot(self.target, v)) ** 2 / d2)
            c = self.target_dag  # C_k = U^dag B_k
            for i in range(len(self.ops) - 1, -1, -1):
                op = self.ops[i]
                if op[0] == "rot":
                    _, k, perm, phase = op
                    ap = prefixes[i]
                    ct = c.T
                    tr0 = np.sum(ap * ct)
                    tr1 = np.sum((phase[:, None] * ap[perm]) * ct)
                    for sign, out in ((1.0, plus), (-1.0, minus)):
                        phi = theta[k] + sign * HALF_PI
                        t = np.cos(phi / 2) * tr0 - 1j * np.sin(phi / 2) * tr1
                        out[k] = _clamp(1.0 - abs(t) ** 2 / d2)
                c = self._right_apply(op, theta, c)
            return value, plus, minus
        value = self._local(v)
        b = np.eye(self.d, dtype=complex)
        for i in range(len(self.ops) - 1, -1, -1):
            op = self.ops[i]
            if op[0] == "rot":
                _, k, perm, phase = op
                ap = prefixes[i]
                x = b @ ap
                y = b @ (phase[:, None] * ap[perm])
                for sign, out in ((1.0, plus), (-1.0, minus)):
                    phi = theta[k] + sign * HALF_PI
                    out[k] = self._local(np.cos(phi / 2) * x - 1j * np.sin(phi / 2) * y)
            b = self._right_apply(op, theta, b)
        return value, plus, minus

    def _local(self, v: np.ndarray) -> float:
        p = partial_trace_norms(self.target @ v.conj().T, self.n) / (2 * self.d)
        return _clamp(1.0 - float(np.mean(p)))

    def value_and_grad(self, theta: Sequence[float]) -> tuple[float, np.ndarray]:
        value, plus, minus = self.shifted_costs(theta)
        return value, 0.5 * (plus - minus)

    def packed(self) -> tuple:
        """Array encoding of the operations for the compiled kernels."""
        if self._packed is None:
            m, d = len(self.ops), self.d
            kinds = np.zeros(m, dtype=np.int64)
            fixed = np.zeros((m, d, d), dtype=complex)
            perms = np.tile(np.arange(d), (m, 1))
            phases = np.ones((m, d), dtype=complex)
            pidx = np.zeros(m, dtype=np.int64)
            for i, op in enumerate(self.ops):
                if op[0] == "fixed":
                    fixed[i] = op[1]
                else:
                    kinds[i] = 1
                    pidx[i], perms[i], phases[i] = op[1], op[2], op[3]
            fixed_dag = np.ascontiguousarray(np.conj(np.transpose(fixed, (0, 2, 1))))
            self._packed = (kinds, fixed, fixed_dag, perms, phases, pidx)
        return self._packed

    def fast_value_and_grad(self, theta: Sequence[float]) -> tuple[float, np.ndarray]:
        theta = self._check(theta)
        return _kernels.value_and_grad(
            theta, *self.packed(), self.target, self.kind is CostKind.LOCAL, self.n
        )

    def descend(self, theta: np.ndarray, settings: "OptimizerSettings") -> tuple[np.ndarray, float, int]:
        theta, f, it = _kernels.descend(
            self._check(theta),
            float(settings.step_size),
            float(settings.step_growth),
            int(settings.max_iterations),
            float(settings.tolerance),
            *self.packed(),
            self.target,
            self.kind is CostKind.LOCAL,
            self.n,
        )
        return theta, float(f), int(it)


def reference_descend(
    land: Landscape, theta: np.ndarray, settings: OptimizerSettings
) -> tuple[np.ndarray, float, int]:
    """Pure-numpy twin of the compiled descent loop."""
    f, g = land.value_and_grad(theta)
    eta = settings.step_size
    it = 0
    while it < settings.max_iterations:
        it += 1
        cand = theta - eta * g
        fc, gc = land.value_and_grad(cand)
        if fc <= f:
            improvement = f - fc
            theta, f, g = cand, fc, gc
            eta *= settings.step_growth
            if improvement < settings.tolerance:
                break
        else:
            eta *= 0.5
            if eta < 1e-12:
                break
    return theta, f, it


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def optimize(
    structure: Circuit,
    target: np.ndarray,
    kind: CostKind | str = CostKind.GLOBAL,
    settings: OptimizerSettings | None = None,
    rng=None,
) -> OptimizationOutcome:
    """Gradient descent with step halving from ``settings.restarts`` starts; best one wins."""
    settings = settings or OptimizerSettings()
    rng = as_generator(rng)
    land = Landscape(structure, target, kind)
    p = land.num_params
    if p == 0:
        return OptimizationOutcome(np.zeros(0), land.cost(np.zeros(0)), 0, 0)
    best = None
    total_iters = 0
    for r in range(settings.restarts):
        if settings.init is Init.ZEROS:
            start = np.zeros(p)
        else:
            start = rng.uniform(0.0, 2 * np.pi, p)
        theta, f, it = land.descend(start, settings)
        total_iters += it
        if best is None or f < best[1]:
            best = (theta, f, r)
    theta, _, r = best
    final = cost(target, circuit_unitary(structure.with_theta(theta)), kind)
    return OptimizationOutcome(theta, final, total_iters, r)


def reduce_angles(theta: Sequence[float]) -> np.ndarray:
    """Angles mapped into [0, 2 pi) for reporting."""
    return np.mod(np.asarray(theta, dtype=float), 2 * np.pi)
