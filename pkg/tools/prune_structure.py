"""Shrink a known decomposition gate by gate while it still compiles its target.

Used once to produce the stored QFT3 / CCNOT structures under tests/data.

    python tools/prune_structure.py qft3 tests/data/qft3_structure.json
"""
from __future__ import annotations

import argparse
import json

import numpy as np

from vqcompile.circuit import Circuit
from vqcompile.gates import GateId as G
from vqcompile.optimize import OptimizerSettings, optimize
from vqcompile.targets import target_unitary

H = lambda q: [(G.RZ, (q,)), (G.RY, (q,))]  # noqa: E731  RY(pi/2) RZ(pi) = H


def cp(a, b):
    return [(G.RZ, (a,)), (G.CNOT, (a, b)), (G.RZ, (b,)), (G.CNOT, (a, b)), (G.RZ, (b,))]


def swap(a, b):
    return [(G.CNOT, (a, b)), (G.CNOT, (b, a)), (G.CNOT, (a, b))]


def qft3():
    return H(2) + cp(1, 2) + cp(0, 2) + H(1) + cp(0, 1) + H(0) + swap(0, 2)


def ccnot():
    # controls 2 and 1, target 0
    a, b, c = 2, 1, 0
    t = lambda q: [(G.RZ, (q,))]  # noqa: E731
    return (
        H(c) + [(G.CNOT, (b, c))] + t(c) + [(G.CNOT, (a, c))] + t(c) + [(G.CNOT, (b, c))]
        + t(c) + [(G.CNOT, (a, c))] + t(b) + t(c) + H(c) + [(G.CNOT, (a, b))] + t(b)
        + [(G.CNOT, (a, b))] + t(a)
    )


STARTS = {"qft3": qft3, "ccnot": ccnot}
SETTINGS = OptimizerSettings(max_iterations=2000, restarts=8)


def compiles(structure, u, seed, threshold):
    c = Circuit.from_structure(3, structure)
    out = optimize(c, u, "global", SETTINGS, np.random.default_rng(seed))
    return out.cost < threshold, out.cost


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("target", choices=sorted(STARTS))
    ap.add_argument("out")
    ap.add_argument("--threshold", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--length", type=int, default=0, help="stop once this many gates remain")
    args = ap.parse_args()
    u = target_unitary(args.target)
    s = STARTS[args.target]()
    ok, c = compiles(s, u, args.seed, args.threshold)
    print(f"start: {len(s)} gates, cost {c:.3e}")
    assert ok, "starting decomposition does not compile"
    changed = True
    while changed and len(s) > args.length:
        changed = False
        for i in range(len(s)):
            trial = s[:i] + s[i + 1 :]
            ok, c = compiles(trial, u, args.seed, args.threshold)
            if ok:
                print(f"drop {i} {s[i][0].value}{s[i][1]} -> {len(trial)} gates, cost {c:.3e}")
                s, changed = trial, True
                break
    doc = {"target": args.target, "n": 3, "structure": [[g.value, list(q)] for g, q in s]}
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    print(f"final: {len(s)} gates, {sum(g is G.CNOT for g, _ in s)} CNOTs")


if __name__ == "__main__":
    main()
