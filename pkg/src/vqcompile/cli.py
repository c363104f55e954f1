"""``vqc`` command line: compile, sweep, oracle and render."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import tempfile
import time
from pathlib import Path

import jsonschema

from .circuit import Circuit
from .cost import CostKind
from .errors import VQCError
from .oracle import DEFAULT_MAX_LENGTH, DEFAULT_MAX_QUBITS, minimal_length
from .persist import validate, write_results
from .presets import HYPERPARAMETERS, parse_alphabet, parse_schedule, parse_topology
from .render import render
from .search import SearchConfig, run_search
from .targets import TargetSpec, num_qubits, parse_target, target_unitary

EXIT_OK, EXIT_CONFIG, EXIT_OUTPUT = 0, 2, 3


class OutputDirError(Exception):
    pass


def default_presets(n: int) -> dict:
    """Alphabet, schedule and hyperparameter preset names for an n-qubit target."""
    if n <= 2:
        return {"alphabet": "ibm2q", "schedule": "table1", "hyper": "small-n"}
    if n == 3:
        return {"alphabet": "rzry", "schedule": "table3", "hyper": "small-n"}
    return {"alphabet": "blocks", "schedule": "table3", "hyper": "large-n"}


def _search_flags(p: argparse.ArgumentParser, need_length: bool = True) -> None:
    p.add_argument("--config", help="JSON config, or a manifest.json to re-run")
    p.add_argument("--target", help="cz, cs, ch, cnot, xx3pi2, qft2, wsp3, ccnot, qft3, "
                   "identityN, layered:N[:seed], or a matrix .json")
    p.add_argument("--alphabet", help="ibm2q | rzry | blocks | rz_only | GATE,GATE,... | file.json")
    p.add_argument("--topology", help="full | ibmq_ourense | file.json")
    if need_length:
        p.add_argument("--max-gates", type=int, dest="L", help="circuit length L")
    p.add_argument("--schedule", help="table1 | table3 | eps:count,... | file.json")
    p.add_argument("--hyper", choices=sorted(HYPERPARAMETERS), help="alpha/gamma/K preset")
    p.add_argument("--alpha", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--batch-size", type=int, dest="K")
    p.add_argument("--lambda", type=float, dest="lam", help="CNOT penalty weight")
    p.add_argument("--cost", choices=[k.value for k in CostKind])
    p.add_argument("--seed", type=int)
    p.add_argument("--q-init-samples", type=int)
    p.add_argument("--terminal-reward", choices=["full", "shaped"])
    p.add_argument("--stop-cost", type=float, help="end the search once best cost is below this")
    p.add_argument("--step-size", type=float)
    p.add_argument("--step-growth", type=float)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--out", required=True, help="output directory")


def _load_config_file(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise VQCError(f"cannot read config {path}: {exc}") from exc
    if "config" in data and "result" in data:
        validate("manifest", data)
        data = data["config"]
    return data


def build_config(args: argparse.Namespace, L: int | None = None) -> SearchConfig:
    """Merge ``--config`` (if any), n-dependent presets, and explicit flags."""
    base = _load_config_file(args.config) if args.config else {}
    if args.target is not None:
        spec = parse_target(args.target)
        t = {"name": spec.name, "n": spec.n, "seed": spec.seed, "path": spec.path}
        if base and base.get("target") != t:
            base.pop("topology", None)
        base["target"] = t
    if "target" not in base:
        raise VQCError("--target is required")
    t = base["target"]
    spec = TargetSpec(t["name"], t.get("n"), t.get("seed", 0), t.get("path"))
    n = num_qubits(target_unitary(spec))
    presets = default_presets(n)
    if args.alphabet is not None or "alphabet" not in base:
        base["alphabet"] = [g.value for g in parse_alphabet(args.alphabet or presets["alphabet"])]
    if args.topology is not None or "topology" not in base:
        base["topology"] = parse_topology(args.topology or "full", n).to_json()
    if args.schedule is not None or "schedule" not in base:
        base["schedule"] = parse_schedule(args.schedule or presets["schedule"]).to_json()
    if args.hyper is not None or "alpha" not in base:
        h = HYPERPARAMETERS[args.hyper or presets["hyper"]]
        base.update(alpha=h.alpha, gamma=h.gamma, K=h.K)
    L = L if L is not None else getattr(args, "L", None)
    for key, value in (
        ("L", L),
        ("alpha", args.alpha),
        ("gamma", args.gamma),
        ("K", args.K),
        ("lambda", args.lam),
        ("cost_kind", args.cost),
        ("seed", args.seed),
        ("q_init_samples", args.q_init_samples),
        ("terminal_reward_mode", args.terminal_reward),
        ("stop_cost", args.stop_cost),
    ):
        if value is not None:
            base[key] = value
    opt = dict(base.get("optimizer", {}))
    for key, value in (
        ("step_size", args.step_size),
        ("step_growth", args.step_growth),
        ("max_iterations", args.max_iterations),
        ("restarts", args.restarts),
    ):
        if value is not None:
            opt[key] = value
    base["optimizer"] = opt
    if "L" not in base:
        raise VQCError("--max-gates is required")
    return SearchConfig.from_json(base)


def prepare_out(path: str | Path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.TemporaryFile(dir=out):
            pass
    except OSError as exc:
        raise OutputDirError(f"output directory {out} is not writable: {exc}") from exc
    return out


def run_compile(config: SearchConfig, out: Path) -> dict:
    start = time.perf_counter()
    result = run_search(config)
    wall = time.perf_counter() - start
    try:
        write_results(out, config, result, wall)
    except OSError as exc:
        raise OutputDirError(str(exc)) from exc
    return {"L": config.L, **result.summary()}


def cmd_compile(args) -> int:
    config = build_config(args)
    out = prepare_out(args.out)
    row = run_compile(config, out)
    print(f"best_cost {row['best_cost']:.6e}")
    print(f"gates {row['n_gates']}  cnots {row['n_cnot']}  episodes {row['episodes']}")
    print(f"wrote {out}")
    return EXIT_OK


def _parse_range(text: str) -> list[int]:
    lo, sep, hi = text.partition(":")
    try:
        lo_i = int(lo)
        hi_i = int(hi) if sep else lo_i
    except ValueError as exc:
        raise VQCError(f"bad range {text!r}; expected lo:hi") from exc
    if lo_i < 1 or hi_i < lo_i:
        raise VQCError(f"bad range {text!r}")
    return list(range(lo_i, hi_i + 1))


SWEEP_COLUMNS = ("L", "best_cost", "best_reward", "n_cnot", "episodes")


def cmd_sweep(args) -> int:
    lengths = _parse_range(args.max_gates_range)
    configs = [build_config(args, L) for L in lengths]
    out = prepare_out(args.out)
    rows = []
    for config in configs:
        sub = prepare_out(out / f"L{config.L}")
        row = run_compile(config, sub)
        rows.append({k: row[k] for k in SWEEP_COLUMNS})
        print(f"L={config.L:3d}  best_cost {row['best_cost']:.6e}  cnots {row['n_cnot']}")
    rows.sort(key=lambda r: r["L"])
    plot = {"target": str(configs[0].target), "x": "L", "y": "best_cost", "rows": rows}
    validate("sweep_plot", plot)
    try:
        with open(out / "sweep.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
            w.writeheader()
            w.writerows(rows)
        (out / "sweep_plot.json").write_text(json.dumps(plot, indent=2) + "\n")
    except OSError as exc:
        raise OutputDirError(str(exc)) from exc
    return EXIT_OK


def cmd_oracle(args) -> int:
    spec = parse_target(args.target)
    u = target_unitary(spec)
    n = num_qubits(u)
    alphabet = parse_alphabet(args.alphabet or default_presets(n)["alphabet"])
    topology = parse_topology(args.topology or "full", n)
    report = minimal_length(
        u,
        alphabet,
        topology,
        max_length=args.max,
        threshold=args.threshold,
        kind=args.cost or CostKind.GLOBAL,
        seed=args.seed,
        max_qubits=args.max_qubits,
        length_cap=args.length_cap,
    )
    doc = report.to_json(str(spec), args.threshold, args.max)
    validate("oracle", doc)
    if report.minimal_length is None:
        print(f"minimal_length none (no structure of length <= {args.max} below {args.threshold})")
    else:
        print(f"minimal_length {report.minimal_length}")
        print(f"witness_cost {report.witness_cost:.6e}")
        print(render(report.witness), end="")
    if args.out:
        try:
            Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
        except OSError as exc:
            raise OutputDirError(str(exc)) from exc
    return EXIT_OK


def cmd_render(args) -> int:
    try:
        data = json.loads(Path(args.circuit).read_text())
        validate("circuit", data)
        c = Circuit.from_json(data)
    except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        raise VQCError(f"cannot read circuit {args.circuit}: {exc}") from exc
    print(render(c, ascii=args.ascii, precision=args.precision), end="")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vqc", description="Variational quantum compiling by double Q-learning.")
    p.add_argument("-v", "--verbose", action="store_true", help="log search progress")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="search for a circuit of a given length")
    _search_flags(c)
    c.set_defaults(func=cmd_compile)

    s = sub.add_parser("sweep", help="compile at every length in a range")
    _search_flags(s, need_length=False)
    s.add_argument("--max-gates-range", required=True, help="lo:hi (inclusive)")
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="exhaustive minimal length")
    o.add_argument("target")
    o.add_argument("--alphabet")
    o.add_argument("--topology")
    o.add_argument("--max", type=int, default=5, help="longest length to enumerate")
    o.add_argument("--threshold", type=float, default=1e-3)
    o.add_argument("--cost", choices=[k.value for k in CostKind])
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--max-qubits", type=int, default=DEFAULT_MAX_QUBITS)
    o.add_argument("--length-cap", type=int, default=DEFAULT_MAX_LENGTH)
    o.add_argument("--out", help="write the report as JSON")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("render", help="text diagram of a circuit.json")
    r.add_argument("circuit")
    r.add_argument("--ascii", action="store_true")
    r.add_argument("--precision", type=int, default=4)
    r.set_defaults(func=cmd_render)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(message)s",
    )
    try:
        return args.func(args)
    except OutputDirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    except (VQCError, KeyError, ValueError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
