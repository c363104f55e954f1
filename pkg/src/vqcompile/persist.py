"""Result files: circuit, manifest, replay log and Q-table snapshot, plus schema checks."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import metadata, resources
from pathlib import Path

import jsonschema

from .agent import ReplayEntry
from .circuit import Circuit
from .cost import CostKind
from .search import SearchConfig, SearchResult

SCHEMAS = ("circuit", "manifest", "replay_entry", "qtable", "sweep_plot", "oracle")


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@lru_cache(maxsize=None)
def schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(f"no schema named {name!r}")
    text = resources.files("vqcompile.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(name: str, data) -> None:
    """Raise ``jsonschema.ValidationError`` if ``data`` does not match the named schema."""
    jsonschema.validate(data, schema(name))


def _dump(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def circuit_document(c: Circuit, cost: float, kind: CostKind, target: str) -> dict:
    doc = c.to_json()
    doc.update(cost=float(cost), cost_kind=CostKind(kind).value, target=target)
    return doc


def manifest_document(config: SearchConfig, result: SearchResult, wall_time: float) -> dict:
    return {
        "config": config.to_json(),
        "tool_version": tool_version(),
        "wall_time": float(wall_time),
        "result": result.summary(),
    }


def qtable_document(result: SearchResult) -> dict:
    return {"q0": result.q0, "entries": result.q_snapshot}


def write_replay(path: str | Path, entries: list[ReplayEntry]) -> None:
    with open(path, "w") as fh:
        for e in entries:
            fh.write(json.dumps(e.to_json()) + "\n")


def read_replay(path: str | Path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_results(
    out: str | Path, config: SearchConfig, result: SearchResult, wall_time: float
) -> dict[str, Path]:
    """Write circuit.json, manifest.json, replay.jsonl and qtable.json into ``out``."""
    out = Path(out)
    config = config.resolved()
    paths = {k: out / f for k, f in (
        ("circuit", "circuit.json"),
        ("manifest", "manifest.json"),
        ("replay", "replay.jsonl"),
        ("qtable", "qtable.json"),
    )}
    docs = {
        "circuit": circuit_document(
            result.best_circuit, result.best_cost, config.cost_kind, str(config.target)
        ),
        "manifest": manifest_document(config, result, wall_time),
        "qtable": qtable_document(result),
    }
    for name, doc in docs.items():
        validate(name, doc)
        _dump(paths[name], doc)
    write_replay(paths["replay"], result.replay)
    return paths


def load_manifest_config(path: str | Path) -> SearchConfig:
    data = json.loads(Path(path).read_text())
    validate("manifest", data)
    return SearchConfig.from_json(data["config"])
