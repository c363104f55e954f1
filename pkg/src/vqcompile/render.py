"""Text wire diagrams of circuits, and the parser that reads them back.

One row per qubit (qubit 0 on top), one space-separated cell per gate.
A one-qubit gate is a bracketed label on its wire, a CNOT is a control dot
and a target cross joined by vertical bars, and a block gate puts its label
on every wire.
"""
from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, GatePlacement
from .errors import VQCError
from .gates import GateId, parse_gate


class DiagramError(VQCError, ValueError):
    pass


@dataclass(frozen=True)
class Glyphs:
    wire: str
    control: str
    target: str
    vertical: str


UNICODE = Glyphs("─", "●", "⊕", "│")
ASCII = Glyphs("-", "*", "+", "|")


def _angle(t: float, precision: int | None) -> str:
    return repr(float(t)) if precision is None else f"{t:.{precision}f}"


def _cells(g: GatePlacement, n: int, glyphs: Glyphs, precision: int | None) -> list[str]:
    if g.gate.is_block:
        if g.theta:
            return [f"[{g.gate.value}({_angle(t, precision)})]" for t in g.theta]
        return [f"[{g.gate.value}]"] * n
    if g.gate is GateId.CNOT:
        c, t = g.qubits
        lo, hi = min(c, t), max(c, t)
        out = []
        for q in range(n):
            if q == c:
                out.append(glyphs.control)
            elif q == t:
                out.append(glyphs.target)
            else:
                out.append(glyphs.vertical if lo < q < hi else "")
        return out
    out = [""] * n
    label = g.gate.value
    if g.theta:
        label += f"({_angle(g.theta[0], precision)})"
    out[g.qubits[0]] = f"[{label}]"
    return out


def render(c: Circuit, ascii: bool = False, precision: int | None = 4) -> str:
    """Diagram of ``c``; ``precision=None`` prints angles exactly (repr)."""
    glyphs = ASCII if ascii else UNICODE
    columns = [_cells(g, c.n, glyphs, precision) for g in c.gates]
    prefix_w = len(f"q{c.n - 1}: ")
    rows = []
    for q in range(c.n):
        parts = []
        for col in columns:
            w = max(len(x) for x in col) + 2
            parts.append(col[q].center(w, glyphs.wire))
        rows.append(f"q{q}:".ljust(prefix_w) + " ".join(parts))
    return "\n".join(r.rstrip() for r in rows) + "\n"


def _split_label(text: str) -> tuple[GateId, float | None]:
    body = text[1:-1]
    name, paren, rest = body.partition("(")
    try:
        gate = parse_gate(name)
        angle = float(rest.rstrip(")")) if paren else None
    except (KeyError, ValueError) as exc:
        raise DiagramError(f"bad gate label {text!r}") from exc
    return gate, angle


def parse(text: str) -> Circuit:
    """Inverse of :func:`render` (either glyph set)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DiagramError("empty diagram")
    n = len(lines)
    rows = []
    for q, line in enumerate(lines):
        head, sep, body = line.partition(":")
        if not sep or head.strip() != f"q{q}":
            raise DiagramError(f"row {q} does not start with 'q{q}:'")
        rows.append(body.strip().split(" ") if body.strip() else [])
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise DiagramError("rows have different numbers of cells")
    gates = []
    for k in range(width.pop()):
        cells = [rows[q][k].strip("─-") for q in range(n)]
        gates.append(_column(cells, n))
    return Circuit(n, tuple(gates))


def _column(cells: list[str], n: int) -> GatePlacement:
    boxes = [(q, c) for q, c in enumerate(cells) if c.startswith("[")]
    controls = [q for q, c in enumerate(cells) if c in ("●", "*")]
    targets = [q for q, c in enumerate(cells) if c in ("⊕", "+")]
    if controls or targets:
        if len(controls) != 1 or len(targets) != 1 or boxes:
            raise DiagramError(f"malformed CNOT column {cells}")
        return GatePlacement(GateId.CNOT, (controls[0], targets[0]))
    if not boxes:
        raise DiagramError(f"empty column {cells}")
    parsed = [_split_label(label) for _, label in boxes]
    gate = parsed[0][0]
    if gate.is_block:
        if len(boxes) != n or any(g is not gate for g, _ in parsed):
            raise DiagramError(f"block gate {gate} must span every wire: {cells}")
        return GatePlacement(gate, (), tuple(a for _, a in parsed if a is not None))
    if len(boxes) != 1:
        raise DiagramError(f"several gates in one column: {cells}")
    angle = parsed[0][1]
    return GatePlacement(gate, (boxes[0][0],), () if angle is None else (angle,))
