"""Minimal Spectre-dialect netlist text: instance lines `name (nets...) model`.

Topological only; no parameters are emitted, and trailing key=value
tokens are tolerated and discarded on parse.
"""

from __future__ import annotations

import re

from .geometry import (
    Component,
    ElementType,
    Netlist,
    NetliftError,
    PIN_COUNTS,
    component_sort_key,
)

HEADER = "// generated by netlift"
SIMULATOR_LINE = "simulator lang=spectre"

MODEL_OF: dict[ElementType, str] = {
    ElementType.RESISTOR: "resistor",
    ElementType.CAPACITOR: "capacitor",
    ElementType.INDUCTOR: "inductor",
    ElementType.DIODE: "diode",
    ElementType.VSOURCE: "vsource",
    ElementType.ISOURCE: "isource",
    ElementType.NMOS: "nmos",
    ElementType.PMOS: "pmos",
    ElementType.OPAMP: "opamp",
}
TYPE_OF_MODEL = {v: k for k, v in MODEL_OF.items()}


class SpectreParseError(NetliftError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def emit_spectre(netlist: Netlist) -> str:
    """Deterministic text form; one instance line per component in name order."""
    netlist.validate()
    lines = [HEADER, SIMULATOR_LINE]
    for comp in sorted(netlist.components, key=lambda c: component_sort_key(c.name)):
        if comp.etype not in MODEL_OF:
            raise SpectreParseError(f"{comp.name}: type {comp.etype.value} has no model keyword")
        lines.append(f"{comp.name} ({' '.join(comp.pins)}) {MODEL_OF[comp.etype]}")
    return "\n".join(lines) + "\n"


_INSTANCE_RE = re.compile(r"^(\S+)\s*\(([^()]*)\)\s*(\S+)(.*)$")
_KV_RE = re.compile(r"^\w+=\S+$")


def parse_spectre(text: str) -> Netlist:
    components: list[Component] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("simulator"):
            if re.fullmatch(r"simulator\s+lang\s*=\s*spectre", line, re.IGNORECASE):
                continue
            raise SpectreParseError(f"unsupported simulator line: {line!r}", lineno)
        m = _INSTANCE_RE.match(line)
        if not m:
            raise SpectreParseError(f"malformed instance line: {raw.strip()!r}", lineno)
        name, nets_text, model, trailing = m.groups()
        for tok in trailing.split():
            if not _KV_RE.match(tok):
                raise SpectreParseError(f"unexpected token {tok!r}", lineno)
        if model not in TYPE_OF_MODEL:
            raise SpectreParseError(f"unknown model {model!r}", lineno)
        if name in seen:
            raise SpectreParseError(f"duplicate component name {name!r}", lineno)
        seen.add(name)
        etype = TYPE_OF_MODEL[model]
        pins = tuple(nets_text.split())
        if len(pins) != PIN_COUNTS[etype]:
            raise SpectreParseError(
                f"{name}: {model} takes {PIN_COUNTS[etype]} nets, got {len(pins)}", lineno
            )
        components.append(Component(name, etype, pins))
    return Netlist.from_components(components)


def load_netlist(path) -> Netlist:
    from pathlib import Path

    p = Path(path)
    if not p.is_file():
        raise SpectreParseError(f"no such netlist file: {p}")
    return parse_spectre(p.read_text())


def save_netlist(netlist: Netlist, path) -> None:
    from pathlib import Path

    Path(path).write_text(emit_spectre(netlist))
