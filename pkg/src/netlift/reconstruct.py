"""Editable schematic documents (JSON) and SVG rendering.

This is the open stand-in for a proprietary schematic database: element
placements, named net segment sets, and pin bindings, with enough
validation that round-trips are structural identities.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from . import glyphs
from .connectivity import NetBinding
from .geometry import (
    BBox,
    ElementDetection,
    ElementType,
    NetGeometry,
    Netlist,
    NetliftError,
    Point,
    Rotation,
    Segment,
    ValidationError,
)


class SchematicError(NetliftError):
    """Schematic document violates its schema or references."""


@dataclass(frozen=True)
class SchematicNet:
    name: str
    segments: tuple[Segment, ...]


@dataclass(frozen=True)
class SchematicBinding:
    element_id: str
    pin_name: str
    net_name: str


@dataclass
class SchematicDoc:
    canvas: tuple[int, int]
    elements: list[ElementDetection] = field(default_factory=list)
    nets: list[SchematicNet] = field(default_factory=list)
    bindings: list[SchematicBinding] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, SchematicDoc):
            return NotImplemented
        return (
            self.canvas == other.canvas
            and self.elements == other.elements
            and sorted(self.nets, key=_net_key) == sorted(other.nets, key=_net_key)
            and sorted(self.bindings, key=_binding_key) == sorted(other.bindings, key=_binding_key)
        )


def _binding_key(b: SchematicBinding):
    return (b.element_id, b.pin_name, b.net_name)


def _net_key(n: SchematicNet):
    # names repeat when merged grounds keep separate segment islands
    return (n.name, tuple(sorted((s.a.x, s.a.y, s.b.x, s.b.y) for s in n.segments)))


class _Coincidence:
    """Union-find over segment endpoints within a small snap distance."""

    def __init__(self, tol: float = 2.0):
        self.tol = tol
        self.points: list[tuple[int, int]] = []
        self.parent: list[int] = []

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def add(self, p: Point) -> int:
        idx = len(self.points)
        self.points.append((p.x, p.y))
        self.parent.append(idx)
        for j, (x, y) in enumerate(self.points[:-1]):
            if (x - p.x) ** 2 + (y - p.y) ** 2 <= self.tol**2:
                self.parent[self.find(idx)] = self.find(j)
        return idx


def _net_connected(net: SchematicNet, tol: float = 2.0) -> bool:
    if len(net.segments) <= 1:
        return True
    uf = _Coincidence(tol)
    seg_nodes = []
    for seg in net.segments:
        seg_nodes.append((uf.add(seg.a), uf.add(seg.b)))
    for a, b in seg_nodes:
        uf.parent[uf.find(a)] = uf.find(b)
    roots = {uf.find(a) for a, _ in seg_nodes}
    return len(roots) == 1


def validate_schematic(doc: SchematicDoc) -> None:
    ids = [e.id for e in doc.elements]
    if len(set(ids)) != len(ids):
        raise SchematicError("duplicate element ids")
    net_names = {n.name for n in doc.nets}
    for b in doc.bindings:
        if b.element_id not in ids:
            raise SchematicError(f"binding references unknown element {b.element_id!r}")
        if b.net_name not in net_names:
            raise SchematicError(f"binding references unknown net {b.net_name!r}")
    for net in doc.nets:
        if not _net_connected(net):
            raise SchematicError(f"net {net.name!r}: segments are not endpoint-connected")


def build_schematic(
    dets: list[ElementDetection],
    netgeoms: list[NetGeometry],
    netlist: Netlist,
    net_names: dict[int, str],
    bindings: list[NetBinding] = (),
    canvas: tuple[int, int] | None = None,
) -> SchematicDoc:
    """Assemble the document from one pipeline run's artifacts.

    Net labels must all carry names; geometries for unnamed (floating)
    labels should be filtered out by the caller beforehand.
    """
    if canvas is not None:
        canvas_w, canvas_h = canvas
    else:
        canvas_w = max([d.bbox.max.x + 1 for d in dets] + [256])
        canvas_h = max([d.bbox.max.y + 1 for d in dets] + [256])
    nets = []
    for geom in netgeoms:
        if geom.label not in net_names:
            raise SchematicError(f"net label {geom.label} has no name")
        nets.append(SchematicNet(net_names[geom.label], tuple(geom.segments)))
    doc = SchematicDoc(
        canvas=(canvas_w, canvas_h),
        elements=list(dets),
        nets=sorted(nets, key=_net_key),
        bindings=[
            SchematicBinding(b.pin.element_id, b.pin.pin_name, net_names[b.net_label])
            for b in bindings
        ],
    )
    validate_schematic(doc)
    return doc


# ---------------------------------------------------------------------------
# JSON persistence


def schematic_to_dict(doc: SchematicDoc) -> dict:
    return {
        "canvas": {"width": doc.canvas[0], "height": doc.canvas[1]},
        "elements": [
            {
                "id": e.id,
                "etype": e.etype.value,
                "bbox": e.bbox.as_list(),
                "rotation": e.rotation.angle,
                "mirrored": e.rotation.mirrored,
            }
            for e in doc.elements
        ],
        "nets": [
            {
                "name": n.name,
                "segments": [[s.a.x, s.a.y, s.b.x, s.b.y] for s in n.segments],
            }
            for n in doc.nets
        ],
        "bindings": [
            {"element_id": b.element_id, "pin_name": b.pin_name, "net_name": b.net_name}
            for b in doc.bindings
        ],
    }


def _need(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise SchematicError(f"schema error at {path}: missing {key!r}")
    return obj[key]


def schematic_from_dict(data: dict) -> SchematicDoc:
    canvas = _need(data, "canvas", "$")
    width = int(_need(canvas, "width", "canvas"))
    height = int(_need(canvas, "height", "canvas"))
    elements = []
    for i, e in enumerate(_need(data, "elements", "$")):
        path = f"elements[{i}]"
        try:
            bbox = BBox.of(*(int(v) for v in _need(e, "bbox", path)))
            rot = Rotation(int(e.get("rotation", 0)), bool(e.get("mirrored", False)))
            elements.append(
                ElementDetection(
                    str(_need(e, "id", path)),
                    ElementType.from_name(str(_need(e, "etype", path))),
                    bbox,
                    rot,
                )
            )
        except (TypeError, ValueError, ValidationError) as exc:
            raise SchematicError(f"schema error at {path}: {exc}") from exc
    nets = []
    for i, n in enumerate(_need(data, "nets", "$")):
        path = f"nets[{i}]"
        segs = []
        for j, quad in enumerate(_need(n, "segments", path)):
            try:
                x1, y1, x2, y2 = (int(v) for v in quad)
                segs.append(Segment(Point(x1, y1), Point(x2, y2)))
            except (TypeError, ValueError, ValidationError) as exc:
                raise SchematicError(f"schema error at {path}.segments[{j}]: {exc}") from exc
        nets.append(SchematicNet(str(_need(n, "name", path)), tuple(segs)))
    bindings = []
    for i, b in enumerate(_need(data, "bindings", "$")):
        path = f"bindings[{i}]"
        bindings.append(
            SchematicBinding(
                str(_need(b, "element_id", path)),
                str(_need(b, "pin_name", path)),
                str(_need(b, "net_name", path)),
            )
        )
    doc = SchematicDoc((width, height), elements, nets, bindings)
    validate_schematic(doc)
    return doc


def save_schematic(doc: SchematicDoc, path) -> None:
    validate_schematic(doc)
    Path(path).write_text(json.dumps(schematic_to_dict(doc), indent=2, sort_keys=True) + "\n")


def load_schematic(path) -> SchematicDoc:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchematicError(f"cannot read schematic {path}: {exc}") from exc
    return schematic_from_dict(data)


# ---------------------------------------------------------------------------
# SVG rendering


def _net_color(name: str) -> str:
    hue = zlib.crc32(name.encode("utf-8")) % 360
    return f"hsl({hue},65%,35%)"


def _fmt(v: float) -> str:
    return f"{v:.1f}".rstrip("0").rstrip(".")


def render_svg(doc: SchematicDoc) -> str:
    """Deterministic SVG: symbol glyphs, colored net polylines, net labels."""
    w, h = doc.canvas
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
    ]
    for det in doc.elements:
        lines, circles = glyphs.glyph_strokes(det)
        out.append(f'<g id="{det.id}" stroke="black" stroke-width="2" fill="none">')
        for (x1, y1), (x2, y2) in lines:
            out.append(
                f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}"/>'
            )
        for (cx, cy), r in circles:
            out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r)}"/>')
        out.append("</g>")
    for net in doc.nets:
        color = _net_color(net.name)
        out.append(f'<g stroke="{color}" stroke-width="2" fill="none">')
        for s in net.segments:
            out.append(f'<line x1="{s.a.x}" y1="{s.a.y}" x2="{s.b.x}" y2="{s.b.y}"/>')
        out.append("</g>")
        if net.segments:
            first = net.segments[0]
            mx = (first.a.x + first.b.x) / 2
            my = (first.a.y + first.b.y) / 2
            out.append(
                f'<text x="{_fmt(mx + 3)}" y="{_fmt(my - 3)}" fill="{color}" '
                f'font-size="11" font-family="monospace">{net.name}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
