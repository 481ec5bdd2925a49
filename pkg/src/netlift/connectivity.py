"""Pin location, net snapping, net naming, and netlist assembly.

Pin anchors are fractions of the unrotated bounding box.  For a rotated
detection the pre-rotation box shares the detection box's center with
width/height swapped on quarter turns; anchors are mapped into that box,
mirrored first if requested, then rotated about the center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import (
    BBox,
    Component,
    CrossKind,
    CrossPoint,
    ElementDetection,
    ElementType,
    NetGeometry,
    Netlist,
    NetliftError,
    PIN_COUNTS,
    Point,
    Rotation,
    ValidationError,
)


class AssemblyError(NetliftError):
    """Netlist assembly hit an unconnected component pin or unknown type."""


@dataclass(frozen=True)
class PinDef:
    name: str
    u: float
    v: float


@dataclass(frozen=True)
class PinSpec:
    etype: ElementType
    pins: tuple[PinDef, ...]


def _spec(etype, *pins) -> tuple[ElementType, PinSpec]:
    return etype, PinSpec(etype, tuple(PinDef(n, u, v) for n, u, v in pins))


_TWO_PIN = (("p", 0.5, 0.0), ("n", 0.5, 1.0))

DEFAULT_PIN_TABLE: dict[ElementType, PinSpec] = dict(
    [
        _spec(ElementType.RESISTOR, *_TWO_PIN),
        _spec(ElementType.CAPACITOR, *_TWO_PIN),
        _spec(ElementType.INDUCTOR, *_TWO_PIN),
        _spec(ElementType.DIODE, *_TWO_PIN),
        _spec(ElementType.VSOURCE, *_TWO_PIN),
        _spec(ElementType.ISOURCE, *_TWO_PIN),
        _spec(
            ElementType.NMOS,
            ("d", 1.0, 0.25),
            ("g", 0.0, 0.5),
            ("s", 1.0, 0.75),
            ("b", 1.0, 0.5),
        ),
        _spec(
            ElementType.PMOS,
            ("d", 1.0, 0.25),
            ("g", 0.0, 0.5),
            ("s", 1.0, 0.75),
            ("b", 1.0, 0.5),
        ),
        _spec(
            ElementType.OPAMP,
            ("inp", 0.0, 0.25),
            ("inn", 0.0, 0.75),
            ("out", 1.0, 0.5),
        ),
        _spec(ElementType.GND, ("t", 0.5, 0.0)),
        _spec(ElementType.VDD, ("t", 0.5, 0.0)),
        _spec(ElementType.PORT, ("t", 0.5, 0.0)),
    ]
)

for _etype, _pinspec in DEFAULT_PIN_TABLE.items():
    assert len(_pinspec.pins) == PIN_COUNTS[_etype]

NAME_PREFIX: dict[ElementType, str] = {
    ElementType.NMOS: "M",
    ElementType.PMOS: "M",
    ElementType.RESISTOR: "R",
    ElementType.CAPACITOR: "C",
    ElementType.INDUCTOR: "L",
    ElementType.DIODE: "D",
    ElementType.VSOURCE: "V",
    ElementType.ISOURCE: "I",
    ElementType.OPAMP: "X",
}

BULK_DEFAULT = {ElementType.NMOS: "0", ElementType.PMOS: "VDD"}


@dataclass(frozen=True)
class PinInstance:
    element_id: str
    pin_name: str
    at: Point


@dataclass(frozen=True)
class NetBinding:
    pin: PinInstance
    net_label: int
    distance: float


@dataclass(frozen=True)
class NamingPolicy:
    ground: str = "0"
    power_prefix: str = "VDD"
    net_prefix: str = "net"


def anchor_to_image(det: ElementDetection, u: float, v: float) -> tuple[float, float]:
    """Map a fractional anchor on the unrotated box into image coordinates."""
    cx, cy = det.bbox.center
    w, h = det.bbox.width, det.bbox.height
    if det.rotation.angle in (90, 270):
        w, h = h, w
    if det.rotation.mirrored:
        u = 1.0 - u
    dx = (u - 0.5) * w
    dy = (v - 0.5) * h
    ang = det.rotation.angle
    if ang == 90:
        dx, dy = -dy, dx
    elif ang == 180:
        dx, dy = -dx, -dy
    elif ang == 270:
        dx, dy = dy, -dx
    return cx + dx, cy + dy


def anchor_direction(det: ElementDetection, du: float, dv: float) -> tuple[float, float]:
    """Rotate a direction given in unrotated-box coordinates into the image frame."""
    if det.rotation.mirrored:
        du = -du
    ang = det.rotation.angle
    if ang == 90:
        du, dv = -dv, du
    elif ang == 180:
        du, dv = -du, -dv
    elif ang == 270:
        du, dv = dv, -du
    return du, dv


def pin_positions(
    det: ElementDetection, table: dict[ElementType, PinSpec] | None = None
) -> list[PinInstance]:
    """Pixel positions of the detection's pins, in terminal order."""
    table = table or DEFAULT_PIN_TABLE
    if det.etype not in table:
        raise AssemblyError(f"no pin table entry for element type {det.etype.value}")
    out = []
    for pin in table[det.etype].pins:
        x, y = anchor_to_image(det, pin.u, pin.v)
        out.append(
            PinInstance(det.id, pin.name, Point(int(math.floor(x + 0.5)), int(math.floor(y + 0.5))))
        )
    return out


def _point_segment_distance(px: float, py: float, seg) -> float:
    ax, ay, bx, by = seg.a.x, seg.a.y, seg.b.x, seg.b.y
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    t = ((px - ax) * abx + (py - ay) * aby) / denom
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * abx), py - (ay + t * aby))


def assign_nets(
    pins: list[PinInstance], nets: list[NetGeometry], snap: float = 6.0
) -> tuple[list[NetBinding], list[PinInstance]]:
    """Bind each pin to its nearest net within the snap radius.

    Ties go to the lower net label.  Pins with no net in range come back
    in the second list; whether that is an error is the caller's call.
    """
    bound: list[NetBinding] = []
    unbound: list[PinInstance] = []
    for pin in pins:
        best: tuple[float, int] | None = None
        for net in nets:
            if not net.segments:
                continue
            d = min(
                _point_segment_distance(pin.at.x, pin.at.y, seg) for seg in net.segments
            )
            if best is None or (d, net.label) < best:
                best = (d, net.label)
        if best is not None and best[0] <= snap:
            bound.append(NetBinding(pin, best[1], best[0]))
        else:
            unbound.append(pin)
    return bound, unbound


def name_nets(
    dets: list[ElementDetection],
    bindings: list[NetBinding],
    policy: NamingPolicy = NamingPolicy(),
) -> dict[int, str]:
    """Assign display names to net labels.

    Ground-touched labels all become the ground name; power labels get
    VDD, VDD2, ... in ascending label order; port labels take the port's
    id; the rest become net1, net2, ... ascending.
    """
    etype_of = {d.id: d.etype for d in dets}
    by_label: dict[int, list[NetBinding]] = {}
    for b in bindings:
        by_label.setdefault(b.net_label, []).append(b)

    names: dict[int, str] = {}
    used: set[str] = set()

    def claim(name: str) -> str:
        if name in used:
            k = 2
            while f"{name}_{k}" in used:
                k += 1
            name = f"{name}_{k}"
        used.add(name)
        return name

    gnd_labels = sorted(
        lbl
        for lbl, bs in by_label.items()
        if any(etype_of.get(b.pin.element_id) is ElementType.GND for b in bs)
    )
    for lbl in gnd_labels:
        names[lbl] = policy.ground
    used.add(policy.ground)

    vdd_labels = sorted(
        lbl
        for lbl, bs in by_label.items()
        if lbl not in names
        and any(etype_of.get(b.pin.element_id) is ElementType.VDD for b in bs)
    )
    for i, lbl in enumerate(vdd_labels):
        names[lbl] = claim(policy.power_prefix if i == 0 else f"{policy.power_prefix}{i + 1}")

    for det in dets:
        if det.etype is not ElementType.PORT:
            continue
        for b in bindings:
            if b.pin.element_id == det.id and b.net_label not in names:
                names[b.net_label] = claim(det.id)

    counter = 0
    for lbl in sorted(by_label):
        if lbl in names:
            continue
        counter += 1
        names[lbl] = claim(f"{policy.net_prefix}{counter}")
    return names


def assemble_netlist(
    dets: list[ElementDetection],
    bindings: list[NetBinding],
    policy: NamingPolicy = NamingPolicy(),
    table: dict[ElementType, PinSpec] | None = None,
) -> Netlist:
    """Build the netlist: symbols become net names, components get typed
    prefixes with ordinals in detection order."""
    table = table or DEFAULT_PIN_TABLE
    names = name_nets(dets, bindings, policy)
    lookup = {(b.pin.element_id, b.pin.pin_name): b for b in bindings}
    counters: dict[str, int] = {}
    comps: list[Component] = []
    for det in dets:
        if det.etype.is_symbol:
            continue
        prefix = NAME_PREFIX[det.etype]
        counters[prefix] = counters.get(prefix, 0) + 1
        cname = f"{prefix}{counters[prefix]}"
        pins = []
        for pin in table[det.etype].pins:
            b = lookup.get((det.id, pin.name))
            if b is None:
                if pin.name == "b" and det.etype in BULK_DEFAULT:
                    pins.append(BULK_DEFAULT[det.etype])
                    continue
                raise AssemblyError(
                    f"element {det.id} ({det.etype.value}) pin {pin.name} is unbound"
                )
            pins.append(names[b.net_label])
        comps.append(Component(cname, det.etype, tuple(pins)))
    return Netlist.from_components(comps)


# ---------------------------------------------------------------------------
# Detections document (JSON)


@dataclass
class DetectionsDoc:
    image: str
    width: int
    height: int
    elements: list[ElementDetection]
    crosspoints: list[CrossPoint] = field(default_factory=list)


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise ValidationError(f"{ctx}: missing field {key!r}")
    return obj[key]


def detections_from_dict(doc: dict) -> DetectionsDoc:
    image = _require(doc, "image", "detections")
    width = int(_require(doc, "width", "detections"))
    height = int(_require(doc, "height", "detections"))
    elements = []
    seen: set[str] = set()
    for i, el in enumerate(_require(doc, "elements", "detections")):
        ctx = f"elements[{i}]"
        eid = str(_require(el, "id", ctx))
        if eid in seen:
            raise ValidationError(f"{ctx}: duplicate element id {eid!r}")
        seen.add(eid)
        etype = ElementType.from_name(str(_require(el, "type", ctx)))
        x0, y0, x1, y1 = (int(v) for v in _require(el, "bbox", ctx))
        bbox = BBox.of(x0, y0, x1, y1)
        if not (0 <= x0 and 0 <= y0 and x1 < width and y1 < height):
            raise ValidationError(f"{ctx}: bbox {bbox.as_list()} outside {width}x{height}")
        rot = Rotation(int(el.get("rotation", 0)), bool(el.get("mirrored", False)))
        elements.append(ElementDetection(eid, etype, bbox, rot))
    crosspoints = []
    for i, cp in enumerate(doc.get("crosspoints", [])):
        ctx = f"crosspoints[{i}]"
        x = int(_require(cp, "x", ctx))
        y = int(_require(cp, "y", ctx))
        kind_name = str(_require(cp, "kind", ctx)).lower()
        try:
            kind = CrossKind(kind_name)
        except ValueError:
            raise ValidationError(f"{ctx}: unknown kind {kind_name!r}") from None
        crosspoints.append(CrossPoint(Point(x, y), kind))
    return DetectionsDoc(image, width, height, elements, crosspoints)


def detections_to_dict(doc: DetectionsDoc) -> dict:
    return {
        "image": doc.image,
        "width": doc.width,
        "height": doc.height,
        "elements": [
            {
                "id": d.id,
                "type": d.etype.value,
                "bbox": d.bbox.as_list(),
                "rotation": d.rotation.angle,
                "mirrored": d.rotation.mirrored,
            }
            for d in doc.elements
        ],
        "crosspoints": [
            {"x": cp.at.x, "y": cp.at.y, "kind": cp.kind.value} for cp in doc.crosspoints
        ],
    }


def load_detections(path) -> DetectionsDoc:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read detections {path}: {exc}") from exc
    return detections_from_dict(doc)


def save_detections(doc: DetectionsDoc, path) -> None:
    Path(path).write_text(json.dumps(detections_to_dict(doc), indent=2, sort_keys=True) + "\n")


def load_pin_table(path) -> dict[ElementType, PinSpec]:
    """Optional per-corpus override: {"NMOS": [{"name": "d", "u": 1, "v": 0.25}, ...]}."""
    doc = json.loads(Path(path).read_text())
    table = dict(DEFAULT_PIN_TABLE)
    for tname, pins in doc.items():
        etype = ElementType.from_name(tname)
        defs = tuple(
            PinDef(str(p["name"]), float(p["u"]), float(p["v"])) for p in pins
        )
        if len(defs) != PIN_COUNTS[etype]:
            raise ValidationError(
                f"pin table for {tname}: expected {PIN_COUNTS[etype]} pins, got {len(defs)}"
            )
        table[etype] = PinSpec(etype, defs)
    return table
