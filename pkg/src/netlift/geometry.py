"""Shared value types: pixels, boxes, segments, elements, label grids, and netlists.

Coordinate system is fixed across the whole package: origin at the top-left
pixel, x grows right, y grows down, integer pixel units.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class NetliftError(Exception):
    """Base class for all package errors."""


class ValidationError(NetliftError):
    """An invariant or schema constraint was violated."""


class ElementType(Enum):
    NMOS = "NMOS"
    PMOS = "PMOS"
    RESISTOR = "Resistor"
    CAPACITOR = "Capacitor"
    INDUCTOR = "Inductor"
    DIODE = "Diode"
    VSOURCE = "VSource"
    ISOURCE = "ISource"
    OPAMP = "OpAmp"
    GND = "Gnd"
    VDD = "Vdd"
    PORT = "Port"

    @classmethod
    def from_name(cls, name: str) -> "ElementType":
        for member in cls:
            if member.value.lower() == name.lower():
                return member
        raise ValidationError(f"unknown element type: {name!r}")

    @property
    def is_symbol(self) -> bool:
        """Symbols name nets instead of becoming netlist components."""
        return self in (ElementType.GND, ElementType.VDD, ElementType.PORT)


# Terminal counts per type; the full pin tables (names + anchors) live in
# the connectivity module and are checked against these at import time.
PIN_COUNTS: dict[ElementType, int] = {
    ElementType.NMOS: 4,
    ElementType.PMOS: 4,
    ElementType.RESISTOR: 2,
    ElementType.CAPACITOR: 2,
    ElementType.INDUCTOR: 2,
    ElementType.DIODE: 2,
    ElementType.VSOURCE: 2,
    ElementType.ISOURCE: 2,
    ElementType.OPAMP: 3,
    ElementType.GND: 1,
    ElementType.VDD: 1,
    ElementType.PORT: 1,
}

GROUND_ALIASES = frozenset({"0", "GND", "VSS"})
POWER_PREFIX = "VDD"


@dataclass(frozen=True, order=True)
class Point:
    x: int
    y: int

    def __iter__(self):
        return iter((self.x, self.y))


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box with inclusive corners."""

    min: Point
    max: Point

    def __post_init__(self):
        if self.min.x > self.max.x or self.min.y > self.max.y:
            raise ValidationError(f"invalid bbox: min {self.min} exceeds max {self.max}")

    @classmethod
    def of(cls, x0: int, y0: int, x1: int, y1: int) -> "BBox":
        return cls(Point(x0, y0), Point(x1, y1))

    @property
    def width(self) -> int:
        return self.max.x - self.min.x

    @property
    def height(self) -> int:
        return self.max.y - self.min.y

    @property
    def center(self) -> tuple[float, float]:
        return ((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0)

    def contains(self, p: Point) -> bool:
        return self.min.x <= p.x <= self.max.x and self.min.y <= p.y <= self.max.y

    def expanded(self, margin: int) -> "BBox":
        return BBox(
            Point(self.min.x - margin, self.min.y - margin),
            Point(self.max.x + margin, self.max.y + margin),
        )

    def intersects(self, other: "BBox") -> bool:
        return not (
            other.max.x < self.min.x
            or other.min.x > self.max.x
            or other.max.y < self.min.y
            or other.min.y > self.max.y
        )

    def as_list(self) -> list[int]:
        return [self.min.x, self.min.y, self.max.x, self.max.y]


def bbox_contains(b: BBox, p: Point) -> bool:
    return b.contains(p)


@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError(f"degenerate segment at {self.a}")

    @property
    def length(self) -> float:
        return float(np.hypot(self.b.x - self.a.x, self.b.y - self.a.y))


_ANGLES = (0, 90, 180, 270)


@dataclass(frozen=True)
class Rotation:
    angle: int = 0
    mirrored: bool = False

    def __post_init__(self):
        if self.angle not in _ANGLES:
            raise ValidationError(f"rotation angle must be one of {_ANGLES}, got {self.angle}")


@dataclass(frozen=True)
class ElementDetection:
    id: str
    etype: ElementType
    bbox: BBox
    rotation: Rotation = Rotation()


class CrossKind(Enum):
    CROSSING = "crossing"
    JUNCTION = "junction"


@dataclass(frozen=True)
class CrossPoint:
    at: Point
    kind: CrossKind


def rotate_point(p: Point, r: Rotation, size: tuple[int, int]) -> Point:
    """Map a pixel through a rigid rotation (optionally mirrored first) of the image frame.

    The frame of ``size`` (width, height) is mirrored about its vertical
    center line when requested, then rotated so that the whole raster maps
    onto a raster of the rotated dimensions.  Four 90-degree applications
    are the identity.
    """
    w, h = size
    if not (0 <= p.x < w and 0 <= p.y < h):
        raise ValidationError(f"point {p} outside {w}x{h} frame")
    x, y = p.x, p.y
    if r.mirrored:
        x = w - 1 - x
    if r.angle == 0:
        return Point(x, y)
    if r.angle == 90:
        return Point(h - 1 - y, x)
    if r.angle == 180:
        return Point(w - 1 - x, h - 1 - y)
    return Point(y, w - 1 - x)


def rotated_size(size: tuple[int, int], r: Rotation) -> tuple[int, int]:
    w, h = size
    return (h, w) if r.angle in (90, 270) else (w, h)


class BitMask:
    """Binary raster grid backed by a read-only boolean array of shape (h, w)."""

    __slots__ = ("pixels",)

    def __init__(self, pixels: np.ndarray):
        arr = np.ascontiguousarray(pixels, dtype=bool)
        if arr.ndim != 2:
            raise ValidationError(f"mask must be 2-D, got shape {arr.shape}")
        arr.setflags(write=False)
        self.pixels = arr

    @classmethod
    def empty(cls, width: int, height: int) -> "BitMask":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def count(self) -> int:
        return int(self.pixels.sum())

    def get(self, x: int, y: int) -> bool:
        return bool(self.pixels[y, x])

    def __eq__(self, other) -> bool:
        return isinstance(other, BitMask) and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        raise TypeError("BitMask is not hashable")

    def __repr__(self):
        return f"BitMask({self.width}x{self.height}, {self.count} set)"


class LabelMap:
    """Per-pixel net labels, 0 for background, labels dense in 1..count."""

    __slots__ = ("labels", "count")

    def __init__(self, labels: np.ndarray, validate: bool = True):
        arr = np.ascontiguousarray(labels, dtype=np.int32)
        if arr.ndim != 2:
            raise ValidationError(f"label map must be 2-D, got shape {arr.shape}")
        top = int(arr.max(initial=0))
        if validate:
            if int(arr.min(initial=0)) < 0:
                raise ValidationError("negative label")
            present = np.unique(arr)
            nonzero = present[present > 0]
            if len(nonzero) != top:
                raise ValidationError(f"labels not dense: {len(nonzero)} values, max {top}")
        arr.setflags(write=False)
        self.labels = arr
        self.count = top

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    def mask_of(self, label: int) -> np.ndarray:
        return self.labels == label

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelMap) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        raise TypeError("LabelMap is not hashable")

    def __repr__(self):
        return f"LabelMap({self.width}x{self.height}, {self.count} nets)"


@dataclass(frozen=True)
class NetGeometry:
    """One net summarized as straight segments plus its skeleton keypoints."""

    label: int
    segments: tuple[Segment, ...]
    ends: tuple[Point, ...] = ()
    branches: tuple[Point, ...] = ()
    turns: tuple[Point, ...] = ()


@dataclass(frozen=True)
class Component:
    name: str
    etype: ElementType
    pins: tuple[str, ...]

    def __post_init__(self):
        expected = PIN_COUNTS[self.etype]
        if len(self.pins) != expected:
            raise ValidationError(
                f"component {self.name}: {self.etype.value} needs {expected} pins, got {len(self.pins)}"
            )


def component_sort_key(name: str) -> tuple[str, int, str]:
    """Natural order for instance names such as M1, M2, M10."""
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head.upper(), int(tail) if tail else -1, name)


@dataclass
class Netlist:
    components: list[Component] = field(default_factory=list)
    nets: set[str] = field(default_factory=set)
    ground_names: set[str] = field(default_factory=set)
    power_names: set[str] = field(default_factory=set)

    @classmethod
    def from_components(cls, components) -> "Netlist":
        """Canonical form: nets are exactly the pin-referenced names, ground and
        power memberships derived from those names."""
        comps = sorted(components, key=lambda c: component_sort_key(c.name))
        names = [c.name for c in comps]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise ValidationError(f"duplicate component names: {dup}")
        nets = {net for c in comps for net in c.pins}
        return cls(
            components=comps,
            nets=nets,
            ground_names=set(GROUND_ALIASES & nets),
            power_names={n for n in nets if n.startswith(POWER_PREFIX)},
        )

    def validate(self) -> None:
        names = [c.name for c in self.components]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate component names")
        for c in self.components:
            for net in c.pins:
                if net not in self.nets:
                    raise ValidationError(f"component {c.name} references unknown net {net!r}")
        if not self.ground_names <= self.nets or not self.power_names <= self.nets:
            raise ValidationError("ground/power names must be a subset of nets")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Netlist):
            return NotImplemented
        key = lambda c: component_sort_key(c.name)
        return (
            sorted(self.components, key=key) == sorted(other.components, key=key)
            and self.nets == other.nets
            and self.ground_names == other.ground_names
            and self.power_names == other.power_names
        )
