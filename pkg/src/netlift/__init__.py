"""netlift: schematic raster images + element detections -> Spectre netlists,
reconstructed digital schematics, and a self-verifying synthetic corpus."""

__version__ = "0.1.0"

from .geometry import (
    BBox,
    BitMask,
    Component,
    CrossKind,
    CrossPoint,
    ElementDetection,
    ElementType,
    LabelMap,
    NetGeometry,
    Netlist,
    NetliftError,
    Point,
    Rotation,
    Segment,
    ValidationError,
    bbox_contains,
    rotate_point,
)

__all__ = [
    "BBox",
    "BitMask",
    "Component",
    "CrossKind",
    "CrossPoint",
    "ElementDetection",
    "ElementType",
    "LabelMap",
    "NetGeometry",
    "Netlist",
    "NetliftError",
    "Point",
    "Rotation",
    "Segment",
    "ValidationError",
    "bbox_contains",
    "rotate_point",
    "__version__",
]
