"""Stylized symbol geometry per element type, shared by the rasterizer and
the SVG renderer.

Glyphs are polylines and circles in unit-box coordinates (u right, v down
on the unrotated box).  Placement fidelity is what matters downstream;
looks are schematic-textbook-ish, not exact.
"""

from __future__ import annotations

import math

from .connectivity import anchor_to_image
from .geometry import ElementDetection, ElementType

# type -> (lines, circles); lines are ((u1, v1), (u2, v2)), circles ((cu, cv), r)
# with r a fraction of the box's smaller extent.
_ZIGZAG = [
    ((0.5, 0.0), (0.5, 0.2)),
    ((0.5, 0.2), (0.75, 0.275)),
    ((0.75, 0.275), (0.25, 0.425)),
    ((0.25, 0.425), (0.75, 0.575)),
    ((0.75, 0.575), (0.25, 0.725)),
    ((0.25, 0.725), (0.5, 0.8)),
    ((0.5, 0.8), (0.5, 1.0)),
]

_COIL = [
    ((0.5, 0.0), (0.5, 0.15)),
    ((0.5, 0.15), (0.8, 0.25)),
    ((0.8, 0.25), (0.2, 0.35)),
    ((0.2, 0.35), (0.8, 0.45)),
    ((0.8, 0.45), (0.2, 0.55)),
    ((0.2, 0.55), (0.8, 0.65)),
    ((0.8, 0.65), (0.5, 0.85)),
    ((0.5, 0.85), (0.5, 1.0)),
]

GLYPHS: dict[ElementType, tuple[list, list]] = {
    ElementType.RESISTOR: (_ZIGZAG, []),
    ElementType.CAPACITOR: (
        [
            ((0.5, 0.0), (0.5, 0.44)),
            ((0.15, 0.44), (0.85, 0.44)),
            ((0.15, 0.56), (0.85, 0.56)),
            ((0.5, 0.56), (0.5, 1.0)),
        ],
        [],
    ),
    ElementType.INDUCTOR: (_COIL, []),
    ElementType.DIODE: (
        [
            ((0.5, 0.0), (0.5, 0.3)),
            ((0.2, 0.3), (0.8, 0.3)),
            ((0.2, 0.3), (0.5, 0.65)),
            ((0.8, 0.3), (0.5, 0.65)),
            ((0.2, 0.65), (0.8, 0.65)),
            ((0.5, 0.65), (0.5, 1.0)),
        ],
        [],
    ),
    ElementType.VSOURCE: (
        [
            ((0.5, 0.0), (0.5, 0.2)),
            ((0.5, 0.8), (0.5, 1.0)),
            ((0.5, 0.3), (0.5, 0.45)),
            ((0.38, 0.375), (0.62, 0.375)),
            ((0.38, 0.65), (0.62, 0.65)),
        ],
        [((0.5, 0.5), 0.3)],
    ),
    ElementType.ISOURCE: (
        [
            ((0.5, 0.0), (0.5, 0.2)),
            ((0.5, 0.8), (0.5, 1.0)),
            ((0.5, 0.33), (0.5, 0.67)),
            ((0.5, 0.33), (0.38, 0.46)),
            ((0.5, 0.33), (0.62, 0.46)),
        ],
        [((0.5, 0.5), 0.3)],
    ),
    ElementType.NMOS: (
        [
            ((0.0, 0.5), (0.33, 0.5)),
            ((0.33, 0.3), (0.33, 0.7)),
            ((0.45, 0.22), (0.45, 0.78)),
            ((0.45, 0.25), (1.0, 0.25)),
            ((0.45, 0.75), (1.0, 0.75)),
            ((0.62, 0.68), (0.78, 0.75)),
            ((0.62, 0.82), (0.78, 0.75)),
        ],
        [],
    ),
    ElementType.PMOS: (
        [
            ((0.0, 0.5), (0.22, 0.5)),
            ((0.33, 0.3), (0.33, 0.7)),
            ((0.45, 0.22), (0.45, 0.78)),
            ((0.45, 0.25), (1.0, 0.25)),
            ((0.45, 0.75), (1.0, 0.75)),
        ],
        [((0.275, 0.5), 0.06)],
    ),
    ElementType.OPAMP: (
        [
            ((0.12, 0.08), (0.12, 0.92)),
            ((0.12, 0.08), (0.95, 0.5)),
            ((0.12, 0.92), (0.95, 0.5)),
            ((0.0, 0.25), (0.12, 0.25)),
            ((0.0, 0.75), (0.12, 0.75)),
            ((0.95, 0.5), (1.0, 0.5)),
            ((0.18, 0.25), (0.3, 0.25)),
            ((0.24, 0.19), (0.24, 0.31)),
            ((0.18, 0.75), (0.3, 0.75)),
        ],
        [],
    ),
    ElementType.GND: (
        [
            ((0.5, 0.0), (0.5, 0.4)),
            ((0.1, 0.4), (0.9, 0.4)),
            ((0.25, 0.62), (0.75, 0.62)),
            ((0.4, 0.84), (0.6, 0.84)),
        ],
        [],
    ),
    ElementType.VDD: (
        [
            ((0.5, 0.0), (0.5, 0.55)),
            ((0.15, 0.55), (0.85, 0.55)),
            ((0.3, 0.8), (0.5, 0.55)),
            ((0.7, 0.8), (0.5, 0.55)),
        ],
        [],
    ),
    ElementType.PORT: (
        [
            ((0.5, 0.0), (0.5, 0.3)),
            ((0.5, 0.3), (0.85, 0.65)),
            ((0.85, 0.65), (0.5, 1.0)),
            ((0.5, 1.0), (0.15, 0.65)),
            ((0.15, 0.65), (0.5, 0.3)),
        ],
        [],
    ),
}


def glyph_strokes(det: ElementDetection):
    """Glyph geometry in image coordinates: (line segments, circles)."""
    lines_u, circles_u = GLYPHS[det.etype]
    lines = [
        (anchor_to_image(det, u1, v1), anchor_to_image(det, u2, v2))
        for (u1, v1), (u2, v2) in lines_u
    ]
    scale = min(det.bbox.width, det.bbox.height)
    circles = [
        (anchor_to_image(det, cu, cv), r * scale) for (cu, cv), r in circles_u
    ]
    return lines, circles


def circle_polyline(cx: float, cy: float, r: float, sides: int = 24):
    pts = []
    for i in range(sides + 1):
        a = 2 * math.pi * i / sides
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    return pts
