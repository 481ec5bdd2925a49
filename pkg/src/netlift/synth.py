"""Seeded synthetic schematic generator with exact ground truth.

Produces, deterministically per seed: a placed-and-routed circuit, its
grayscale raster, the detections document (elements + cross points), the
clean wire mask, per-net pixel sets, the reference netlist, a schematic
document, and optional overlay markings.  The generator shares the pin
tables and naming policy with the extraction pipeline, which is what
makes an end-to-end F1 of 1.0 well-defined.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .connectivity import (
    DEFAULT_PIN_TABLE,
    DetectionsDoc,
    NetBinding,
    PinInstance,
    anchor_direction,
    assemble_netlist,
    detections_to_dict,
    name_nets,
    pin_positions,
)
from .geometry import (
    BBox,
    BitMask,
    CrossKind,
    CrossPoint,
    ElementDetection,
    ElementType,
    Netlist,
    NetliftError,
    Point,
    Rotation,
    Segment,
)
from .raster import GrayImage, save_pgm, save_mask
from .reconstruct import (
    SchematicBinding,
    SchematicDoc,
    SchematicNet,
    save_schematic,
    validate_schematic,
)
from . import glyphs
from .spectre import save_netlist


class SynthError(NetliftError):
    """The generator could not satisfy its placement/routing constraints."""


DIFFICULTIES = ("easy", "medium", "hard")

# pre-rotation symbol extents (bbox width/height, divisible by 4)
_SIZES: dict[ElementType, tuple[int, int]] = {
    ElementType.RESISTOR: (24, 48),
    ElementType.CAPACITOR: (24, 48),
    ElementType.INDUCTOR: (24, 48),
    ElementType.DIODE: (24, 48),
    ElementType.VSOURCE: (28, 48),
    ElementType.ISOURCE: (28, 48),
    ElementType.NMOS: (48, 48),
    ElementType.PMOS: (48, 48),
    ElementType.OPAMP: (56, 48),
    ElementType.GND: (24, 20),
    ElementType.VDD: (24, 20),
    ElementType.PORT: (20, 20),
}

_COMPONENT_TYPES = [
    ElementType.NMOS,
    ElementType.PMOS,
    ElementType.RESISTOR,
    ElementType.CAPACITOR,
    ElementType.INDUCTOR,
    ElementType.DIODE,
    ElementType.VSOURCE,
    ElementType.ISOURCE,
    ElementType.OPAMP,
]
_TYPE_WEIGHTS = [0.20, 0.20, 0.20, 0.12, 0.05, 0.05, 0.08, 0.05, 0.05]

_PORT_NAMES = ("vin", "vout", "vbias", "vref")

NET_CAP = 5  # max pins per net during topology sampling
STUB_LEN = 16
MIN_STUB = 12
PARALLEL_CLEAR = 10
CROSS_EDGE_CLEAR = 12
CROSS_SPACING = 24
BOX_CLEAR = 8


@dataclass
class SynthConfig:
    seed: int
    element_count_range: tuple[int, int] = (3, 8)
    canvas: tuple[int, int] = (768, 768)
    stroke: int = 3
    difficulty: str = "easy"
    markings: bool = False
    marking_count_range: tuple[int, int] = (2, 5)

    def __post_init__(self):
        if self.element_count_range[0] < 2:
            raise SynthError("element count must be at least 2")
        if self.canvas[0] < 256 or self.canvas[1] < 256:
            raise SynthError("canvas must be at least 256x256")
        if self.difficulty not in DIFFICULTIES:
            raise SynthError(f"unknown difficulty {self.difficulty!r}")


def config_for(difficulty: str, seed: int, markings: bool = False) -> SynthConfig:
    presets = {
        "easy": ((3, 8), (512, 512)),
        "medium": ((9, 15), (896, 896)),
        "hard": ((16, 25), (1280, 1280)),
    }
    if difficulty not in presets:
        raise SynthError(f"unknown difficulty {difficulty!r}")
    counts, canvas = presets[difficulty]
    return SynthConfig(
        seed=seed,
        element_count_range=counts,
        canvas=canvas,
        stroke=3,
        difficulty=difficulty,
        markings=markings,
    )


@dataclass
class GroundTruth:
    detections: list[ElementDetection]
    crosspoints: list[CrossPoint]
    wire_mask: BitMask
    net_pixels: dict[str, np.ndarray]  # name -> (N, 2) [x, y]
    netlist: Netlist
    schematic: SchematicDoc
    marking_boxes: list[BBox] = field(default_factory=list)

    @property
    def detections_doc(self) -> DetectionsDoc:
        return DetectionsDoc(
            image="image.pgm",
            width=self.wire_mask.width,
            height=self.wire_mask.height,
            elements=self.detections,
            crosspoints=self.crosspoints,
        )


# ---------------------------------------------------------------------------
# raster stamping (also used by test fixtures)


def stamp_segment(arr: np.ndarray, p0, p1, width: int, clip: BBox | None = None) -> None:
    """Set pixels within the stroke of the segment; even widths sit on a
    half-pixel centerline so the rendered width is exact."""
    h, w = arr.shape
    x0f, y0f = float(p0[0]), float(p0[1])
    x1f, y1f = float(p1[0]), float(p1[1])
    if width % 2 == 0:
        dx, dy = x1f - x0f, y1f - y0f
        norm = math.hypot(dx, dy)
        if norm > 0:
            nx, ny = -dy / norm * 0.5, dx / norm * 0.5
            x0f += nx
            y0f += ny
            x1f += nx
            y1f += ny
    thr = width / 2 - 0.01
    lo_x = max(0, int(math.floor(min(x0f, x1f) - thr - 1)))
    hi_x = min(w - 1, int(math.ceil(max(x0f, x1f) + thr + 1)))
    lo_y = max(0, int(math.floor(min(y0f, y1f) - thr - 1)))
    hi_y = min(h - 1, int(math.ceil(max(y0f, y1f) + thr + 1)))
    if clip is not None:
        lo_x, hi_x = max(lo_x, clip.min.x), min(hi_x, clip.max.x)
        lo_y, hi_y = max(lo_y, clip.min.y), min(hi_y, clip.max.y)
    if lo_x > hi_x or lo_y > hi_y:
        return
    ys, xs = np.mgrid[lo_y : hi_y + 1, lo_x : hi_x + 1]
    ax, ay = x1f - x0f, y1f - y0f
    denom = ax * ax + ay * ay
    if denom == 0:
        d2 = (xs - x0f) ** 2 + (ys - y0f) ** 2
    else:
        t = np.clip(((xs - x0f) * ax + (ys - y0f) * ay) / denom, 0.0, 1.0)
        d2 = (xs - (x0f + t * ax)) ** 2 + (ys - (y0f + t * ay)) ** 2
    arr[lo_y : hi_y + 1, lo_x : hi_x + 1] |= d2 <= thr * thr


def stamp_disk(arr: np.ndarray, center, radius: float) -> None:
    h, w = arr.shape
    cx, cy = center
    lo_x = max(0, int(math.floor(cx - radius)))
    hi_x = min(w - 1, int(math.ceil(cx + radius)))
    lo_y = max(0, int(math.floor(cy - radius)))
    hi_y = min(h - 1, int(math.ceil(cy + radius)))
    if lo_x > hi_x or lo_y > hi_y:
        return
    ys, xs = np.mgrid[lo_y : hi_y + 1, lo_x : hi_x + 1]
    arr[lo_y : hi_y + 1, lo_x : hi_x + 1] |= (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius


# ---------------------------------------------------------------------------
# routing primitives


@dataclass(frozen=True)
class _Leg:
    net: int
    p0: tuple[int, int]
    p1: tuple[int, int]
    diag: bool = False

    @property
    def horizontal(self) -> bool:
        return self.p0[1] == self.p1[1] and not self.diag

    @property
    def vertical(self) -> bool:
        return self.p0[0] == self.p1[0] and not self.diag

    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])


def _point_leg_dist(px: float, py: float, leg: _Leg) -> float:
    ax, ay = leg.p0
    bx, by = leg.p1
    abx, aby = bx - ax, by - ay
    denom = abx * abx + aby * aby
    if denom == 0:
        return math.hypot(px - ax, py - ay)
    t = min(1.0, max(0.0, ((px - ax) * abx + (py - ay) * aby) / denom))
    return math.hypot(px - (ax + t * abx), py - (ay + t * aby))


def _span(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def _gap_to_span(v: int, lo: int, hi: int) -> int:
    if v < lo:
        return lo - v
    if v > hi:
        return v - hi
    return 0


class _Router:
    def __init__(self, canvas, stroke, zones, allow_cross):
        self.w, self.h = canvas
        self.stroke = stroke
        self.zones = zones  # list of (element_id, BBox clearance zone)
        self.allow_cross = allow_cross
        self.legs: list[_Leg] = []
        self.crossings: list[tuple[int, int, int, int]] = []  # x, y, net_a, net_b
        self._cache = None
        self._zone_ids = [eid for eid, _ in zones]
        self._zx0 = np.array([z.min.x for _, z in zones], dtype=np.int64)
        self._zy0 = np.array([z.min.y for _, z in zones], dtype=np.int64)
        self._zx1 = np.array([z.max.x for _, z in zones], dtype=np.int64)
        self._zy1 = np.array([z.max.y for _, z in zones], dtype=np.int64)

    def _arrays(self):
        """Leg geometry packed for vectorized conflict tests."""
        if self._cache is None:
            hs, vs, ds = [], [], []
            eps = []
            for leg in self.legs:
                eps.append(leg.p0)
                eps.append(leg.p1)
                if leg.diag:
                    ds.append(leg)
                elif leg.horizontal:
                    lo, hi = _span(leg.p0[0], leg.p1[0])
                    hs.append((lo, hi, leg.p0[1], leg.net))
                else:
                    lo, hi = _span(leg.p0[1], leg.p1[1])
                    vs.append((leg.p0[0], lo, hi, leg.net))
            self._cache = {
                "h": np.array(hs, dtype=np.int64).reshape(-1, 4),
                "v": np.array(vs, dtype=np.int64).reshape(-1, 4),
                "d": ds,
                "ep": np.array(eps, dtype=np.int64).reshape(-1, 2),
                "cross": np.array(
                    [(x, y) for x, y, *_ in self.crossings], dtype=np.int64
                ).reshape(-1, 2),
            }
        return self._cache

    def _in_canvas(self, leg: _Leg) -> bool:
        for x, y in (leg.p0, leg.p1):
            if not (10 <= x < self.w - 10 and 10 <= y < self.h - 10):
                return False
        return True

    def _boxes_ok(self, leg: _Leg, own_eid: str | None) -> bool:
        if not len(self._zx0):
            return True
        pad = self.stroke // 2 + 2
        (x0, x1), (y0, y1) = _span(leg.p0[0], leg.p1[0]), _span(leg.p0[1], leg.p1[1])
        hit = ~(
            (x1 + pad < self._zx0)
            | (self._zx1 < x0 - pad)
            | (y1 + pad < self._zy0)
            | (self._zy1 < y0 - pad)
        )
        if own_eid is not None and own_eid in self._zone_ids:
            hit[self._zone_ids.index(own_eid)] = False
        return not bool(hit.any())

    def _vs_leg(self, leg: _Leg, other: _Leg):
        """None = no interaction; False = conflict; (x, y) = clean crossing."""
        if leg.diag or other.diag:
            pad = self.stroke + 4
            (ax0, ax1), (ay0, ay1) = _span(*[p[0] for p in (leg.p0, leg.p1)]), _span(
                *[p[1] for p in (leg.p0, leg.p1)]
            )
            (bx0, bx1), (by0, by1) = _span(*[p[0] for p in (other.p0, other.p1)]), _span(
                *[p[1] for p in (other.p0, other.p1)]
            )
            apart = ax1 + pad < bx0 or bx1 + pad < ax0 or ay1 + pad < by0 or by1 + pad < ay0
            if apart:
                return None
            if leg.net == other.net and (
                leg.p0 in (other.p0, other.p1) or leg.p1 in (other.p0, other.p1)
            ):
                return None
            return False
        if leg.horizontal == other.horizontal:  # parallel
            if leg.net == other.net:
                return None
            if leg.horizontal:
                sep = abs(leg.p0[1] - other.p0[1])
                (a0, a1), (b0, b1) = _span(leg.p0[0], leg.p1[0]), _span(other.p0[0], other.p1[0])
            else:
                sep = abs(leg.p0[0] - other.p0[0])
                (a0, a1), (b0, b1) = _span(leg.p0[1], leg.p1[1]), _span(other.p0[1], other.p1[1])
            if sep >= PARALLEL_CLEAR:
                return None
            if a1 + PARALLEL_CLEAR < b0 or b1 + PARALLEL_CLEAR < a0:
                return None
            return False
        hleg, vleg = (leg, other) if leg.horizontal else (other, leg)
        yh = hleg.p0[1]
        xv = vleg.p0[0]
        hx0, hx1 = _span(hleg.p0[0], hleg.p1[0])
        vy0, vy1 = _span(vleg.p0[1], vleg.p1[1])
        gx = _gap_to_span(xv, hx0, hx1)
        gy = _gap_to_span(yh, vy0, vy1)
        near = self.stroke + 7
        if gx > near or gy > near:
            return None
        if leg.net == other.net:
            return None  # corner, tee, or same-net overlap: electrically one net
        if gx == 0 and gy == 0:
            ok = (
                hx0 + CROSS_EDGE_CLEAR <= xv <= hx1 - CROSS_EDGE_CLEAR
                and vy0 + CROSS_EDGE_CLEAR <= yh <= vy1 - CROSS_EDGE_CLEAR
            )
            if ok and self.allow_cross:
                return (xv, yh)
            return False
        return False

    def _axis_vs_axis(self, leg: _Leg):
        """Vectorized interaction of an axis leg with all stored axis legs.
        Returns None on conflict, else the list of crossing points."""
        arr = self._arrays()
        if leg.horizontal:
            a0, a1 = _span(leg.p0[0], leg.p1[0])
            lc = leg.p0[1]
            par, perp = arr["h"], arr["v"]
        else:
            a0, a1 = _span(leg.p0[1], leg.p1[1])
            lc = leg.p0[0]
            par, perp = arr["v"], arr["h"]
        if len(par):
            if leg.horizontal:
                lo, hi, coord, net = par[:, 0], par[:, 1], par[:, 2], par[:, 3]
            else:
                coord, lo, hi, net = par[:, 0], par[:, 1], par[:, 2], par[:, 3]
            close = (np.abs(coord - lc) < PARALLEL_CLEAR) & (net != leg.net)
            overlap = ~((hi + PARALLEL_CLEAR < a0) | (a1 + PARALLEL_CLEAR < lo))
            if bool((close & overlap).any()):
                return None
        crossings = []
        if len(perp):
            near = self.stroke + 7
            if leg.horizontal:
                pc, plo, phi, pnet = perp[:, 0], perp[:, 1], perp[:, 2], perp[:, 3]
            else:
                plo, phi, pc, pnet = perp[:, 0], perp[:, 1], perp[:, 2], perp[:, 3]
            gx = np.maximum(np.maximum(a0 - pc, pc - a1), 0)
            gy = np.maximum(np.maximum(plo - lc, lc - phi), 0)
            interact = (gx <= near) & (gy <= near) & (pnet != leg.net)
            if bool(interact.any()):
                crossing = (
                    (gx == 0)
                    & (gy == 0)
                    & (pc >= a0 + CROSS_EDGE_CLEAR)
                    & (pc <= a1 - CROSS_EDGE_CLEAR)
                    & (lc >= plo + CROSS_EDGE_CLEAR)
                    & (lc <= phi - CROSS_EDGE_CLEAR)
                )
                if not self.allow_cross or bool((interact & ~crossing).any()):
                    return None
                for i in np.nonzero(interact & crossing)[0]:
                    if leg.horizontal:
                        crossings.append((int(pc[i]), lc, leg.net, int(pnet[i])))
                    else:
                        crossings.append((lc, int(pc[i]), leg.net, int(pnet[i])))
        return crossings

    def _legs_near_point(self, cx: int, cy: int, radius: float, skip_nets=()):
        """True if any stored leg not in skip_nets comes within radius."""
        arr = self._arrays()
        h, v = arr["h"], arr["v"]
        if len(h):
            gx = np.maximum(np.maximum(h[:, 0] - cx, cx - h[:, 1]), 0)
            gy = np.abs(h[:, 2] - cy)
            hit = (gx * gx + gy * gy < radius * radius)
            for net in skip_nets:
                hit &= h[:, 3] != net
            if bool(hit.any()):
                return True
        if len(v):
            gx = np.abs(v[:, 0] - cx)
            gy = np.maximum(np.maximum(v[:, 1] - cy, cy - v[:, 2]), 0)
            hit = (gx * gx + gy * gy < radius * radius)
            for net in skip_nets:
                hit &= v[:, 3] != net
            if bool(hit.any()):
                return True
        for dleg in arr["d"]:
            if dleg.net in skip_nets:
                continue
            if _point_leg_dist(cx, cy, dleg) < radius:
                return True
        return False

    def check_leg(self, leg: _Leg, own_eid=None, pending_legs=(), pending_crossings=()):
        """Returns the list of new crossings the leg creates, or None on conflict.

        pending_legs/pending_crossings belong to the candidate path being
        evaluated and are checked scalar-wise alongside the stored state.
        """
        if leg.p0 == leg.p1:
            return []
        if not self._in_canvas(leg) or not self._boxes_ok(leg, own_eid):
            return None
        arr = self._arrays()
        found = []
        if leg.diag:
            for other in self.legs:
                if self._vs_leg(leg, other) is False:
                    return None
        else:
            found = self._axis_vs_axis(leg)
            if found is None:
                return None
            for other in arr["d"]:
                if self._vs_leg(leg, other) is False:
                    return None
        for other in pending_legs:
            r = self._vs_leg(leg, other)
            if r is False:
                return None
            if isinstance(r, tuple):
                found.append((r[0], r[1], leg.net, other.net))
        # keep new crossings clear of unrelated geometry
        known = list(self.crossings) + list(pending_crossings)
        for cx, cy, na, nb in found:
            if self._legs_near_point(cx, cy, CROSS_EDGE_CLEAR, skip_nets=(na, nb)):
                return None
            ep = arr["ep"]
            if len(ep):
                d2 = (ep[:, 0] - cx) ** 2 + (ep[:, 1] - cy) ** 2
                if bool((d2 < CROSS_EDGE_CLEAR**2).any()):
                    return None
            for other in pending_legs:
                if other.net not in (na, nb) and _point_leg_dist(cx, cy, other) < CROSS_EDGE_CLEAR:
                    return None
                for pt in (other.p0, other.p1):
                    if math.hypot(pt[0] - cx, pt[1] - cy) < CROSS_EDGE_CLEAR:
                        return None
            for ox, oy, *_ in known + found:
                if (ox, oy) != (cx, cy) and math.hypot(ox - cx, oy - cy) < CROSS_SPACING:
                    return None
        # every new leg stays clear of crossings it is not part of
        for cx, cy, na, nb in known:
            if _point_leg_dist(cx, cy, leg) < CROSS_EDGE_CLEAR:
                return None
        return found

    def commit(self, legs: list[_Leg], crossings) -> None:
        self.legs.extend(l for l in legs if l.p0 != l.p1)
        self.crossings.extend(crossings)
        self._cache = None

    def rollback(self, n_legs: int, n_crossings: int) -> None:
        del self.legs[n_legs:]
        del self.crossings[n_crossings:]
        self._cache = None


def _mid_candidates(lo: int, hi: int, cap: int) -> list[int]:
    """Intermediate coordinates to try for Z paths, central ones first."""
    mid = (lo + hi) // 2
    vals = {mid}
    for k in range(1, 14):
        vals.add(mid + 8 * k)
        vals.add(mid - 8 * k)
    for base in (lo, hi):
        for k in range(1, 8):
            vals.add(base + 8 * k)
            vals.add(base - 8 * k)
    return sorted(vals, key=lambda v: (abs(v - mid), v))[:cap]


def _candidate_paths(rng, a, b, allow_diag: bool, quick: bool = False):
    ax, ay = a
    bx, by = b
    paths = []
    if a == b:
        return [[]]
    if ax == bx or ay == by:
        paths.append([(a, b)])
        # detour candidates in case the straight shot is blocked
        offs = (24, -24, 56, -56) if quick else (24, -24, 40, -40, 56, -56, 72, -72, 96, -96)
        for off in offs:
            if ay == by:
                ym = ay + off
                paths.append([(a, (ax, ym)), ((ax, ym), (bx, ym)), ((bx, ym), b)])
            else:
                xm = ax + off
                paths.append([(a, (xm, ay)), ((xm, ay), (xm, by)), ((xm, by), b)])
        return paths
    if allow_diag and not quick and rng.random() < 0.3:
        d = min(abs(bx - ax), abs(by - ay))
        if d >= 24:
            mx = ax + (d if bx > ax else -d)
            my = ay + (d if by > ay else -d)
            paths.append([(a, (mx, my)), ((mx, my), b)])
    paths.append([(a, (bx, ay)), ((bx, ay), b)])
    paths.append([(a, (ax, by)), ((ax, by), b)])
    cap = 4 if quick else 18
    for xm, ym in zip(_mid_candidates(ax, bx, cap), _mid_candidates(ay, by, cap)):
        paths.append([(a, (xm, ay)), ((xm, ay), (xm, by)), ((xm, by), b)])
        paths.append([(a, (ax, ym)), ((ax, ym), (bx, ym)), ((bx, ym), b)])
    return paths


# ---------------------------------------------------------------------------
# topology


@dataclass
class _Plan:
    elements: list[tuple[str, ElementType]]  # component ids + types
    symbols: list[tuple[str, ElementType, int]]  # id, type, net index
    nets: list[list[tuple[str, str]]]  # net index -> [(element_id, pin_name)]


def _sample_topology(rng, n_components: int, difficulty: str) -> _Plan:
    types = [
        _COMPONENT_TYPES[i]
        for i in rng.choice(len(_COMPONENT_TYPES), size=n_components, p=_TYPE_WEIGHTS)
    ]
    elements = [(f"e{i}", t) for i, t in enumerate(types)]
    nets: list[list[tuple[str, str]]] = []

    def joinable():
        return [i for i, net in enumerate(nets) if len(net) < NET_CAP]

    for idx, (eid, etype) in enumerate(elements):
        pins = [p.name for p in DEFAULT_PIN_TABLE[etype].pins if p.name != "b"]
        for k, pname in enumerate(pins):
            targets = joinable()
            join_first = idx > 0 and k == 0 and targets
            join_rest = k > 0 and targets and rng.random() < 0.45
            if join_first or join_rest:
                net_idx = int(targets[rng.integers(0, len(targets))])
                nets[net_idx].append((eid, pname))
            else:
                nets.append([(eid, pname)])

    # no single-pin nets: merge them into some other net
    for i in range(len(nets)):
        if len(nets[i]) == 1:
            others = [j for j in range(len(nets)) if j != i and 0 < len(nets[j]) < NET_CAP]
            if not others:
                others = [j for j in range(len(nets)) if j != i and nets[j]]
            j = int(others[rng.integers(0, len(others))])
            nets[j].extend(nets[i])
            nets[i] = []
    nets = [n for n in nets if n]

    symbols: list[tuple[str, ElementType, int]] = []
    sym_i = 0

    def add_symbol(etype: ElementType, net_idx: int, name: str | None = None):
        nonlocal sym_i
        sid = name if name else f"s{sym_i}"
        sym_i += 1
        symbols.append((sid, etype, net_idx))
        nets[net_idx].append((sid, "t"))

    order = rng.permutation(len(nets))
    gnd_net = int(order[0])
    vdd_net = int(order[1 % len(order)]) if len(nets) > 1 else gnd_net
    add_symbol(ElementType.GND, gnd_net)
    add_symbol(ElementType.VDD, vdd_net)
    taken = {gnd_net, vdd_net}

    if difficulty != "easy" and len(nets) > 3:
        free = [i for i in range(len(nets)) if i not in taken]
        if free and rng.random() < 0.3:  # second ground symbol, merges into "0"
            extra = int(free[rng.integers(0, len(free))])
            add_symbol(ElementType.GND, extra)
            taken.add(extra)
        free = [i for i in range(len(nets)) if i not in taken]
        if free and rng.random() < 0.2:  # second power net: VDD2
            extra = int(free[rng.integers(0, len(free))])
            add_symbol(ElementType.VDD, extra)
            taken.add(extra)
        free = [i for i in range(len(nets)) if i not in taken]
        n_ports = int(rng.integers(0, 3)) if rng.random() < 0.5 else 0
        for p in range(min(n_ports, len(free))):
            net_idx = int(free[p])
            add_symbol(ElementType.PORT, net_idx, name=_PORT_NAMES[p])
            taken.add(net_idx)

    return _Plan(elements, symbols, nets)


# ---------------------------------------------------------------------------
# placement


def _footprint(etype: ElementType, rotation: Rotation) -> tuple[int, int]:
    w, h = _SIZES[etype]
    return (h, w) if rotation.angle in (90, 270) else (w, h)


def _sample_rotation(rng, etype: ElementType) -> Rotation:
    if etype is ElementType.GND:
        return Rotation(0)
    if etype is ElementType.VDD:
        return Rotation(180)
    if etype is ElementType.PORT:
        return Rotation(0)
    if etype in (ElementType.NMOS, ElementType.PMOS):
        return Rotation(0, mirrored=bool(rng.random() < 0.4))
    if etype is ElementType.OPAMP:
        return Rotation(0, mirrored=bool(rng.random() < 0.3))
    return Rotation(90 if rng.random() < 0.5 else 0)


def _place_elements(rng, plan: _Plan, canvas) -> list[ElementDetection] | None:
    """Grid placement with light net affinity: an element prefers cells a
    couple of grid steps from a placed neighbor on a shared net."""
    w, h = canvas
    pitch = 40
    border = 64
    gx = np.arange(border, w - border + 1, pitch)
    gy = np.arange(border, h - border + 1, pitch)
    everything = [(eid, etype) for eid, etype in plan.elements]
    everything += [(sid, etype) for sid, etype, _ in plan.symbols]

    mates: dict[str, set[str]] = {}
    for net in plan.nets:
        ids = [eid for eid, _ in net]
        for a in ids:
            mates.setdefault(a, set()).update(i for i in ids if i != a)

    placed: dict[str, tuple[int, int]] = {}
    dets: list[ElementDetection] = []
    boxes: list[BBox] = []
    for eid, etype in everything:
        rot = _sample_rotation(rng, etype)
        fw, fh = _footprint(etype, rot)
        anchors = [placed[m] for m in sorted(mates.get(eid, ())) if m in placed]
        ok = False
        for trial in range(400):
            if anchors and trial < 120:
                axx, ayy = anchors[int(rng.integers(0, len(anchors)))]
                spread = 3 + trial // 15
                cx = axx + pitch * int(rng.integers(-spread, spread + 1))
                cy = ayy + pitch * int(rng.integers(-spread, spread + 1))
                if not (border <= cx <= w - border and border <= cy <= h - border):
                    continue
            else:
                cx = int(gx[rng.integers(0, len(gx))])
                cy = int(gy[rng.integers(0, len(gy))])
            bbox = BBox.of(cx - fw // 2, cy - fh // 2, cx - fw // 2 + fw, cy - fh // 2 + fh)
            if bbox.min.x < 8 or bbox.min.y < 8 or bbox.max.x >= w - 8 or bbox.max.y >= h - 8:
                continue
            zone = bbox.expanded(18)
            if any(zone.intersects(bx) for bx in boxes):
                continue
            dets.append(ElementDetection(eid, etype, bbox, rot))
            boxes.append(bbox)
            placed[eid] = (cx, cy)
            ok = True
            break
        if not ok:
            return None
    return dets


# ---------------------------------------------------------------------------
# routing


def _outward_normal(pin_def) -> tuple[float, float]:
    if pin_def.u == 0.0:
        return (-1.0, 0.0)
    if pin_def.u == 1.0:
        return (1.0, 0.0)
    if pin_def.v == 0.0:
        return (0.0, -1.0)
    return (0.0, 1.0)


def _route(rng, plan, dets, canvas, stroke, allow_cross, allow_diag):
    det_of = {d.id: d for d in dets}
    zones = [(d.id, d.bbox.expanded(BOX_CLEAR)) for d in dets]
    router = _Router(canvas, stroke, zones, allow_cross)

    pins_by_key: dict[tuple[str, str], Point] = {}
    for det in dets:
        for pin in pin_positions(det):
            pins_by_key[(det.id, pin.pin_name)] = pin.at

    # escape stubs first (forced legs)
    escapes: dict[tuple[str, str], tuple[int, int]] = {}
    net_of_pin: dict[tuple[str, str], int] = {}
    for net_idx, net in enumerate(plan.nets, start=1):
        for key in net:
            net_of_pin[key] = net_idx
    for net_idx, net in enumerate(plan.nets, start=1):
        for eid, pname in net:
            det = det_of[eid]
            pin_def = next(p for p in DEFAULT_PIN_TABLE[det.etype].pins if p.name == pname)
            du, dv = anchor_direction(det, *_outward_normal(pin_def))
            px, py = pins_by_key[(eid, pname)]
            placed = False
            for length in (STUB_LEN, MIN_STUB):
                tip = (px + int(round(du * length)), py + int(round(dv * length)))
                leg = _Leg(net_idx, (px, py), tip)
                crossings = router.check_leg(leg, own_eid=eid)
                if crossings == []:  # stubs may not cross anything
                    router.commit([leg], [])
                    escapes[(eid, pname)] = tip
                    placed = True
                    break
            if not placed:
                return None

    # grow each net as a tree: every further pin routes to the nearest
    # point of the geometry already laid down (tips or leg interiors);
    # compact nets route first while the canvas is uncrowded
    def net_extent(item):
        idx, net = item
        xs = [escapes[key][0] for key in net]
        ys = [escapes[key][1] for key in net]
        return (max(xs) - min(xs)) + (max(ys) - min(ys))

    net_order = sorted(enumerate(plan.nets, start=1), key=lambda it: (net_extent(it), it[0]))
    for net_idx, net in net_order:
        remaining = sorted(escapes[key] for key in net)
        done = [remaining.pop(0)]
        while remaining:
            b = min(
                remaining,
                key=lambda t: (min(abs(t[0] - d[0]) + abs(t[1] - d[1]) for d in done), t),
            )
            remaining.remove(b)
            done.append(b)
            targets = _tree_targets(router, net_idx, b, done)
            routed = False
            passes = [True] if allow_cross else [False, True]
            for allow in passes:
                router.allow_cross = allow
                for target in targets:
                    if _route_pair(rng, router, net_idx, b, target, allow_diag):
                        routed = True
                        break
                if routed:
                    break
            if not routed:  # detour through an intermediate waypoint
                router.allow_cross = allow_cross
                for target in targets[:4]:
                    if _route_via_waypoint(rng, router, net_idx, b, target, allow_diag):
                        routed = True
                        break
            if not routed:
                return None
    router.allow_cross = allow_cross
    return router


def _route_via_waypoint(rng, router: _Router, net_idx: int, a, b, allow_diag: bool) -> bool:
    x0, x1 = _span(a[0], b[0])
    y0, y1 = _span(a[1], b[1])
    x0, x1 = max(24, x0 - 120), min(router.w - 24, x1 + 120)
    y0, y1 = max(24, y0 - 120), min(router.h - 24, y1 + 120)
    waypoints = [
        (x, y)
        for x in range(x0, x1 + 1, 28)
        for y in range(y0, y1 + 1, 28)
    ]
    waypoints.sort(
        key=lambda w: (
            abs(w[0] - a[0]) + abs(w[1] - a[1]) + abs(w[0] - b[0]) + abs(w[1] - b[1]),
            w,
        )
    )
    for w in waypoints[:24]:
        mark_l, mark_c = len(router.legs), len(router.crossings)
        if _route_pair(rng, router, net_idx, a, w, allow_diag, quick=True) and _route_pair(
            rng, router, net_idx, w, b, allow_diag, quick=True
        ):
            return True
        router.rollback(mark_l, mark_c)
    return False


def _tree_targets(router: _Router, net_idx: int, b, done) -> list:
    """Connection points on the net routed so far, nearest first."""
    targets = {t for t in done if t != b}
    for leg in router.legs:
        if leg.net != net_idx or leg.diag:
            continue
        if leg.horizontal:
            (x0, x1), ly = _span(leg.p0[0], leg.p1[0]), leg.p0[1]
            if x1 - x0 >= 16:
                targets.add((min(max(b[0], x0 + 8), x1 - 8), ly))
        else:
            (y0, y1), lx = _span(leg.p0[1], leg.p1[1]), leg.p0[0]
            if y1 - y0 >= 16:
                targets.add((lx, min(max(b[1], y0 + 8), y1 - 8)))
    ordered = sorted(targets, key=lambda t: (abs(t[0] - b[0]) + abs(t[1] - b[1]), t))
    return ordered[:10]


def _route_pair(rng, router: _Router, net_idx: int, a, b, allow_diag: bool, quick: bool = False) -> bool:
    for cand in _candidate_paths(rng, a, b, allow_diag, quick=quick):
        legs = [
            _Leg(net_idx, p, q, diag=(p[0] != q[0] and p[1] != q[1]))
            for p, q in cand
            if p != q
        ]
        crossings: list = []
        checked: list[_Leg] = []
        ok = True
        for leg in legs:
            got = router.check_leg(leg, pending_legs=checked, pending_crossings=crossings)
            if got is None:
                ok = False
                break
            checked.append(leg)
            crossings.extend(got)
        if ok:
            router.commit(legs, crossings)
            return True
    return False


def _split_legs_at_taps(legs: list[_Leg]) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """T-meets end on leg interiors; split legs there so the schematic's
    segments connect endpoint-to-endpoint."""
    pts = {leg.p0 for leg in legs} | {leg.p1 for leg in legs}
    out = []
    for leg in legs:
        if leg.diag:
            out.append((leg.p0, leg.p1))
            continue
        if leg.horizontal:
            y = leg.p0[1]
            lo, hi = _span(leg.p0[0], leg.p1[0])
            cuts = sorted({lo, hi} | {x for x, py in pts if py == y and lo < x < hi})
            out.extend((((a, y), (b, y))) for a, b in zip(cuts[:-1], cuts[1:]))
        else:
            x = leg.p0[0]
            lo, hi = _span(leg.p0[1], leg.p1[1])
            cuts = sorted({lo, hi} | {y for px, y in pts if px == x and lo < y < hi})
            out.extend((((x, a), (x, b))) for a, b in zip(cuts[:-1], cuts[1:]))
    return out


def _junction_points(router: _Router) -> list[tuple[int, int, int]]:
    """Same-net points where three or more wire directions meet."""
    out = []
    by_net: dict[int, list[_Leg]] = {}
    for leg in router.legs:
        by_net.setdefault(leg.net, []).append(leg)
    for net, legs in sorted(by_net.items()):
        pts = sorted({leg.p0 for leg in legs} | {leg.p1 for leg in legs})
        for pt in pts:
            deg = 0
            for leg in legs:
                if pt in (leg.p0, leg.p1):
                    deg += 1
                elif _point_leg_dist(pt[0], pt[1], leg) < 0.5:
                    deg += 2
            if deg >= 3:
                out.append((pt[0], pt[1], net))
    return out


# ---------------------------------------------------------------------------
# rasterization


def _rasterize(plan, dets, router, canvas, stroke):
    w, h = canvas
    junctions = _junction_points(router)
    net_masks: dict[int, np.ndarray] = {}
    for leg in router.legs:
        m = net_masks.setdefault(leg.net, np.zeros((h, w), dtype=bool))
        stamp_segment(m, leg.p0, leg.p1, stroke)
    for x, y, net in junctions:
        stamp_disk(net_masks[net], (x, y), stroke + 0.49)
    wire = np.zeros((h, w), dtype=bool)
    for m in net_masks.values():
        wire |= m
    glyph_mask = np.zeros((h, w), dtype=bool)
    gw = max(2, stroke - 1)
    for det in dets:
        lines, circles = glyphs.glyph_strokes(det)
        for p0, p1 in lines:
            stamp_segment(glyph_mask, p0, p1, gw, clip=det.bbox)
        for (cx, cy), r in circles:
            pts = glyphs.circle_polyline(cx, cy, r)
            for p0, p1 in zip(pts[:-1], pts[1:]):
                stamp_segment(glyph_mask, p0, p1, gw, clip=det.bbox)
    img = np.full((h, w), 255, dtype=np.uint8)
    img[glyph_mask | wire] = 0
    return img, wire, net_masks, junctions


def _degrade(values: np.ndarray) -> np.ndarray:
    h, w = values.shape
    h2, w2 = h - h % 2, w - w % 2
    small = values[:h2, :w2].reshape(h2 // 2, 2, w2 // 2, 2).mean(axis=(1, 3))
    small = np.floor(small).astype(np.uint8)
    up = np.repeat(np.repeat(small, 2, axis=0), 2, axis=1)
    out = np.array(values)
    out[:h2, :w2] = up
    return out


# ---------------------------------------------------------------------------
# markings


def _segment_boxes(doc: SchematicDoc) -> list[Segment]:
    return [s for net in doc.nets for s in net.segments]


def add_markings(img: GrayImage, gt: GroundTruth, seed: int, count_range=(2, 5)):
    """Overlay outline rectangles (which may cross wires) and small text-like
    scribbles (kept clear of everything); returns the new image and boxes."""
    rng = np.random.default_rng([seed, 0x4D41524B])
    w, h = img.width, img.height
    values = np.array(img.values)
    segs = _segment_boxes(gt.schematic)
    keypoints = {(s.a.x, s.a.y) for s in segs} | {(s.b.x, s.b.y) for s in segs}
    keypoints |= {(cp.at.x, cp.at.y) for cp in gt.crosspoints}
    el_zones = [d.bbox.expanded(2) for d in gt.detections]
    boxes: list[BBox] = []

    def edges_of(box: BBox):
        return [
            BBox.of(box.min.x, box.min.y, box.max.x, box.min.y),
            BBox.of(box.min.x, box.max.y, box.max.x, box.max.y),
            BBox.of(box.min.x, box.min.y, box.min.x, box.max.y),
            BBox.of(box.max.x, box.min.y, box.max.x, box.max.y),
        ]

    def rect_ok(box: BBox) -> tuple[bool, int]:
        zone = box.expanded(5)
        if any(e.intersects(z) for e in edges_of(box) for z in el_zones):
            return False, 0
        if any(box.expanded(8).intersects(b.expanded(8)) for b in boxes):
            return False, 0
        for x, y in keypoints:
            if zone.contains(Point(x, y)):
                return False, 0
        crossed = 0
        for s in segs:
            horizontal = s.a.y == s.b.y
            vertical = s.a.x == s.b.x
            (sx0, sx1), (sy0, sy1) = _span(s.a.x, s.b.x), _span(s.a.y, s.b.y)
            seg_box = BBox.of(sx0, sy0, sx1, sy1)
            if not seg_box.expanded(2).intersects(zone):
                continue
            if not (horizontal or vertical):
                return False, 0  # diagonals do not get cut
            if horizontal:
                if not (zone.min.y + 8 <= s.a.y <= zone.max.y - 8):
                    return False, 0
                if sx0 > zone.min.x - 8 or sx1 < zone.max.x + 8:
                    return False, 0
            else:
                if not (zone.min.x + 8 <= s.a.x <= zone.max.x - 8):
                    return False, 0
                if sy0 > zone.min.y - 8 or sy1 < zone.max.y + 8:
                    return False, 0
            crossed += 1
        return True, crossed

    lo, hi = count_range
    n_rects = int(rng.integers(lo, hi + 1))
    for _ in range(n_rects):
        fallback = None
        for _attempt in range(60):
            rw = int(rng.integers(40, 121))
            rh = int(rng.integers(28, 97))
            if rw >= w - 24 or rh >= h - 24:
                continue
            x0 = int(rng.integers(10, w - rw - 10))
            y0 = int(rng.integers(10, h - rh - 10))
            box = BBox.of(x0, y0, x0 + rw, y0 + rh)
            ok, crossed = rect_ok(box)
            if ok and crossed > 0:
                fallback = box
                break
            if ok and fallback is None:
                fallback = box
        if fallback is not None:
            boxes.append(fallback)
            b = fallback
            for y in (b.min.y, b.max.y):
                values[y, b.min.x : b.max.x + 1] = 0
            for x in (b.min.x, b.max.x):
                values[b.min.y : b.max.y + 1, x] = 0

    # pseudo-text scribbles, fully clear of circuit ink
    for _ in range(int(rng.integers(1, 4))):
        for _attempt in range(40):
            tw = int(rng.integers(18, 44))
            th = int(rng.integers(10, 18))
            x0 = int(rng.integers(10, w - tw - 10))
            y0 = int(rng.integers(10, h - th - 10))
            box = BBox.of(x0, y0, x0 + tw, y0 + th)
            zone = box.expanded(6)
            if any(zone.intersects(z) for z in el_zones):
                continue
            if any(zone.intersects(b.expanded(8)) for b in boxes):
                continue
            clear = True
            for s in segs:
                (sx0, sx1), (sy0, sy1) = _span(s.a.x, s.b.x), _span(s.a.y, s.b.y)
                if BBox.of(sx0, sy0, sx1, sy1).expanded(3).intersects(zone):
                    clear = False
                    break
            if not clear:
                continue
            rows = max(2, th // 5)
            for r in range(rows):
                y = y0 + 2 + r * 5
                if y > y0 + th - 2:
                    break
                x_end = x0 + int(rng.integers(tw // 2, tw + 1))
                values[y, x0 : max(x0 + 4, x_end)] = 0
            boxes.append(box)
            break

    return GrayImage(values), boxes


# ---------------------------------------------------------------------------
# generation


def generate(config: SynthConfig) -> tuple[GroundTruth, GrayImage]:
    """Deterministic circuit synthesis; identical configs give identical bytes."""
    rng_topo = np.random.default_rng([config.seed, 0x544F504F])
    lo, hi = config.element_count_range
    n = int(rng_topo.integers(lo, hi + 1))
    plan = _sample_topology(rng_topo, n, config.difficulty)

    allow_cross = config.difficulty != "easy"
    allow_diag = config.difficulty != "easy"
    want_cross = config.difficulty == "hard"

    result = None
    fallback = None
    for attempt in range(60):
        rng = np.random.default_rng([config.seed, 0x504C4143, attempt])
        dets = _place_elements(rng, plan, config.canvas)
        if dets is None:
            continue
        router = _route(
            rng, plan, dets, config.canvas, config.stroke, allow_cross, allow_diag
        )
        if router is None and config.difficulty == "easy":
            router = _route(
                rng, plan, dets, config.canvas, config.stroke, True, allow_diag
            )
        if router is None:
            continue
        if want_cross and not router.crossings:
            if fallback is None:
                fallback = (dets, router)
            continue
        result = (dets, router)
        break
    if result is None:
        result = fallback
    if result is None:
        raise SynthError(
            f"seed {config.seed}: could not place/route {n} elements on "
            f"{config.canvas[0]}x{config.canvas[1]}; try a larger canvas"
        )
    dets, router = result

    img_arr, wire, net_masks, junctions = _rasterize(
        plan, dets, router, config.canvas, config.stroke
    )

    crosspoints = [
        CrossPoint(Point(x, y), CrossKind.CROSSING) for x, y, _, _ in sorted(router.crossings)
    ] + [CrossPoint(Point(x, y), CrossKind.JUNCTION) for x, y, _ in sorted(junctions)]

    bindings = []
    for net_idx, net in enumerate(plan.nets, start=1):
        for eid, pname in net:
            det = next(d for d in dets if d.id == eid)
            at = next(p.at for p in pin_positions(det) if p.pin_name == pname)
            bindings.append(NetBinding(PinInstance(eid, pname, at), net_idx, 0.0))

    netlist = assemble_netlist(dets, bindings)
    net_names = name_nets(dets, bindings)

    # one entry per routed net; ground-merged labels share the name "0" but
    # keep their own (endpoint-connected) segment sets
    schem_nets = []
    for net_idx in sorted(net_masks):
        legs = [leg for leg in router.legs if leg.net == net_idx and leg.p0 != leg.p1]
        segs = tuple(
            Segment(Point(*p), Point(*q)) for p, q in _split_legs_at_taps(legs)
        )
        schem_nets.append(SchematicNet(net_names[net_idx], segs))
    schematic = SchematicDoc(
        canvas=config.canvas,
        elements=list(dets),
        nets=sorted(schem_nets, key=lambda n: (n.name, n.segments[0].a if n.segments else Point(0, 0))),
        bindings=[
            SchematicBinding(b.pin.element_id, b.pin.pin_name, net_names[b.net_label])
            for b in bindings
        ],
    )
    validate_schematic(schematic)

    net_pixels: dict[str, np.ndarray] = {}
    for net_idx, m in sorted(net_masks.items()):
        name = net_names[net_idx]
        ys, xs = np.nonzero(m)
        coords = np.column_stack([xs, ys]).astype(np.int32)
        if name in net_pixels:
            coords = np.vstack([net_pixels[name], coords])
        net_pixels[name] = coords

    gt = GroundTruth(
        detections=dets,
        crosspoints=crosspoints,
        wire_mask=BitMask(wire),
        net_pixels=net_pixels,
        netlist=netlist,
        schematic=schematic,
    )

    img = GrayImage(img_arr)
    if config.markings:
        img, boxes = add_markings(img, gt, config.seed, config.marking_count_range)
        gt.marking_boxes = boxes
    if config.difficulty == "hard":
        img = GrayImage(_degrade(img.values))
    return gt, img


# ---------------------------------------------------------------------------
# corpus


def emit_corpus(configs: list[SynthConfig], out_dir) -> dict:
    """Write one directory per circuit plus a manifest; reruns are byte-identical."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, cfg in enumerate(configs):
        name = f"ckt_{i:04d}"
        cdir = root / name
        cdir.mkdir(exist_ok=True)
        gt, img = generate(cfg)
        files = {
            "image": f"{name}/image.pgm",
            "detections": f"{name}/detections.json",
            "netlist": f"{name}/truth.scs",
            "mask": f"{name}/mask.pbm",
            "schematic": f"{name}/schematic.json",
        }
        save_pgm(img, cdir / "image.pgm")
        doc = gt.detections_doc
        (cdir / "detections.json").write_text(
            json.dumps(detections_to_dict(doc), indent=2, sort_keys=True) + "\n"
        )
        save_netlist(gt.netlist, cdir / "truth.scs")
        save_mask(gt.wire_mask, cdir / "mask.pbm")
        save_schematic(gt.schematic, cdir / "schematic.json")
        if gt.marking_boxes:
            files["markings"] = f"{name}/markings.json"
            (cdir / "markings.json").write_text(
                json.dumps([b.as_list() for b in gt.marking_boxes]) + "\n"
            )
        entries.append(
            {
                "name": name,
                "seed": cfg.seed,
                "difficulty": cfg.difficulty,
                "markings": bool(gt.marking_boxes),
                "files": files,
            }
        )
    manifest = {"circuits": entries}
    (root / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
