"""Net labeling: connected components, crossing split-and-merge, cross-point inference.

A wire mask is first labeled into 8-connected components.  Annotated
crossings are then re-separated: a disk around the crossing is cleared,
the touching wire stubs are ordered by angle, and opposite stubs are
merged back into single nets.  Junction annotations leave the labeling
untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import (
    BBox,
    BitMask,
    CrossKind,
    CrossPoint,
    LabelMap,
    NetliftError,
    Point,
)

_EIGHT = np.ones((3, 3), dtype=np.uint8)


class ExtractionError(NetliftError):
    """A pipeline stage received input it cannot process."""


def _densify(labels: np.ndarray) -> np.ndarray:
    """Renumber labels to 1..K in first-encounter (row-major) order."""
    flat = labels.ravel()
    nz = flat[flat > 0]
    if nz.size == 0:
        return np.zeros_like(labels)
    uniq, first = np.unique(nz, return_index=True)
    order = np.argsort(first, kind="stable")
    remap = np.zeros(int(labels.max()) + 1, dtype=np.int32)
    remap[uniq[order]] = np.arange(1, len(uniq) + 1, dtype=np.int32)
    return remap[labels]


def connected_components(mask: BitMask) -> LabelMap:
    """8-connected labeling with labels dense in row-major first-encounter order."""
    raw, _ = ndimage.label(mask.pixels, structure=_EIGHT)
    return LabelMap(_densify(raw), validate=False)


def _axis_runs(arr: np.ndarray) -> np.ndarray:
    """Per-pixel horizontal run length (0 on background)."""
    h, w = arr.shape
    padded = np.zeros((h, w + 1), dtype=bool)
    padded[:, :w] = arr
    flat = padded.ravel()
    starts = flat.copy()
    starts[1:] &= ~flat[:-1]
    ids = np.cumsum(starts)
    lengths = np.bincount(ids[flat], minlength=int(ids[-1]) + 1)
    out = np.where(flat, lengths[ids], 0)
    return out.reshape(h, w + 1)[:, :w]


def estimate_stroke_width(mask: BitMask) -> int:
    """Median over wire pixels of the smaller horizontal/vertical run length."""
    arr = mask.pixels
    if not arr.any():
        return 1
    runs = np.minimum(_axis_runs(arr), _axis_runs(arr.T).T)
    return max(1, int(round(float(np.median(runs[arr])))))


@dataclass(frozen=True)
class Stub:
    """One wire piece touching the cleared disk's boundary annulus."""

    contact: Point
    angle: float  # radians from disk center, y-down frame
    label_before: int


@dataclass(frozen=True)
class CrossingResolution:
    at: Point
    radius: int
    stubs: tuple[Stub, ...]
    pairing: tuple[tuple[int, int], ...]  # 0-based indices into stubs
    degraded: bool = False


def _disk_offsets(r: float) -> tuple[np.ndarray, np.ndarray]:
    rr = int(math.ceil(r))
    dy, dx = np.mgrid[-rr : rr + 1, -rr : rr + 1]
    keep = dx * dx + dy * dy <= r * r
    return dx[keep], dy[keep]


def _clipped(coords_x, coords_y, w, h):
    keep = (coords_x >= 0) & (coords_x < w) & (coords_y >= 0) & (coords_y < h)
    return coords_x[keep], coords_y[keep]


def _find_stubs(labels: np.ndarray, cx: int, cy: int, r: float, thick: float):
    """8-connected groups of labeled pixels in the annulus r < d <= r+thick,
    sorted by contact angle.  Returns (stubs, float_centroids, first_pixels)."""
    h, w = labels.shape
    rr = int(math.ceil(r + thick))
    x0, x1 = max(0, cx - rr), min(w - 1, cx + rr)
    y0, y1 = max(0, cy - rr), min(h - 1, cy + rr)
    win = labels[y0 : y1 + 1, x0 : x1 + 1]
    ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    ring = (d2 > r * r) & (d2 <= (r + thick) ** 2) & (win > 0)
    groups, n = ndimage.label(ring, structure=_EIGHT)
    entries = []
    for g in range(1, n + 1):
        gys, gxs = np.nonzero(groups == g)
        if len(gys) < 2:
            continue  # single stray pixels are not stubs
        fx = float(np.mean(gxs)) + x0
        fy = float(np.mean(gys)) + y0
        angle = math.atan2(fy - cy, fx - cx)
        label = int(win[gys[0], gxs[0]])
        first = (int(gxs[0] + x0), int(gys[0] + y0))
        entries.append((angle, fx, fy, label, first))
    entries.sort(key=lambda e: e[0])
    stubs = tuple(
        Stub(Point(int(math.floor(fx + 0.5)), int(math.floor(fy + 0.5))), angle, label)
        for angle, fx, fy, label, _ in entries
    )
    centroids = [(fx, fy) for _, fx, fy, _, _ in entries]
    firsts = [first for *_, first in entries]
    return stubs, centroids, firsts


class _Union:
    def __init__(self):
        self.parent: dict[int, int] = {}

    def find(self, a: int) -> int:
        p = self.parent.setdefault(a, a)
        if p != a:
            p = self.parent[a] = self.find(p)
        return p

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller label as representative
            lo, hi = min(ra, rb), max(ra, rb)
            self.parent[hi] = lo


def resolve_crossings(
    lmap: LabelMap, crosspoints, stroke: int
) -> tuple[LabelMap, list[CrossingResolution]]:
    """Split visually-crossing nets and re-merge opposite stubs.

    Every crossing clears a disk; the mask is then relabeled into pieces
    once, and per crossing the stubs around the disk are sorted by angle
    and merged opposite-to-opposite (stub 1 with 3, 2 with 4; i with
    i+n/2 for even counts above four) through one global union-find, so
    components tied together by several crossings separate correctly.
    Cleared wire pixels are reassigned to the merged net of the nearest
    stub contact, ties to the lower label.  Junctions are no-ops.
    Crossings without at least four stubs are recorded as degraded and
    leave their component merged.
    """
    labels = np.array(lmap.labels, dtype=np.int32)
    h, w = labels.shape
    base_r = max(3, 2 * stroke)
    thick = max(2.0, stroke / 2 + 1)
    r_cap = base_r + 6 * stroke + 2
    grow = max(2, stroke)

    # Stub discovery per crossing, on the untouched ink.
    plans = []  # (cp, radius, stubs, centroids, firsts, degraded)
    for cp in crosspoints:
        if cp.kind is not CrossKind.CROSSING:
            continue
        cx, cy = cp.at.x, cp.at.y
        dx, dy = _disk_offsets(base_r)
        px, py = _clipped(cx + dx, cy + dy, w, h)
        if not (labels[py, px] > 0).any():
            raise ExtractionError(
                f"crossing at ({cx},{cy}) has no labeled pixel within {base_r} px"
            )
        r = float(base_r)
        stubs, centroids, firsts = _find_stubs(labels, cx, cy, r, thick)
        while len(stubs) < 4 and r + grow <= r_cap:
            r += grow
            stubs, centroids, firsts = _find_stubs(labels, cx, cy, r, thick)
        degraded = len(stubs) < 4 or len(stubs) % 2 == 1
        plans.append([cp, r, stubs, centroids, firsts, degraded])

    # A stub whose anchor pixel falls inside another crossing's disk cannot
    # be traced to a piece; such a crossing degrades to a no-op.
    for plan in plans:
        if plan[5]:
            continue
        for fx, fy in plan[4]:
            for other in plans:
                if other is plan or other[5]:
                    continue
                ox, oy = other[0].at.x, other[0].at.y
                if (fx - ox) ** 2 + (fy - oy) ** 2 <= other[1] ** 2:
                    plan[5] = True
                    break
            if plan[5]:
                break

    # Clear every active disk, then relabel the whole mask into pieces.
    cleared: list[tuple[np.ndarray, np.ndarray]] = []
    for cp, r, stubs, centroids, firsts, degraded in plans:
        if degraded:
            cleared.append((np.array([], dtype=int), np.array([], dtype=int)))
            continue
        dx, dy = _disk_offsets(r)
        px, py = _clipped(cp.at.x + dx, cp.at.y + dy, w, h)
        inked = labels[py, px] > 0
        cleared.append((px[inked], py[inked]))
        labels[py[inked], px[inked]] = 0

    pieces, _ = ndimage.label(labels > 0, structure=_EIGHT)
    pieces = pieces.astype(np.int32)

    uf = _Union()
    resolutions: list[CrossingResolution] = []
    reassign = []  # (pixel xs, pixel ys, stub centroids, stub piece labels)
    for (cp, r, stubs, centroids, firsts, degraded), (sx, sy) in zip(plans, cleared):
        if degraded:
            resolutions.append(
                CrossingResolution(cp.at, int(round(r)), stubs, (), degraded=True)
            )
            continue
        stub_pieces = [int(pieces[fy, fx]) for fx, fy in firsts]
        n = len(stubs)
        pairing = tuple((i, i + n // 2) for i in range(n // 2))
        for a, b in pairing:
            uf.union(stub_pieces[a], stub_pieces[b])
        reassign.append((sx, sy, centroids, stub_pieces))
        resolutions.append(CrossingResolution(cp.at, int(round(r)), stubs, pairing))

    # Collapse union classes onto their smallest piece label.
    roots = {p: uf.find(p) for p in uf.parent}
    out = np.where(labels > 0, pieces, 0)
    if roots:
        remap = np.arange(int(pieces.max()) + 1, dtype=np.int32)
        for p, root in roots.items():
            remap[p] = root
        out = remap[out]

    # Reassign cleared pixels to the merged net of the nearest contact.
    for sx, sy, centroids, stub_pieces in reassign:
        if len(sx) == 0:
            continue
        cxs = np.array([c[0] for c in centroids])
        cys = np.array([c[1] for c in centroids])
        merged = np.array([roots.get(p, p) for p in stub_pieces], dtype=np.int64)
        d2 = (sx[:, None] - cxs[None, :]) ** 2 + (sy[:, None] - cys[None, :]) ** 2
        mins = d2.min(axis=1)
        tied = np.where(d2 == mins[:, None], merged[None, :], np.iinfo(np.int64).max)
        out[sy, sx] = tied.min(axis=1).astype(np.int32)

    return LabelMap(_densify(out), validate=False), resolutions


def _neighbor_count(arr: np.ndarray) -> np.ndarray:
    padded = np.zeros((arr.shape[0] + 2, arr.shape[1] + 2), dtype=np.uint8)
    padded[1:-1, 1:-1] = arr
    total = (
        padded[:-2, :-2] + padded[:-2, 1:-1] + padded[:-2, 2:]
        + padded[1:-1, :-2] + padded[1:-1, 2:]
        + padded[2:, :-2] + padded[2:, 1:-1] + padded[2:, 2:]
    )
    return total


def infer_crosspoints(mask: BitMask, skeleton: BitMask) -> list[CrossPoint]:
    """Fallback detector when no cross-point annotations are supplied.

    Degree-4 skeleton pixels (clustered when adjacent) become cross
    points; a filled dot nearby marks a junction, otherwise a crossing.
    """
    sk = skeleton.pixels
    deg = _neighbor_count(sk)
    cand = sk & (deg >= 4)
    if not cand.any():
        return []
    stroke = estimate_stroke_width(mask)
    radius = max(2.0, 1.5 * stroke)
    groups, n = ndimage.label(cand, structure=_EIGHT)
    h, w = sk.shape
    points: list[CrossPoint] = []
    for g in range(1, n + 1):
        ys, xs = np.nonzero(groups == g)
        cx = int(math.floor(float(np.mean(xs)) + 0.5))
        cy = int(math.floor(float(np.mean(ys)) + 0.5))
        dx, dy = _disk_offsets(radius)
        px, py = _clipped(cx + dx, cy + dy, w, h)
        density = float(mask.pixels[py, px].mean()) if len(px) else 0.0
        kind = CrossKind.JUNCTION if density > 0.75 else CrossKind.CROSSING
        points.append(CrossPoint(Point(cx, cy), kind))
    return points


def bridge_regions(lmap: LabelMap, boxes, stroke: int, margin: int = 2) -> LabelMap:
    """Re-merge nets cut apart by blanked ignore regions.

    For each box, wire stubs touching the blanked zone's boundary are
    paired across opposite sides when their row (or column) coordinates
    align within stroke+3 px, and the paired labels are merged.  Wires
    are assumed to cross the region as straight axis-aligned runs.
    """
    labels = np.array(lmap.labels, dtype=np.int32)
    h, w = labels.shape
    tol = stroke + 3
    for box in boxes:
        ex = box.expanded(margin + 1)
        rr = 2
        x0, x1 = max(0, ex.min.x - rr), min(w - 1, ex.max.x + rr)
        y0, y1 = max(0, ex.min.y - rr), min(h - 1, ex.max.y + rr)
        if x0 > x1 or y0 > y1:
            continue
        win = labels[y0 : y1 + 1, x0 : x1 + 1]
        ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
        inside = (
            (xs >= ex.min.x) & (xs <= ex.max.x) & (ys >= ex.min.y) & (ys <= ex.max.y)
        )
        band = (win > 0) & ~inside
        groups, n = ndimage.label(band, structure=_EIGHT)
        sides: dict[str, list[tuple[float, int]]] = {"L": [], "R": [], "T": [], "B": []}
        for g in range(1, n + 1):
            gys, gxs = np.nonzero(groups == g)
            cx = float(np.mean(gxs)) + x0
            cy = float(np.mean(gys)) + y0
            label = int(win[gys[0], gxs[0]])
            over = {
                "L": ex.min.x - cx,
                "R": cx - ex.max.x,
                "T": ex.min.y - cy,
                "B": cy - ex.max.y,
            }
            side = max(over, key=lambda k: over[k])
            coord = cy if side in ("L", "R") else cx
            sides[side].append((coord, label))
        uf = _Union()
        for a_side, b_side in (("L", "R"), ("T", "B")):
            cands = [
                (abs(ca - cb), ca, cb, la, lb)
                for ca, la in sides[a_side]
                for cb, lb in sides[b_side]
                if abs(ca - cb) <= tol
            ]
            cands.sort()
            used_a: set[float] = set()
            used_b: set[float] = set()
            for _, ca, cb, la, lb in cands:
                if ca in used_a or cb in used_b:
                    continue
                used_a.add(ca)
                used_b.add(cb)
                uf.union(la, lb)
        roots = {l: uf.find(l) for l in uf.parent}
        for label, root in sorted(roots.items()):
            if label != root:
                labels[labels == label] = root
    return LabelMap(_densify(labels), validate=False)
