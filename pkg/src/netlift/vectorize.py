"""Skeletonization and conversion of labeled wire regions into keypoints and segments.

Thinning is Zhang-Suen with two cleanups: fully-crossed pixels are broken
up so no skeleton pixel keeps all four edge neighbors, and components
that the parallel deletion would erase entirely get their innermost pixel
restored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .geometry import BitMask, LabelMap, NetGeometry, Point, Segment

_EIGHT = np.ones((3, 3), dtype=np.uint8)
_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def _thin_subpass(padded: np.ndarray, phase: int) -> bool:
    c = padded[1:-1, 1:-1]
    n = padded[0:-2, 1:-1]
    ne = padded[0:-2, 2:]
    e = padded[1:-1, 2:]
    se = padded[2:, 2:]
    s = padded[2:, 1:-1]
    sw = padded[2:, 0:-2]
    w = padded[1:-1, 0:-2]
    nw = padded[0:-2, 0:-2]
    ring = (n, ne, e, se, s, sw, w, nw)
    b = np.zeros(c.shape, dtype=np.uint8)
    for nb in ring:
        b += nb
    a = np.zeros(c.shape, dtype=np.uint8)
    for i in range(8):
        a += (~ring[i] & ring[(i + 1) % 8]).astype(np.uint8)
    if phase == 0:
        extra = ~(n & e & s) & ~(e & s & w)
    else:
        extra = ~(n & e & w) & ~(n & s & w)
    kill = c & (b >= 2) & (b <= 6) & (a == 1) & extra
    if not kill.any():
        return False
    padded[1:-1, 1:-1] &= ~kill
    return True


def _break_full_crosses(arr: np.ndarray) -> np.ndarray:
    """Delete pixels whose four edge neighbors are all set.

    Removal is safe: the four neighbors stay pairwise connected through
    the diagonals, so components never split.
    """
    out = np.array(arr)
    h, w = out.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = out
    full = (
        padded[0:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, 0:-2] & padded[1:-1, 2:]
    ) & out
    for y, x in np.argwhere(full):
        if (
            out[y, x]
            and y > 0 and y < h - 1 and x > 0 and x < w - 1
            and out[y - 1, x] and out[y + 1, x] and out[y, x - 1] and out[y, x + 1]
        ):
            out[y, x] = False
    return out


def _restore_vanished(src: np.ndarray, out: np.ndarray) -> np.ndarray:
    comp, k = ndimage.label(src, structure=_EIGHT)
    if k == 0:
        return out
    survivors = np.bincount(comp[out], minlength=k + 1)
    missing = [i for i in range(1, k + 1) if survivors[i] == 0]
    if not missing:
        return out
    out = np.array(out)
    for i in missing:
        region = comp == i
        dist = ndimage.distance_transform_edt(region)
        best = np.unravel_index(int(np.argmax(dist)), dist.shape)
        out[best] = True
    return out


def skeletonize(mask: BitMask) -> BitMask:
    """Zhang-Suen thinning; preserves the 8-connected component count."""
    src = mask.pixels
    if not src.any():
        return BitMask(np.zeros_like(src))
    padded = np.zeros((src.shape[0] + 2, src.shape[1] + 2), dtype=bool)
    padded[1:-1, 1:-1] = src
    changed = True
    while changed:
        changed = _thin_subpass(padded, 0)
        changed = _thin_subpass(padded, 1) or changed
    out = _break_full_crosses(padded[1:-1, 1:-1])
    return BitMask(_restore_vanished(src, out))


class NodeKind(Enum):
    END = "end"
    BRANCH = "branch"
    TURN = "turn"


@dataclass(frozen=True)
class SkeletonNode:
    at: Point
    kind: NodeKind


@dataclass
class SkeletonEdge:
    a: int
    b: int
    path: np.ndarray  # (N, 2) int array of [x, y] pixels, endpoints included


@dataclass
class SkeletonGraph:
    nodes: list[SkeletonNode]
    edges: list[SkeletonEdge]


def _live_neighbors(arr: np.ndarray, y: int, x: int):
    h, w = arr.shape
    out = []
    for dx, dy in _DIRS:
        ny, nx = y + dy, x + dx
        if 0 <= ny < h and 0 <= nx < w and arr[ny, nx]:
            out.append((ny, nx))
    return out


def _prune_spurs(arr: np.ndarray, min_len: int = 4) -> np.ndarray:
    """Drop end-terminated twigs shorter than min_len px hanging off branch pixels."""
    out = np.array(arr)
    deg = ndimage.convolve(out.astype(np.uint8), _EIGHT, mode="constant") - out
    for y, x in np.argwhere(out & (deg == 1)):
        if not out[y, x]:
            continue
        path = [(y, x)]
        prev = None
        cur = (y, x)
        while len(path) < min_len:
            nbrs = [p for p in _live_neighbors(out, *cur) if p != prev]
            if len(nbrs) != 1:
                break
            nxt = nbrs[0]
            if len(_live_neighbors(out, *nxt)) >= 3:
                for py, px in path:
                    out[py, px] = False
                break
            path.append(nxt)
            prev, cur = cur, nxt
    return out


def _turn_indices(path: np.ndarray, tol_deg: float) -> list[int]:
    n = len(path)
    k = 2
    if n < 2 * k + 1:
        return []
    p = path.astype(np.float64)
    v1 = p[k:-k] - p[: -2 * k]
    v2 = p[2 * k :] - p[k:-k]
    dot = (v1 * v2).sum(axis=1)
    norm = np.linalg.norm(v1, axis=1) * np.linalg.norm(v2, axis=1)
    cosang = np.clip(dot / np.maximum(norm, 1e-12), -1.0, 1.0)
    ang = np.degrees(np.arccos(cosang))
    over = ang > tol_deg
    turns = []
    i = 0
    while i < len(over):
        if over[i]:
            j = i
            while j + 1 < len(over) and over[j + 1]:
                j += 1
            local = i + int(np.argmax(ang[i : j + 1]))
            turns.append(local + k)
            i = j + 1
        else:
            i += 1
    return turns


def build_skeleton_graph(skeleton: BitMask, turn_tolerance: float = 30.0) -> SkeletonGraph:
    """Classify skeleton pixels into End/Branch/Turn nodes joined by pixel paths."""
    arr = _prune_spurs(skeleton.pixels)
    deg = ndimage.convolve(arr.astype(np.uint8), _EIGHT, mode="constant") - arr

    nodes: list[SkeletonNode] = []
    index: dict[tuple[int, int], int] = {}
    for y, x in np.argwhere(arr & (deg != 2)):
        index[(int(y), int(x))] = len(nodes)
        kind = NodeKind.END if deg[y, x] <= 1 else NodeKind.BRANCH
        nodes.append(SkeletonNode(Point(int(x), int(y)), kind))

    edges: list[SkeletonEdge] = []
    visited: set[tuple[tuple[int, int], tuple[int, int]]] = set()
    consumed: set[tuple[int, int]] = set()

    def walk(start: tuple[int, int], first: tuple[int, int]):
        path = [start, first]
        prev, cur = start, first
        while cur not in index:
            consumed.add(cur)
            nbrs = [p for p in _live_neighbors(arr, *cur) if p != prev]
            if len(nbrs) != 1:
                break  # defensive: malformed chain
            prev, cur = cur, nbrs[0]
            path.append(cur)
        return path

    for coord in sorted(index):
        for p in _live_neighbors(arr, *coord):
            if (coord, p) in visited:
                continue
            visited.add((coord, p))
            path = walk(coord, p)
            end = path[-1]
            if end in index:
                visited.add((end, path[-2]))
                edges.append(_edge_record(index, coord, end, path))

    # Pure cycles have no natural node; anchor each at its smallest pixel.
    leftover = {
        (int(y), int(x))
        for y, x in np.argwhere(arr & (deg == 2))
        if (int(y), int(x)) not in consumed and (int(y), int(x)) not in index
    }
    while leftover:
        start = min(leftover)
        index[start] = len(nodes)
        nodes.append(SkeletonNode(Point(start[1], start[0]), NodeKind.TURN))
        leftover.discard(start)
        first = _live_neighbors(arr, *start)[0]
        path = walk(start, first)
        leftover.difference_update(path)
        edges.append(_edge_record(index, start, path[-1], path))

    # Split edges where the local direction swings past the tolerance.
    final_edges: list[SkeletonEdge] = []
    for edge in edges:
        turns = _turn_indices(edge.path, turn_tolerance)
        if not turns:
            final_edges.append(edge)
            continue
        cuts = [0] + turns + [len(edge.path) - 1]
        prev_idx = edge.a
        for ti in turns:
            x, y = int(edge.path[ti, 0]), int(edge.path[ti, 1])
            index[(y, x)] = len(nodes)
            nodes.append(SkeletonNode(Point(x, y), NodeKind.TURN))
        for s, t in zip(cuts[:-1], cuts[1:]):
            sub = edge.path[s : t + 1]
            a = prev_idx
            bx, by = int(sub[-1, 0]), int(sub[-1, 1])
            b = index.get((by, bx), edge.b)
            final_edges.append(SkeletonEdge(a, b, sub))
            prev_idx = b

    return SkeletonGraph(nodes, final_edges)


def _edge_record(index, start, end, path) -> SkeletonEdge:
    arr = np.array([(x, y) for y, x in path], dtype=np.int32)
    return SkeletonEdge(index[start], index[end], arr)


def _seg_distances(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        return np.linalg.norm(points - a, axis=1)
    t = np.clip(((points - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(points - proj, axis=1)


def _fit_path(path: np.ndarray, eps: float) -> list[tuple[int, int, int, int]]:
    """Greedy farthest-point splitting of a pixel path into chords."""
    out: list[tuple[int, int, int, int]] = []
    stack = [(0, len(path) - 1)]
    while stack:
        i, j = stack.pop()
        if j <= i:
            continue
        pts = path[i : j + 1].astype(np.float64)
        d = _seg_distances(pts, pts[0], pts[-1])
        worst = int(np.argmax(d))
        if d[worst] > eps and 0 < worst < len(pts) - 1:
            stack.append((i + worst, j))
            stack.append((i, i + worst))
        else:
            out.append((int(path[i, 0]), int(path[i, 1]), int(path[j, 0]), int(path[j, 1])))
    out.sort()
    return out


def fit_segments(graph: SkeletonGraph, max_deviation: float = 1.5) -> list[Segment]:
    """Replace each edge path by chords keeping every pixel within max_deviation."""
    segs: list[Segment] = []
    for edge in graph.edges:
        path = edge.path
        if len(path) < 2:
            continue
        closed = bool((path[0] == path[-1]).all())
        if closed:
            if len(path) < 4:
                continue
            far = int(np.argmax(np.linalg.norm(path - path[0], axis=1)))
            halves = [path[: far + 1], path[far:]]
        else:
            halves = [path]
        for half in halves:
            for x1, y1, x2, y2 in _fit_path(half, max_deviation):
                if (x1, y1) != (x2, y2):
                    segs.append(Segment(Point(x1, y1), Point(x2, y2)))
    return segs


def _connect_segment_clusters(segs: list[Segment]) -> list[Segment]:
    """A label is one electrical net; if its fitted segments fall into
    several endpoint-connected clusters (split disks, blanked regions),
    join the nearest cluster endpoints with explicit bridge segments."""
    if len(segs) < 2:
        return segs
    parent = list(range(len(segs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def pts(s):
        return ((s.a.x, s.a.y), (s.b.x, s.b.y))

    def near(p, q):
        return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 <= 4

    for i in range(len(segs)):
        for j in range(i + 1, len(segs)):
            if any(near(p, q) for p in pts(segs[i]) for q in pts(segs[j])):
                parent[find(i)] = find(j)
    clusters: dict[int, list[int]] = {}
    for i in range(len(segs)):
        clusters.setdefault(find(i), []).append(i)
    out = list(segs)
    while len(clusters) > 1:
        roots = sorted(clusters)
        best = None
        for ai in range(len(roots)):
            for bi in range(ai + 1, len(roots)):
                for i in clusters[roots[ai]]:
                    for j in clusters[roots[bi]]:
                        for p in pts(segs[i]):
                            for q in pts(segs[j]):
                                d = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
                                if best is None or (d, p, q) < best[:3]:
                                    best = (d, p, q, roots[ai], roots[bi])
        d, p, q, ra, rb = best
        if p != q:
            out.append(Segment(Point(*p), Point(*q)))
        clusters[ra].extend(clusters.pop(rb))
    return out


def vectorize_nets(
    lmap: LabelMap, turn_tolerance: float = 30.0, max_deviation: float = 1.5
) -> list[NetGeometry]:
    """One NetGeometry per label: skeleton keypoints plus fitted segments."""
    out: list[NetGeometry] = []
    slices = ndimage.find_objects(lmap.labels)
    for label in range(1, lmap.count + 1):
        slc = slices[label - 1]
        if slc is None:
            continue
        sub = lmap.labels[slc] == label
        oy, ox = slc[0].start, slc[1].start
        skel = skeletonize(BitMask(sub))
        graph = build_skeleton_graph(skel, turn_tolerance)
        segs = [
            Segment(Point(s.a.x + ox, s.a.y + oy), Point(s.b.x + ox, s.b.y + oy))
            for s in fit_segments(graph, max_deviation)
        ]
        kinds: dict[NodeKind, list[Point]] = {k: [] for k in NodeKind}
        for node in graph.nodes:
            kinds[node.kind].append(Point(node.at.x + ox, node.at.y + oy))
        if not segs and int(sub.sum()) >= 2:
            ys, xs = np.nonzero(sub)
            p0 = Point(int(xs[0] + ox), int(ys[0] + oy))
            p1 = Point(int(xs[-1] + ox), int(ys[-1] + oy))
            segs = [Segment(p0, p1)]
            kinds[NodeKind.END] = [p0, p1]
        segs = _connect_segment_clusters(segs)
        out.append(
            NetGeometry(
                label=label,
                segments=tuple(segs),
                ends=tuple(sorted(kinds[NodeKind.END])),
                branches=tuple(sorted(kinds[NodeKind.BRANCH])),
                turns=tuple(sorted(kinds[NodeKind.TURN])),
            )
        )
    return out
