"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (per-pixel loops, exhaustive
enumeration) and kept separate from the library code it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def flood_fill_components(mask: np.ndarray) -> np.ndarray:
    """8-connected labeling by BFS, labels in row-major first-encounter order."""
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    nxt = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] and labels[y, x] == 0:
                nxt += 1
                stack = [(y, x)]
                labels[y, x] = nxt
                while stack:
                    cy, cx = stack.pop()
                    for dy in (-1, 0, 1):
                        for dx in (-1, 0, 1):
                            ny, nx_ = cy + dy, cx + dx
                            if 0 <= ny < h and 0 <= nx_ < w and mask[ny, nx_] and labels[ny, nx_] == 0:
                                labels[ny, nx_] = nxt
                                stack.append((ny, nx_))
    return labels


def zhang_suen_reference(mask: np.ndarray) -> np.ndarray:
    """Textbook Zhang-Suen thinning with per-pixel loops (no cleanups)."""
    img = np.array(mask, dtype=bool)
    h, w = img.shape

    def neighbors(y, x, cur):
        def at(yy, xx):
            return bool(cur[yy, xx]) if 0 <= yy < h and 0 <= xx < w else False

        return [
            at(y - 1, x), at(y - 1, x + 1), at(y, x + 1), at(y + 1, x + 1),
            at(y + 1, x), at(y + 1, x - 1), at(y, x - 1), at(y - 1, x - 1),
        ]

    changed = True
    while changed:
        changed = False
        for phase in (0, 1):
            kill = []
            for y in range(h):
                for x in range(w):
                    if not img[y, x]:
                        continue
                    n = neighbors(y, x, img)
                    b = sum(n)
                    if not (2 <= b <= 6):
                        continue
                    ring = n + [n[0]]
                    a = sum(1 for i in range(8) if not ring[i] and ring[i + 1])
                    if a != 1:
                        continue
                    p2, p4, p6, p8 = n[0], n[2], n[4], n[6]
                    if phase == 0:
                        if (p2 and p4 and p6) or (p4 and p6 and p8):
                            continue
                    else:
                        if (p2 and p4 and p8) or (p2 and p6 and p8):
                            continue
                    kill.append((y, x))
            for y, x in kill:
                img[y, x] = False
            if kill:
                changed = True
    return img


def otsu_reference(values: np.ndarray) -> int:
    """Best cut level by direct evaluation of every threshold."""
    v = values.ravel().astype(np.float64)
    best_t, best_var = 1, -1.0
    for t in range(1, 256):
        lo = v[v < t]
        hi = v[v >= t]
        if len(lo) == 0 or len(hi) == 0:
            var = 0.0
        else:
            var = len(lo) * len(hi) * (lo.mean() - hi.mean()) ** 2
        if var > best_var:
            best_var, best_t = var, t
    return best_t


def point_segment_distance_reference(px, py, ax, ay, bx, by, samples=2000) -> float:
    """Min distance to a dense sampling of the segment."""
    best = float("inf")
    for i in range(samples + 1):
        t = i / samples
        x = ax + t * (bx - ax)
        y = ay + t * (by - ay)
        best = min(best, math.hypot(px - x, py - y))
    return best


def best_bijection_reference(gt, pred, score_fn):
    """Exhaustive search over all maximal injective net-name maps.

    score_fn(net_map) -> tp; returns (best_tp, lexicographically smallest
    best mapping as a sorted tuple of pairs).
    """
    gt_nets = sorted(gt.nets)
    pred_nets = sorted(pred.nets)
    best = (-1, None)
    if len(gt_nets) <= len(pred_nets):
        for perm in itertools.permutations(pred_nets, len(gt_nets)):
            mapping = dict(zip(gt_nets, perm))
            tp = score_fn(mapping)
            key = tuple(sorted(mapping.items()))
            if tp > best[0] or (tp == best[0] and key < best[1]):
                best = (tp, key)
    else:
        for subset in itertools.permutations(gt_nets, len(pred_nets)):
            mapping = dict(zip(subset, pred_nets))
            tp = score_fn(mapping)
            key = tuple(sorted(mapping.items()))
            if tp > best[0] or (tp == best[0] and key < best[1]):
                best = (tp, key)
    if best[1] is None:
        return 0, ()
    return best


def neighbor_degree_reference(mask: np.ndarray) -> np.ndarray:
    h, w = mask.shape
    deg = np.zeros((h, w), dtype=int)
    for y in range(h):
        for x in range(w):
            if not mask[y, x]:
                continue
            c = 0
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dy == 0 and dx == 0:
                        continue
                    ny, nx_ = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx_ < w and mask[ny, nx_]:
                        c += 1
            deg[y, x] = c
    return deg
