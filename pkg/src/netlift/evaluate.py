"""Netlist similarity: confusion-matrix counts under a best net-name bijection.

Scored items are components (on type, symbols never appear as components)
and per-pin connections.  For any complete matching, tp+fn equals the
ground-truth item count and tp+fp the predicted item count, so the best
F1 is found by maximizing true positives over net-name bijections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Netlist, component_sort_key


@dataclass
class EvalReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    net_mapping: dict[str, str] = field(default_factory=dict)
    component_mapping: dict[str, str] = field(default_factory=dict)
    exact: bool = True

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "exact": self.exact,
            "net_mapping": dict(sorted(self.net_mapping.items())),
        }


def f1_from_counts(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _agreement(g, p, net_map) -> int:
    return sum(
        1
        for gn, pn in zip(g.pins, p.pins)
        if net_map.get(gn) == pn
    )


def match_components(gt: Netlist, pred: Netlist, net_map: dict[str, str]) -> dict[str, str]:
    """Greedy deterministic matching: same type first, then best per-pin
    net agreement, ties by name order; leftovers pair across types."""
    order = lambda c: component_sort_key(c.name)
    gt_comps = sorted(gt.components, key=order)
    free = sorted(pred.components, key=order)
    mapping: dict[str, str] = {}

    def take(g, candidates):
        if not candidates:
            return False
        best_score = max(_agreement(g, p, net_map) for p in candidates)
        best = min(
            (p for p in candidates if _agreement(g, p, net_map) == best_score),
            key=order,
        )
        mapping[g.name] = best.name
        free.remove(best)
        return True

    deferred = []
    for g in gt_comps:
        same = [p for p in free if p.etype is g.etype]
        if not take(g, same):
            deferred.append(g)
    for g in deferred:
        take(g, list(free))
    return mapping


def count_confusion(
    gt: Netlist, pred: Netlist, net_map: dict[str, str], comp_map: dict[str, str]
) -> tuple[int, int, int]:
    """Confusion counts over components (scored on type) and per-pin connections."""
    tp = fp = fn = 0
    pred_by_name = {c.name: c for c in pred.components}
    mapped_pred = set(comp_map.values())
    for g in gt.components:
        pname = comp_map.get(g.name)
        if pname is None:
            fn += 1 + len(g.pins)
            continue
        p = pred_by_name[pname]
        if p.etype is g.etype:
            tp += 1
        else:
            fn += 1
            fp += 1
        shared = min(len(g.pins), len(p.pins))
        for i in range(shared):
            if net_map.get(g.pins[i]) == p.pins[i]:
                tp += 1
            else:
                fn += 1
                fp += 1
        fn += len(g.pins) - shared
        fp += len(p.pins) - shared
    for p in pred.components:
        if p.name not in mapped_pred:
            fp += 1 + len(p.pins)
    return tp, fp, fn


def _score(gt: Netlist, pred: Netlist, net_map: dict[str, str]):
    comp_map = match_components(gt, pred, net_map)
    tp, fp, fn = count_confusion(gt, pred, net_map, comp_map)
    return tp, fp, fn, comp_map


def _map_key(net_map: dict[str, str]):
    return tuple(sorted(net_map.items()))


def _incidence(netlist: Netlist) -> dict[str, int]:
    inc: dict[str, int] = {n: 0 for n in netlist.nets}
    for c in netlist.components:
        for n in c.pins:
            inc[n] += 1
    return inc


def _pairing_bound(a: list[int], b: list[int]) -> int:
    """Upper bound on sum of min() over any injective pairing: sort both
    descending and pair positionally."""
    a = sorted(a, reverse=True)
    b = sorted(b, reverse=True)
    return sum(min(x, y) for x, y in zip(a, b))


class _Budget(Exception):
    pass


def _signature_similarity(gt: Netlist, pred: Netlist):
    def sigs(netlist):
        out: dict[str, dict] = {n: {} for n in netlist.nets}
        for c in netlist.components:
            for i, n in enumerate(c.pins):
                key = (c.etype.value, i)
                out[n][key] = out[n].get(key, 0) + 1
        return out

    sg, sp = sigs(gt), sigs(pred)

    def sim(g, p):
        keys = set(sg[g]) | set(sp[p])
        return sum(min(sg[g].get(k, 0), sp[p].get(k, 0)) for k in keys)

    return sim


def _greedy_net_map(gt: Netlist, pred: Netlist) -> dict[str, str]:
    sim = _signature_similarity(gt, pred)
    pairs = sorted(
        ((g, p) for g in gt.nets for p in pred.nets),
        key=lambda gp: (-sim(*gp), gp[0] != gp[1], gp[0], gp[1]),
    )
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for g, p in pairs:
        if g in mapping or p in used:
            continue
        mapping[g] = p
        used.add(p)
    return mapping


def best_permutation_score(gt: Netlist, pred: Netlist, budget: int = 1_000_000) -> EvalReport:
    """Maximize F1 over net-name bijections.

    Exhaustive branch-and-bound within the node budget (admissible bound:
    every remaining item a true positive); a deterministic greedy matcher
    by pin-incidence-signature similarity takes over past the budget and
    is flagged with exact=False.  Ties prefer the lexicographically
    smallest net mapping.
    """
    gt_nets = sorted(gt.nets)
    pred_nets = sorted(pred.nets)
    if not gt.components and not pred.components:
        return EvalReport(0, 0, 0, 1.0, 1.0, 1.0, {}, {}, True)

    inc_gt = _incidence(gt)
    inc_pred = _incidence(pred)
    comp_ub = 0
    types_gt: dict = {}
    types_pred: dict = {}
    for c in gt.components:
        types_gt[c.etype] = types_gt.get(c.etype, 0) + 1
    for c in pred.components:
        types_pred[c.etype] = types_pred.get(c.etype, 0) + 1
    for t, cnt in types_gt.items():
        comp_ub += min(cnt, types_pred.get(t, 0))

    need = min(len(gt_nets), len(pred_nets))
    best: dict = {"tp": -1, "key": None, "map": None}
    nodes = 0

    def leaf(net_map: dict[str, str]):
        tp, fp, fn, comp_map = _score(gt, pred, net_map)
        key = _map_key(net_map)
        if tp > best["tp"] or (tp == best["tp"] and (best["key"] is None or key < best["key"])):
            best.update(tp=tp, key=key, map=(dict(net_map), comp_map, tp, fp, fn))

    def dfs(i: int, net_map: dict[str, str], used: set[str]):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise _Budget()
        if len(net_map) == need or i == len(gt_nets):
            if len(net_map) == need:
                leaf(net_map)
            return
        # admissible bound on achievable pin true positives
        mapped_pins = sum(min(inc_gt[g], inc_pred[p]) for g, p in net_map.items())
        rest_gt = [inc_gt[g] for g in gt_nets[i:]]
        rest_pred = [inc_pred[p] for p in pred_nets if p not in used]
        ub = comp_ub + mapped_pins + _pairing_bound(rest_gt, rest_pred)
        if ub < best["tp"]:
            return
        g = gt_nets[i]
        for p in pred_nets:
            if p in used:
                continue
            net_map[g] = p
            used.add(p)
            dfs(i + 1, net_map, used)
            del net_map[g]
            used.discard(p)
        if len(gt_nets) - i - 1 >= need - len(net_map):
            dfs(i + 1, net_map, used)  # leave g unmapped

    exact = True
    try:
        dfs(0, {}, set())
    except _Budget:
        exact = False
        net_map = _greedy_net_map(gt, pred)
        tp, fp, fn, comp_map = _score(gt, pred, net_map)
        if tp > best["tp"]:
            best.update(tp=tp, key=_map_key(net_map), map=(net_map, comp_map, tp, fp, fn))

    net_map, comp_map, tp, fp, fn = best["map"]
    precision, recall, f1 = f1_from_counts(tp, fp, fn)
    return EvalReport(tp, fp, fn, precision, recall, f1, net_map, comp_map, exact)
