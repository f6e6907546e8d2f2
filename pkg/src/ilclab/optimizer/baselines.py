"""Reference strategies: shortest-distance greedy, stratified random, max time weight."""
from __future__ import annotations

from collections import Counter

import networkx as nx
import numpy as np

from ..assignment import IlcAssignment
from ..linkmodel import CandidateSet
from .common import InfeasibleError, Occupancy

WEIGHT_SCALE = 10**6


def _sats_per_plane(cs: CandidateSet) -> tuple[int, int]:
    return cs.eph_a.layer.spec.sats_per_plane, cs.eph_b.layer.spec.sats_per_plane


def greedy_shortest(cs: CandidateSet, k: int, slot: int, max_per_plane: int | None = None,
                    partial: bool = False) -> IlcAssignment:
    """Repeatedly take the shortest candidate whose endpoints are still free.

    Equal distances fall back to the lowest flat index of layer a, then layer b.
    With ``partial`` a shortfall returns what was found instead of raising.
    """
    sc = cs.at(slot)
    occ = Occupancy(sc, _sats_per_plane(cs), max_per_plane)
    order = np.lexsort((sc.b, sc.a, sc.distance_km))
    chosen = []
    for i in order:
        if len(chosen) == k:
            break
        if occ.can_add(i):
            occ.add(i)
            chosen.append((int(sc.a[i]), int(sc.b[i])))
    if len(chosen) < k and not partial:
        raise InfeasibleError(f"only {len(chosen)} disjoint candidates at slot {slot}, need {k}")
    return IlcAssignment(tuple(chosen), cs.layers, slot)


def random_uniform(cs: CandidateSet, k: int, seed: int, slot: int = 0,
                   max_per_plane: int | None = None, partial: bool = False) -> IlcAssignment:
    """Uniform disjoint sample, spread round-robin over the planes of layer a.

    Planes are visited in a shuffled order; each visit draws one free
    candidate uniformly from that plane.  Exhausted planes drop out.
    """
    rng = np.random.default_rng(seed)
    sc = cs.at(slot)
    occ = Occupancy(sc, _sats_per_plane(cs), max_per_plane)
    planes = list(np.unique(occ.plane_a))
    rng.shuffle(planes)
    chosen = []
    while len(chosen) < k and planes:
        for p in list(planes):
            if len(chosen) == k:
                break
            free = np.nonzero(occ.free_mask() & (occ.plane_a == p))[0]
            if len(free) == 0:
                planes.remove(p)
                continue
            i = int(rng.choice(free))
            occ.add(i)
            chosen.append((int(sc.a[i]), int(sc.b[i])))
    if len(chosen) < k and not partial:
        raise InfeasibleError(f"only {len(chosen)} disjoint candidates at slot {slot}, need {k}")
    return IlcAssignment(tuple(chosen), cs.layers, slot)


def max_time_weight(cs: CandidateSet, k: int, slot: int, fixed: IlcAssignment | None = None,
                    max_per_plane: int | None = None) -> IlcAssignment:
    """Exactly k disjoint candidates of maximum summed time weight.

    Solved as a min-cost flow of value k.  Pairs in ``fixed`` are kept and
    their endpoints removed from the pool before the remaining ``k - |fixed|``
    are chosen.  A per-plane cap routes the flow through plane nodes.
    """
    sc = cs.at(slot)
    Sa, Sb = _sats_per_plane(cs)
    keep = list(fixed.pairs) if fixed is not None else []
    need = k - len(keep)
    if need < 0:
        raise ValueError("fixed assignment already exceeds k")
    if need == 0:
        return IlcAssignment(tuple(keep), cs.layers, slot)
    used_a = {a for a, _ in keep}
    used_b = {b for _, b in keep}
    left_a = Counter(a // Sa for a, _ in keep)
    left_b = Counter(b // Sb for _, b in keep)
    g = nx.DiGraph()
    g.add_node("s", demand=-need)
    g.add_node("t", demand=need)
    for a, b, w in zip(sc.a.tolist(), sc.b.tolist(), sc.weight.tolist()):
        if a in used_a or b in used_b:
            continue
        if max_per_plane is None:
            g.add_edge("s", ("a", a), capacity=1, weight=0)
            g.add_edge(("b", b), "t", capacity=1, weight=0)
        else:
            pa, pb = a // Sa, b // Sb
            g.add_edge("s", ("pa", pa), capacity=max(0, max_per_plane - left_a[pa]), weight=0)
            g.add_edge(("pa", pa), ("a", a), capacity=1, weight=0)
            g.add_edge(("b", b), ("pb", pb), capacity=1, weight=0)
            g.add_edge(("pb", pb), "t", capacity=max(0, max_per_plane - left_b[pb]), weight=0)
        g.add_edge(("a", a), ("b", b), capacity=1, weight=-int(round(w * WEIGHT_SCALE)))
    try:
        flow = nx.min_cost_flow(g)
    except (nx.NetworkXUnfeasible, nx.NetworkXError) as exc:
        raise InfeasibleError(f"fewer than {need} disjoint candidates at slot {slot}") from exc
    new = [(u[1], v[1]) for u, out in flow.items() if isinstance(u, tuple) and u[0] == "a"
           for v, f in out.items() if f > 0]
    return IlcAssignment(tuple(keep + new), cs.layers, slot)
