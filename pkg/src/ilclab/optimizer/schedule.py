"""Carrying an ILC set across the horizon.

Every strategy produces a snapshot at the first slot and then steps forward
one slot at a time.  Links that are still admitted are kept (hysteresis);
broken ones are refilled by a strategy-specific rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..assignment import IlcAssignment
from .common import LayerPair, Occupancy

Pairs = list[tuple[int, int]]
Refill = Callable[[int, Pairs, int], Pairs]
Adjust = Callable[[int, Pairs], Pairs]


@dataclass
class Schedule:
    strategy: str
    k: int
    assignments: list[IlcAssignment]
    apl: np.ndarray  # per slot, exact
    shortfall: np.ndarray  # per slot, k minus links actually placed
    trace: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    @property
    def n_slots(self) -> int:
        return len(self.assignments)

    @property
    def snapshot(self) -> IlcAssignment:
        return self.assignments[0]


def occupancy_of(pair: LayerPair, t: int, pairs: Pairs, max_per_plane: int | None) -> Occupancy:
    Sa, Sb = pair.sats_per_plane
    occ = Occupancy(pair.candidates.at(t), pair.sats_per_plane, max_per_plane)
    for a, b in pairs:
        occ.add_pair(a, b, a // Sa, b // Sb)
    return occ


def kept_links(pair: LayerPair, t: int, pairs: Pairs) -> Pairs:
    adm = pair.candidates.admitted
    return [(a, b) for a, b in pairs if adm[a, b, t]]


def roll_forward(pair: LayerPair, strategy: str, k: int, first: Sequence[tuple[int, int]],
                 refill: Refill, start: int = 0, n_slots: int | None = None,
                 hysteresis: bool = True, adjust: Adjust | None = None) -> Schedule:
    """Extend a snapshot over ``n_slots`` slots starting at ``start``.

    ``refill(t, kept, need)`` returns up to ``need`` new pairs that respect
    the endpoints in ``kept``.  Without hysteresis every slot is refilled
    from scratch.  ``adjust(t, pairs)`` may rework the set at slots that
    needed a refill.
    """
    end = pair.horizon if n_slots is None else start + n_slots
    if end > pair.horizon:
        raise ValueError(f"schedule ends at slot {end}, beyond the {pair.horizon}-slot horizon")
    current = [tuple(map(int, p)) for p in first]
    out, apl, short = [], [], []
    for t in range(start, end):
        if t > start:
            kept = kept_links(pair, t, current) if hysteresis else []
            need = k - len(kept)
            if need > 0:
                current = kept + refill(t, kept, need)
                if adjust is not None:
                    current = [tuple(map(int, p)) for p in adjust(t, current)]
            else:
                current = kept
        out.append(pair.assignment(current, t))
        apl.append(pair.apl(current))
        short.append(k - len(current))
    return Schedule(strategy, k, out, np.array(apl), np.array(short))


def apl_weighted_refill(pair: LayerPair, apl_slack: float = 0.01,
                        max_per_plane: int | None = None) -> Refill:
    """Add links one at a time: among those within ``apl_slack`` of the best
    achievable APL, take the largest time weight."""

    def refill(t: int, kept: Pairs, need: int) -> Pairs:
        sc = pair.candidates.at(t)
        occ = occupancy_of(pair, t, kept, max_per_plane)
        D = pair.dist(kept)
        new: Pairs = []
        for _ in range(need):
            idx = np.nonzero(occ.free_mask())[0]
            if len(idx) == 0:
                break
            apls = pair.apl_if_added(D, sc.a[idx], sc.b[idx])
            ok = apls <= apls.min() * (1.0 + apl_slack) + 1e-12
            pool = idx[ok]
            # max weight; ties go to the lowest APL, then candidate order
            order = np.lexsort((pool, apls[ok], -sc.weight[pool]))
            i = int(pool[order[0]])
            occ.add(i)
            a, b = int(sc.a[i]), int(sc.b[i])
            new.append((a, b))
            D = pair.dist([(a, b)], D)
        return new

    return refill
