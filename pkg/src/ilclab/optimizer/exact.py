"""Exhaustive search over disjoint k-subsets of one slot's candidates."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..assignment import IlcAssignment
from .common import InfeasibleError, LayerPair


class BudgetExceeded(RuntimeError):
    """The enumeration is too large; use a heuristic instead."""


@dataclass(frozen=True)
class ExactResult:
    assignment: IlcAssignment
    apl: float
    objective: float
    n_evaluated: int


def exact_ilp(pair: LayerPair, k: int, slot: int = 0, budget: float = 1e7) -> ExactResult:
    """Globally minimal ``k * APL`` over every injective k-subset at ``slot``.

    Ties resolve to the lexicographically first subset in candidate order
    (candidates are ordered by flat index of layer a, then layer b).
    """
    sc = pair.candidates.at(slot)
    n = len(sc)
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        asg = pair.assignment((), slot)
        apl = pair.apl(())
        return ExactResult(asg, apl, 0.0, 1)
    bound = math.comb(n, k)
    if bound > budget:
        raise BudgetExceeded(
            f"C({n}, {k}) = {bound} subsets exceeds the budget of {budget:.3g}; use a heuristic"
        )
    a, b = sc.a.astype(int), sc.b.astype(int)
    best = [math.inf, None]
    count = [0]

    def rec(start, D, chosen, used_a, used_b):
        depth = len(chosen)
        free = [i for i in range(start, n) if a[i] not in used_a and b[i] not in used_b]
        if depth == k - 1:
            if not free:
                return
            idx = np.array(free)
            apls = pair.apl_if_added(D, a[idx], b[idx])
            count[0] += len(idx)
            j = int(np.argmin(apls))
            if apls[j] < best[0] - 1e-12:
                best[0] = float(apls[j])
                best[1] = chosen + [int(idx[j])]
            return
        for i in free:
            rec(i + 1, pair.dist([(a[i], b[i])], D), chosen + [i],
                used_a | {a[i]}, used_b | {b[i]})

    rec(0, pair.base, [], frozenset(), frozenset())
    if best[1] is None:
        raise InfeasibleError(f"no {k} disjoint candidates at slot {slot}")
    pairs = [(a[i], b[i]) for i in best[1]]
    return ExactResult(pair.assignment(pairs, slot), best[0], k * best[0], count[0])
