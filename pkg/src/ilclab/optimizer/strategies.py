"""Uniform entry point for every ILC strategy over a horizon."""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .baselines import greedy_shortest, max_time_weight, random_uniform
from .common import InfeasibleError, LayerPair
from .exact import exact_ilp
from .schedule import Schedule, apl_weighted_refill, occupancy_of, roll_forward
from .tpilcd import TpilcdConfig, tpilcd

STRATEGIES = ("tpilcd", "greedy", "random", "max-time-weight", "none", "exact")


def _max_weight_refill(pair: LayerPair, max_per_plane):
    def refill(t, kept, need):
        fixed = pair.assignment(kept, t)
        for n in range(need, 0, -1):
            try:
                asg = max_time_weight(pair.candidates, len(kept) + n, t, fixed, max_per_plane)
            except InfeasibleError:
                continue
            return [p for p in asg.pairs if p not in set(kept)]
        return []

    return refill


def _random_refill(pair: LayerPair, seed: int, max_per_plane):
    def refill(t, kept, need):
        rng = np.random.default_rng(np.random.SeedSequence([seed, t]))
        sc = pair.candidates.at(t)
        occ = occupancy_of(pair, t, kept, max_per_plane)
        new = []
        for _ in range(need):
            free = np.nonzero(occ.free_mask())[0]
            if len(free) == 0:
                break
            i = int(rng.choice(free))
            occ.add(i)
            new.append((int(sc.a[i]), int(sc.b[i])))
        return new

    return refill


def run_strategy(name: str, pair: LayerPair, k: int, seed: int = 0,
                 cfg: TpilcdConfig | None = None, exact_budget: float = 1e7) -> Schedule:
    """Snapshot at ``cfg.start_slot`` and roll it over ``cfg.n_slots`` slots.

    ``greedy`` is memoryless: it re-solves every slot from scratch.  The other
    strategies keep still-admitted links and refill only the broken ones.
    """
    if name not in STRATEGIES:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(STRATEGIES)}")
    cfg = cfg or TpilcdConfig()
    if name == "tpilcd":
        return tpilcd(pair, k, replace(cfg, ga=replace(cfg.ga, rng_seed=seed))).schedule
    t0, cap = cfg.start_slot, cfg.max_per_plane
    cs = pair.candidates
    hyst = cfg.hysteresis
    if name == "none":
        return roll_forward(pair, name, 0, [], lambda t, kept, need: [], t0, cfg.n_slots)
    if name == "greedy":
        first = greedy_shortest(cs, k, t0, cap, partial=True).pairs
        refill = lambda t, kept, need: list(greedy_shortest(cs, k, t, cap, partial=True).pairs)
        return roll_forward(pair, name, k, first, refill, t0, cfg.n_slots, hysteresis=False)
    if name == "random":
        first = random_uniform(cs, k, seed, t0, cap, partial=True).pairs
        return roll_forward(pair, name, k, first, _random_refill(pair, seed, cap), t0, cfg.n_slots, hyst)
    if name == "max-time-weight":
        first = _max_weight_refill(pair, cap)(t0, [], k)
        return roll_forward(pair, name, k, first, _max_weight_refill(pair, cap), t0, cfg.n_slots, hyst)
    first = exact_ilp(pair, k, t0, exact_budget).assignment.pairs
    refill = apl_weighted_refill(pair, cfg.apl_slack, cap)
    return roll_forward(pair, name, k, first, refill, t0, cfg.n_slots, hyst)
