"""Two-phase ILC deployment: genetic search at the first slot, then
time-weight matching while rolling the set over the horizon."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..aplmodel import LayerMoments, RegimeError, two_layer_model
from ..assignment import IlcAssignment
from ..evaluation import handover_count
from ..topology import bfs_apl, layer_degree_distribution
from .common import LayerPair
from .mtwm import InfeasibleMatching, mtwm
from .otlc import GaConfig, TraceRow, otlc
from .schedule import Schedule, apl_weighted_refill, occupancy_of, roll_forward


@dataclass(frozen=True)
class TpilcdConfig:
    ga: GaConfig = field(default_factory=GaConfig)
    polish: bool = True
    polish_rounds: int = 50
    apl_slack: float = 0.01
    hysteresis: bool = True
    max_per_plane: int | None = None
    start_slot: int = 0
    n_slots: int | None = None
    track_swaps: int = 1
    track_gain: float = 0.005

    def __post_init__(self):
        if self.apl_slack < 0:
            raise ValueError("apl_slack must be >= 0")


@dataclass
class TpilcdResult:
    schedule: Schedule
    apl_bfs: float
    apl_analytic: float
    handovers: int
    trace: list[TraceRow]
    counters: dict

    @property
    def snapshot(self) -> IlcAssignment:
        return self.schedule.snapshot

    @property
    def k(self) -> int:
        return self.schedule.k

    @property
    def objective(self) -> float:
        return self.snapshot.k * float(self.schedule.apl[0])


def polish(pair: LayerPair, pairs, slot: int, rounds: int = 50, max_per_plane: int | None = None):
    """Steepest descent over single-link swaps; returns (pairs, apl)."""
    sc = pair.candidates.at(slot)
    cur = [tuple(map(int, p)) for p in pairs]
    best = pair.apl(cur)
    for _ in range(rounds):
        move = None
        for j in range(len(cur)):
            rest = cur[:j] + cur[j + 1:]
            occ = occupancy_of(pair, slot, rest, max_per_plane)
            idx = np.nonzero(occ.free_mask())[0]
            if len(idx) == 0:
                continue
            apls = pair.apl_if_added(pair.dist(rest), sc.a[idx], sc.b[idx])
            m = int(np.argmin(apls))
            if apls[m] < best - 1e-12 and (move is None or apls[m] < move[0] - 1e-12):
                move = (float(apls[m]), j, (int(sc.a[idx[m]]), int(sc.b[idx[m]])))
        if move is None:
            break
        best, j, new = move
        cur[j] = new
    return cur, best


def track(pair: LayerPair, pairs, slot: int, swaps: int, min_gain: float,
          max_per_plane: int | None = None):
    """At most ``swaps`` single-link swaps, each cutting APL by at least ``min_gain`` (relative)."""
    cur = [tuple(map(int, p)) for p in pairs]
    if swaps <= 0 or not cur:
        return cur
    apl = pair.apl(cur)
    for _ in range(swaps):
        new, new_apl = polish(pair, cur, slot, 1, max_per_plane)
        if new_apl > apl * (1.0 - min_gain):
            break
        cur, apl = new, new_apl
    return cur


def analytic_apl(pair: LayerPair, asg: IlcAssignment) -> float:
    if asg.k == 0:
        return math.nan
    supra = pair.supra(asg)
    try:
        ma = LayerMoments.from_distribution(layer_degree_distribution(supra, 0), pair.n_a)
        mb = LayerMoments.from_distribution(layer_degree_distribution(supra, 1), pair.n_b)
        return two_layer_model(ma, mb, asg.k).total
    except RegimeError:
        return math.nan


def snapshot_phase(pair: LayerPair, k: int, cfg: TpilcdConfig):
    """OTLC, optional polish, then a time-weight rematch that may cost at most ``apl_slack``."""
    slot = cfg.start_slot
    res = otlc(cfg.ga, pair, k, slot)
    pairs = list(res.best.pairs)
    apl = res.best.apl
    counters = dict(res.counters, polish_gain=0.0, snapshot_rematch=0)
    if cfg.polish:
        pairs, new_apl = polish(pair, pairs, slot, cfg.polish_rounds, cfg.max_per_plane)
        counters["polish_gain"] = apl - new_apl
        apl = new_apl
    try:
        alt = list(mtwm(pair.candidates, pair.assignment(pairs), slot).pairs)
    except InfeasibleMatching:
        alt = pairs
    if sorted(alt) != sorted(pairs) and pair.apl(alt) <= apl * (1.0 + cfg.apl_slack):
        counters["snapshot_rematch"] = 1
        pairs = alt
    return pairs, res.trace, counters


def tpilcd(pair: LayerPair, k: int, cfg: TpilcdConfig | None = None) -> TpilcdResult:
    cfg = cfg or TpilcdConfig()
    if k == 0:
        sched = roll_forward(pair, "tpilcd", 0, [], lambda t, kept, need: [],
                             cfg.start_slot, cfg.n_slots, cfg.hysteresis)
        trace, counters = [], {}
    else:
        first, trace, counters = snapshot_phase(pair, k, cfg)
        refill = apl_weighted_refill(pair, cfg.apl_slack, cfg.max_per_plane)

        def refill_and_match(t, kept, need):
            new = refill(t, kept, need)
            if len(new) > 1:
                try:
                    new = list(mtwm(pair.candidates, pair.assignment(new), t).pairs)
                except InfeasibleMatching:
                    pass
            return new

        def adjust(t, pairs):
            return track(pair, pairs, t, cfg.track_swaps, cfg.track_gain, cfg.max_per_plane)

        sched = roll_forward(pair, "tpilcd", k, first, refill_and_match,
                             cfg.start_slot, cfg.n_slots, cfg.hysteresis, adjust)
    sched.trace, sched.counters = trace, counters
    snap = sched.snapshot
    apl_bfs = bfs_apl(pair.supra(snap)).apl
    return TpilcdResult(sched, apl_bfs, analytic_apl(pair, snap),
                        handover_count(sched.assignments).total, trace, counters)
