"""Scenario execution: build the layer stack, run strategies, collect metrics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import aplmodel
from .assignment import IlcAssignment
from .config import Scenario
from .evaluation import (Demand, MetricsReport, concurrent_flow_estimate, cost, edge_lengths,
                         handover_count, relative_gain, throughput_proxy)
from .linkmodel import calibrate_rate_params, link_rate
from .optimizer.common import LayerPair, build_layer_pair
from .optimizer.schedule import Schedule
from .optimizer.strategies import run_strategy
from .optimizer.tpilcd import analytic_apl
from .topology import SupraAdjacency, assemble_supra, bfs_apl
from .traffic import attach, generate_flows, hop_series, load_cities, sample_cities_path


@dataclass
class Stack:
    """Tandem layers with one LayerPair per adjacent interface."""

    scenario: Scenario
    pairs: list[LayerPair]

    @property
    def ephemerides(self):
        return [self.pairs[0].candidates.eph_a] + [p.candidates.eph_b for p in self.pairs]

    @property
    def topologies(self):
        return [self.pairs[0].topo_a] + [p.topo_b for p in self.pairs]

    def supra(self, assignments: Sequence[IlcAssignment]) -> SupraAdjacency:
        return assemble_supra(self.topologies, assignments)

    def positions(self, slot: int) -> np.ndarray:
        return np.concatenate([e.ecef_km[:, slot] for e in self.ephemerides])


def build_stack(sc: Scenario) -> Stack:
    grid = sc.time.grid()
    pairs = []
    for i in range(len(sc.layers) - 1):
        pairs.append(build_layer_pair(sc.layers[i], sc.layers[i + 1], grid, sc.eta1, sc.eta2,
                                      (i, i + 1), lookahead=sc.time.lookahead))
    return Stack(sc, pairs)


@dataclass
class StackRun:
    """Per-interface schedules of one strategy at one k."""

    algorithm: str
    k: int
    schedules: list[Schedule]
    max_per_plane: int | None = None

    def at(self, t: int) -> list[IlcAssignment]:
        return [s.assignments[t] for s in self.schedules]

    @property
    def n_slots(self) -> int:
        return self.schedules[0].n_slots


def run_stack(stack: Stack, algorithm: str, k: int, seed: int, max_per_plane: int | None = None) -> StackRun:
    """Run ``algorithm`` interface by interface down the tandem chain.

    A satellite of a middle layer that carries an ILC at any slot of the
    previous interface is excluded from the next one, so no satellite ever
    holds two ILCs.
    """
    sc = stack.scenario
    cfg = sc.optimizer.tpilcd_config(seed, max_per_plane)
    schedules: list[Schedule] = []
    saved = [p.candidates.admitted.copy() for p in stack.pairs]
    try:
        for pair in stack.pairs:
            if schedules:
                used = sorted({b for asg in schedules[-1].assignments for _, b in asg.pairs})
                if used:
                    pair.candidates.admitted[np.array(used)] = False
                    pair.candidates._slots.clear()
            schedules.append(run_strategy(algorithm, pair, k, seed, cfg, sc.optimizer.exact_budget))
    finally:
        for pair, adm in zip(stack.pairs, saved):
            pair.candidates.admitted[...] = adm
            pair.candidates._slots.clear()
    return StackRun(algorithm, k, schedules, max_per_plane)


def rate_params(stack: Stack):
    sc = stack.scenario
    ref = sc.rates.reference_km
    if ref is None:
        lengths = edge_lengths(stack.supra([]), stack.positions(0))
        ref = float(lengths.mean())
    return calibrate_rate_params(ref, sc.rates.target_bps, sc.rates.params()), ref


def link_rates(stack: Stack, supra: SupraAdjacency, slot: int, params) -> np.ndarray:
    return np.asarray(link_rate(params, edge_lengths(supra, stack.positions(slot))), dtype=float)


@dataclass
class Evaluated:
    run: StackRun
    report: MetricsReport
    extra: dict = field(default_factory=dict)


def _moments_analytic(stack: Stack, run: StackRun) -> float:
    if len(stack.pairs) == 1:
        return analytic_apl(stack.pairs[0], run.at(0)[0])
    return math.nan


def evaluate_run(stack: Stack, run: StackRun, params, flows=None, cities=None,
                 baseline_bps: float | None = None) -> Evaluated:
    sc = stack.scenario
    t0 = 0
    snap = run.at(t0)
    supra = stack.supra(snap)
    apl_bfs = bfs_apl(supra)
    rates = link_rates(stack, supra, t0, params)
    tp = throughput_proxy(supra, rates)
    n_small = min(p.n_b if p.n_b <= p.n_a else p.n_a for p in stack.pairs)
    big = stack.pairs[0].topo_a if stack.pairs[0].n_a >= stack.pairs[0].n_b else stack.pairs[0].topo_b
    d1 = bfs_apl(big).apl
    c = cost(run.k, apl_bfs.apl, n_small, d1) if run.k >= 1 else math.nan
    ho = sum(handover_count(s.assignments).total for s in run.schedules)
    series = {
        "apl": [float(np.mean([s.apl[t] for s in run.schedules])) for t in range(run.n_slots)],
        "handovers": [0] + [int(sum(handover_count(s.assignments[t - 1:t + 1]).total for s in run.schedules))
                            for t in range(1, run.n_slots)],
    }
    q = math.inf
    extra = {"throughput": tp, "d1": d1, "n2": n_small, "unreachable_pairs": apl_bfs.unreachable_pairs}
    if flows is not None:
        supras = [stack.supra(run.at(t)) for t in range(run.n_slots)]
        hs = hop_series(flows, cities, stack.ephemerides, supras, range(run.n_slots),
                        sc.traffic.access_layers, sc.traffic.min_elevation_deg)
        series["mean_hops"] = hs.mean_hops.tolist()
        series["served_flows"] = hs.served.tolist()
        series["total_throughput_bps"] = hs.total_throughput_bps.tolist()
        extra["hops"] = hs
        node = attach(cities, stack.ephemerides, supra.offsets, t0, sc.traffic.access_layers,
                      sc.traffic.min_elevation_deg)
        demands = [Demand(int(node[f.origin]), int(node[f.destination]), f.volume_bps) for f in flows
                   if node[f.origin] >= 0 and node[f.destination] >= 0]
        q = concurrent_flow_estimate(supra, rates, demands).q
    if baseline_bps:
        extra["throughput_gain"] = relative_gain(tp.network_bps, baseline_bps)
    report = MetricsReport(
        apl_exact=apl_bfs.apl,
        apl_analytic=_moments_analytic(stack, run),
        throughput_proxy_bps=tp.network_bps,
        flow_scale_q=q,
        handover_count=ho,
        cost=c,
        series=series,
    )
    return Evaluated(run, report, extra)


def traffic_inputs(sc: Scenario):
    if sc.traffic is None:
        return None, None
    path = sample_cities_path() if sc.traffic.cities == "builtin" else Path(sc.traffic.cities)
    cities = load_cities(path)
    seed = sc.seed if sc.traffic.seed is None else sc.traffic.seed
    return generate_flows(cities, sc.traffic.n_flows, seed, sc.traffic.volume_bps), cities


def log_fit(ks: Sequence[int], values: Sequence[float]) -> dict:
    """Least-squares ``a + b ln k`` with its coefficient of determination."""
    x = np.log(np.asarray(ks, dtype=float))
    y = np.asarray(values, dtype=float)
    if len(x) < 2:
        return {"a": math.nan, "b": math.nan, "r2": math.nan}
    b, a = np.polyfit(x, y, 1)
    resid = y - (a + b * x)
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss if ss > 0 else 1.0
    return {"a": float(a), "b": float(b), "r2": r2}


def analytic_bound(stack: Stack) -> dict:
    pair = stack.pairs[0]
    n1, n2 = max(pair.n_a, pair.n_b), min(pair.n_a, pair.n_b)
    try:
        d1 = aplmodel.monolayer_apl(aplmodel.LayerMoments.regular(n1))
        kb = aplmodel.optimal_k_bound(n1, n2, d1, aplmodel.LayerMoments.regular(n2).chi)
        return {"bound": kb.bound, "k_max": kb.k_max, "size_condition": kb.size_condition}
    except aplmodel.RegimeError as exc:
        return {"error": str(exc)}


def write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.6g}"
    return v
