"""Network metrics: throughput proxies, fixed-path flow scaling, handovers, cost."""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .assignment import IlcAssignment
from .topology import ILC, SupraAdjacency


@dataclass(frozen=True)
class ThroughputProxy:
    """Rate sums scaled by path length.

    ``crosslayer_bps``: ILC rate sum over the mean hop count of reachable pairs.
    ``literal_bps``: every link rate over that same mean hop count.
    ``network_bps``: every link rate times the mean inverse hop count over all
    pairs, unreachable pairs contributing zero.  Only this one compares fairly
    against disconnected layers.
    """

    crosslayer_bps: float
    isl_sum_bps: float
    ilc_sum_bps: float
    apl: float
    efficiency: float
    literal_bps: float
    network_bps: float


def hop_matrix(supra: SupraAdjacency) -> np.ndarray:
    return shortest_path(supra.matrix, method="D", unweighted=True, directed=False)


def path_statistics(supra: SupraAdjacency) -> tuple[float, float]:
    """(mean hops over reachable pairs, mean inverse hops over all pairs)."""
    d = hop_matrix(supra)
    iu = np.triu_indices(supra.n, 1)
    h = d[iu]
    finite = np.isfinite(h)
    apl = float(h[finite].mean()) if finite.any() else math.nan
    inv = np.where(finite, 1.0 / np.where(finite, h, 1.0), 0.0)
    return apl, float(inv.mean())


def edge_lengths(supra: SupraAdjacency, positions_km: np.ndarray) -> np.ndarray:
    """Euclidean length of every supra edge, given per-node positions ``(n, 3)``."""
    p = np.asarray(positions_km, dtype=float)
    return np.linalg.norm(p[supra.edges[:, 0]] - p[supra.edges[:, 1]], axis=1)


def throughput_proxy(supra: SupraAdjacency, rates_bps: Sequence[float]) -> ThroughputProxy:
    """``rates_bps`` is aligned with ``supra.edges``."""
    r = np.asarray(rates_bps, dtype=float)
    if r.shape != (len(supra.edges),):
        raise ValueError(f"need one rate per edge ({len(supra.edges)}), got {r.shape}")
    is_ilc = np.array([k == ILC for k in supra.kinds], dtype=bool)
    apl, eff = path_statistics(supra)
    ilc = float(r[is_ilc].sum())
    total = float(r.sum())
    cross = ilc / apl if ilc > 0 else 0.0
    return ThroughputProxy(cross, total, ilc, apl, eff, total / apl, total * eff)


def relative_gain(value: float, baseline: float) -> float:
    return value / baseline - 1.0


@dataclass(frozen=True)
class Demand:
    source: int
    target: int
    volume: float


@dataclass
class FlowEstimate:
    """Fixed shortest-path routing; ``q`` is a lower bound on the optimal scale."""

    q: float
    loads: np.ndarray  # per supra edge
    hops: list[int | None]
    unroutable: list[int]
    lower_bound: bool = True


def _edge_index(supra: SupraAdjacency) -> dict[tuple[int, int], int]:
    return {(int(u), int(v)): i for i, (u, v) in enumerate(supra.edges)}


def route_paths(supra: SupraAdjacency, demands: Sequence[Demand]) -> list[list[int] | None]:
    """Edge-index path per demand on a BFS shortest path (None if unreachable)."""
    idx = _edge_index(supra)
    sources = sorted({d.source for d in demands})
    paths: list[list[int] | None] = []
    if not sources:
        return paths
    dist, pred = shortest_path(supra.matrix, method="D", unweighted=True, directed=False,
                               indices=sources, return_predecessors=True)
    row = {s: i for i, s in enumerate(sources)}
    for d in demands:
        r = row[d.source]
        if not np.isfinite(dist[r, d.target]):
            paths.append(None)
            continue
        edges, v = [], d.target
        while v != d.source:
            u = int(pred[r, v])
            edges.append(idx[(min(u, v), max(u, v))])
            v = u
        paths.append(edges[::-1])
    return paths


def concurrent_flow_estimate(supra: SupraAdjacency, capacities_bps: Sequence[float],
                             demands: Sequence[Demand]) -> FlowEstimate:
    """Largest uniform scale of all routable demands on their shortest paths.

    Loads are per undirected link.  Unroutable demands are listed and left out.
    """
    cap = np.asarray(capacities_bps, dtype=float)
    if cap.shape != (len(supra.edges),):
        raise ValueError("need one capacity per edge")
    loads = np.zeros(len(cap))
    hops: list[int | None] = []
    unroutable = []
    for i, (d, path) in enumerate(zip(demands, route_paths(supra, demands))):
        if path is None:
            unroutable.append(i)
            hops.append(None)
            continue
        hops.append(len(path))
        np.add.at(loads, path, d.volume)
    used = loads > 0
    q = float(np.min(cap[used] / loads[used])) if used.any() else math.inf
    return FlowEstimate(q, loads, hops, unroutable)


@dataclass(frozen=True)
class HandoverReport:
    total: int
    per_step: np.ndarray  # handovers between slot t and t+1
    per_plane: dict[tuple[int, int], int]  # (layer, plane) -> count
    per_satellite: dict[tuple[int, int], int]  # (layer, flat) -> count


def _partners(step) -> dict:
    if isinstance(step, IlcAssignment):
        step = [step]
    out: dict = {}
    for asg in step:
        out.update(asg.partner_map())
    return out


def handover_count(schedule: Sequence[IlcAssignment | Iterable[IlcAssignment]],
                   sats_per_plane: dict[int, int] | None = None) -> HandoverReport:
    """A satellite hands over when its partner differs between consecutive slots,
    including gaining or losing one.  Swapping the partners of two links
    therefore counts four.
    """
    maps = [_partners(s) for s in schedule]
    per_sat: Counter = Counter()
    steps = []
    for prev, nxt in zip(maps, maps[1:]):
        changed = [sat for sat in set(prev) | set(nxt) if prev.get(sat) != nxt.get(sat)]
        per_sat.update(changed)
        steps.append(len(changed))
    per_plane: Counter = Counter()
    if sats_per_plane:
        for (layer, flat), c in per_sat.items():
            per_plane[(layer, flat // sats_per_plane[layer])] += c
    return HandoverReport(int(sum(steps)), np.array(steps, dtype=int), dict(per_plane), dict(per_sat))


def cost(k, apl, n2: int, d1: float):
    """``apl * (d1 / n2) * k``: APL times the ILC count rescaled to hop units."""
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 1):
        raise ValueError("cost is defined for k >= 1")
    out = np.asarray(apl, dtype=float) * (d1 / n2) * k_arr
    return float(out) if out.ndim == 0 else out


@dataclass
class MetricsReport:
    apl_exact: float
    apl_analytic: float
    throughput_proxy_bps: float
    flow_scale_q: float
    handover_count: int
    cost: float
    series: dict[str, list[float]] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("apl_exact", "throughput_proxy_bps", "flow_scale_q", "handover_count", "cost"):
            v = getattr(self, name)
            if v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def to_csv(self, path: str | Path) -> None:
        names = sorted(self.series)
        n = max((len(self.series[k]) for k in names), default=0)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot"] + names)
            for t in range(n):
                w.writerow([t] + [_fmt(self.series[k][t]) if t < len(self.series[k]) else "" for k in names])


def _fmt(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj
