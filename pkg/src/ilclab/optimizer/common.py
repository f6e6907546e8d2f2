"""Shared machinery for ILC strategies on one layer pair."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..assignment import IlcAssignment
from ..constellation import TimeGrid, WalkerSpec, build_constellation, propagate
from ..linkmodel import CandidateSet, SlotCandidates, build_candidate_set
from ..topology import IntraTopology, SupraAdjacency, assemble_supra, build_gridplus

# int16 keeps the all-pairs updates memory-light; INF + 1 + INF still fits
INF = np.int16(1 << 13)


class InfeasibleError(ValueError):
    """Not enough disjoint admissible candidates for the requested k."""


def insert_edge(D: np.ndarray, u: int, v: int) -> np.ndarray:
    """All-pairs hop matrix after adding the unit edge u-v."""
    via_uv = D[:, u][:, None] + 1 + D[v, :][None, :]
    via_vu = D[:, v][:, None] + 1 + D[u, :][None, :]
    return np.minimum(D, np.minimum(via_uv, via_vu))


@dataclass
class LayerPair:
    """Two layers, their grid+ links and their candidate ILC set.

    Slots past ``horizon`` are look-ahead only: they inform the time
    weights but no strategy schedules links there.  Hop distances are kept
    as a dense int16 matrix over ``n_a + n_b`` nodes (layer a first).  ILCs
    are folded in one edge at a time, which is exact for unit-weight
    undirected graphs.
    """

    candidates: CandidateSet
    topo_a: IntraTopology
    topo_b: IntraTopology
    horizon: int | None = None
    base: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        na, nb = self.topo_a.n, self.topo_b.n
        if (na, nb) != (self.candidates.eph_a.n_sats, self.candidates.eph_b.n_sats):
            raise ValueError("topologies do not match the candidate set")
        if self.horizon is None:
            self.horizon = self.candidates.n_slots
        if not 1 <= self.horizon <= self.candidates.n_slots:
            raise ValueError(f"horizon {self.horizon} outside the {self.candidates.n_slots} propagated slots")
        D = np.full((na + nb, na + nb), INF, dtype=np.int16)
        for off, topo in ((0, self.topo_a), (na, self.topo_b)):
            d = shortest_path(topo.adjacency(), method="D", unweighted=True)
            d[~np.isfinite(d)] = INF
            D[off:off + topo.n, off:off + topo.n] = d.astype(np.int16)
        self.base = D

    @property
    def n_a(self) -> int:
        return self.topo_a.n

    @property
    def n_b(self) -> int:
        return self.topo_b.n

    @property
    def layers(self) -> tuple[int, int]:
        return self.candidates.layers

    @property
    def sats_per_plane(self) -> tuple[int, int]:
        return (self.candidates.eph_a.layer.spec.sats_per_plane,
                self.candidates.eph_b.layer.spec.sats_per_plane)

    @property
    def n_pairs(self) -> int:
        n = self.n_a + self.n_b
        return n * (n - 1) // 2

    def dist(self, pairs: Sequence[tuple[int, int]], start: np.ndarray | None = None) -> np.ndarray:
        D = self.base if start is None else start
        for a, b in pairs:
            D = insert_edge(D, int(a), self.n_a + int(b))
        return D

    def apl_of(self, D: np.ndarray) -> float:
        reach = D < INF
        if reach.all():
            return float(D.sum(dtype=np.int64)) / 2.0 / self.n_pairs
        n = len(D)
        cnt = (reach.sum() - n) / 2.0
        return float(np.where(reach, D, 0).sum(dtype=np.int64)) / 2.0 / cnt

    def apl(self, pairs: Sequence[tuple[int, int]]) -> float:
        return self.apl_of(self.dist(pairs))

    def objective(self, pairs: Sequence[tuple[int, int]]) -> float:
        return len(pairs) * self.apl(pairs)

    def apl_if_added(self, D: np.ndarray, a: np.ndarray, b: np.ndarray, chunk: int = 8) -> np.ndarray:
        """APL after adding each single candidate ``(a[i], b[i])`` to ``D``."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64) + self.n_a
        out = np.empty(len(a))
        for s in range(0, len(a), chunk):
            ua, vb = a[s:s + chunk], b[s:s + chunk]
            cu = D[:, ua].T[:, :, None]  # (c, n, 1)
            cv = D[:, vb].T[:, :, None]
            ru = D[ua][:, None, :]  # (c, 1, n)
            rv = D[vb][:, None, :]
            new = np.minimum(D[None], np.minimum(cu + 1 + rv, cv + 1 + ru))
            out[s:s + chunk] = new.sum(axis=(1, 2), dtype=np.int64) / 2.0 / self.n_pairs
        return out

    def supra(self, pairs: Sequence[tuple[int, int]] | IlcAssignment) -> SupraAdjacency:
        asg = pairs if isinstance(pairs, IlcAssignment) else IlcAssignment(tuple(pairs), self.layers)
        # the supra graph is indexed by position within this pair, not by global layer id
        local = IlcAssignment(asg.pairs, (0, 1), asg.slot)
        return assemble_supra([self.topo_a, self.topo_b], local)

    def assignment(self, pairs, slot: int | None = None) -> IlcAssignment:
        return IlcAssignment(tuple((int(a), int(b)) for a, b in pairs), self.layers, slot)


class Occupancy:
    """Tracks which satellites and planes are already used at one slot."""

    def __init__(self, sc: SlotCandidates, sats_per_plane: tuple[int, int],
                 max_per_plane: int | None = None):
        self.sc = sc
        self.plane_a = sc.a // sats_per_plane[0]
        self.plane_b = sc.b // sats_per_plane[1]
        self.cap = max_per_plane
        self.used_a: set[int] = set()
        self.used_b: set[int] = set()
        self.count_a: dict[int, int] = {}
        self.count_b: dict[int, int] = {}

    def can_add_pair(self, a: int, b: int, pa: int, pb: int) -> bool:
        if a in self.used_a or b in self.used_b:
            return False
        if self.cap is not None and (
            self.count_a.get(pa, 0) >= self.cap or self.count_b.get(pb, 0) >= self.cap
        ):
            return False
        return True

    def can_add(self, i: int) -> bool:
        return self.can_add_pair(int(self.sc.a[i]), int(self.sc.b[i]),
                                 int(self.plane_a[i]), int(self.plane_b[i]))

    def add_pair(self, a: int, b: int, pa: int, pb: int) -> None:
        self.used_a.add(a)
        self.used_b.add(b)
        self.count_a[pa] = self.count_a.get(pa, 0) + 1
        self.count_b[pb] = self.count_b.get(pb, 0) + 1

    def add(self, i: int) -> None:
        self.add_pair(int(self.sc.a[i]), int(self.sc.b[i]), int(self.plane_a[i]), int(self.plane_b[i]))

    def free_mask(self) -> np.ndarray:
        m = ~np.isin(self.sc.a, list(self.used_a)) & ~np.isin(self.sc.b, list(self.used_b))
        if self.cap is not None:
            full_a = [p for p, c in self.count_a.items() if c >= self.cap]
            full_b = [p for p, c in self.count_b.items() if c >= self.cap]
            m &= ~np.isin(self.plane_a, full_a) & ~np.isin(self.plane_b, full_b)
        return m


def candidate_index(sc: SlotCandidates) -> dict[tuple[int, int], int]:
    return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(sc.a, sc.b))}


def build_layer_pair(spec_a: WalkerSpec, spec_b: WalkerSpec, grid: TimeGrid | None = None,
                     eta1: float = 0.1, eta2: float = 0.9, layer_indices=(0, 1),
                     seam: str = "phase", lookahead: int = 0) -> LayerPair:
    """Propagate two layers and assemble everything the strategies need.

    ``lookahead`` extra slots are propagated past the grid so that time
    weights near the end of the horizon are not truncated.
    """
    grid = grid or TimeGrid()
    if lookahead < 0:
        raise ValueError("lookahead must be >= 0")
    ext = replace(grid, n_slots=grid.n_slots + lookahead)
    eph_a = propagate(build_constellation(spec_a, layer_indices[0]), ext)
    eph_b = propagate(build_constellation(spec_b, layer_indices[1]), ext)
    cs = build_candidate_set(eph_a, eph_b, eta1, eta2)
    return LayerPair(cs, build_gridplus(spec_a, seam), build_gridplus(spec_b, seam), grid.n_slots)
