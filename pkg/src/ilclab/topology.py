"""Grid+ intra-layer topologies, the supra-adjacency matrix and BFS oracles."""
from __future__ import annotations

import csv
import warnings
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .assignment import ConstraintViolation, IlcAssignment
from .constellation import WalkerSpec

INTRA_PLANE, INTER_PLANE, ILC = "intra_plane", "inter_plane", "ilc"
SEAMS = ("phase", "plain")


class DegenerateLayerWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IntraTopology:
    """Undirected intra-layer links of one layer; edges are ``(u, v)`` with u < v."""

    n: int
    edges: np.ndarray  # (E, 2) int
    kinds: tuple[str, ...]
    degenerate: bool = False

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> sp.csr_matrix:
        return _symmetric_csr(self.n, self.edges)


def _symmetric_csr(n: int, edges: np.ndarray) -> sp.csr_matrix:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(len(rows), dtype=np.int8)
    return sp.csr_matrix((data, (rows, cols)), shape=(n, n))


def build_gridplus(spec: WalkerSpec, seam: str = "phase") -> IntraTopology:
    """Two intra-plane and two inter-plane links per satellite.

    At the plane wrap (P-1 -> 0) the ``"phase"`` seam connects ``(P-1, s)``
    to ``(0, (s+F) mod S)``, the satellite actually adjacent under Walker
    phasing; ``"plain"`` connects to ``(0, s)``.  Layers with P < 3 or
    S < 3 lose links to duplicates/self-loops and are flagged degenerate.
    """
    if seam not in SEAMS:
        raise ValueError(f"seam must be one of {SEAMS}")
    P, S, F = spec.planes, spec.sats_per_plane, spec.phase_factor
    seen: dict[tuple[int, int], str] = {}

    def add(u, v, kind):
        if u == v:
            return
        key = (min(u, v), max(u, v))
        seen.setdefault(key, kind)

    for p in range(P):
        for s in range(S):
            add(p * S + s, p * S + (s + 1) % S, INTRA_PLANE)
    if P > 1:
        for p in range(P):
            for s in range(S):
                if p < P - 1:
                    add(p * S + s, (p + 1) * S + s, INTER_PLANE)
                else:
                    s2 = (s + F) % S if seam == "phase" else s
                    add(p * S + s, s2, INTER_PLANE)
    keys = sorted(seen)
    degenerate = P < 3 or S < 3
    if degenerate:
        warnings.warn(f"{spec.label()} is too small for a 4-regular grid+", DegenerateLayerWarning)
    edges = np.array(keys, dtype=np.int64).reshape(-1, 2)
    return IntraTopology(P * S, edges, tuple(seen[k] for k in keys), degenerate)


@dataclass(frozen=True)
class SupraAdjacency:
    """Block adjacency over all layers; node ``offsets[i] + flat`` is satellite ``flat`` of layer i."""

    offsets: tuple[int, ...]
    matrix: sp.csr_matrix
    edges: np.ndarray
    kinds: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_layers(self) -> int:
        return len(self.offsets) - 1

    @property
    def sizes(self) -> list[int]:
        return [self.offsets[i + 1] - self.offsets[i] for i in range(self.n_layers)]

    def node(self, layer: int, flat: int) -> int:
        return self.offsets[layer] + int(flat)

    def block(self, i: int, j: int) -> np.ndarray:
        oi, oj = self.offsets, self.offsets
        return self.matrix[oi[i]:oi[i + 1], oj[j]:oj[j + 1]].toarray()

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def degrees(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel().astype(int)

    def layer_of(self, node: int) -> int:
        return int(np.searchsorted(self.offsets, node, side="right") - 1)

    def neighbors(self) -> list[list[int]]:
        m = self.matrix
        return [m.indices[m.indptr[u]:m.indptr[u + 1]].tolist() for u in range(self.n)]

    def is_symmetric(self) -> bool:
        return (self.matrix != self.matrix.T).nnz == 0

    def to_edge_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node_a", "node_b", "kind"])
            for (u, v), kind in zip(self.edges.tolist(), self.kinds):
                w.writerow([u, v, kind])


def assemble_supra(
    intra: Sequence[IntraTopology], assignments: Iterable[IlcAssignment] | IlcAssignment = ()
) -> SupraAdjacency:
    """Place layer adjacencies on the diagonal and ILC matchings off it."""
    if isinstance(assignments, IlcAssignment):
        assignments = [assignments]
    offsets = np.concatenate([[0], np.cumsum([t.n for t in intra])]).astype(int)
    edges = [t.edges + offsets[i] for i, t in enumerate(intra)]
    kinds = [k for t in intra for k in t.kinds]
    used = Counter()
    for asg in assignments:
        la, lb = asg.layers
        if la == lb or not (0 <= la < len(intra) and 0 <= lb < len(intra)):
            raise ConstraintViolation(f"invalid layer pair {asg.layers}")
        for a, b in asg.pairs:
            if not (0 <= a < intra[la].n and 0 <= b < intra[lb].n):
                raise ConstraintViolation(f"ILC endpoint ({a}, {b}) out of range")
            used[(la, a)] += 1
            used[(lb, b)] += 1
        if asg.pairs:
            pa = np.array(asg.pairs, dtype=np.int64)
            u = pa[:, 0] + offsets[la]
            v = pa[:, 1] + offsets[lb]
            edges.append(np.stack([np.minimum(u, v), np.maximum(u, v)], axis=1))
            kinds.extend([ILC] * len(pa))
    dup = sorted(key for key, c in used.items() if c > 1)
    if dup:
        raise ConstraintViolation(f"satellites {dup} carry more than one ILC")
    e = np.concatenate(edges) if edges else np.zeros((0, 2), dtype=np.int64)
    n = int(offsets[-1])
    return SupraAdjacency(tuple(int(o) for o in offsets), _symmetric_csr(n, e), e, tuple(kinds))


@dataclass(frozen=True)
class BfsApl:
    apl: float
    unreachable_pairs: int
    reachable_pairs: int
    total_hops: int


def _adjacency_lists(graph) -> list[list[int]]:
    if isinstance(graph, SupraAdjacency):
        return graph.neighbors()
    if isinstance(graph, IntraTopology):
        graph = graph.adjacency()
    m = sp.csr_matrix(graph)
    return [m.indices[m.indptr[u]:m.indptr[u + 1]].tolist() for u in range(m.shape[0])]


def bfs_distances(adj: list[list[int]], source: int) -> list[int]:
    dist = [-1] * len(adj)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] < 0:
                dist[v] = du
                queue.append(v)
    return dist


def bfs_apl(graph) -> BfsApl:
    """Mean hop count over reachable unordered pairs, by BFS from every node."""
    adj = _adjacency_lists(graph)
    n = len(adj)
    if n == 0:
        raise ValueError("empty graph")
    total = reach = 0
    for s in range(n):
        dist = bfs_distances(adj, s)
        for v in range(s + 1, n):
            if dist[v] > 0:
                total += dist[v]
                reach += 1
    pairs = n * (n - 1) // 2
    apl = total / reach if reach else float("nan")
    return BfsApl(apl, pairs - reach, reach, total)


@dataclass(frozen=True)
class DegreeDistribution:
    gamma: dict[int, float]
    first_moment: float
    second_moment: float

    @property
    def branch_ratio(self) -> float:
        return (self.second_moment - self.first_moment) / self.first_moment


def degree_distribution(graph, nodes: Sequence[int] | None = None) -> DegreeDistribution:
    """Empirical degree distribution over ``nodes`` (default: all nodes)."""
    if isinstance(graph, SupraAdjacency):
        deg = graph.degrees()
    else:
        if isinstance(graph, IntraTopology):
            graph = graph.adjacency()
        deg = np.asarray(sp.csr_matrix(graph).sum(axis=1)).ravel().astype(int)
    if nodes is not None:
        deg = deg[np.asarray(nodes, dtype=int)]
    if len(deg) == 0:
        raise ValueError("empty graph")
    counts = Counter(deg.tolist())
    n = len(deg)
    gamma = {q: c / n for q, c in sorted(counts.items())}
    return DegreeDistribution(gamma, float(np.mean(deg)), float(np.mean(deg.astype(float) ** 2)))


def layer_degree_distribution(supra: SupraAdjacency, layer: int) -> DegreeDistribution:
    o = supra.offsets
    return degree_distribution(supra, range(o[layer], o[layer + 1]))
