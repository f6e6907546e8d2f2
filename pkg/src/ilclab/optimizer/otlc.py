"""Genetic search for a low-APL ILC set at one snapshot.

Genomes are ordered lists of candidate indices.  With symmetric halving the
genome only covers ceil(k/2) candidates whose midpoint lies in the northern
hemisphere; decoding completes it by adding, for floor(k/2) of them, the free
southern candidate nearest the equatorial reflection of its midpoint.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..assignment import IlcAssignment
from .common import InfeasibleError, LayerPair
from .mtwm import InfeasibleMatching, mtwm


@dataclass(frozen=True)
class GaConfig:
    population: int = 20
    clones: int = 40
    crossover_prob: float = 0.8
    max_iterations: int = 50
    rng_seed: int = 0
    max_generations: int = 500
    repair_retries: int = 20
    symmetric: bool = True
    rematch: bool = True

    def __post_init__(self):
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError(f"crossover_prob must lie in [0, 1], got {self.crossover_prob}")
        for name in ("population", "clones", "max_generations", "repair_retries"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass(frozen=True)
class Member:
    genome: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    apl: float

    @property
    def objective(self) -> float:
        return len(self.pairs) * self.apl


@dataclass(frozen=True)
class TraceRow:
    generation: int
    best_objective: float
    mean_objective: float


@dataclass
class OtlcResult:
    population: list[Member]
    trace: list[TraceRow]
    counters: dict[str, int]
    generations: int
    symmetric: bool
    slot: int
    layers: tuple[int, int] = (0, 1)

    @property
    def best(self) -> Member:
        return self.population[0]

    def assignment(self) -> IlcAssignment:
        return IlcAssignment(self.best.pairs, self.layers, self.slot)


class SearchSpace:
    """Candidate pool for one slot, optionally halved by hemisphere."""

    def __init__(self, pair: LayerPair, k: int, slot: int, symmetric: bool):
        cs = pair.candidates
        sc = cs.at(slot)
        self.pair, self.k, self.slot = pair, k, slot
        self.a = sc.a.astype(int)
        self.b = sc.b.astype(int)
        self.mid = (cs.eph_a.ecef_km[self.a, slot] + cs.eph_b.ecef_km[self.b, slot]) / 2.0
        north = self.mid[:, 2] > 0
        self.symmetric = bool(symmetric and k >= 2 and self._max_disjoint(np.nonzero(north)[0]) >= self.genome_len(k, True))
        if self.symmetric:
            self.pool = np.nonzero(north)[0]
            self.south = np.nonzero(~north)[0]
        else:
            self.pool = np.arange(len(self.a))
            self.south = np.zeros(0, dtype=int)
        if self._max_disjoint(np.arange(len(self.a))) < k:
            raise InfeasibleError(f"fewer than {k} disjoint candidates at slot {slot}")
        self.glen = self.genome_len(k, self.symmetric)

    @staticmethod
    def genome_len(k: int, symmetric: bool) -> int:
        return (k + 1) // 2 if symmetric else k

    def _max_disjoint(self, idx) -> int:
        # greedy count is a lower bound on the maximum matching; enough as a gate
        used_a, used_b, n = set(), set(), 0
        for i in idx:
            if self.a[i] not in used_a and self.b[i] not in used_b:
                used_a.add(self.a[i]); used_b.add(self.b[i]); n += 1
        return n

    def valid(self, genome) -> bool:
        a, b = self.a[list(genome)], self.b[list(genome)]
        return len(set(a.tolist())) == len(a) and len(set(b.tolist())) == len(b)

    def free(self, genome, idx=None) -> np.ndarray:
        idx = self.pool if idx is None else idx
        g = list(genome)
        ok = ~np.isin(self.a[idx], self.a[g]) & ~np.isin(self.b[idx], self.b[g])
        return idx[ok]

    def random_genome(self, rng) -> tuple[int, ...] | None:
        genes: list[int] = []
        while len(genes) < self.glen:
            free = self.free(genes)
            if len(free) == 0:
                return None
            genes.append(int(rng.choice(free)))
        return tuple(genes)

    def decode(self, genome) -> list[tuple[int, int]] | None:
        genes = list(genome)
        out = list(genes)
        if self.symmetric:
            for i in genes[: self.k // 2]:
                target = self.mid[i] * np.array([1.0, 1.0, -1.0])
                free = self.free(out, self.south)
                if len(free) == 0:
                    free = self.free(out, np.arange(len(self.a)))
                if len(free) == 0:
                    return None
                d = np.linalg.norm(self.mid[free] - target, axis=1)
                out.append(int(free[int(np.argmin(d))]))
        return [(int(self.a[i]), int(self.b[i])) for i in out]


class HubOracle:
    """Flags ILCs whose endpoint has a neighbour-mean degree above its layer mean."""

    def __init__(self, pair: LayerPair):
        self.sides = []
        for topo in (pair.topo_a, pair.topo_b):
            adj = topo.adjacency()
            self.sides.append((adj, np.asarray(adj.sum(axis=1), dtype=float).ravel()))

    def __call__(self, pairs) -> np.ndarray:
        out = np.zeros(len(pairs), dtype=bool)
        for side, (adj, base) in enumerate(self.sides):
            ends = np.array([p[side] for p in pairs], dtype=int)
            deg = base.copy()
            deg[ends] += 1
            mean = deg.mean()
            for j, u in enumerate(ends):
                nb = adj.indices[adj.indptr[u]:adj.indptr[u + 1]]
                if len(nb) and deg[nb].mean() > mean:
                    out[j] = True
        return out


class Otlc:
    def __init__(self, pair: LayerPair, k: int, slot: int, cfg: GaConfig):
        if k < 1:
            raise InfeasibleError("OTLC needs k >= 1")
        self.pair, self.k, self.slot, self.cfg = pair, k, slot, cfg
        self.space = SearchSpace(pair, k, slot, cfg.symmetric)
        self.hub = HubOracle(pair)
        self._cache: dict[tuple[int, ...], Member | None] = {}
        self.counters = dict(crossover=0, mutation=0, replacement_tried=0, replacement_accepted=0,
                             repairs=0, resamples=0, rematch_accepted=0, evaluations=0)

    def _rng(self, generation: int, index: int):
        return np.random.default_rng(np.random.SeedSequence([self.cfg.rng_seed, generation, index]))

    def evaluate(self, genome, counters) -> Member | None:
        """Decode and score a genome; ``evaluations`` counts cache misses only."""
        key = tuple(genome)
        if key not in self._cache:
            self._cache[key] = self._evaluate(key, counters)
        return self._cache[key]

    def _evaluate(self, genome, counters) -> Member | None:
        pairs = self.space.decode(genome)
        if pairs is None:
            return None
        counters["evaluations"] += 1
        apl = self.pair.apl(pairs)
        if self.cfg.rematch and len(pairs) > 1:
            try:
                alt = mtwm(self.pair.candidates, IlcAssignment(tuple(pairs)), self.slot).pairs
            except InfeasibleMatching:
                alt = None
            if alt is not None and tuple(sorted(alt)) != tuple(sorted(pairs)):
                counters["evaluations"] += 1
                apl_alt = self.pair.apl(alt)
                if apl_alt < apl:
                    counters["rematch_accepted"] += 1
                    pairs, apl = list(alt), apl_alt
        return Member(tuple(genome), tuple(sorted(pairs)), apl)

    def _repair(self, genome, rng, counters) -> tuple[int, ...] | None:
        genes = list(genome)
        for _ in range(self.cfg.repair_retries):
            bad = None
            for j in range(len(genes)):
                if not self.space.valid(genes[: j + 1]):
                    bad = j
                    break
            if bad is None:
                return tuple(genes)
            counters["repairs"] += 1
            free = self.space.free(genes[:bad] + genes[bad + 1:])
            if len(free) == 0:
                return None
            genes[bad] = int(rng.choice(free))
        return tuple(genes) if self.space.valid(genes) else None

    def _mutate(self, genome, rng, counters):
        genes = list(genome)
        if len(genes) < 2:
            free = self.space.free([])
            return (int(rng.choice(free)),)
        # reshuffle the layer-b endpoints among the set, keeping only admitted pairs
        lookup = {(int(self.space.a[i]), int(self.space.b[i])): int(i) for i in self.space.pool}
        a = [int(self.space.a[g]) for g in genes]
        b = [int(self.space.b[g]) for g in genes]
        for _ in range(self.cfg.repair_retries):
            perm = rng.permutation(len(genes))
            cand = [lookup.get((a[j], b[perm[j]])) for j in range(len(genes))]
            if all(c is not None for c in cand) and tuple(cand) != tuple(genes):
                return tuple(cand)
        counters["repairs"] += 1
        j = int(rng.integers(len(genes)))
        free = self.space.free(genes[:j] + genes[j + 1:])
        if len(free):
            genes[j] = int(rng.choice(free))
        return tuple(genes)

    def _replace(self, child: Member, rng, counters) -> Member:
        """Swap one non-hub gene for a random free candidate; keep only if APL drops."""
        genes = list(child.genome)
        pairs = [(int(self.space.a[g]), int(self.space.b[g])) for g in genes]
        hub = self.hub(pairs)
        choices = np.nonzero(~hub)[0]
        if len(choices) == 0:
            choices = np.arange(len(genes))
        j = int(rng.choice(choices))
        free = self.space.free(genes[:j] + genes[j + 1:])
        free = free[free != genes[j]]
        if len(free) == 0:
            return child
        counters["replacement_tried"] += 1
        genes[j] = int(rng.choice(free))
        new = self.evaluate(genes, counters)
        if new is not None and new.apl < child.apl:
            counters["replacement_accepted"] += 1
            return new
        return child

    def _child(self, population: list[Member], generation: int, index: int):
        rng = self._rng(generation, index)
        counters = dict.fromkeys(self.counters, 0)
        parent = population[int(rng.integers(len(population)))]
        if rng.random() < self.cfg.crossover_prob:
            counters["crossover"] += 1
            other = population[int(rng.integers(len(population)))]
            cut = int(rng.integers(1, len(parent.genome))) if len(parent.genome) > 1 else 0
            genome = parent.genome[:cut] + other.genome[cut:]
        else:
            counters["mutation"] += 1
            genome = self._mutate(parent.genome, rng, counters)
        genome = self._repair(genome, rng, counters)
        child = self.evaluate(genome, counters) if genome is not None else None
        tries = 0
        while child is None:
            tries += 1
            if tries > self.cfg.repair_retries * 10:
                raise InfeasibleError("children keep failing to decode; k is too large for this slot")
            counters["resamples"] += 1
            genome = self.space.random_genome(rng)
            child = self.evaluate(genome, counters) if genome is not None else None
        return self._replace(child, rng, counters), counters

    def initial_population(self) -> list[Member]:
        out = []
        for i in range(self.cfg.population):
            rng = self._rng(0, i)
            m = None
            for _ in range(self.cfg.repair_retries * 10):
                g = self.space.random_genome(rng)
                m = self.evaluate(g, self.counters) if g is not None else None
                if m is not None:
                    break
            if m is None:
                raise InfeasibleError("could not draw a feasible initial genome")
            out.append(m)
        return out

    @staticmethod
    def _select(members: list[Member], size: int) -> list[Member]:
        seen, out = set(), []
        for m in sorted(members, key=lambda m: (m.objective, m.pairs)):
            if m.pairs in seen:
                continue
            seen.add(m.pairs)
            out.append(m)
            if len(out) == size:
                break
        return out

    def run(self) -> OtlcResult:
        cfg = self.cfg
        init = self.initial_population()
        trace = [TraceRow(0, min(m.objective for m in init), float(np.mean([m.objective for m in init])))]
        if cfg.max_iterations == 0:
            return OtlcResult(init, trace, dict(self.counters), 0, self.space.symmetric, self.slot, self.pair.layers)
        population = self._select(init, cfg.population)
        threads = int(os.environ.get("ILCLAB_THREADS", "1") or 1)
        stagnant, gen = 0, 0
        while stagnant < cfg.max_iterations and gen < cfg.max_generations:
            gen += 1
            if threads > 1:
                with ThreadPoolExecutor(threads) as ex:
                    results = list(ex.map(lambda i: self._child(population, gen, i), range(cfg.clones)))
            else:
                results = [self._child(population, gen, i) for i in range(cfg.clones)]
            for _, c in results:
                for key, v in c.items():
                    self.counters[key] += v
            before = population[0].objective
            population = self._select(population + [m for m, _ in results], cfg.population)
            if population[0].objective >= before - 1e-12:
                stagnant += 1
            objs = [m.objective for m in population]
            trace.append(TraceRow(gen, objs[0], float(np.mean(objs))))
        return OtlcResult(population, trace, dict(self.counters), gen, self.space.symmetric, self.slot, self.pair.layers)


def otlc(ga: GaConfig, pair: LayerPair, k: int, slot: int = 0) -> OtlcResult:
    return Otlc(pair, k, slot, ga).run()
