"""Analytic average-path-length model built from degree moments.

A layer with mean degree ``h1 = <q>`` and ``h2 = <q^2> - <q>`` second
neighbours grows its x-hop neighbourhood geometrically with branch ratio
``chi = h2 / h1``; the layer APL is the hop count at which that
neighbourhood covers the layer.  Cross-layer distances add the hops needed
to spread from ``k`` ILC endpoints over the second layer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .topology import DegreeDistribution


class RegimeError(ValueError):
    """The formula is outside its region of validity (no giant component, etc.)."""


@dataclass(frozen=True)
class LayerMoments:
    n: int
    h1: float
    h2: float

    def __post_init__(self):
        if not self.h1 > 0:
            raise RegimeError(f"mean degree must be > 0, got {self.h1}")

    @property
    def chi(self) -> float:
        return self.h2 / self.h1

    @classmethod
    def from_distribution(cls, dd: DegreeDistribution, n: int) -> "LayerMoments":
        return cls(n, dd.first_moment, dd.second_moment - dd.first_moment)

    @classmethod
    def regular(cls, n: int, q: int = 4) -> "LayerMoments":
        return cls(n, float(q), float(q * q - q))

    @classmethod
    def with_ilcs(cls, n: int, k: int, q: int = 4) -> "LayerMoments":
        """Moments of a q-regular layer after ``k`` satellites gain one ILC."""
        first = q + k / n
        second = (q * q * (n - k) + (q + 1) ** 2 * k) / n
        return cls(n, first, second - first)


def neighbors_at_hops(m: LayerMoments, x: int) -> float:
    if x < 1:
        raise ValueError(f"hop count must be >= 1, got {x}")
    return m.chi ** (x - 1) * m.h1


def monolayer_apl(m: LayerMoments) -> float:
    if m.chi <= 1:
        raise RegimeError(f"branch ratio {m.chi:.4g} <= 1: no giant component")
    if m.n < m.h1:
        raise RegimeError(f"layer size {m.n} smaller than mean degree {m.h1}")
    return math.log(m.n / m.h1) / math.log(m.chi) + 1.0


def crosslayer_apl(d1: float, n2: int, k: int, chi2: float) -> float:
    """Mean hop distance between a layer-1 and a layer-2 satellite given ``k`` ILCs."""
    if k < 1:
        raise RegimeError("k = 0: the layers are disconnected")
    if k > n2:
        raise ValueError(f"k={k} exceeds layer size {n2}")
    if chi2 <= 1:
        raise RegimeError(f"branch ratio {chi2:.4g} <= 1")
    return d1 + math.log(n2 / k) / math.log(chi2) + 1.0


def pair_count(n: int) -> float:
    return n * (n - 1) / 2.0


def total_apl_two_layer(d1: float, d2: float, d12: float, n1: int, n2: int) -> float:
    """Pair-weighted mean over intra-1, intra-2 and cross pairs."""
    e12 = pair_count(n1 + n2)
    if e12 == 0:
        raise ValueError("need at least two satellites")
    # 0 * inf is undefined; an empty layer contributes nothing.
    t2 = d2 * pair_count(n2) if n2 > 1 else 0.0
    tc = d12 * n1 * n2 if n1 and n2 else 0.0
    return (d1 * pair_count(n1) + t2 + tc) / e12


def total_apl_multi(layer_terms: Sequence[tuple[float, int]], pairwise_terms: Sequence[tuple[int, int, float]]) -> float:
    """Tandem-chain total APL.

    ``layer_terms`` is ``[(D_i, N_i), ...]``; ``pairwise_terms`` is
    ``[(i, i+1, D_{i,i+1}), ...]``.  Only adjacent layers may be coupled.
    Pairs between non-adjacent layers enter the denominator only.
    """
    sizes = [n for _, n in layer_terms]
    num = sum(d * pair_count(n) for d, n in layer_terms)
    for i, j, d in pairwise_terms:
        if abs(i - j) != 1:
            raise ValueError(f"layers {i} and {j} are not adjacent in the tandem chain")
        num += d * sizes[i] * sizes[j]
    return num / pair_count(sum(sizes))


@dataclass(frozen=True)
class TwoLayerModel:
    """Analytic APL pieces for a layer pair; ``big`` plays layer 1, ``small`` layer 2."""

    big: LayerMoments
    small: LayerMoments
    k: int

    @property
    def d_big(self) -> float:
        return monolayer_apl(self.big)

    @property
    def d_small(self) -> float:
        return monolayer_apl(self.small)

    @property
    def d_cross(self) -> float:
        return crosslayer_apl(self.d_big, self.small.n, self.k, self.small.chi)

    @property
    def total(self) -> float:
        return total_apl_two_layer(self.d_big, self.d_small, self.d_cross, self.big.n, self.small.n)


def two_layer_model(m_a: LayerMoments, m_b: LayerMoments, k: int) -> TwoLayerModel:
    big, small = (m_a, m_b) if m_a.n >= m_b.n else (m_b, m_a)
    return TwoLayerModel(big, small, k)


def analytic_total_apl(n_a: int, n_b: int, k: int, q: int = 4, empirical: bool = True) -> float:
    """Total APL of two q-regular layers joined by ``k`` ILCs.

    With ``empirical`` the moments include the extra degree of ILC endpoints.
    """
    if empirical:
        ma, mb = LayerMoments.with_ilcs(n_a, k, q), LayerMoments.with_ilcs(n_b, k, q)
    else:
        ma, mb = LayerMoments.regular(n_a, q), LayerMoments.regular(n_b, q)
    return two_layer_model(ma, mb, k).total


def apl_decrement_doubling(chi2: float, n1: int, n2: int) -> float:
    """Exact drop of the two-layer total when k doubles, moments held fixed."""
    return math.log(2) / math.log(chi2) * n1 * n2 / pair_count(n1 + n2)


@dataclass(frozen=True)
class KBound:
    bound: float
    k_max: int
    size_condition: bool
    below_half: bool


def optimal_k_bound(n1: int, n2: int, d1: float, chi2: float) -> KBound:
    """First-order bound on the cost-optimal ILC count.

    ``size_condition`` reports ``n1 > n2 > ln(n1) + 3``, under which the
    bound is expected to fall below ``n2 / 2``.
    """
    lc = math.log(chi2)
    denom = n2 - d1 * lc
    if denom <= 0:
        raise RegimeError(f"N2={n2} <= D1*ln(chi2)={d1 * lc:.4g}")
    bound = n2 * lc / denom
    cond = n1 > n2 > math.log(n1) + 3
    return KBound(bound, int(math.floor(bound)), cond, bound < n2 / 2)


def ilc_cost_factor(k, d1: float, n2: int):
    """ILC count normalised to the APL scale: ``D1 * k / N2``."""
    return d1 / n2 * np.asarray(k, dtype=float)


def analytic_cost_curve(d1: float, n2: int, chi2: float, ks: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    ks = np.arange(1, n2 + 1) if ks is None else np.asarray(ks)
    f1 = np.array([crosslayer_apl(d1, n2, int(k), chi2) for k in ks])
    return ks, f1 * ilc_cost_factor(ks, d1, n2)
