"""Maximum time-weight matching of a fixed set of ILC endpoints.

The matcher is the Kuhn-Munkres labelling method: row labels start at the
row maximum, column labels at zero, and a perfect matching is grown inside
the equality subgraph ``LA(i) + LB(j) == w(i, j)``, relaxing labels by the
minimum slack whenever the alternating tree gets stuck.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..assignment import IlcAssignment
from ..linkmodel import CandidateSet

SENTINEL = -1.0e6


class InfeasibleMatching(ValueError):
    """No perfect matching uses admissible pairs only."""


@dataclass(frozen=True)
class Matching:
    cols: np.ndarray  # cols[i] = column matched to row i
    total: float
    row_labels: np.ndarray
    col_labels: np.ndarray


def kuhn_munkres(weights) -> Matching:
    W = np.asarray(weights, dtype=float)
    n, m = W.shape
    if n != m:
        raise ValueError(f"need a square matrix, got {W.shape}")
    la = W.max(axis=1).copy() if n else np.zeros(0)
    lb = np.zeros(n)
    match_col = np.full(n, -1)  # column -> row
    for root in range(n):
        in_a = np.zeros(n, dtype=bool)
        in_b = np.zeros(n, dtype=bool)
        parent = np.full(n, -1)  # column -> row that reached it
        in_a[root] = True
        slack = la[root] + lb - W[root]
        slack_row = np.full(n, root)
        while True:
            cand = np.where(in_b, np.inf, slack)
            j = int(np.argmin(cand))
            delta = cand[j]
            if delta > 0:
                la[in_a] -= delta
                lb[in_b] += delta
                slack[~in_b] -= delta
            parent[j] = slack_row[j]
            in_b[j] = True
            i = match_col[j]
            if i < 0:
                while j >= 0:  # flip the alternating path back to the root
                    i = parent[j]
                    prev = np.nonzero(match_col == i)[0]
                    match_col[j] = i
                    j = int(prev[0]) if len(prev) else -1
                break
            in_a[i] = True
            new = la[i] + lb - W[i]
            better = ~in_b & (new < slack)
            slack[better] = new[better]
            slack_row[better] = i
    cols = np.empty(n, dtype=int)
    cols[match_col] = np.arange(n)
    return Matching(cols, float(sum(W[r, cols[r]] for r in range(n))), la, lb)


def max_weight_matching(weights) -> Matching:
    """Perfect matching of maximum total weight; sentinel entries are forbidden."""
    res = kuhn_munkres(weights)
    W = np.asarray(weights, dtype=float)
    if len(W) and np.any(W[np.arange(len(W)), res.cols] <= SENTINEL / 2):
        raise InfeasibleMatching("every perfect matching uses an inadmissible pair")
    return res


def weight_matrix(cs: CandidateSet, rows: Sequence[int], cols: Sequence[int], t: int) -> np.ndarray:
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(cols, dtype=int)
    adm = cs.admitted[np.ix_(rows, cols, [t])][..., 0]
    w = cs.weight[np.ix_(rows, cols, [t])][..., 0]
    return np.where(adm, w, SENTINEL)


def mtwm(cs: CandidateSet, assignment: IlcAssignment, t: int) -> IlcAssignment:
    """Re-pair the endpoints of ``assignment`` to maximise summed time weight at slot ``t``."""
    if assignment.k == 0:
        return assignment.with_slot(t)
    rows = assignment.endpoints(0)
    cols = assignment.endpoints(1)
    res = max_weight_matching(weight_matrix(cs, rows, cols, t))
    pairs = tuple((rows[i], cols[res.cols[i]]) for i in range(len(rows)))
    return IlcAssignment(pairs, assignment.layers, t)
