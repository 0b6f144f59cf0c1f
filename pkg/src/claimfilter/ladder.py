"""Threshold-indexed families of ancestor-connected candidate subgraphs.

For every threshold in {-inf} union {score(v)} the ladder keeps the claims
at or below the threshold, then walks the survivors in topological order
dropping any claim whose ancestor is missing. The resulting vertex sets are
nested, all ancestor-connected, and there are at most n_claims + 1 of them.
Duplicate vertex sets at successive thresholds are kept as distinct rungs
so non-conformity scoring sees exactly one rung per threshold.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

from .errors import TiedScoresError
from .graph import ClaimGraph, topological_order


@dataclass(frozen=True)
class LadderEntry:
    tau: float
    vertices: frozenset[int]


@dataclass(frozen=True)
class SubgraphLadder:
    """Ordered rungs ``(tau, vertex set)``, ascending in tau, first ``(-inf, {})``."""

    graph: ClaimGraph
    entries: tuple[LadderEntry, ...]

    @property
    def taus(self) -> tuple[float, ...]:
        return tuple(e.tau for e in self.entries)

    def to_debug_json(self) -> list[dict]:
        return [
            {"tau": e.tau, "vertices": sorted(e.vertices)} for e in self.entries
        ]


def generate(g: ClaimGraph, scores: list[float]) -> SubgraphLadder:
    """Build the candidate-subgraph ladder for one output.

    Scores must be pairwise distinct (apply tie-breaking noise first).
    """
    if len(scores) != g.n_claims:
        raise ValueError("score vector length must match claim count")
    if len(set(scores)) != g.n_claims:
        raise TiedScoresError("risk scores contain ties; run break_ties first")
    order = topological_order(g, range(g.n_claims))
    entries = [LadderEntry(-math.inf, frozenset())]
    for tau in sorted(scores):
        selected = {v for v in range(g.n_claims) if scores[v] <= tau}
        for v in order:
            if v in selected and not g.parents[v] <= selected:
                selected.remove(v)
        entries.append(LadderEntry(tau, frozenset(selected)))
    return SubgraphLadder(g, tuple(entries))


def select(ladder: SubgraphLadder, cap: float) -> LadderEntry:
    """Rung with maximal tau strictly below ``cap``.

    The base rung ``(-inf, {})`` is admissible for any cap > -inf; for
    ``cap = -inf`` the base rung itself is returned.
    """
    taus = ladder.taus
    i = bisect_left(taus, cap)
    return ladder.entries[max(i - 1, 0)]
