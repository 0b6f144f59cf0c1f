"""Per-claim heuristic risk scores.

Risk is the flip of self-consistency confidence: a claim supported by all
``k`` alternate generations has risk 0, one supported by none has risk 1.
Graph-aware descendant weighting blends a node's own risk with the median
risk of its descendants. All functions are pure.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentTallyError
from .graph import ClaimGraph, descendants

DEFAULT_NOISE_SCALE = 1e-9
DEFAULT_BETA = 0.5  # descendant-weighting blend that ships as the default


@dataclass(frozen=True)
class SupportTally:
    """Per-claim counts of supports / contradicts / unrelated verdicts."""

    supports: tuple[int, ...]
    contradicts: tuple[int, ...]
    unrelated: tuple[int, ...]

    def __post_init__(self):
        lens = {len(self.supports), len(self.contradicts), len(self.unrelated)}
        if len(lens) != 1:
            raise InconsistentTallyError("tally fields have mismatched lengths")

    @property
    def n_claims(self) -> int:
        return len(self.supports)

    def check_total(self, k: int) -> None:
        for i in range(self.n_claims):
            total = self.supports[i] + self.contradicts[i] + self.unrelated[i]
            if total != k:
                raise InconsistentTallyError(
                    f"claim {i}: counts sum to {total}, expected k={k}"
                )


def risk_from_tally(tally: SupportTally, k: int) -> list[float]:
    """Flip support frequency into risk: ``1 - supports/k``.

    Contradicted and unrelated verdicts both count as non-support; only an
    explicit support lowers risk.
    """
    if k < 1:
        raise InconsistentTallyError("k must be >= 1")
    tally.check_total(k)
    return [1.0 - s / k for s in tally.supports]


def break_ties(
    values: list[float], seed: int, eps: float = DEFAULT_NOISE_SCALE
) -> list[float]:
    """Add deterministic uniform(0, eps) noise so all scores are distinct.

    The noise stream is keyed by ``seed``; identical inputs and seed give
    identical output. Values already separated by more than ``eps`` keep
    their relative order. In the (measure-zero) event of a residual tie the
    draw is retried with a fresh sub-seed.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    n = len(values)
    for attempt in range(64):
        rng = np.random.default_rng(np.random.SeedSequence((seed, attempt)))
        noisy = [v + u for v, u in zip(values, rng.uniform(0.0, eps, n))]
        if len(set(noisy)) == n:
            return noisy
    raise RuntimeError("could not break ties; eps too small for float spacing")


def descendant_weighted(
    g: ClaimGraph, values: list[float], beta: float
) -> list[float]:
    """Blend each claim's risk with the median risk of its descendants.

    ``out[v] = (1 - beta) * values[v] + beta * median(descendant risks)``.
    Claims with no descendants keep their own score, which makes ``beta=0``
    and ``beta>0`` agree at the leaves; ``beta=0`` is the exact identity.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    if len(values) != g.n_claims:
        raise ValueError("score vector length must match claim count")
    out = []
    for v in range(g.n_claims):
        desc = descendants(g, v)
        if not desc or beta == 0.0:
            out.append(values[v])
        else:
            med = statistics.median(values[d] for d in desc)
            out.append((1.0 - beta) * values[v] + beta * med)
    return out
