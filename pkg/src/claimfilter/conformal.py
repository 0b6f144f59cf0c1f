"""Non-conformity scores, split-conformal calibration, and filtering.

Extended reals are first class here: a non-conformity score of +inf means
every ladder rung is coherent (the output has no detectable hallucination),
and the flip ``1 - (+inf) = -inf`` carries through calibration unchanged.
"""

from __future__ import annotations

import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ArtifactMismatchError,
    EmptyCalibrationError,
    IncoherentEmptySetError,
)
from .graph import ClaimGraph, topological_order
from .ladder import SubgraphLadder, select

# Set-level coherence oracle: does this claim set make a coherent argument?
SetOracle = Callable[[frozenset[int]], bool]


def nonconformity(ladder: SubgraphLadder, coherent: SetOracle) -> float:
    """Risk threshold of the first incoherent ladder rung, or +inf if none.

    This is the maximum tolerable risk for the output: every rung at or
    below it is a safe filtered answer.
    """
    for entry in ladder.entries:
        if not coherent(entry.vertices):
            if not entry.vertices:
                raise IncoherentEmptySetError(
                    "oracle rejected the empty set; it is coherent by convention"
                )
            return entry.tau
    return math.inf


@dataclass(frozen=True)
class CalibrationArtifact:
    """Split-conformal quantile plus everything needed to reuse it safely.

    ``scores`` are the flipped calibration values ``1 - r_i`` in sorted
    order (``-inf`` allowed). ``q_hat`` is the ceil((n+1)(1-alpha))-th
    smallest, or +inf when that index exceeds n (maximally conservative).
    Scorer settings are embedded so filtering can refuse a mismatched
    pipeline: conformal validity silently breaks if calibration and test
    scoring differ.
    """

    alpha: float
    n: int
    scores: tuple[float, ...]
    q_hat: float
    seed: int = 0
    method: str = "coherent"
    scorer: str = "plain"
    beta: float = 0.0

    @property
    def cap(self) -> float:
        """Risk cap ``1 - q_hat`` used by all filtering rules."""
        return _flip(self.q_hat)

    def to_json(self) -> str:
        payload = {
            "alpha": self.alpha,
            "n": self.n,
            "scores": [_num_out(s) for s in self.scores],
            "q_hat": _num_out(self.q_hat),
            "seed": self.seed,
            "method": self.method,
            "scorer": self.scorer,
            "beta": self.beta,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CalibrationArtifact":
        obj = json.loads(text)
        return cls(
            alpha=obj["alpha"],
            n=obj["n"],
            scores=tuple(_num_in(s) for s in obj["scores"]),
            q_hat=_num_in(obj["q_hat"]),
            seed=obj.get("seed", 0),
            method=obj.get("method", "coherent"),
            scorer=obj.get("scorer", "plain"),
            beta=obj.get("beta", 0.0),
        )

    def check_compatible(self, method: str, scorer: str, beta: float, seed: int) -> None:
        mine = (self.method, self.scorer, self.beta, self.seed)
        theirs = (method, scorer, beta, seed)
        if mine != theirs:
            raise ArtifactMismatchError(
                f"artifact was calibrated with {mine}, filtering requested {theirs}"
            )


def _flip(x: float) -> float:
    return 1.0 - x  # 1 - (+inf) = -inf and vice versa, as IEEE gives us


def _num_out(x: float):
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return x


def _num_in(x) -> float:
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    return float(x)


def quantile_index(n: int, alpha: float) -> int:
    """1-based order-statistic index ceil((n+1)(1-alpha)), computed exactly.

    Exact rational arithmetic avoids float-ceil artifacts such as
    ceil(10 * 0.9) evaluating to 10.
    """
    frac_alpha = Fraction(alpha).limit_denominator(10**9)
    return math.ceil((n + 1) * (1 - frac_alpha))


def calibrate(
    rs: Sequence[float],
    alpha: float,
    *,
    seed: int = 0,
    method: str = "coherent",
    scorer: str = "plain",
    beta: float = 0.0,
) -> CalibrationArtifact:
    """Turn calibration non-conformity scores into a conformal quantile.

    Each score ``r`` is flipped to ``1 - r``; ``q_hat`` is the
    ceil((n+1)(1-alpha))-th smallest flipped score, or +inf when the index
    overflows ``n`` (too few calibration examples for the requested alpha,
    so filtering falls back to the empty output).
    """
    n = len(rs)
    if n < 1:
        raise EmptyCalibrationError("need at least one calibration score")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    scores = tuple(sorted(_flip(r) for r in rs))
    idx = quantile_index(n, alpha)
    q_hat = scores[idx - 1] if idx <= n else math.inf
    return CalibrationArtifact(
        alpha=alpha,
        n=n,
        scores=scores,
        q_hat=q_hat,
        seed=seed,
        method=method,
        scorer=scorer,
        beta=beta,
    )


def filter_output(
    ladder: SubgraphLadder, artifact: CalibrationArtifact
) -> tuple[int, ...]:
    """Filtered claim ordering for one output.

    Picks the ladder rung with maximal risk strictly below ``1 - q_hat``
    and returns its stable topological ordering.
    """
    entry = select(ladder, artifact.cap)
    return topological_order(ladder.graph, entry.vertices)


def independent_nonconformity(
    scores: Sequence[float], claim_factual: Callable[[int], bool]
) -> float:
    """Graph-free baseline non-conformity, in the risk convention.

    The largest risk threshold such that every claim at or below it is
    factual; equivalently the risk of the lowest-risk non-factual claim,
    or +inf when all claims are factual. Expressed this way the baseline
    shares the calibrate/filter machinery with the coherent method (the
    confidence-threshold form is recovered via ``tau_conf = 1 - tau_risk``).
    """
    bad = [scores[v] for v in range(len(scores)) if not claim_factual(v)]
    return min(bad) if bad else math.inf


def independent_filter(
    scores: Sequence[float], artifact: CalibrationArtifact
) -> frozenset[int]:
    """Baseline filter: keep claims with risk below the cap, no graph."""
    cap = artifact.cap
    return frozenset(v for v in range(len(scores)) if scores[v] < cap)


def posthoc_filter(g: ClaimGraph, s: frozenset[int]) -> frozenset[int]:
    """Maximal ancestor-connected subset of ``s``.

    Iteratively removes claims with an ancestor outside the surviving set
    until stable.
    """
    kept = set(s)
    changed = True
    while changed:
        changed = False
        for v in sorted(kept):
            if not g.parents[v] <= kept:
                kept.remove(v)
                changed = True
    return frozenset(kept)
