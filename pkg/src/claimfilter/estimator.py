"""Sklearn-style estimator wrapping calibration and filtering.

``fit`` consumes calibration examples and computes the conformal quantile;
``transform`` filters new examples down to coherent claim orderings. The
class follows the get_params/set_params contract so it composes with
scikit-learn tooling (cloning, grid search over alpha/beta, pipelines).
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import conformal, ladder as ladder_mod, scoring
from .annotations import AnnotationSet, gold_coherent, silver_coherent
from .graph import ClaimGraph

Example = tuple[ClaimGraph, list[float], AnnotationSet]

_METHODS = ("coherent", "independent")
_SCORERS = ("plain", "descendant")
_ORACLES = ("silver", "gold")


class ConformalClaimFilter(BaseEstimator):
    """Filter claim graphs to coherent subsets at a calibrated error rate.

    Parameters
    ----------
    alpha : float
        Target miscoverage rate in (0, 1).
    method : {"coherent", "independent"}
        Graph-aware subgraph filtering, or the graph-free baseline.
    scorer : {"plain", "descendant"}
        Raw risk scores, or descendant-weighted blending with weight `beta`.
    beta : float
        Descendant-weighting blend in [0, 1]; ignored for scorer="plain".
    oracle : {"silver", "gold"}
        Which annotation oracle judges rung coherence during calibration.
    seed : int
        Seed for the deterministic tie-breaking noise.
    """

    def __init__(
        self,
        alpha: float = 0.1,
        method: str = "coherent",
        scorer: str = "plain",
        beta: float = scoring.DEFAULT_BETA,
        oracle: str = "silver",
        seed: int = 0,
    ):
        self.alpha = alpha
        self.method = method
        self.scorer = scorer
        self.beta = beta
        self.oracle = oracle
        self.seed = seed

    def _validate_params_(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}")
        if self.scorer not in _SCORERS:
            raise ValueError(f"scorer must be one of {_SCORERS}")
        if self.oracle not in _ORACLES:
            raise ValueError(f"oracle must be one of {_ORACLES}")

    def _scores_for(self, graph: ClaimGraph, raw: list[float]) -> list[float]:
        values = list(raw)
        if self.scorer == "descendant":
            values = scoring.descendant_weighted(graph, values, self.beta)
        return scoring.break_ties(values, seed=self.seed)

    def _check_examples(self, examples: list[Example]) -> None:
        for i, (graph, raw, ann) in enumerate(examples):
            if len(raw) != graph.n_claims:
                raise ValueError(f"example {i}: score length != claim count")
            if ann is not None and len(ann.claim_labels) != graph.n_claims:
                raise ValueError(f"example {i}: label length != claim count")

    def _nonconformity(self, graph: ClaimGraph, raw: list[float], ann: AnnotationSet) -> float:
        scores = self._scores_for(graph, raw)
        if self.method == "independent":
            labels = ann.claim_labels
            return conformal.independent_nonconformity(scores, lambda v: bool(labels[v]))
        lad = ladder_mod.generate(graph, scores)
        if self.oracle == "gold":
            judge = lambda s: gold_coherent(s, ann)
        else:
            judge = lambda s: silver_coherent(graph, s, ann)
        return conformal.nonconformity(lad, judge)

    def fit(self, X: list[Example], y=None):
        """Calibrate on (graph, risk scores, annotations) triples."""
        self._validate_params_()
        self._check_examples(X)
        rs = [self._nonconformity(g, raw, ann) for g, raw, ann in X]
        self.artifact_ = conformal.calibrate(
            rs,
            self.alpha,
            seed=self.seed,
            method=self.method,
            scorer=self.scorer,
            beta=self.beta if self.scorer == "descendant" else 0.0,
        )
        self.n_features_in_ = len(X)
        return self

    def transform(self, X: list[tuple[ClaimGraph, list[float]]]) -> list[tuple[int, ...]]:
        """Filter each (graph, risk scores) pair to an ordered claim subset."""
        check_is_fitted(self, "artifact_")
        out = []
        for graph, raw in X:
            scores = self._scores_for(graph, raw)
            if self.method == "independent":
                kept = conformal.independent_filter(scores, self.artifact_)
                out.append(tuple(sorted(kept)))
            else:
                lad = ladder_mod.generate(graph, scores)
                out.append(conformal.filter_output(lad, self.artifact_))
        return out

    def fit_transform(self, X: list[Example], y=None) -> list[tuple[int, ...]]:
        self.fit(X, y)
        return self.transform([(g, raw) for g, raw, _ in X])
