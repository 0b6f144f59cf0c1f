"""Synthetic datasets with planted ground truth and Monte Carlo coverage runs.

The generator produces i.i.d. examples (hence exchangeable): a random
index-forward DAG, planted claim errors that propagate to descendants, and
risk scores drawn from separate correct/erroneous distributions so the
scorer has signal but nonzero confusion. The experiment driver runs the
full pipeline (scores -> ladder -> non-conformity -> calibrate -> filter)
per trial and judges filtered outputs with the planted-truth oracle.

For speed, trials draw their calibration-plus-test examples without
replacement from a large pre-generated pool; the examples within each trial
are exchangeable by symmetry of the draw, which is all the coverage
guarantee needs, and trials are conditionally independent given the pool.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from . import conformal, ladder as ladder_mod, scoring
from .annotations import AnnotationSet
from .errors import InvalidConfigError
from .graph import ClaimGraph, linear_graph

COHERENT = "coherent"
COHERENT_DESCENDANT = "coherent-descendant"
POSTHOC = "posthoc"
INDEPENDENT = "independent"
LINEAR = "linear"
ALL_METHODS = (COHERENT, COHERENT_DESCENDANT, POSTHOC, INDEPENDENT, LINEAR)


@dataclass(frozen=True)
class SimConfig:
    """Knobs for the synthetic example generator."""

    n_examples: int = 1000
    claims_per_example: tuple[int, int] = (4, 10)
    edge_density: float = 0.3
    base_error_rate: float = 0.15
    dependency_error_prob: float = 0.5
    correct_risk_mean: float = 0.2
    erroneous_risk_mean: float = 0.8
    risk_concentration: float = 10.0
    hallucination_rate: float = 1.0
    corrupt_edge_fraction: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        lo, hi = self.claims_per_example
        if not (1 <= lo <= hi):
            raise InvalidConfigError(f"bad claims_per_example {self.claims_per_example}")
        if self.n_examples < 0:
            raise InvalidConfigError("n_examples must be >= 0")
        for name in (
            "edge_density",
            "base_error_rate",
            "dependency_error_prob",
            "hallucination_rate",
            "corrupt_edge_fraction",
        ):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise InvalidConfigError(f"{name} must be in [0, 1], got {val}")
        for name in ("correct_risk_mean", "erroneous_risk_mean"):
            val = getattr(self, name)
            if not 0.0 < val < 1.0:
                raise InvalidConfigError(f"{name} must be in (0, 1), got {val}")
        if self.risk_concentration <= 0:
            raise InvalidConfigError("risk_concentration must be > 0")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SimConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(obj) - known
        if extra:
            raise InvalidConfigError(f"unknown config keys: {sorted(extra)}")
        if "claims_per_example" in obj:
            obj = dict(obj, claims_per_example=tuple(obj["claims_per_example"]))
        cfg = cls(**obj)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class SimExample:
    """One synthetic output: working graph, scores, and planted truth."""

    graph: ClaimGraph  # what the pipeline sees (possibly corrupted)
    true_graph: ClaimGraph  # planted dependency structure
    risk_scores: tuple[float, ...]
    annotations: AnnotationSet

    @property
    def n_claims(self) -> int:
        return self.graph.n_claims

    def truly_coherent(self, s: frozenset[int]) -> bool:
        """Planted-truth oracle: all claims correct and true ancestors present."""
        labels = self.annotations.claim_labels
        for v in s:
            if not labels[v]:
                return False
            if not self.true_graph.parents[v] <= s:
                return False
        return True


def _draw_example(cfg: SimConfig, rng: np.random.Generator) -> SimExample:
    lo, hi = cfg.claims_per_example
    n = int(rng.integers(lo, hi + 1))
    edges = {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < cfg.edge_density
    }
    true_graph = ClaimGraph(n, frozenset(edges))

    erroneous = rng.random(n) < cfg.base_error_rate
    for v in range(n):  # parents precede children, so one forward pass settles
        if not erroneous[v] and any(erroneous[u] for u in true_graph.parents[v]):
            erroneous[v] = rng.random() < cfg.dependency_error_prob
    if rng.random() < cfg.hallucination_rate and not erroneous.any():
        seed_claim = int(rng.integers(n))
        erroneous[seed_claim] = True
        for v in range(seed_claim + 1, n):
            if not erroneous[v] and any(erroneous[u] for u in true_graph.parents[v]):
                erroneous[v] = rng.random() < cfg.dependency_error_prob

    c = cfg.risk_concentration
    raw = []
    for v in range(n):
        mean = cfg.erroneous_risk_mean if erroneous[v] else cfg.correct_risk_mean
        raw.append(float(rng.beta(mean * c, (1.0 - mean) * c)))
    noise_seed = int(rng.integers(2**31))
    risk = scoring.break_ties(raw, seed=noise_seed)

    working = true_graph
    if cfg.corrupt_edge_fraction > 0 and edges:
        kept = {e for e in sorted(edges) if rng.random() >= cfg.corrupt_edge_fraction}
        working = ClaimGraph(n, frozenset(kept))

    labels = tuple(bool(not e) for e in erroneous)
    return SimExample(
        graph=working,
        true_graph=true_graph,
        risk_scores=tuple(risk),
        annotations=AnnotationSet(claim_labels=labels),
    )


def generate_dataset(cfg: SimConfig, n_examples: int | None = None) -> list[SimExample]:
    """Deterministic i.i.d. dataset for the configured seed."""
    cfg.validate()
    count = cfg.n_examples if n_examples is None else n_examples
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0)))
    return [_draw_example(cfg, rng) for _ in range(count)]


# ---------------------------------------------------------------------------
# Per-example preparation for the trial engine
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Prepared:
    """One example reduced to what a trial needs: calibration score plus a
    threshold-indexed answer table (rung coherence and retained size)."""

    r: float
    taus: tuple[float, ...]
    rung_coherent: tuple[bool, ...]
    rung_size: tuple[int, ...]
    n_claims: int

    def judge(self, cap: float) -> tuple[bool, float]:
        i = max(bisect_left(self.taus, cap) - 1, 0)
        return self.rung_coherent[i], self.rung_size[i] / max(self.n_claims, 1)


def _prepare_ladder_method(ex: SimExample, graph: ClaimGraph, scores: list[float]) -> _Prepared:
    lad = ladder_mod.generate(graph, scores)
    sets = [e.vertices for e in lad.entries]
    coherent = tuple(ex.truly_coherent(s) for s in sets)
    r = conformal.nonconformity(lad, ex.truly_coherent)
    return _Prepared(
        r=r,
        taus=lad.taus,
        rung_coherent=coherent,
        rung_size=tuple(len(s) for s in sets),
        n_claims=ex.n_claims,
    )


def _prepare_independent_family(ex: SimExample):
    """Threshold prefixes by score, shared by the baseline and post-hoc."""
    order = sorted(range(ex.n_claims), key=lambda v: ex.risk_scores[v])
    taus = [-math.inf] + [ex.risk_scores[v] for v in order]
    prefixes = [frozenset()]
    for v in order:
        prefixes.append(prefixes[-1] | {v})
    return taus, prefixes


def _prepare_independent(ex: SimExample) -> _Prepared:
    taus, prefixes = _prepare_independent_family(ex)
    labels = ex.annotations.claim_labels
    r = conformal.independent_nonconformity(ex.risk_scores, lambda v: labels[v])
    return _Prepared(
        r=r,
        taus=tuple(taus),
        rung_coherent=tuple(ex.truly_coherent(s) for s in prefixes),
        rung_size=tuple(len(s) for s in prefixes),
        n_claims=ex.n_claims,
    )


def _prepare_posthoc(ex: SimExample) -> _Prepared:
    taus, prefixes = _prepare_independent_family(ex)
    labels = ex.annotations.claim_labels
    r = conformal.independent_nonconformity(ex.risk_scores, lambda v: labels[v])
    kept = [conformal.posthoc_filter(ex.graph, s) for s in prefixes]
    return _Prepared(
        r=r,
        taus=tuple(taus),
        rung_coherent=tuple(ex.truly_coherent(s) for s in kept),
        rung_size=tuple(len(s) for s in kept),
        n_claims=ex.n_claims,
    )


def prepare_method(ex: SimExample, method: str, beta: float = scoring.DEFAULT_BETA) -> _Prepared:
    if method == COHERENT:
        return _prepare_ladder_method(ex, ex.graph, list(ex.risk_scores))
    if method == COHERENT_DESCENDANT:
        weighted = scoring.descendant_weighted(ex.graph, list(ex.risk_scores), beta)
        weighted = scoring.break_ties(weighted, seed=hash(ex.risk_scores) & 0x7FFFFFFF)
        return _prepare_ladder_method(ex, ex.graph, weighted)
    if method == LINEAR:
        return _prepare_ladder_method(
            ex, linear_graph(ex.n_claims), list(ex.risk_scores)
        )
    if method == INDEPENDENT:
        return _prepare_independent(ex)
    if method == POSTHOC:
        return _prepare_posthoc(ex)
    raise InvalidConfigError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageReport:
    alpha: float
    n_cal: int
    trials: int
    empirical_coverage: float
    std_error: float
    lower_bound: float
    upper_bound: float
    mean_retention: float

    def lower_bound_holds(self, z: float = 3.0) -> bool:
        return self.empirical_coverage >= self.lower_bound - z * self.std_error

    def upper_bound_holds(self, z: float = 3.0) -> bool:
        return self.empirical_coverage <= self.upper_bound + z * self.std_error

    def to_json_obj(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_cal": self.n_cal,
            "trials": self.trials,
            "empirical_coverage": self.empirical_coverage,
            "std_error": self.std_error,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "mean_retention": self.mean_retention,
            "lower_bound_holds": self.lower_bound_holds(),
            "upper_bound_holds": self.upper_bound_holds(),
        }


def _pool_size(trials: int, n_cal: int, pool_size: int | None) -> int:
    if pool_size is not None:
        return pool_size
    return min(trials * (n_cal + 1), 20000)


def _draw_trial_indices(
    rng: np.random.Generator, trials: int, pool: int, per_trial: int
) -> np.ndarray:
    if pool < per_trial:
        raise InvalidConfigError("pool smaller than one trial's draw")
    return np.stack([rng.choice(pool, per_trial, replace=False) for _ in range(trials)])


def _caps_for_trials(
    r_pool: np.ndarray, idx: np.ndarray, n_cal: int, alpha: float
) -> np.ndarray:
    flipped = 1.0 - r_pool  # +inf scores become -inf
    cal = np.sort(flipped[idx[:, :n_cal]], axis=1)
    k = conformal.quantile_index(n_cal, alpha)
    if k <= n_cal:
        q_hat = cal[:, k - 1]
    else:
        q_hat = np.full(idx.shape[0], math.inf)
    return 1.0 - q_hat


def _evaluate_method(
    prepared: list[_Prepared], idx: np.ndarray, n_cal: int, alpha: float
) -> tuple[float, float, float]:
    r_pool = np.array([p.r for p in prepared])
    caps = _caps_for_trials(r_pool, idx, n_cal, alpha)
    trials = idx.shape[0]
    covered = 0
    retention_sum = 0.0
    for t in range(trials):
        test = prepared[idx[t, n_cal]]
        ok, ret = test.judge(caps[t])
        covered += ok
        retention_sum += ret
    coverage = covered / trials
    se = math.sqrt(coverage * (1.0 - coverage) / trials)
    return coverage, se, retention_sum / trials


def coverage_experiment(
    cfg: SimConfig,
    alpha: float,
    n_cal: int,
    trials: int,
    *,
    method: str = COHERENT,
    beta: float = scoring.DEFAULT_BETA,
    pool_size: int | None = None,
) -> CoverageReport:
    """Monte Carlo estimate of the coverage of the filtered output.

    Per trial: draw ``n_cal`` calibration examples plus one test example,
    calibrate, filter the test output, and ask the planted-truth oracle
    whether the result is coherent. Reports the coverage fraction, its
    binomial standard error, and mean fraction of claims retained.
    """
    cfg.validate()
    if trials < 1 or n_cal < 1:
        raise InvalidConfigError("trials and n_cal must be >= 1")
    pool_n = _pool_size(trials, n_cal, pool_size)
    examples = generate_dataset(cfg, pool_n)
    prepared = [prepare_method(ex, method, beta) for ex in examples]
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 1)))
    idx = _draw_trial_indices(rng, trials, pool_n, n_cal + 1)
    coverage, se, retention = _evaluate_method(prepared, idx, n_cal, alpha)
    return CoverageReport(
        alpha=alpha,
        n_cal=n_cal,
        trials=trials,
        empirical_coverage=coverage,
        std_error=se,
        lower_bound=1.0 - alpha,
        upper_bound=1.0 - alpha + 1.0 / (n_cal + 1),
        mean_retention=retention,
    )


def retention_sweep(
    cfg: SimConfig,
    alphas: list[float],
    n_cal: int,
    trials: int,
    *,
    methods: tuple[str, ...] = ALL_METHODS,
    beta: float = scoring.DEFAULT_BETA,
    pool_size: int | None = None,
) -> list[dict]:
    """Paired method comparison on shared datasets and shared trial draws.

    Returns one row per (alpha, method) with realized factuality (fraction
    of filtered outputs the planted-truth oracle accepts) and mean claim
    retention. All methods consume identical examples and identical trial
    index draws, cutting Monte Carlo variance in the deltas.
    """
    cfg.validate()
    if trials < 1 or n_cal < 1:
        raise InvalidConfigError("trials and n_cal must be >= 1")
    pool_n = _pool_size(trials, n_cal, pool_size)
    examples = generate_dataset(cfg, pool_n)
    prepared_by_method = {
        m: [prepare_method(ex, m, beta) for ex in examples] for m in methods
    }
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 1)))
    idx = _draw_trial_indices(rng, trials, pool_n, n_cal + 1)
    rows = []
    for alpha in alphas:
        if not 0.0 < alpha < 1.0:
            raise InvalidConfigError(f"alpha must be in (0, 1), got {alpha}")
        for m in methods:
            coverage, se, retention = _evaluate_method(
                prepared_by_method[m], idx, n_cal, alpha
            )
            rows.append(
                {
                    "alpha": alpha,
                    "method": m,
                    "realized_factuality": coverage,
                    "std_error": se,
                    "mean_retention": retention,
                }
            )
    return rows
