import math

import pytest

from claimfilter.errors import InvalidConfigError
from claimfilter.simulate import (
    ALL_METHODS,
    COHERENT,
    INDEPENDENT,
    POSTHOC,
    SimConfig,
    coverage_experiment,
    generate_dataset,
    prepare_method,
    retention_sweep,
)


def test_config_validation():
    with pytest.raises(InvalidConfigError):
        SimConfig(edge_density=1.5).validate()
    with pytest.raises(InvalidConfigError):
        SimConfig(claims_per_example=(5, 2)).validate()
    with pytest.raises(InvalidConfigError):
        SimConfig(correct_risk_mean=0.0).validate()
    SimConfig().validate()


def test_config_rejects_unknown_keys():
    with pytest.raises(InvalidConfigError):
        SimConfig.from_json_obj({"typo_key": 1})


def test_config_from_json():
    cfg = SimConfig.from_json_obj({"seed": 3, "claims_per_example": [4, 6]})
    assert cfg.seed == 3
    assert cfg.claims_per_example == (4, 6)


def test_dataset_deterministic():
    a = generate_dataset(SimConfig(seed=1), 20)
    b = generate_dataset(SimConfig(seed=1), 20)
    assert a == b
    c = generate_dataset(SimConfig(seed=2), 20)
    assert a != c


def test_examples_well_formed():
    for ex in generate_dataset(SimConfig(seed=3), 50):
        assert 4 <= ex.n_claims <= 10
        assert len(set(ex.risk_scores)) == ex.n_claims  # distinct after noise
        assert len(ex.annotations.claim_labels) == ex.n_claims
        assert ex.graph.edges == ex.true_graph.edges  # no corruption by default


def test_forced_hallucination():
    cfg = SimConfig(seed=4, hallucination_rate=1.0, base_error_rate=0.0)
    for ex in generate_dataset(cfg, 50):
        assert not all(ex.annotations.claim_labels)


def test_error_propagation_inflates_descendant_errors():
    cfg = SimConfig(seed=5, base_error_rate=0.3, dependency_error_prob=1.0)
    for ex in generate_dataset(cfg, 50):
        labels = ex.annotations.claim_labels
        for v in range(ex.n_claims):
            if any(not labels[u] for u in ex.true_graph.parents[v]):
                assert not labels[v]


def test_edge_corruption_removes_edges_only():
    cfg = SimConfig(seed=6, corrupt_edge_fraction=0.5)
    removed = 0
    for ex in generate_dataset(cfg, 50):
        assert ex.graph.edges <= ex.true_graph.edges
        removed += len(ex.true_graph.edges) - len(ex.graph.edges)
    assert removed > 0


def test_truly_coherent_oracle():
    cfg = SimConfig(seed=7)
    ex = generate_dataset(cfg, 1)[0]
    assert ex.truly_coherent(frozenset())
    full = frozenset(range(ex.n_claims))
    labels = ex.annotations.claim_labels
    assert ex.truly_coherent(full) == all(labels)


def test_prepare_method_judges_consistently():
    ex = generate_dataset(SimConfig(seed=8), 1)[0]
    for method in ALL_METHODS:
        prep = prepare_method(ex, method)
        ok, retention = prep.judge(-math.inf)
        assert ok and retention == 0.0  # empty output is always coherent
        assert prep.r > -math.inf


def test_prepare_method_unknown():
    ex = generate_dataset(SimConfig(seed=8), 1)[0]
    with pytest.raises(InvalidConfigError):
        prepare_method(ex, "nope")


def test_coverage_experiment_in_band():
    rep = coverage_experiment(SimConfig(seed=9), 0.2, 50, 800)
    assert rep.lower_bound == pytest.approx(0.8)
    assert rep.upper_bound == pytest.approx(0.8 + 1 / 51)
    assert rep.lower_bound_holds(z=4)
    assert rep.upper_bound_holds(z=4)
    assert 0 < rep.mean_retention < 1


def test_coverage_experiment_validates():
    with pytest.raises(InvalidConfigError):
        coverage_experiment(SimConfig(), 0.1, 0, 10)
    with pytest.raises(InvalidConfigError):
        coverage_experiment(SimConfig(), 0.1, 50, 10, pool_size=20)


def test_retention_sweep_pairs_methods():
    rows = retention_sweep(
        SimConfig(seed=10), [0.1, 0.2], 50, 300, methods=(COHERENT, POSTHOC, INDEPENDENT)
    )
    assert len(rows) == 6
    by_key = {(r["alpha"], r["method"]): r for r in rows}
    # post-hoc repair cannot do worse on factuality than the raw baseline
    for alpha in (0.1, 0.2):
        assert (
            by_key[(alpha, POSTHOC)]["realized_factuality"]
            >= by_key[(alpha, INDEPENDENT)]["realized_factuality"]
        )


def test_report_json_round_trip_fields():
    rep = coverage_experiment(SimConfig(seed=11), 0.1, 20, 50)
    obj = rep.to_json_obj()
    assert set(obj) == {
        "alpha", "n_cal", "trials", "empirical_coverage", "std_error",
        "lower_bound", "upper_bound", "mean_retention",
        "lower_bound_holds", "upper_bound_holds",
    }
