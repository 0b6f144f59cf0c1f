"""Shared helpers: random DAGs, brute-force oracles, and dataset builders."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from claimfilter.dataset import DatasetRecord
from claimfilter.graph import ClaimGraph
from claimfilter.simulate import SimConfig, generate_dataset

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


def random_dag(rng: np.random.Generator, n: int, density: float = 0.35) -> ClaimGraph:
    """Index-forward random DAG (edges only go from lower to higher index)."""
    edges = {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    }
    return ClaimGraph(n, frozenset(edges))


def distinct_scores(rng: np.random.Generator, n: int) -> list[float]:
    while True:
        scores = [float(x) for x in rng.random(n)]
        if len(set(scores)) == n:
            return scores


def fixpoint_deletion_ladder(
    g: ClaimGraph, scores: list[float]
) -> list[tuple[float, frozenset[int]]]:
    """Reference ladder: threshold cut, then delete-until-stable.

    Order-independent by construction, so it is a valid oracle for the
    single-pass topological implementation.
    """
    entries: list[tuple[float, frozenset[int]]] = [(-math.inf, frozenset())]
    for tau in sorted(scores):
        selected = {v for v in range(g.n_claims) if scores[v] <= tau}
        changed = True
        while changed:
            changed = False
            for v in sorted(selected):
                if not g.parents[v] <= selected:
                    selected.remove(v)
                    changed = True
        entries.append((tau, frozenset(selected)))
    return entries


def brute_force_nonconformity(ladder, coherent) -> float:
    """Min threshold over all incoherent rungs, +inf when every rung passes."""
    bad = [e.tau for e in ladder.entries if not coherent(e.vertices)]
    return min(bad) if bad else math.inf


def sim_examples_to_records(examples) -> list[DatasetRecord]:
    """Wrap synthetic examples as dataset records with placeholder text."""
    records = []
    for i, ex in enumerate(examples):
        records.append(
            DatasetRecord(
                example_id=f"sim-{i}",
                question=f"synthetic question {i}",
                claims=tuple(f"claim {v} of example {i}" for v in range(ex.n_claims)),
                graph=ex.graph,
                risk_scores=ex.risk_scores,
                annotations=ex.annotations,
            )
        )
    return records


@pytest.fixture
def sim_dataset_files(tmp_path):
    """Calibration and test JSONL files built from the synthetic generator."""
    from claimfilter.dataset import save_records

    examples = generate_dataset(SimConfig(seed=7), 60)
    records = sim_examples_to_records(examples)
    cal_path = tmp_path / "cal.jsonl"
    test_path = tmp_path / "test.jsonl"
    save_records(cal_path, records[:50])
    save_records(test_path, records[50:])
    return cal_path, test_path


def write_jsonl(path: Path, rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
