"""Batch command surface: simulate, calibrate, filter, evaluate, graph-check, fetch.

Every command is deterministic given --seed and its inputs. Exit codes:
0 ok, 1 assertion failure (coverage bound violated), 2 usage or data error.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import click

from . import adapter, conformal, graph as graph_mod, ladder as ladder_mod
from . import prompts, scoring, simulate
from .annotations import gold_coherent, silver_coherent
from .dataset import DatasetRecord, dump_jsonl, load_records
from .errors import ClaimFilterError, TooLargeError

EXIT_ASSERTION = 1
EXIT_USAGE = 2


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_USAGE)


def _parse_scorer(spec: str) -> tuple[str, float]:
    if spec == "plain":
        return "plain", 0.0
    if spec == "descendant":
        return "descendant", scoring.DEFAULT_BETA
    if spec.startswith("descendant:"):
        try:
            beta = float(spec.split(":", 1)[1])
        except ValueError:
            _fail(f"bad scorer spec {spec!r}")
        if not 0.0 <= beta <= 1.0:
            _fail(f"beta must be in [0, 1], got {beta}")
        return "descendant", beta
    _fail(f"unknown scorer {spec!r} (expected plain or descendant[:beta])")
    raise AssertionError  # unreachable


def _record_scores(record: DatasetRecord, scorer: str, beta: float, seed: int) -> list[float]:
    if record.risk_scores is not None:
        values = list(record.risk_scores)
    elif record.tally is not None:
        t = record.tally
        k = t.supports[0] + t.contradicts[0] + t.unrelated[0] if t.n_claims else 1
        values = scoring.risk_from_tally(t, k)
    else:
        _fail(f"{record.example_id}: record has neither risk_scores nor tally")
        raise AssertionError
    if scorer == "descendant":
        values = scoring.descendant_weighted(record.graph, values, beta)
    return scoring.break_ties(values, seed=seed)


@click.group()
def main():
    """Conformal filtering of claim dependency graphs."""


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


@main.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--alpha", "alphas", type=float, multiple=True, default=(0.1,), show_default=True)
@click.option("--n-cal", type=int, default=50, show_default=True)
@click.option("--trials", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.option("--out", type=click.Path(file_okay=False), default=None, help="Report output directory.")
def simulate_cmd(config, alphas, n_cal, trials, seed, out):
    """Monte Carlo verification of the coverage band on synthetic data."""
    try:
        obj = json.loads(Path(config).read_text()) if config else {}
        cfg = simulate.SimConfig.from_json_obj(obj)
        if seed is not None:
            cfg = simulate.SimConfig.from_json_obj({**obj, "seed": seed})
        if trials < 1 or n_cal < 1:
            raise ClaimFilterError("--trials and --n-cal must be >= 1")
        reports = [
            simulate.coverage_experiment(cfg, alpha, n_cal, trials) for alpha in alphas
        ]
    except (ClaimFilterError, ValueError, json.JSONDecodeError) as exc:
        _fail(str(exc))
        return

    for rep in reports:
        band = f"[{rep.lower_bound:.4f}, {rep.upper_bound:.4f}]"
        mark = "ok" if rep.lower_bound_holds() else "LOW"
        click.echo(
            f"alpha={rep.alpha:<5} coverage={rep.empirical_coverage:.4f} "
            f"(se={rep.std_error:.4f}) band={band} retention={rep.mean_retention:.3f} "
            f"{_band_chart(rep)} {mark}"
        )
    if out:
        outdir = Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "coverage_report.json").write_text(
            json.dumps([r.to_json_obj() for r in reports], sort_keys=True, indent=2)
            + "\n"
        )
        with open(outdir / "coverage_report.csv", "w", newline="") as fh:
            writer = csv.DictWriter(
                fh,
                fieldnames=[
                    "alpha", "n_cal", "trials", "empirical_coverage", "std_error",
                    "lower_bound", "upper_bound", "mean_retention",
                ],
            )
            writer.writeheader()
            for rep in reports:
                row = rep.to_json_obj()
                writer.writerow({k: row[k] for k in writer.fieldnames})
    if not all(r.lower_bound_holds() for r in reports):
        sys.exit(EXIT_ASSERTION)


def _band_chart(rep: simulate.CoverageReport, width: int = 30) -> str:
    lo = max(rep.lower_bound - 0.05, 0.0)
    hi = min(rep.upper_bound + 0.05, 1.0)

    def pos(x: float) -> int:
        return min(max(int((x - lo) / (hi - lo) * (width - 1)), 0), width - 1)

    chars = ["."] * width
    for i in range(pos(rep.lower_bound), pos(rep.upper_bound) + 1):
        chars[i] = "-"
    chars[pos(rep.empirical_coverage)] = "#"
    return "|" + "".join(chars) + "|"


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", type=float, required=True)
@click.option("--method", type=click.Choice(["coherent", "independent"]), default="coherent", show_default=True)
@click.option("--scorer", default="plain", show_default=True, help="plain or descendant[:beta]")
@click.option("--oracle", type=click.Choice(["silver", "gold"]), default="silver", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def calibrate(dataset, alpha, method, scorer, oracle, seed, out):
    """Compute per-example non-conformity and write a calibration artifact."""
    scorer_name, beta = _parse_scorer(scorer)
    try:
        records = load_records(dataset)
        rs = []
        for record in records:
            if record.annotations is None:
                raise ClaimFilterError(f"{record.example_id}: no annotations")
            scores = _record_scores(record, scorer_name, beta, seed)
            if method == "independent":
                labels = record.annotations.claim_labels
                rs.append(
                    conformal.independent_nonconformity(
                        scores, lambda v, labels=labels: bool(labels[v])
                    )
                )
            else:
                lad = ladder_mod.generate(record.graph, scores)
                ann = record.annotations
                if oracle == "gold":
                    judge = lambda s, ann=ann: gold_coherent(s, ann)
                else:
                    judge = lambda s, g=record.graph, ann=ann: silver_coherent(g, s, ann)
                rs.append(conformal.nonconformity(lad, judge))
        artifact = conformal.calibrate(
            rs, alpha, seed=seed, method=method, scorer=scorer_name, beta=beta
        )
    except (ClaimFilterError, ValueError) as exc:
        _fail(str(exc))
        return
    Path(out).write_text(artifact.to_json() + "\n")
    click.echo(f"calibrated on {artifact.n} examples: q_hat={artifact.q_hat}")


# ---------------------------------------------------------------------------
# filter
# ---------------------------------------------------------------------------


@main.command("filter")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.argument("artifact", type=click.Path(exists=True, dir_okay=False))
@click.option("--explain", is_flag=True, help="Include the ladder dump and chosen rung.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def filter_cmd(dataset, artifact, explain, out):
    """Filter each record to its calibrated coherent claim ordering."""
    try:
        art = conformal.CalibrationArtifact.from_json(Path(artifact).read_text())
        records = load_records(dataset)
        rows = []
        for record in records:
            scores = _record_scores(record, art.scorer, art.beta, art.seed)
            if art.method == "independent":
                kept = tuple(sorted(conformal.independent_filter(scores, art)))
                row = {
                    "example_id": record.example_id,
                    "kept_indices": list(kept),
                    "kept_claims": [record.claims[v] for v in kept],
                }
            else:
                lad = ladder_mod.generate(record.graph, scores)
                ordering = conformal.filter_output(lad, art)
                row = {
                    "example_id": record.example_id,
                    "kept_indices": list(ordering),
                    "kept_claims": [record.claims[v] for v in ordering],
                }
                if explain:
                    chosen = ladder_mod.select(lad, art.cap)
                    row["explain"] = {
                        "ladder": [
                            {
                                "tau": conformal._num_out(e.tau),
                                "vertices": sorted(e.vertices),
                            }
                            for e in lad.entries
                        ],
                        "chosen_tau": conformal._num_out(chosen.tau),
                        "cap": conformal._num_out(art.cap),
                    }
            rows.append(row)
    except (ClaimFilterError, ValueError) as exc:
        _fail(str(exc))
        return
    dump_jsonl(out, rows)
    click.echo(f"filtered {len(rows)} records")


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


@main.command()
@click.argument("filtered", type=click.Path(exists=True, dir_okay=False))
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def evaluate(filtered, dataset, out):
    """Realized factuality and retention of a filtered output file."""
    try:
        records = {r.example_id: r for r in load_records(dataset)}
        retention = []
        factual = []
        with open(filtered, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                row = json.loads(line)
                record = records.get(row["example_id"])
                if record is None:
                    raise ClaimFilterError(f"unknown example_id {row['example_id']!r}")
                kept = frozenset(row["kept_indices"])
                n = len(record.claims)
                retention.append(len(kept) / n if n else 1.0)
                if record.annotations is None:
                    raise ClaimFilterError(f"{record.example_id}: no annotations")
                factual.append(
                    silver_coherent(record.graph, kept, record.annotations)
                )
        if not retention:
            raise ClaimFilterError("no filtered rows to evaluate")
        metrics = {
            "n_examples": len(retention),
            "mean_retention": sum(retention) / len(retention),
            "realized_factuality": sum(factual) / len(factual),
        }
    except (ClaimFilterError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _fail(str(exc))
        return
    text = json.dumps(metrics, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    click.echo(text, nl=False)


# ---------------------------------------------------------------------------
# graph-check
# ---------------------------------------------------------------------------


@main.command("graph-check")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--ideal", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSONL of {example_id, adjacency} reference graphs.")
@click.option("--max-claims", type=int, default=12, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def graph_check(dataset, ideal, max_claims, out):
    """Validate dependency graphs against the claim-level annotations.

    The coherence oracle is built from the reference graph (--ideal when
    given, otherwise the record's own graph) plus the claim labels: a claim
    is deducible once its reference parents precede it and it is labeled Yes.
    """
    try:
        records = load_records(dataset)
        ideals = {}
        if ideal:
            with open(ideal, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        obj = json.loads(line)
                        ideals[str(obj["example_id"])] = graph_mod.parse_adjacency(
                            obj["adjacency"]
                        )
        rows = []
        for record in records:
            if record.annotations is None:
                raise ClaimFilterError(f"{record.example_id}: no annotations")
            reference = ideals.get(record.example_id, record.graph)
            labels = record.annotations.claim_labels

            def oracle(ordering, reference=reference, labels=labels):
                placed = set()
                for v in ordering:
                    if not labels[v] or not reference.parents[v] <= placed:
                        return False
                    placed.add(v)
                return True

            row = {"example_id": record.example_id}
            try:
                report = graph_mod.validate_deducibility_graph(
                    record.graph, oracle, max_claims=max_claims
                )
                row["ok"] = report.ok
                if not report.ok:
                    row["witness"] = sorted(report.witness)
                    row["reason"] = report.reason
            except TooLargeError as exc:
                row["skipped"] = str(exc)
            if record.example_id in ideals:
                row["edit_distance"] = graph_mod.edit_distance(
                    record.graph, ideals[record.example_id]
                )
            rows.append(row)
    except (ClaimFilterError, ValueError, json.JSONDecodeError) as exc:
        _fail(str(exc))
        return
    if out:
        dump_jsonl(out, rows)
    for row in rows:
        status = "skip" if "skipped" in row else ("pass" if row["ok"] else "FAIL")
        extra = f" witness={row.get('witness')}" if status == "FAIL" else ""
        dist = f" edit_distance={row['edit_distance']}" if "edit_distance" in row else ""
        click.echo(f"{row['example_id']}: {status}{extra}{dist}")


# ---------------------------------------------------------------------------
# fetch
# ---------------------------------------------------------------------------


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--fixtures", type=click.Path(exists=True, file_okay=False), default=None,
              help="Offline mock backend fixture directory.")
@click.option("--backend-config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON BackendProfile for a live endpoint.")
@click.option("--template", default=prompts.GRAPH_TEMPLATE_DEFAULT, show_default=True)
@click.option("--alternates", type=int, default=0,
              help="Also fetch this many alternates and tally claim support.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def fetch(dataset, fixtures, backend_config, template, alternates, out):
    """Fetch dependency graphs (and optionally support tallies) for raw records.

    Input lines need {example_id, question, claims}; output is a full
    dataset JSONL with adjacency (and tally when --alternates is set).
    """
    if (fixtures is None) == (backend_config is None):
        _fail("provide exactly one of --fixtures or --backend-config")
    try:
        if fixtures:
            backend = adapter.MockBackend(fixtures)
            profile = adapter.BackendProfile(template_id=template)
        else:
            profile_obj = adapter.BackendProfile.from_file(backend_config)
            profile = adapter.BackendProfile(
                **{**profile_obj.__dict__, "template_id": template}
            )
            backend = adapter.HttpBackend(profile)
        records = []
        with open(dataset, encoding="utf-8") as fh:
            raw_rows = [json.loads(line) for line in fh if line.strip()]
        for obj in raw_rows:
            claims = tuple(obj["claims"])
            req = adapter.AdapterRequest(
                kind=adapter.GENERATE_GRAPH,
                question=obj.get("question", ""),
                claims=claims,
            )
            result = adapter.fetch_graph(req, backend, profile)
            tally = None
            if alternates > 0:
                alt_req = adapter.AdapterRequest(
                    kind=adapter.GENERATE_ALTERNATES,
                    question=obj.get("question", ""),
                    claims=claims,
                    k=alternates,
                    temperature=1.0,
                )
                texts = adapter.fetch_alternates(alt_req, backend, profile)
                score_req = adapter.AdapterRequest(
                    kind=adapter.SCORE_CLAIMS,
                    question=obj.get("question", ""),
                    claims=claims,
                )
                tally = adapter.score_claims(score_req, texts, backend)
            record = DatasetRecord(
                example_id=str(obj["example_id"]),
                question=obj.get("question", ""),
                claims=claims,
                graph=result.graph,
                tally=tally,
            )
            row = record.to_json_obj()
            if result.fallback:
                row["graph_fallback"] = True
            records.append(row)
    except (ClaimFilterError, ValueError, KeyError, json.JSONDecodeError) as exc:
        _fail(str(exc))
        return
    dump_jsonl(out, records)
    click.echo(f"fetched {len(records)} records")


if __name__ == "__main__":
    main()
