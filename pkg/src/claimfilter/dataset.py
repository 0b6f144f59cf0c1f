"""JSONL dataset records tying claims, graphs, scores, and annotations together.

One record per line, UTF-8, keys emitted in sorted order so outputs are
byte-stable. Floats round-trip exactly through json (shortest-repr encoding).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .annotations import AnnotationSet
from .graph import ClaimGraph, emit_adjacency, parse_adjacency
from .scoring import SupportTally


@dataclass(frozen=True)
class DatasetRecord:
    example_id: str
    question: str
    claims: tuple[str, ...]
    graph: ClaimGraph
    risk_scores: tuple[float, ...] | None = None
    tally: SupportTally | None = None
    annotations: AnnotationSet | None = None

    def __post_init__(self):
        if self.graph.n_claims != len(self.claims):
            raise ValueError(
                f"{self.example_id}: adjacency dimension {self.graph.n_claims} "
                f"!= {len(self.claims)} claims"
            )
        if self.risk_scores is not None and len(self.risk_scores) != len(self.claims):
            raise ValueError(f"{self.example_id}: risk score length mismatch")
        if self.annotations is not None and len(
            self.annotations.claim_labels
        ) != len(self.claims):
            raise ValueError(f"{self.example_id}: annotation length mismatch")

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DatasetRecord":
        tally = None
        if "tally" in obj:
            tally = SupportTally(
                supports=tuple(obj["tally"]["supports"]),
                contradicts=tuple(obj["tally"]["contradicts"]),
                unrelated=tuple(obj["tally"]["unrelated"]),
            )
        annotations = None
        if "annotations" in obj:
            annotations = AnnotationSet.from_json_obj(obj["annotations"])
        scores = obj.get("risk_scores")
        return cls(
            example_id=str(obj["example_id"]),
            question=obj.get("question", ""),
            claims=tuple(obj["claims"]),
            graph=parse_adjacency(obj["adjacency"]),
            risk_scores=tuple(scores) if scores is not None else None,
            tally=tally,
            annotations=annotations,
        )

    def to_json_obj(self) -> dict:
        obj: dict = {
            "example_id": self.example_id,
            "question": self.question,
            "claims": list(self.claims),
            "adjacency": emit_adjacency(self.graph),
        }
        if self.risk_scores is not None:
            obj["risk_scores"] = list(self.risk_scores)
        if self.tally is not None:
            obj["tally"] = {
                "supports": list(self.tally.supports),
                "contradicts": list(self.tally.contradicts),
                "unrelated": list(self.tally.unrelated),
            }
        if self.annotations is not None:
            obj["annotations"] = self.annotations.to_json_obj()
        return obj


def load_records(path: str | Path) -> list[DatasetRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(DatasetRecord.from_json_obj(json.loads(line)))
    return records


def dump_jsonl(path: str | Path, objs: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def save_records(path: str | Path, records: list[DatasetRecord]) -> None:
    dump_jsonl(path, [r.to_json_obj() for r in records])
