"""Claim-level (silver) and subset-level (gold) annotation stores.

Silver labels judge each claim on its own, conditional on its ancestors
being true; a claim set is then silver-coherent iff it is ancestor-connected
and contains no "No" label. Gold labels judge whole subsets directly and
are stored under a canonical sorted-index key so the files stay
human-editable. The empty set is coherent by definition in both oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MissingLabelError, MissingSubsetLabelError
from .graph import ClaimGraph, is_ancestor_connected
from .ladder import SubgraphLadder


def subset_key(s: frozenset[int]) -> str:
    """Canonical key for a claim set: sorted indices joined by commas."""
    return ",".join(str(v) for v in sorted(s))


def parse_subset_key(key: str) -> frozenset[int]:
    return frozenset(int(part) for part in key.split(",")) if key else frozenset()


@dataclass(frozen=True)
class AnnotationSet:
    """Labels for one example.

    ``claim_labels[i]`` is True for a "Yes" (claim i correct given its
    ancestors) and False for a "No"; None means unlabeled. ``gold`` maps
    canonical subset keys to a direct coherent/incoherent judgment and may
    be absent for datasets with only claim-level annotations.
    """

    claim_labels: tuple[bool | None, ...]
    gold: dict[str, bool] = field(default_factory=dict)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AnnotationSet":
        labels = tuple(
            {"Y": True, "N": False, None: None}[x] for x in obj["claim_labels"]
        )
        gold = {k: v == "C" for k, v in obj.get("gold", {}).items()}
        return cls(claim_labels=labels, gold=gold)

    def to_json_obj(self) -> dict:
        obj: dict = {
            "claim_labels": [
                None if x is None else ("Y" if x else "N") for x in self.claim_labels
            ]
        }
        if self.gold:
            obj["gold"] = {k: ("C" if v else "I") for k, v in sorted(self.gold.items())}
        return obj


def silver_coherent(g: ClaimGraph, s: frozenset[int], a: AnnotationSet) -> bool:
    """Claim-level verdict: ancestor-connected and free of "No" labels."""
    for v in s:
        if v >= len(a.claim_labels) or a.claim_labels[v] is None:
            raise MissingLabelError(v)
    if not is_ancestor_connected(g, s):
        return False
    return all(a.claim_labels[v] for v in s)


def gold_coherent(s: frozenset[int], a: AnnotationSet) -> bool:
    """Direct subset-level lookup; empty set is coherent by convention."""
    if not s:
        return True
    key = subset_key(s)
    if key not in a.gold:
        raise MissingSubsetLabelError(key)
    return a.gold[key]


def annotation_todo(ladder: SubgraphLadder) -> list[frozenset[int]]:
    """Distinct non-empty rung sets a subset-level annotator must label.

    Bounds the labeling effort to at most n_claims sets per example; the
    empty rung is skipped because it is coherent by convention.
    """
    seen: set[frozenset[int]] = set()
    out: list[frozenset[int]] = []
    for entry in ladder.entries:
        if entry.vertices and entry.vertices not in seen:
            seen.add(entry.vertices)
            out.append(entry.vertices)
    return out
