"""Conformal filtering of language-model claim graphs.

Calibrates a split-conformal risk threshold on annotated examples, then
filters new outputs down to coherently ordered claim subsets whose
probability of being fully factual meets the requested level.
"""

from .annotations import AnnotationSet, gold_coherent, silver_coherent, subset_key
from .conformal import (
    CalibrationArtifact,
    calibrate,
    filter_output,
    independent_filter,
    independent_nonconformity,
    nonconformity,
    posthoc_filter,
    quantile_index,
)
from .dataset import DatasetRecord, load_records, save_records
from .errors import ClaimFilterError
from .estimator import ConformalClaimFilter
from .graph import (
    ClaimGraph,
    ValidationReport,
    ancestors,
    assemble_reference_graph,
    descendants,
    edit_distance,
    emit_adjacency,
    is_ancestor_connected,
    linear_graph,
    parse_adjacency,
    topological_order,
    validate_deducibility_graph,
)
from .ladder import SubgraphLadder, generate, select
from .scoring import SupportTally, break_ties, descendant_weighted, risk_from_tally
from .simulate import CoverageReport, SimConfig, coverage_experiment, retention_sweep

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "CalibrationArtifact",
    "ClaimFilterError",
    "ClaimGraph",
    "ConformalClaimFilter",
    "CoverageReport",
    "DatasetRecord",
    "SimConfig",
    "SubgraphLadder",
    "SupportTally",
    "ValidationReport",
    "ancestors",
    "assemble_reference_graph",
    "break_ties",
    "calibrate",
    "coverage_experiment",
    "descendant_weighted",
    "descendants",
    "edit_distance",
    "emit_adjacency",
    "filter_output",
    "generate",
    "gold_coherent",
    "independent_filter",
    "independent_nonconformity",
    "is_ancestor_connected",
    "linear_graph",
    "load_records",
    "nonconformity",
    "parse_adjacency",
    "posthoc_filter",
    "quantile_index",
    "retention_sweep",
    "risk_from_tally",
    "save_records",
    "select",
    "silver_coherent",
    "subset_key",
    "topological_order",
    "validate_deducibility_graph",
]
