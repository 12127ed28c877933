"""Explainable solder-joint inspection toolkit.

Scores joint images with pluggable confidence backends, triages them into
non-defective / possibly-defective / defective bands, explains decisions via
occlusion-based critical factors with regional heatmaps, audits whole datasets
through explanation embeddings + t-SNE, quantifies model trust, and routes
review cases through an event-sourced service.
"""

from jointscope.config import PipelineConfig
from jointscope.synthgen import (
    DefectKind,
    JointSpec,
    GroundTruth,
    DatasetManifest,
    generate_joint,
    generate_dataset,
    stratified_split,
)
from jointscope.imaging import AugmentPolicy, preprocess, augment
from jointscope.classifier import (
    ScoreRecord,
    ScorerBackend,
    ReferenceScorer,
    reference_score,
    load_external_scores,
    measure_latency,
)
from jointscope.triage import (
    TriageThresholds,
    TriageDecision,
    EvalReport,
    triage,
    evaluate,
    format_eval_row,
    format_eval_table,
)
from jointscope.xai import (
    ImportanceMap,
    CriticalFactor,
    Explanation,
    occlusion_importance,
    extract_critical_factors,
    refine_within_factors,
    deletion_score,
    render_overlay,
    explain_image,
)
from jointscope.tsne import TsneParams, tsne
from jointscope.soxai import ScatterPoint, embed_explanation, export_soxai_scatter
from jointscope.trust import (
    TrustParams,
    TrustMatrix,
    TrustReport,
    qa_trust,
    trust_matrix,
    net_trust_score,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "DefectKind",
    "JointSpec",
    "GroundTruth",
    "DatasetManifest",
    "generate_joint",
    "generate_dataset",
    "stratified_split",
    "AugmentPolicy",
    "preprocess",
    "augment",
    "ScoreRecord",
    "ScorerBackend",
    "ReferenceScorer",
    "reference_score",
    "load_external_scores",
    "measure_latency",
    "TriageThresholds",
    "TriageDecision",
    "EvalReport",
    "triage",
    "evaluate",
    "format_eval_row",
    "format_eval_table",
    "ImportanceMap",
    "CriticalFactor",
    "Explanation",
    "occlusion_importance",
    "extract_critical_factors",
    "refine_within_factors",
    "deletion_score",
    "render_overlay",
    "explain_image",
    "TsneParams",
    "tsne",
    "ScatterPoint",
    "embed_explanation",
    "export_soxai_scatter",
    "TrustParams",
    "TrustMatrix",
    "TrustReport",
    "qa_trust",
    "trust_matrix",
    "net_trust_score",
]
