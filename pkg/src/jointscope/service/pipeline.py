"""End-to-end inspection run: preprocess -> score -> triage -> persist.

Explanations are computed eagerly, but only for cases landing in the review
queue; auto-passed and auto-flagged cases skip the occlusion passes entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from jointscope.classifier import ScorerBackend
from jointscope.config import PipelineConfig
from jointscope.imaging import preprocess
from jointscope.synthgen import DatasetManifest, load_png, save_png
from jointscope.triage import TriageDecision, TriageThresholds, triage
from jointscope.xai import explain_image, export_explanation, render_overlay
from jointscope.service.store import CaseStore

LABEL_TO_INT = {"defective": 1, "non_defective": 0}


@dataclass
class PipelineSummary:
    total: int = 0
    auto_defect: int = 0
    in_review: int = 0
    auto_pass: int = 0
    failed: int = 0
    counts_by_triage: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "auto_defect": self.auto_defect,
            "in_review": self.in_review,
            "auto_pass": self.auto_pass,
            "failed": self.failed,
        }


def load_normalized(image_path: str | Path) -> np.ndarray:
    arr = load_png(image_path)
    if arr.ndim == 2:
        arr = np.repeat(arr[..., None], 3, axis=2)
    return preprocess(arr[..., :3])


def run_pipeline(
    manifest: DatasetManifest,
    backend: Optional[ScorerBackend],
    thresholds: TriageThresholds,
    config: PipelineConfig,
    store: CaseStore,
    scores_by_id: Optional[dict[str, float]] = None,
) -> PipelineSummary:
    """Inspect every manifest entry, persisting events through the store.

    Scores come from the backend unless scores_by_id overrides them (ingested
    model predictions). Review-queue cases get an explanation computed with
    the backend and stored beside the event log; without a backend (pure
    score-file runs) review cases carry no explanation. Unreadable images are
    marked failed and the run continues.
    """
    if backend is None and scores_by_id is None:
        raise ValueError("need a scorer backend or a scores_by_id map")
    summary = PipelineSummary()
    artifacts_dir = store.data_dir / "artifacts"

    for entry in manifest.entries:
        summary.total += 1
        store.ingest(
            entry.id,
            image_path=entry.image_path,
            oracle_label=LABEL_TO_INT.get(entry.label),
            kind=entry.kind,
        )
        try:
            image = load_normalized(entry.image_path)
        except Exception as exc:
            store.mark_failed(entry.id, f"unreadable image: {exc}")
            summary.failed += 1
            continue

        if scores_by_id is not None:
            if entry.id not in scores_by_id:
                store.mark_failed(entry.id, "no external score for this id")
                summary.failed += 1
                continue
            confidence = float(scores_by_id[entry.id])
        else:
            confidence = float(backend.score(image))
        store.mark_scored(entry.id, confidence)

        decision = triage(confidence, thresholds)
        store.mark_triaged(entry.id, decision, thresholds)
        if decision is TriageDecision.DEFECTIVE:
            summary.auto_defect += 1
        elif decision is TriageDecision.NON_DEFECTIVE:
            summary.auto_pass += 1
        else:
            summary.in_review += 1
            if backend is not None:
                explanation = explain_image(
                    image, backend,
                    grid=config.xai.grid,
                    subdivide=config.xai.subdivide,
                    rho=config.xai.rho,
                    baseline=config.xai.baseline,
                )
                case_dir = artifacts_dir / entry.id
                export_explanation(explanation, case_dir, "explanation")
                overlay = render_overlay(image, explanation)
                overlay_path = case_dir / "overlay.png"
                save_png(overlay_path, overlay)
                store.attach_explanation(
                    entry.id,
                    explanation_path=str(case_dir / "explanation.json"),
                    overlay_path=str(overlay_path),
                )
        summary.counts_by_triage[decision.value] = summary.counts_by_triage.get(decision.value, 0) + 1

    return summary
