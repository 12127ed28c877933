"""HTTP + JSON API over the case store, plus dataset-level analytics routes."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from jointscope.classifier import ReferenceScorer, ScoreRecord, ScorerBackend
from jointscope.config import PipelineConfig
from jointscope.soxai import export_soxai_scatter
from jointscope.synthgen import DatasetManifest, ManifestEntry
from jointscope.triage import TriageThresholds, evaluate
from jointscope.trust import trust_report
from jointscope.service.pipeline import load_normalized, run_pipeline
from jointscope.service.store import (
    CaseState,
    CaseStore,
    ReviewVerdict,
    StateConflictError,
    UnknownCaseError,
)
from jointscope.xai import explain_image, export_explanation, render_overlay
from jointscope.synthgen import save_png


class DatasetBody(BaseModel):
    manifest_path: str


class ThresholdsBody(BaseModel):
    t_low: float = 0.3
    t_high: float = 0.7


class InspectBody(BaseModel):
    dataset_id: str
    thresholds: Optional[ThresholdsBody] = None


class VerdictBody(BaseModel):
    decision: str
    operator: str
    note: Optional[str] = None


def create_app(
    data_dir: str | Path,
    config: Optional[PipelineConfig] = None,
    backend: Optional[ScorerBackend] = None,
    static_dir: Optional[str | Path] = None,
) -> FastAPI:
    config = config or PipelineConfig()
    backend = backend or ReferenceScorer()
    store = CaseStore(data_dir, fsync=config.fsync)
    app = FastAPI(title="jointscope review service")
    app.state.store = store
    app.state.config = config
    app.state.backend = backend
    app.state.datasets: dict[str, DatasetManifest] = {}

    def get_case_or_404(case_id: str):
        try:
            return store.get(case_id)
        except UnknownCaseError:
            raise HTTPException(status_code=404, detail=f"unknown case {case_id!r}")

    @app.post("/api/datasets")
    def register_dataset(body: DatasetBody):
        path = Path(body.manifest_path)
        if not path.exists():
            raise HTTPException(status_code=400, detail=f"manifest not found: {path}")
        manifest = DatasetManifest.load(path)
        dataset_id = f"ds-{len(app.state.datasets) + 1:03d}"
        app.state.datasets[dataset_id] = manifest
        return {"dataset_id": dataset_id, "entries": len(manifest)}

    @app.post("/api/inspect")
    def inspect(body: InspectBody):
        manifest = app.state.datasets.get(body.dataset_id)
        if manifest is None:
            raise HTTPException(status_code=404, detail=f"unknown dataset {body.dataset_id!r}")
        thresholds = (TriageThresholds(body.thresholds.t_low, body.thresholds.t_high)
                      if body.thresholds else config.thresholds)
        summary = run_pipeline(manifest, backend, thresholds, config, store)
        return summary.to_json()

    @app.get("/api/queue")
    def queue(
        state: Optional[str] = None,
        page: int = Query(1, ge=1),
        page_size: int = Query(50, ge=1, le=500),
    ):
        if state is not None:
            try:
                CaseState(state)
            except ValueError:
                raise HTTPException(status_code=400, detail=f"unknown state {state!r}")
        cases, total = store.queue(state=state, page=page, page_size=page_size)
        return {
            "cases": [c.to_json() for c in cases],
            "page": page,
            "page_size": page_size,
            "total": total,
        }

    @app.get("/api/cases/{case_id}")
    def get_case(case_id: str):
        return get_case_or_404(case_id).to_json()

    @app.get("/api/cases/{case_id}/image")
    def get_case_image(case_id: str):
        case = get_case_or_404(case_id)
        if not case.image_path or not Path(case.image_path).exists():
            raise HTTPException(status_code=404, detail="image not available")
        return FileResponse(case.image_path, media_type="image/png")

    @app.get("/api/cases/{case_id}/explanation")
    def get_case_explanation(case_id: str):
        case = get_case_or_404(case_id)
        if not case.explanation_path or not Path(case.explanation_path).exists():
            raise HTTPException(status_code=404, detail="no explanation for this case")
        return FileResponse(case.explanation_path, media_type="application/json")

    @app.get("/api/cases/{case_id}/overlay")
    def get_case_overlay(case_id: str):
        case = get_case_or_404(case_id)
        if not case.overlay_path or not Path(case.overlay_path).exists():
            raise HTTPException(status_code=404, detail="no overlay for this case")
        return FileResponse(case.overlay_path, media_type="image/png")

    @app.post("/api/cases/{case_id}/verdict")
    def post_verdict(case_id: str, body: VerdictBody):
        get_case_or_404(case_id)
        try:
            verdict = ReviewVerdict(case_id=case_id, decision=body.decision,
                                    operator=body.operator, note=body.note)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        try:
            case = store.submit_verdict(verdict)
        except StateConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return case.to_json()

    @app.post("/api/cases/{case_id}/rework")
    def post_rework(case_id: str):
        get_case_or_404(case_id)
        try:
            case = store.rework(case_id)
        except StateConflictError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return case.to_json()

    def scored_records() -> list[ScoreRecord]:
        records = []
        for case in store.all_cases():
            if case.confidence is not None and case.oracle_label is not None:
                records.append(ScoreRecord(
                    id=case.id, confidence=case.confidence, oracle_label=case.oracle_label,
                ))
        return records

    @app.get("/api/metrics")
    def metrics(threshold: float = 0.5):
        records = scored_records()
        if not records:
            raise HTTPException(
                status_code=400,
                detail="metrics require scored cases with oracle labels in the manifest",
            )
        return evaluate(records, threshold=threshold).to_json()

    @app.get("/api/trust")
    def trust(threshold: float = 0.5):
        records = scored_records()
        if not records:
            raise HTTPException(
                status_code=400,
                detail="trust analytics require scored cases with oracle labels",
            )
        return trust_report(records, threshold=threshold, params=config.trust).to_json()

    @app.get("/api/soxai")
    def soxai_scatter():
        cases = [c for c in store.all_cases() if c.confidence is not None]
        if len(cases) < 8:
            raise HTTPException(status_code=400, detail="need at least 8 scored cases")
        entries, explanations, images = [], {}, {}
        art_dir = store.data_dir / "artifacts"
        for case in cases:
            image = load_normalized(case.image_path)
            explanation = explain_image(
                image, backend,
                grid=config.xai.grid, subdivide=config.xai.subdivide,
                rho=config.xai.rho, baseline=config.xai.baseline,
            )
            images[case.id] = image
            explanations[case.id] = explanation
            entries.append(ManifestEntry(
                id=case.id, image_path=case.image_path, mask_path="",
                label="defective" if case.oracle_label else "non_defective",
                kind=case.kind or "unknown",
            ))
        points = export_soxai_scatter(
            DatasetManifest(entries), explanations, art_dir / "soxai",
            params=config.tsne, images=images,
        )
        return JSONResponse([p.to_json() for p in points])

    @app.post("/api/cases/{case_id}/explain")
    def compute_explanation(case_id: str):
        """Compute and persist an explanation on demand (review tooling)."""
        case = get_case_or_404(case_id)
        if case.confidence is None:
            raise HTTPException(status_code=409, detail="case not scored yet")
        image = load_normalized(case.image_path)
        explanation = explain_image(
            image, backend,
            grid=config.xai.grid, subdivide=config.xai.subdivide,
            rho=config.xai.rho, baseline=config.xai.baseline,
        )
        case_dir = store.data_dir / "artifacts" / case_id
        export_explanation(explanation, case_dir, "explanation")
        save_png(case_dir / "overlay.png", render_overlay(image, explanation))
        case = store.attach_explanation(
            case_id,
            explanation_path=str(case_dir / "explanation.json"),
            overlay_path=str(case_dir / "overlay.png"),
        )
        return case.to_json()

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app
