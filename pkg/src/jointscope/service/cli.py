"""Command-line entry point for the inspection toolkit."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from jointscope.classifier import ReferenceScorer, load_external_scores, measure_latency
from jointscope.config import PipelineConfig
from jointscope.soxai import export_soxai_scatter
from jointscope.synthgen import (
    DatasetManifest,
    DefectKind,
    JointSpec,
    generate_dataset,
    generate_joint,
    stratified_split,
)
from jointscope.triage import TriageThresholds, evaluate, format_eval_table
from jointscope.trust import trust_report
from jointscope.service.pipeline import load_normalized, run_pipeline
from jointscope.service.store import CaseStore
from jointscope.xai import explain_image, export_explanation, render_overlay
from jointscope.synthgen import save_png


def _load_config(path: str | None) -> PipelineConfig:
    return PipelineConfig.from_json(path) if path else PipelineConfig()


def cmd_gen_data(args, config):
    kinds = None
    if args.kinds:
        kinds = {DefectKind(k): float(w) for k, w in json.loads(args.kinds).items()}
    manifest = generate_dataset(
        n=args.n, defect_ratio=args.defect_ratio, out_dir=args.out,
        kinds=kinds, seed=args.seed,
    )
    manifest_path = Path(args.out) / "manifest.jsonl"
    manifest.save(manifest_path)
    print(f"wrote {len(manifest)} entries to {manifest_path}")


def cmd_split(args, config):
    manifest = DatasetManifest.load(args.manifest)
    fractions = tuple(float(f) for f in args.fractions.split(","))
    manifest = stratified_split(manifest, fractions=fractions, seed=args.seed)
    out = args.out or args.manifest
    manifest.save(out)
    counts: dict[str, int] = {}
    for e in manifest.entries:
        counts[f"{e.split}/{e.label}"] = counts.get(f"{e.split}/{e.label}", 0) + 1
    print(json.dumps(counts, indent=2, sort_keys=True))


def cmd_inspect(args, config):
    manifest = DatasetManifest.load(args.manifest)
    store = CaseStore(args.data_dir, fsync=config.fsync)
    thresholds = config.thresholds
    scores_by_id = None
    backend = ReferenceScorer()
    if args.scores:
        scores_by_id = {r.id: r.confidence for r in load_external_scores(args.scores)}
        backend = None  # explanations need an image scorer, not a score table
    summary = run_pipeline(manifest, backend, thresholds, config, store, scores_by_id=scores_by_id)
    store.save_snapshot()
    print(json.dumps(summary.to_json(), indent=2))


def cmd_eval(args, config):
    records = load_external_scores(args.scores)
    report = evaluate(records, threshold=args.threshold)
    print(format_eval_table([(args.name, report)]))
    print(json.dumps(report.to_json(), indent=2))


def cmd_explain(args, config):
    target = args.target
    backend = ReferenceScorer()
    out_dir = Path(args.out)
    if Path(target).exists():
        image = load_normalized(target)
        stem = Path(target).stem
    else:
        store = CaseStore(args.data_dir, fsync=config.fsync)
        case = store.get(target)
        image = load_normalized(case.image_path)
        stem = target
    explanation = explain_image(
        image, backend,
        grid=config.xai.grid, subdivide=config.xai.subdivide,
        rho=config.xai.rho, baseline=config.xai.baseline,
    )
    doc = export_explanation(explanation, out_dir, stem)
    save_png(out_dir / f"{stem}_overlay.png", render_overlay(image, explanation))
    print(f"confidence {doc['base_confidence']:.3f}, "
          f"{len(doc['factors'])} factor(s), mass fraction {doc['mass_fraction']:.2f}")
    print(f"artifacts in {out_dir}")


def cmd_soxai(args, config):
    manifest = DatasetManifest.load(args.manifest)
    backend = ReferenceScorer()
    explanations, images = {}, {}
    for entry in manifest.entries:
        image = load_normalized(entry.image_path)
        images[entry.id] = image
        explanations[entry.id] = explain_image(
            image, backend,
            grid=config.xai.grid, subdivide=config.xai.subdivide,
            rho=config.xai.rho, baseline=config.xai.baseline,
        )
    points = export_soxai_scatter(manifest, explanations, args.out,
                                  params=config.tsne, images=images)
    print(f"wrote {len(points)} scatter points to {args.out}")


def cmd_trust(args, config):
    records = load_external_scores(args.scores)
    report = trust_report(records, threshold=args.threshold, params=config.trust)
    print(json.dumps(report.to_json(), indent=2))


def cmd_bench_latency(args, config):
    backend = ReferenceScorer()
    image, _ = generate_joint(JointSpec(seed=args.seed, kind=DefectKind.NONE))
    normalized = image.astype(np.float32) / 255.0
    mean_s = measure_latency(backend, normalized, warmups=args.warmups, runs=args.runs)
    print(f"{backend.name}: {mean_s * 1000:.3f} ms "
          f"(mean of {args.runs} runs after {args.warmups} warm-ups)")


def cmd_serve(args, config):
    import uvicorn

    from jointscope.service.api import create_app

    app = create_app(args.data_dir, config=config, static_dir=args.console)
    uvicorn.run(app, host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jointscope",
                                     description="solder-joint inspection toolkit")
    parser.add_argument("--config", help="JSON config file with thresholds, XAI, t-SNE, trust settings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic labeled dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--defect-ratio", type=float, default=0.5)
    p.add_argument("--kinds", help='JSON weight table, e.g. {"splash": 2, "burn": 1}')
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_gen_data)

    p = sub.add_parser("split", help="assign stratified train/val/test splits")
    p.add_argument("--manifest", required=True)
    p.add_argument("--fractions", default="0.6,0.2,0.2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output manifest path (default: in place)")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("inspect", help="run the scoring + triage pipeline over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--data-dir", required=True)
    p.add_argument("--scores", help="line-delimited JSON scores file to use instead of the reference scorer")
    p.set_defaults(fn=cmd_inspect)

    p = sub.add_parser("eval", help="accuracy/overkill/escape from a labeled scores file")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--name", default="scores")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("explain", help="explain a case id or an image file")
    p.add_argument("target", help="case id (with --data-dir) or image path")
    p.add_argument("--data-dir", default="data")
    p.add_argument("--out", default="explanations")
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("soxai", help="dataset-level explanation scatter")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_soxai)

    p = sub.add_parser("trust", help="trust matrix and net trust score from a scores file")
    p.add_argument("--scores", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(fn=cmd_trust)

    p = sub.add_parser("bench-latency", help="time the reference scorer")
    p.add_argument("--warmups", type=int, default=20)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_bench_latency)

    p = sub.add_parser("serve", help="start the review service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--console", help="path to the built operator console (frontend/dist)")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = _load_config(args.config)
    try:
        args.fn(args, config)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
