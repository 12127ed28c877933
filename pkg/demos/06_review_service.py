"""The operator workflow end to end, in-process: inspect a batch, watch the
possibly-defective cases land in the review queue with explanation artifacts
attached, submit a verdict, and prove the event log replays to the same state.

For the real HTTP service run:  jointscope serve --port 8080 --data-dir DATA
(the frontend/ console talks to that API).
"""

import tempfile
from pathlib import Path

from jointscope import PipelineConfig, ReferenceScorer, TriageThresholds, generate_dataset
from jointscope.service.pipeline import run_pipeline
from jointscope.service.store import CaseStore, ReviewVerdict, StateConflictError, replay_state

workdir = Path(tempfile.mkdtemp(prefix="jointscope_demo_"))
manifest = generate_dataset(30, 0.5, workdir / "ds", seed=13)

store = CaseStore(workdir / "data")
summary = run_pipeline(manifest, ReferenceScorer(), TriageThresholds(0.2, 0.93),
                       PipelineConfig(), store)
print("pipeline summary:", summary.to_json())

queue, total = store.queue(state="in_review")
print(f"review queue holds {total} case(s)")
for case in queue:
    print(f"  {case.id}: confidence {case.confidence:.3f}, "
          f"explanation at {Path(case.explanation_path).name}")

if queue:
    target = queue[0]
    store.submit_verdict(ReviewVerdict(case_id=target.id, decision="defective",
                                       operator="demo-operator", note="clear splash"))
    print(f"verdict recorded: {target.id} -> {store.get(target.id).state.value}")
    try:
        store.submit_verdict(ReviewVerdict(case_id=target.id, decision="non_defective",
                                           operator="second-operator"))
    except StateConflictError as exc:
        print(f"stale second verdict rejected: {exc}")

live = {case.id: case for case in store.all_cases()}
store.save_snapshot()
store.close()

replayed = replay_state(workdir / "data" / "events.jsonl")
print("replayed state equals live state:", replayed == live)
print(f"event log + artifacts under {workdir}")
