"""Score a synthetic batch, triage it into the three confidence regions, and
print the accuracy / overkill / escape table."""

from collections import Counter
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jointscope import (
    ReferenceScorer,
    ScoreRecord,
    TriageThresholds,
    evaluate,
    format_eval_table,
    generate_dataset,
    triage,
)
from jointscope.synthgen import load_png

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

manifest = generate_dataset(80, 0.5, OUT / "triage_ds", seed=21)
scorer = ReferenceScorer()

records, decisions = [], Counter()
scores_by_label = {"defective": [], "non_defective": []}
thresholds = TriageThresholds(0.3, 0.7)
for entry in manifest.entries:
    image = load_png(entry.image_path).astype(np.float32) / 255.0
    confidence = scorer.score(image)
    scores_by_label[entry.label].append(confidence)
    records.append(ScoreRecord(id=entry.id, confidence=confidence,
                               oracle_label=1 if entry.label == "defective" else 0))
    decisions[triage(confidence, thresholds).value] += 1

print("triage counts:", dict(decisions))
print(format_eval_table([("reference scorer", evaluate(records))]))

fig, ax = plt.subplots(figsize=(7, 4))
bins = np.linspace(0, 1, 41)
ax.hist(scores_by_label["non_defective"], bins=bins, alpha=0.6, label="good joints")
ax.hist(scores_by_label["defective"], bins=bins, alpha=0.6, label="defective joints")
for t in (thresholds.t_low, thresholds.t_high):
    ax.axvline(t, color="k", linestyle="--", linewidth=1)
ax.set_xlabel("defect confidence")
ax.set_ylabel("count")
ax.legend()
ax.set_title("confidence regions: pass / review / repair")
fig.tight_layout()
fig.savefig(OUT / "triage_histogram.png", dpi=110)
print(f"wrote {OUT / 'triage_histogram.png'}")
