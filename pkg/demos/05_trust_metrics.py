"""Trust quantification: per-answer trust, the 2x2 trust matrix, and the net
trust score, on two synthetic models -- a well-behaved one and an
overconfident one that is maximally sure even when wrong."""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jointscope import ScoreRecord, net_trust_score, trust_matrix

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

rng = np.random.default_rng(3)


def simulate(n, accuracy, confidence_when_right, confidence_when_wrong):
    records = []
    for i in range(n):
        oracle = int(rng.integers(0, 2))
        correct = rng.uniform() < accuracy
        conf_in_answer = confidence_when_right if correct else confidence_when_wrong
        answer = oracle if correct else 1 - oracle
        raw = conf_in_answer if answer == 1 else 1.0 - conf_in_answer
        records.append(ScoreRecord(id=f"r{i}", confidence=float(raw), oracle_label=oracle))
    return records


calibrated = simulate(2000, accuracy=0.9, confidence_when_right=0.85, confidence_when_wrong=0.6)
overconfident = simulate(2000, accuracy=0.9, confidence_when_right=0.99, confidence_when_wrong=0.97)

fig, axes = plt.subplots(1, 2, figsize=(9, 4))
for ax, (name, records) in zip(axes, [("calibrated", calibrated), ("overconfident", overconfident)]):
    matrix = trust_matrix(records)
    nts = net_trust_score(records)
    cells = np.array([[c if c is not None else np.nan for c in row] for row in matrix.cells])
    im = ax.imshow(cells, vmin=0, vmax=1, cmap="RdYlGn")
    for o in (0, 1):
        for p in (0, 1):
            label = "n/a" if matrix.counts[o][p] == 0 else f"{cells[o][p]:.2f}\n(n={matrix.counts[o][p]})"
            ax.text(p, o, label, ha="center", va="center")
    ax.set_xticks([0, 1], ["pred good", "pred defect"])
    ax.set_yticks([0, 1], ["truly good", "truly defect"])
    ax.set_title(f"{name}: net trust {nts:.3f}")
    print(f"{name:13s} net trust score {nts:.3f}")
fig.colorbar(im, ax=axes, shrink=0.8)
fig.savefig(OUT / "trust_matrices.png", dpi=110)
print(f"wrote {OUT / 'trust_matrices.png'}")
print("same accuracy, similar net scores -- but the off-diagonal cells collapse for the")
print("overconfident model: its mistakes arrive at full confidence, which is exactly the")
print("failure mode a scalar summary can hide and the matrix makes visible")
