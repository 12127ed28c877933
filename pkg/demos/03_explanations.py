"""Explain a few defective joints and compare against ground truth.

Each panel row shows the joint, its occlusion-based explanation overlay
(white factor outlines + regional heatmaps), and the generator's true defect
mask. The deletion audit at the end checks the factors are load-bearing:
erasing them should move the score far more than erasing a random patch.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from jointscope import DefectKind, JointSpec, ReferenceScorer, deletion_score, explain_image, render_overlay
from jointscope.synthgen import render_joint
from jointscope.xai import union_factor_mask

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

scorer = ReferenceScorer()
cases = [DefectKind.SPLASH, DefectKind.POOR_WETTING, DefectKind.FIBER, DefectKind.BURN]

fig, axes = plt.subplots(len(cases), 3, figsize=(9.5, 3.1 * len(cases)))
rng = np.random.default_rng(2)
for row, kind in enumerate(cases):
    res = render_joint(JointSpec(seed=101 + row, kind=kind, pad_radius_px=64, board_hue=0.4))
    image = res.image.astype(np.float32) / 255.0
    explanation = explain_image(image, scorer)
    overlay = render_overlay(image, explanation)

    fmask = union_factor_mask(explanation)
    crit = deletion_score(image, scorer, fmask)
    side = max(1, int(round(np.sqrt(fmask.sum()))))
    rand_mask = np.zeros((256, 256), bool)
    r0, c0 = rng.integers(0, 256 - side, 2)
    rand_mask[r0:r0 + side, c0:c0 + side] = True
    rand = deletion_score(image, scorer, rand_mask)
    print(f"{kind.value:13s} confidence {explanation.importance.base_confidence:.3f} "
          f"factors {len(explanation.factors)}  delete-critical {crit:+.3f}  delete-random {rand:+.3f}")

    axes[row, 0].imshow(res.image)
    axes[row, 0].set_ylabel(kind.value)
    axes[row, 1].imshow(overlay)
    axes[row, 2].imshow(res.truth.defect_mask, cmap="gray")
    for col, title in enumerate(("joint", "explanation", "true mask")):
        if row == 0:
            axes[row, col].set_title(title)
        axes[row, col].set_xticks([])
        axes[row, col].set_yticks([])

fig.tight_layout()
fig.savefig(OUT / "explanations.png", dpi=110)
print(f"wrote {OUT / 'explanations.png'}")
