"""Dataset-level explanation auditing.

Each explanation is embedded as a fixed 91-dim description of the image
regions its critical factors cover: an 8x8 average-pooled grayscale of the
factor-masked image (64), an 8-bin per-channel color histogram of factor
pixels (24), and [area fraction, centroid x, centroid y] (3). Embeddings are
mapped to 2-D with t-SNE and exported as a scatter with thumbnails, which
makes recurring explanation patterns (and dataset biases) visible at a glance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.offsetbox import AnnotationBbox, OffsetImage

from jointscope.synthgen import DatasetManifest, load_png, save_png
from jointscope.tsne import TsneParams, run_tsne
from jointscope.xai import Explanation, union_factor_mask

IMG_SIZE = 256
POOL_BINS = 8
HIST_BINS = 8
EMBED_DIM = POOL_BINS * POOL_BINS + 3 * HIST_BINS + 3  # 91


@dataclass
class ExplanationEmbedding:
    id: str
    vector: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.vector).all():
            raise ValueError(f"embedding {self.id!r} has non-finite components")


@dataclass
class ScatterPoint:
    id: str
    x: float
    y: float
    kind: str = "unknown"
    thumbnail_path: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.id, "x": self.x, "y": self.y,
            "kind": self.kind, "thumbnail_path": self.thumbnail_path,
        }


def embed_explanation(
    image: np.ndarray,
    explanation: Explanation,
    scorer_features: np.ndarray | None = None,
    id: str = "",
) -> ExplanationEmbedding:
    """Embed the factor-covered regions of a normalized image into R^91.

    With no factors the pooled and histogram blocks are zero, area is 0, and
    the centroid defaults to the image center. Optional scorer features are
    appended, growing the dimension accordingly.
    """
    mask = union_factor_mask(explanation)
    gray = np.asarray(image, np.float64).mean(axis=2)

    masked = np.where(mask, gray, 0.0)
    block = IMG_SIZE // POOL_BINS
    pooled = masked.reshape(POOL_BINS, block, POOL_BINS, block).mean(axis=(1, 3))

    hist = np.zeros((3, HIST_BINS), np.float64)
    area = int(mask.sum())
    if area > 0:
        pixels = np.asarray(image, np.float64)[mask]
        for ch in range(3):
            counts, _ = np.histogram(pixels[:, ch], bins=HIST_BINS, range=(0.0, 1.0))
            total = counts.sum()
            if total > 0:
                hist[ch] = counts / total
        rows, cols = np.nonzero(mask)
        centroid = ((cols.mean() + 0.5) / IMG_SIZE, (rows.mean() + 0.5) / IMG_SIZE)
    else:
        centroid = (0.5, 0.5)

    stats = np.array([area / (IMG_SIZE * IMG_SIZE), centroid[0], centroid[1]], np.float64)
    vec = np.concatenate([pooled.ravel(), hist.ravel(), stats])
    if scorer_features is not None:
        vec = np.concatenate([vec, np.asarray(scorer_features, np.float64).ravel()])
    return ExplanationEmbedding(id=id, vector=vec)


def export_soxai_scatter(
    manifest: DatasetManifest,
    explanations: dict[str, Explanation],
    out_dir: str | Path,
    params: TsneParams = TsneParams(),
    images: dict[str, np.ndarray] | None = None,
) -> list[ScatterPoint]:
    """Embed every entry's explanation, run t-SNE, and write scatter artifacts.

    Produces out_dir/soxai.jsonl (line-delimited scatter points),
    out_dir/soxai.png (thumbnails placed at their 2-D locations), and a
    thumbs/ directory. `images` may supply preloaded normalized images keyed
    by id; anything missing is read from the manifest image paths.
    """
    missing = [e.id for e in manifest.entries if e.id not in explanations]
    if missing:
        raise ValueError(f"explanations missing for ids: {missing}")

    out_dir = Path(out_dir)
    thumbs_dir = out_dir / "thumbs"
    thumbs_dir.mkdir(parents=True, exist_ok=True)

    ids, vectors, thumb_paths, kinds = [], [], [], []
    for entry in manifest.entries:
        if images is not None and entry.id in images:
            img = images[entry.id]
        else:
            img = load_png(entry.image_path).astype(np.float32) / 255.0
        emb = embed_explanation(img, explanations[entry.id], id=entry.id)
        ids.append(entry.id)
        vectors.append(emb.vector)
        kinds.append(entry.kind)
        thumb = (img[::8, ::8] * 255.0).astype(np.uint8)
        tpath = thumbs_dir / f"{entry.id}.png"
        save_png(tpath, thumb)
        thumb_paths.append(str(tpath))

    coords, _ = run_tsne(np.array(vectors), params)

    points = [
        ScatterPoint(id=i, x=float(cx), y=float(cy), kind=k, thumbnail_path=t)
        for i, (cx, cy), k, t in zip(ids, coords, kinds, thumb_paths)
    ]
    with open(out_dir / "soxai.jsonl", "w") as fh:
        for pt in points:
            fh.write(json.dumps(pt.to_json()) + "\n")
    _plot_scatter(points, out_dir / "soxai.png")
    return points


def _plot_scatter(points: list[ScatterPoint], path: Path) -> None:
    fig, ax = plt.subplots(figsize=(10, 10))
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    kinds = sorted({p.kind for p in points})
    cmap = plt.get_cmap("tab10")
    color_of = {k: cmap(i % 10) for i, k in enumerate(kinds)}
    for k in kinds:
        sel = [p for p in points if p.kind == k]
        ax.scatter([p.x for p in sel], [p.y for p in sel],
                   s=12, color=color_of[k], label=k, zorder=1)
    for p in points:
        try:
            thumb = load_png(p.thumbnail_path)
        except OSError:
            continue
        box = AnnotationBbox(
            OffsetImage(thumb, zoom=0.9),
            (p.x, p.y),
            frameon=True,
            bboxprops={"edgecolor": color_of[p.kind], "linewidth": 1.2},
        )
        ax.add_artist(box)
    ax.set_xlim(min(xs) * 1.1 - 1, max(xs) * 1.1 + 1)
    ax.set_ylim(min(ys) * 1.1 - 1, max(ys) * 1.1 + 1)
    ax.legend(loc="upper right")
    ax.set_title("explanation map (t-SNE of explanation embeddings)")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
