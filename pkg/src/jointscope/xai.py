"""Occlusion-based quantitative explanations.

A coarse pass occludes grid cells and records how much each occlusion moves
the scorer's confidence. Cells carrying most of the positive impact are
grouped into connected critical factors; a fine pass re-occludes subcells
inside each factor to produce a regional heatmap of relative importance.
deletion_score() audits that a mask region is genuinely load-bearing, and
render_overlay() draws factor outlines plus heatmaps for the operator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from matplotlib import colormaps
from scipy import ndimage

from jointscope.classifier import ScorerBackend
from jointscope.synthgen import save_png

IMG_SIZE = 256

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], bool)


def resolve_baseline(image: np.ndarray, baseline) -> np.ndarray:
    """Baseline fill color: 'mean' (image mean color), 'gray' (0.5), a scalar,
    or an RGB triple."""
    if isinstance(baseline, str):
        if baseline == "mean":
            return image.reshape(-1, 3).mean(axis=0).astype(np.float32)
        if baseline == "gray":
            return np.full(3, 0.5, np.float32)
        raise ValueError(f"unknown baseline {baseline!r}")
    arr = np.asarray(baseline, dtype=np.float32)
    if arr.ndim == 0:
        arr = np.full(3, float(arr), np.float32)
    if arr.shape != (3,):
        raise ValueError(f"baseline must be scalar or RGB triple, got shape {arr.shape}")
    return arr


class ScorerRegionError(RuntimeError):
    def __init__(self, region: str, cause: BaseException):
        super().__init__(f"scorer failed on {region}: {cause}")
        self.region = region


def _score_with_patch(image, scorer, y0, y1, x0, x1, fill, region_name):
    saved = image[y0:y1, x0:x1].copy()
    image[y0:y1, x0:x1] = fill
    try:
        return float(scorer.score(image))
    except ScorerRegionError:
        raise
    except Exception as exc:
        raise ScorerRegionError(region_name, exc) from exc
    finally:
        image[y0:y1, x0:x1] = saved


@dataclass
class ImportanceMap:
    grid: np.ndarray  # (G, G) float64, grid[r, c] = confidence drop from occluding that cell
    cell_px: int
    base_confidence: float

    def __post_init__(self):
        g = self.grid.shape[0]
        if self.grid.shape != (g, g) or g * self.cell_px != IMG_SIZE:
            raise ValueError(f"grid {self.grid.shape} x cell_px {self.cell_px} must tile {IMG_SIZE}")
        if not np.isfinite(self.grid).all():
            raise ValueError("importance values must be finite")

    @property
    def grid_size(self) -> int:
        return self.grid.shape[0]


@dataclass
class CriticalFactor:
    cells: list[tuple[int, int]]  # (row, col) grid coords, 4-connected
    mask: np.ndarray  # bool (256, 256)
    heatmap: np.ndarray | None = None  # float32 (256, 256), max 1 in-factor, 0 outside mask


@dataclass
class Explanation:
    importance: ImportanceMap
    factors: list[CriticalFactor] = field(default_factory=list)
    mass_fraction: float = 1.0


def occlusion_importance(
    image: np.ndarray,
    scorer: ScorerBackend,
    grid: int = 16,
    baseline="mean",
) -> ImportanceMap:
    """Per-cell confidence drop when the cell is replaced by the baseline color."""
    if IMG_SIZE % grid != 0:
        raise ValueError(f"grid {grid} must divide {IMG_SIZE}")
    cell = IMG_SIZE // grid
    fill = resolve_baseline(image, baseline)
    work = np.array(image, dtype=np.float32, copy=True)
    try:
        base = float(scorer.score(work))
    except Exception as exc:
        raise ScorerRegionError("base image", exc) from exc
    deltas = np.zeros((grid, grid), np.float64)
    for r in range(grid):
        for c in range(grid):
            occluded = _score_with_patch(
                work, scorer, r * cell, (r + 1) * cell, c * cell, (c + 1) * cell,
                fill, f"cell ({r}, {c})",
            )
            deltas[r, c] = base - occluded
    return ImportanceMap(grid=deltas, cell_px=cell, base_confidence=base)


def extract_critical_factors(imap: ImportanceMap, rho: float = 0.8) -> list[CriticalFactor]:
    """Smallest descending-impact cell set covering rho of the positive impact,
    split into 4-connected components. Cells with non-positive impact never
    qualify; an all-non-positive map yields no factors."""
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    g = imap.grid_size
    flat = imap.grid.ravel()
    total_positive = flat[flat > 0].sum()
    if total_positive <= 0.0:
        return []
    # stable sort on -delta keeps row-major order among ties
    order = np.argsort(-flat, kind="stable")
    selected = np.zeros(g * g, bool)
    covered = 0.0
    for idx in order:
        if flat[idx] <= 0.0 or covered >= rho * total_positive:
            break
        selected[idx] = True
        covered += flat[idx]
    sel_grid = selected.reshape(g, g)
    labels, n_comp = ndimage.label(sel_grid, structure=_FOUR_CONN)
    factors = []
    for comp in range(1, n_comp + 1):
        rows, cols = np.nonzero(labels == comp)
        mask = np.zeros((IMG_SIZE, IMG_SIZE), bool)
        for r, c in zip(rows, cols):
            mask[r * imap.cell_px:(r + 1) * imap.cell_px,
                 c * imap.cell_px:(c + 1) * imap.cell_px] = True
        factors.append(CriticalFactor(cells=list(zip(rows.tolist(), cols.tolist())), mask=mask))
    return factors


def selected_mass_fraction(imap: ImportanceMap, factors: list[CriticalFactor]) -> float:
    flat = imap.grid
    total_positive = flat[flat > 0].sum()
    if total_positive <= 0.0 or not factors:
        return 1.0
    covered = sum(flat[r, c] for f in factors for r, c in f.cells)
    return float(covered / total_positive)


def refine_within_factors(
    image: np.ndarray,
    scorer: ScorerBackend,
    imap: ImportanceMap,
    factors: list[CriticalFactor],
    subdivide: int = 4,
    baseline="mean",
) -> Explanation:
    """Re-occlude subdivide x subdivide subcells inside each factor's cells.

    Subcell impacts are clamped at zero and rescaled to a per-factor max of 1,
    giving the regional heatmap. The factor mask tightens to the subcells that
    carry positive impact; a factor with no positive subcell keeps its full
    area with a flat heatmap.
    """
    if imap.cell_px % subdivide != 0:
        raise ValueError(f"subdivide {subdivide} must divide cell_px {imap.cell_px}")
    sub_px = imap.cell_px // subdivide
    fill = resolve_baseline(image, baseline)
    work = np.array(image, dtype=np.float32, copy=True)
    base = imap.base_confidence

    refined = []
    for f in factors:
        sub_deltas = {}
        for r, c in f.cells:
            for sr in range(subdivide):
                for sc in range(subdivide):
                    y0 = r * imap.cell_px + sr * sub_px
                    x0 = c * imap.cell_px + sc * sub_px
                    occluded = _score_with_patch(
                        work, scorer, y0, y0 + sub_px, x0, x0 + sub_px, fill,
                        f"subcell ({r}, {c}, {sr}, {sc})",
                    )
                    sub_deltas[(y0, x0)] = max(0.0, base - occluded)
        peak = max(sub_deltas.values())
        mask = np.zeros((IMG_SIZE, IMG_SIZE), bool)
        heat = np.zeros((IMG_SIZE, IMG_SIZE), np.float32)
        for (y0, x0), d in sub_deltas.items():
            if peak > 0.0 and d > 0.0:
                mask[y0:y0 + sub_px, x0:x0 + sub_px] = True
                heat[y0:y0 + sub_px, x0:x0 + sub_px] = d / peak
            elif peak == 0.0:
                mask[y0:y0 + sub_px, x0:x0 + sub_px] = True
                heat[y0:y0 + sub_px, x0:x0 + sub_px] = 1.0
        refined.append(CriticalFactor(cells=f.cells, mask=mask, heatmap=heat))

    return Explanation(
        importance=imap,
        factors=refined,
        mass_fraction=selected_mass_fraction(imap, factors),
    )


def deletion_score(image: np.ndarray, scorer: ScorerBackend, mask: np.ndarray, baseline="mean") -> float:
    """Confidence drop when the masked region is replaced by the baseline."""
    if mask.shape != (IMG_SIZE, IMG_SIZE):
        raise ValueError(f"mask must be {IMG_SIZE}x{IMG_SIZE}, got {mask.shape}")
    if not mask.any():
        return 0.0
    fill = resolve_baseline(image, baseline)
    work = np.array(image, dtype=np.float32, copy=True)
    base = float(scorer.score(work))
    work[mask] = fill
    return base - float(scorer.score(work))


def explain_image(
    image: np.ndarray,
    scorer: ScorerBackend,
    grid: int = 16,
    subdivide: int = 4,
    rho: float = 0.8,
    baseline="mean",
) -> Explanation:
    """Full coarse + refine pipeline for one image."""
    imap = occlusion_importance(image, scorer, grid=grid, baseline=baseline)
    factors = extract_critical_factors(imap, rho=rho)
    return refine_within_factors(image, scorer, imap, factors, subdivide=subdivide, baseline=baseline)


def union_factor_mask(explanation: Explanation) -> np.ndarray:
    mask = np.zeros((IMG_SIZE, IMG_SIZE), bool)
    for f in explanation.factors:
        mask |= f.mask
    return mask


_HEAT_CMAP = colormaps["jet"]


def render_overlay(image: np.ndarray, explanation: Explanation) -> np.ndarray:
    """RGBA overlay: white 1-px factor outlines, heatmap blended at alpha 0.5
    inside factors, everything else untouched."""
    base = np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)
    out = np.dstack([base, np.full((IMG_SIZE, IMG_SIZE), 255, np.uint8)])
    for f in explanation.factors:
        boundary = f.mask & ~ndimage.binary_erosion(f.mask, structure=_FOUR_CONN)
        interior = f.mask & ~boundary
        if f.heatmap is not None and interior.any():
            heat_rgb = (_HEAT_CMAP(f.heatmap)[..., :3] * 255.0)
            blended = np.rint(0.5 * base.astype(np.float64) + 0.5 * heat_rgb).astype(np.uint8)
            out[interior, :3] = blended[interior]
        out[boundary, :3] = 255
    return out


def factor_bbox(mask: np.ndarray) -> tuple[int, int, int, int]:
    rows, cols = np.nonzero(mask)
    return int(rows.min()), int(cols.min()), int(rows.max()) + 1, int(cols.max()) + 1


def export_explanation(explanation: Explanation, out_dir: str | Path, stem: str) -> dict:
    """Write the explanation JSON plus one grayscale heatmap PNG per factor."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    factors_json = []
    for i, f in enumerate(explanation.factors):
        entry: dict = {
            "cells": [list(c) for c in f.cells],
            "impact": float(sum(explanation.importance.grid[r, c] for r, c in f.cells)),
        }
        if f.mask.any():
            r0, c0, r1, c1 = factor_bbox(f.mask)
            entry["bbox"] = [r0, c0, r1, c1]
            if f.heatmap is not None:
                png_path = out_dir / f"{stem}_factor{i}.png"
                crop = np.clip(np.rint(f.heatmap[r0:r1, c0:c1] * 255.0), 0, 255).astype(np.uint8)
                save_png(png_path, crop)
                entry["heatmap_png_path"] = str(png_path)
        factors_json.append(entry)
    doc = {
        "grid_size": explanation.importance.grid_size,
        "cell_px": explanation.importance.cell_px,
        "base_confidence": explanation.importance.base_confidence,
        "cell_deltas": explanation.importance.grid.ravel().tolist(),
        "mass_fraction": explanation.mass_fraction,
        "factors": factors_json,
    }
    json_path = out_dir / f"{stem}.json"
    with open(json_path, "w") as fh:
        json.dump(doc, fh)
    return doc
