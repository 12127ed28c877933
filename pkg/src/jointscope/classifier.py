"""Confidence-scoring backends and the inference latency harness.

The reference scorer is a fixed (untrained) logistic model over five
handcrafted defect features. It exists so every downstream consumer -- triage,
occlusion explanations, dataset audits, trust metrics -- can run end to end
without a neural network, while real model predictions can be ingested from a
line-delimited JSON scores file.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Protocol, runtime_checkable

import cv2
import numpy as np


def validate_confidence(value: float, context: str = "confidence") -> float:
    value = float(value)
    if not np.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{context} must be a finite value in [0, 1], got {value}")
    return value


@dataclass
class ScoreRecord:
    id: str
    confidence: float
    oracle_label: Optional[int] = None  # 1 = defective, 0 = non-defective

    def __post_init__(self):
        self.confidence = validate_confidence(self.confidence, f"record {self.id!r} confidence")
        if self.oracle_label is not None and self.oracle_label not in (0, 1):
            raise ValueError(f"record {self.id!r} label must be 0 or 1, got {self.oracle_label}")


@runtime_checkable
class ScorerBackend(Protocol):
    """Anything that maps a normalized 256x256x3 image to a defect confidence."""

    def score(self, image: np.ndarray) -> float: ...


# ---------------------------------------------------------------------------
# reference scorer
# ---------------------------------------------------------------------------

# Fixed logistic weights over the five features below. Chosen so a clean joint
# stays well under 0.5 and each defect signature pushes past it.
REFERENCE_BIAS = -3.0
REFERENCE_WEIGHTS = np.array([
    3.2,   # off-blob solder mass (splash)
    3.0,   # wetting-boundary roughness, via exposed pad area (poor wetting)
    3.0,   # dark low-saturation mass (burn, crack)
    2.8,   # thin bright-structure response (fiber)
    2.2,   # high-frequency ripple energy on the blob (disturbed solder)
])
FEATURE_NAMES = (
    "off_blob_mass",
    "boundary_roughness",
    "dark_patch_fraction",
    "thin_structure_response",
    "ripple_energy",
)

_TOPHAT_KERNEL = cv2.getStructuringElement(cv2.MORPH_ELLIPSE, (5, 5))


def _center_distance_grid() -> np.ndarray:
    yy, xx = np.mgrid[0:256, 0:256].astype(np.float32)
    return np.hypot(xx - 127.5, yy - 127.5)


_CENTER_DIST = _center_distance_grid()


_ERODE_KERNEL = np.ones((5, 5), np.uint8)


def reference_features(image: np.ndarray) -> np.ndarray:
    """Five defect features from a normalized 256x256x3 image.

    All are non-negative counts/sums normalized to roughly unit scale on a
    clearly defective joint, so occluding defect evidence lowers them. The
    scorer sits on the hot path of the occlusion explainer, so everything
    runs on a quantized uint8 pipeline with OpenCV primitives; thresholds
    below are the uint8 equivalents of fractional levels.
    """
    img = np.asarray(image, dtype=np.float32)
    img8 = cv2.convertScaleAbs(img, alpha=255.0)
    planes = np.ascontiguousarray(img8.transpose(2, 0, 1))
    r, g, b = planes[0], planes[1], planes[2]
    gray = cv2.addWeighted(cv2.addWeighted(r, 1.0 / 3.0, g, 1.0 / 3.0, 0.0), 1.0, b, 1.0 / 3.0, 0.0)
    sat = cv2.subtract(cv2.max(cv2.max(r, g), b), cv2.min(cv2.min(r, g), b))
    lowsat = cv2.compare(sat, 64, cv2.CMP_LT)  # < 0.25

    solderish = cv2.bitwise_and(cv2.compare(gray, 153, cv2.CMP_GT), lowsat)  # > 0.60
    n_solder = cv2.countNonZero(solderish)
    blob_u8 = None
    off_mass = 0.0
    if n_solder:
        n_blob, blob_labels = cv2.connectedComponents(solderish, connectivity=4)
        counts = np.bincount(blob_labels.ravel(), minlength=n_blob)
        counts[0] = 0
        main = int(counts.argmax())
        blob_u8 = (blob_labels == main).astype(np.uint8)
        off_mass = float(n_solder - counts[main])
    f_off = off_mass / 200.0

    # exposed copper beyond the thin pad ring a clean joint shows
    coppery = cv2.bitwise_and(
        cv2.bitwise_and(
            cv2.compare(cv2.subtract(r, b), 64, cv2.CMP_GT),   # r - b > 0.25
            cv2.compare(cv2.subtract(r, g), 25, cv2.CMP_GT),   # r - g > 0.10
        ),
        cv2.compare(r, 115, cv2.CMP_GT),                       # r > 0.45
    )
    n_cop = cv2.countNonZero(coppery)
    if n_cop > 30:
        ring_r = cv2.minMaxLoc(_CENTER_DIST, mask=coppery)[1]
        allowance = 2.0 * np.pi * float(ring_r) * 4.0
        f_rough = max(0.0, n_cop - allowance) / 400.0
    else:
        f_rough = 0.0

    dark = cv2.bitwise_and(cv2.compare(gray, 49, cv2.CMP_LT), lowsat)  # < 0.19
    f_dark = float(cv2.countNonZero(dark)) / 150.0

    # near-white pixels protruding above their 5x5 opening: bright AND thin.
    # Count-based on purpose: occluder patches are never near-white and a
    # patch beside a thin structure cannot change its count, so occlusion
    # deltas stay pinned to the structure itself.
    opened = cv2.morphologyEx(gray, cv2.MORPH_OPEN, _TOPHAT_KERNEL)
    thin = cv2.bitwise_and(
        cv2.compare(gray, 243, cv2.CMP_GT),                    # > 0.955
        cv2.compare(cv2.subtract(gray, opened), 7, cv2.CMP_GT),  # protrudes > 0.03
    )
    f_thin = float(cv2.countNonZero(thin)) / 150.0

    # the floor (10/255 ~ 0.04) sits above the blob's grain + dome curvature,
    # and thin glints plus their blur halo are excluded: they belong to
    # f_thin, and keeping them out stops their halo from counting as ripple
    f_ripple = 0.0
    if blob_u8 is not None:
        blob_eroded = cv2.erode(blob_u8, _ERODE_KERNEL)
        ripple_zone = cv2.bitwise_and(
            blob_eroded * 255, cv2.bitwise_not(cv2.dilate(thin, _ERODE_KERNEL))
        )
        n_core = cv2.countNonZero(ripple_zone)
        if n_core:
            resid = cv2.subtract(cv2.absdiff(gray, cv2.blur(gray, (5, 5))), 10)
            f_ripple = (float(cv2.mean(resid, mask=ripple_zone)[0]) * n_core / 255.0) / 45.0

    return np.array([f_off, f_rough, f_dark, f_thin, f_ripple], dtype=np.float64)


_KNEE = 1.5


def _compress(phi: np.ndarray) -> np.ndarray:
    """Identity below the knee, log beyond it: keeps extreme evidence from
    saturating the logistic past float precision while preserving order."""
    return np.minimum(phi, _KNEE) + np.log1p(np.maximum(phi - _KNEE, 0.0))


def reference_score(image: np.ndarray) -> float:
    z = REFERENCE_BIAS + float(REFERENCE_WEIGHTS @ _compress(reference_features(image)))
    return float(1.0 / (1.0 + np.exp(-z)))


class ReferenceScorer:
    """ScorerBackend wrapper exposing the handcrafted feature vector."""

    name = "reference"

    def score(self, image: np.ndarray) -> float:
        return reference_score(image)

    def features(self, image: np.ndarray) -> np.ndarray:
        return reference_features(image)


class FunctionScorer:
    """Adapt a plain callable into a ScorerBackend (handy in tests and demos)."""

    def __init__(self, fn: Callable[[np.ndarray], float], name: str = "function"):
        self._fn = fn
        self.name = name

    def score(self, image: np.ndarray) -> float:
        return float(self._fn(image))


# ---------------------------------------------------------------------------
# external scores
# ---------------------------------------------------------------------------

def load_external_scores(path: str | Path) -> list[ScoreRecord]:
    """Parse a line-delimited JSON scores file: {id, confidence[, label]}."""
    path = Path(path)
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if "id" not in rec or "confidence" not in rec:
                raise ValueError(f"{path}:{lineno}: record requires 'id' and 'confidence'")
            label = rec.get("label")
            records.append(ScoreRecord(
                id=str(rec["id"]),
                confidence=rec["confidence"],
                oracle_label=int(label) if label is not None else None,
            ))
    return records


# ---------------------------------------------------------------------------
# latency harness
# ---------------------------------------------------------------------------

class BackendInvocationError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"backend failed on invocation {index}: {cause}")
        self.index = index


def measure_latency(
    backend: ScorerBackend,
    image: np.ndarray,
    warmups: int = 20,
    runs: int = 100,
) -> float:
    """Mean wall-clock seconds per inference over `runs` timed invocations,
    taken strictly after `warmups` untimed ones. Monotonic clock; sequential."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if warmups < 0:
        raise ValueError("warmups must be >= 0")
    durations = []
    for i in range(warmups + runs):
        start = time.perf_counter()
        try:
            backend.score(image)
        except Exception as exc:
            raise BackendInvocationError(i, exc) from exc
        elapsed = time.perf_counter() - start
        if i >= warmups:
            durations.append(elapsed)
    return float(np.mean(durations))
