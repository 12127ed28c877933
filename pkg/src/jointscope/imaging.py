"""Image preprocessing and training-time augmentation.

preprocess() stretches any RGB image to 256x256 with bilinear interpolation and
maps 8-bit values onto [0, 1]. augment() applies six independent ops, each
gated by a per-op probability, with geometric ops filling exposed borders with
the image mean color.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

TARGET_SIZE = 256


@dataclass(frozen=True)
class AugmentPolicy:
    rotation_deg: tuple[float, float] = (0.0, 45.0)
    hflip: bool = True
    vflip: bool = True
    translate_frac: float = 0.10
    brightness_jitter: float = 0.20
    contrast_jitter: float = 0.20
    per_op_probability: float = 0.5

    def __post_init__(self):
        lo, hi = self.rotation_deg
        if not 0.0 <= lo <= hi:
            raise ValueError(f"rotation range must satisfy 0 <= lo <= hi, got {self.rotation_deg}")
        if not 0.0 <= self.per_op_probability <= 1.0:
            raise ValueError("per_op_probability must be in [0, 1]")


def preprocess(image: np.ndarray) -> np.ndarray:
    """8-bit HxWx3 -> float32 256x256x3 in [0, 1] (stretch, no letterboxing)."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected HxWx3 image, got shape {image.shape}")
    h, w = image.shape[:2]
    if h < 8 or w < 8:
        raise ValueError(f"image dimensions must be >= 8, got {h}x{w}")
    out = image.astype(np.float32) / 255.0
    if (h, w) != (TARGET_SIZE, TARGET_SIZE):
        out = cv2.resize(out, (TARGET_SIZE, TARGET_SIZE), interpolation=cv2.INTER_LINEAR)
    return out


def _warp(image: np.ndarray, matrix: np.ndarray, fill: tuple[float, float, float]) -> np.ndarray:
    return cv2.warpAffine(
        image,
        matrix,
        (image.shape[1], image.shape[0]),
        flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=fill,
    )


def augment(image: np.ndarray, policy: AugmentPolicy, rng_seed: int) -> np.ndarray:
    """Apply rotation, flips, translation, brightness, and contrast jitter.

    Each op fires independently with policy.per_op_probability; magnitudes are
    drawn uniformly from the policy ranges. Deterministic in rng_seed; output
    clamped to [0, 1].
    """
    rng = np.random.default_rng([int(rng_seed), 0xA06])
    out = image
    p = policy.per_op_probability
    fill = tuple(float(c) for c in image.reshape(-1, 3).mean(axis=0))
    h, w = image.shape[:2]

    if rng.uniform() < p:
        angle = rng.uniform(*policy.rotation_deg)
        if angle != 0.0:
            m = cv2.getRotationMatrix2D((w / 2.0, h / 2.0), angle, 1.0)
            out = _warp(out, m, fill)

    if policy.hflip and rng.uniform() < p:
        out = out[:, ::-1].copy()

    if policy.vflip and rng.uniform() < p:
        out = out[::-1].copy()

    if rng.uniform() < p:
        tx = rng.uniform(-policy.translate_frac, policy.translate_frac) * w
        ty = rng.uniform(-policy.translate_frac, policy.translate_frac) * h
        if tx != 0.0 or ty != 0.0:
            m = np.array([[1.0, 0.0, tx], [0.0, 1.0, ty]], np.float32)
            out = _warp(out, m, fill)

    if rng.uniform() < p:
        delta = rng.uniform(-policy.brightness_jitter, policy.brightness_jitter)
        if delta != 0.0:
            out = out + delta

    if rng.uniform() < p:
        factor = rng.uniform(1.0 - policy.contrast_jitter, 1.0 + policy.contrast_jitter)
        if factor != 1.0:
            mean = out.mean()
            out = (out - mean) * factor + mean

    return np.clip(out, 0.0, 1.0).astype(np.float32)
