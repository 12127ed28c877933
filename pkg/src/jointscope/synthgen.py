"""Procedural solder-joint image generator with ground-truth defect masks.

Renders a textured PCB board, a copper pad, and a wobbly solder blob, then
injects one of six defect signatures. The defect mask records exactly the
pixels the injection wrote, so explanation quality can be measured against
pixel-level ground truth. Everything is deterministic in the spec seed.
"""

from __future__ import annotations

import colorsys
import json
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import cv2
import numpy as np
from PIL import Image

IMG_SIZE = 256

LABEL_DEFECTIVE = "defective"
LABEL_NON_DEFECTIVE = "non_defective"

SPLIT_NAMES = ("train", "val", "test")


class DefectKind(str, Enum):
    NONE = "none"
    SPLASH = "splash"
    CRACK = "crack"
    POOR_WETTING = "poor_wetting"
    FIBER = "fiber"
    BURN = "burn"
    DISTURBED = "disturbed"


DEFECT_KINDS = tuple(k for k in DefectKind if k is not DefectKind.NONE)


@dataclass(frozen=True)
class JointSpec:
    """Full recipe for one joint image; equal specs render bit-identical output."""

    seed: int
    kind: DefectKind = DefectKind.NONE
    pad_radius_px: int = 64
    board_hue: float = 0.5

    def __post_init__(self):
        if not 40 <= self.pad_radius_px <= 90:
            raise ValueError(f"pad_radius_px must be in [40, 90], got {self.pad_radius_px}")
        if not 0.0 <= self.board_hue <= 1.0:
            raise ValueError(f"board_hue must be in [0, 1], got {self.board_hue}")


@dataclass
class GroundTruth:
    label: str
    defect_mask: np.ndarray  # bool (256, 256)
    kind: DefectKind

    def __post_init__(self):
        if self.label == LABEL_NON_DEFECTIVE and self.defect_mask.any():
            raise ValueError("non-defective truth must have an empty mask")
        if self.label == LABEL_DEFECTIVE and not self.defect_mask.any():
            raise ValueError("defective truth must have a non-empty mask")


@dataclass(frozen=True)
class JointGeometry:
    """Renderer geometry, kept so tests can check masks against the pad disc."""

    pad_center: tuple[float, float]  # (x, y)
    pad_radius: float
    blob_radius: float


@dataclass
class RenderResult:
    image: np.ndarray  # uint8 (256, 256, 3)
    truth: GroundTruth
    geometry: JointGeometry


@dataclass
class ManifestEntry:
    id: str
    image_path: str
    mask_path: str
    label: str
    kind: str
    split: str = "train"

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "image_path": self.image_path,
            "mask_path": self.mask_path,
            "label": self.label,
            "kind": self.kind,
            "split": self.split,
        }


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("manifest ids must be unique")

    def __len__(self) -> int:
        return len(self.entries)

    def by_label(self) -> dict[str, list[ManifestEntry]]:
        groups: dict[str, list[ManifestEntry]] = {}
        for e in self.entries:
            groups.setdefault(e.label, []).append(e)
        return groups

    def save(self, path: str | Path) -> None:
        """Write line-delimited JSON, one entry per line, paths relative to the file."""
        path = Path(path)
        base = path.resolve().parent
        with open(path, "w") as fh:
            for e in self.entries:
                rec = e.to_json()
                for key in ("image_path", "mask_path"):
                    p = Path(rec[key])
                    if p.is_absolute():
                        try:
                            rec[key] = str(p.relative_to(base))
                        except ValueError:
                            pass  # outside the manifest dir; keep absolute
                fh.write(json.dumps(rec) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        base = path.resolve().parent
        entries = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{lineno}: malformed manifest line: {exc}") from exc
                for key in ("image_path", "mask_path"):
                    p = Path(rec[key])
                    if not p.is_absolute():
                        rec[key] = str(base / p)
                if rec["split"] not in SPLIT_NAMES:
                    raise ValueError(f"{path}:{lineno}: unknown split {rec['split']!r}")
                entries.append(ManifestEntry(**rec))
        return cls(entries)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _grids() -> tuple[np.ndarray, np.ndarray]:
    yy, xx = np.mgrid[0:IMG_SIZE, 0:IMG_SIZE]
    return xx.astype(np.float32), yy.astype(np.float32)


def _smooth_noise(rng: np.random.Generator, cells: int, amp: float) -> np.ndarray:
    coarse = rng.normal(0.0, 1.0, (cells, cells)).astype(np.float32)
    return cv2.resize(coarse, (IMG_SIZE, IMG_SIZE), interpolation=cv2.INTER_LINEAR) * amp


def _hsv(h: float, s: float, v: float) -> np.ndarray:
    return np.array(colorsys.hsv_to_rgb(h % 1.0, s, v), dtype=np.float32)


def _wobble_radius(theta: np.ndarray, base: float, coeffs: np.ndarray, phases: np.ndarray) -> np.ndarray:
    r = np.full_like(theta, base)
    for k, (a, p) in enumerate(zip(coeffs, phases), start=2):
        r += base * a * np.cos(k * theta + p)
    return r


def _wobbly_disc(xx, yy, cx, cy, radius, rng, amp=0.12) -> np.ndarray:
    """Hard-edged blob mask with a low-order radial wobble."""
    theta = np.arctan2(yy - cy, xx - cx)
    coeffs = rng.normal(0.0, amp / 3.0, 3)
    phases = rng.uniform(0.0, 2 * np.pi, 3)
    r_edge = _wobble_radius(theta, radius, coeffs, phases)
    dist = np.hypot(xx - cx, yy - cy)
    return dist <= r_edge


def _stamp_segment(canvas_mask: np.ndarray, p0, p1, half_width: float) -> None:
    """Mark pixels within half_width of the segment p0-p1 (coords are (x, y))."""
    x0, y0 = p0
    x1, y1 = p1
    pad = int(np.ceil(half_width)) + 2
    xmin = max(0, int(min(x0, x1)) - pad)
    xmax = min(IMG_SIZE - 1, int(max(x0, x1)) + pad)
    ymin = max(0, int(min(y0, y1)) - pad)
    ymax = min(IMG_SIZE - 1, int(max(y0, y1)) + pad)
    if xmin > xmax or ymin > ymax:
        return
    ys = np.arange(ymin, ymax + 1, dtype=np.float32)
    xs = np.arange(xmin, xmax + 1, dtype=np.float32)
    gx, gy = np.meshgrid(xs, ys)
    dx, dy = x1 - x0, y1 - y0
    seg_len2 = dx * dx + dy * dy
    if seg_len2 == 0:
        t = np.zeros_like(gx)
    else:
        t = np.clip(((gx - x0) * dx + (gy - y0) * dy) / seg_len2, 0.0, 1.0)
    d2 = (gx - (x0 + t * dx)) ** 2 + (gy - (y0 + t * dy)) ** 2
    canvas_mask[ymin:ymax + 1, xmin:xmax + 1] |= d2 <= half_width * half_width


def _render_base(spec: JointSpec, rng: np.random.Generator):
    """Board + pad + solder blob. All base randomness comes from `rng`, which is
    seeded from spec.seed only, so every kind shares an identical base image."""
    xx, yy = _grids()

    # board: hue mapped into the green-blue PCB range so the copper pad stays
    # chromatically unambiguous
    hue = 0.25 + 0.45 * spec.board_hue
    sat = 0.50 + 0.10 * rng.uniform()
    val = 0.40 + 0.10 * rng.uniform()
    board = np.empty((IMG_SIZE, IMG_SIZE, 3), np.float32)
    board[:] = _hsv(hue, sat, val)
    luma = _smooth_noise(rng, 16, 0.035) + _smooth_noise(rng, 64, 0.015)
    board += luma[..., None]
    board += rng.normal(0.0, 0.008, board.shape).astype(np.float32)

    cx = 128.0 + rng.uniform(-8.0, 8.0)
    cy = 128.0 + rng.uniform(-8.0, 8.0)
    pad_r = float(spec.pad_radius_px)
    dist = np.hypot(xx - cx, yy - cy)

    # copper pad with a slight radial falloff
    img = board.copy()
    pad_alpha = np.clip(pad_r + 0.5 - dist, 0.0, 1.0)[..., None]
    pad_shade = (0.88 + 0.18 * np.clip(1.0 - (dist / pad_r) ** 2, 0.0, 1.0))[..., None]
    pad_color = np.array([0.78, 0.47, 0.16], np.float32)
    img = img * (1 - pad_alpha) + pad_color * pad_shade * pad_alpha
    board_pad = img.copy()  # kept so defects can re-expose the pad

    # solder blob: thin exposed pad ring of ~3 px, dome shading, offset highlight
    blob_r = pad_r - 3.0
    theta = np.arctan2(yy - cy, xx - cx)
    coeffs = rng.normal(0.0, 0.012, 4)
    phases = rng.uniform(0.0, 2 * np.pi, 4)
    r_edge = _wobble_radius(theta, blob_r, coeffs, phases)
    blob_alpha = np.clip(r_edge + 0.5 - dist, 0.0, 1.0)
    dome = np.sqrt(np.clip(1.0 - (dist / np.maximum(r_edge, 1.0)) ** 2, 0.0, 1.0))
    hl_x = cx + 0.30 * blob_r * rng.uniform(-1, 1)
    hl_y = cy + 0.30 * blob_r * rng.uniform(-1, 1)
    highlight = 0.05 * np.exp(-((xx - hl_x) ** 2 + (yy - hl_y) ** 2) / (2 * (0.28 * blob_r) ** 2))
    v = 0.70 + 0.15 * dome + highlight
    solder = np.stack([v, v, np.clip(v * 1.03, 0.0, 1.0)], axis=-1).astype(np.float32)
    solder += rng.normal(0.0, 0.006, solder.shape).astype(np.float32)
    a = blob_alpha[..., None]
    img = img * (1 - a) + solder * a

    geom = JointGeometry(pad_center=(cx, cy), pad_radius=pad_r, blob_radius=blob_r)
    aux = {
        "xx": xx, "yy": yy, "dist": dist, "theta": theta,
        "board_pad": board_pad, "blob_alpha": blob_alpha, "r_edge": r_edge,
    }
    return img, geom, aux


def _inject_splash(img, geom, aux, rng):
    xx, yy = aux["xx"], aux["yy"]
    cx, cy = geom.pad_center
    r_s = rng.uniform(9.0, min(16.0, (108.0 - geom.pad_radius) / 1.4))
    d_min = geom.pad_radius + 1.25 * r_s + 3.0
    margin = 1.25 * r_s + 2.0
    for _ in range(32):
        phi = rng.uniform(0.0, 2 * np.pi)
        d = rng.uniform(d_min, d_min + 40.0)
        sx, sy = cx + d * np.cos(phi), cy + d * np.sin(phi)
        if margin <= sx <= IMG_SIZE - 1 - margin and margin <= sy <= IMG_SIZE - 1 - margin:
            break
    else:
        # aim at the farthest corner, which always leaves room
        corner = max([(0, 0), (0, 255), (255, 0), (255, 255)],
                     key=lambda c: np.hypot(c[0] - cx, c[1] - cy))
        phi = np.arctan2(corner[1] - cy, corner[0] - cx)
        sx, sy = cx + d_min * np.cos(phi), cy + d_min * np.sin(phi)
    mask = _wobbly_disc(xx, yy, sx, sy, r_s, rng, amp=0.10)
    sdist = np.hypot(xx - sx, yy - sy)
    dome = np.sqrt(np.clip(1.0 - (sdist / r_s) ** 2, 0.0, 1.0))
    v = 0.68 + 0.18 * dome
    img[mask] = np.stack([v, v, np.clip(v * 1.03, 0, 1)], axis=-1)[mask]
    return mask


def _inject_crack(img, geom, aux, rng):
    cx, cy = geom.pad_center
    blob_r = geom.blob_radius
    theta0 = rng.uniform(0.0, 2 * np.pi)
    ends = []
    for side in (0.0, np.pi):
        ang = theta0 + side + rng.uniform(-0.25, 0.25)
        rad = blob_r * rng.uniform(0.72, 0.85)
        ends.append((cx + rad * np.cos(ang), cy + rad * np.sin(ang)))
    perp = theta0 + np.pi / 2
    pts = [ends[0]]
    for t in (0.3, 0.5, 0.7):
        jitter = rng.uniform(-0.14, 0.14) * blob_r
        px = ends[0][0] + t * (ends[1][0] - ends[0][0]) + jitter * np.cos(perp)
        py = ends[0][1] + t * (ends[1][1] - ends[0][1]) + jitter * np.sin(perp)
        pts.append((px, py))
    pts.append(ends[1])
    width = rng.uniform(2.8, 4.0)
    line = np.zeros((IMG_SIZE, IMG_SIZE), bool)
    for p0, p1 in zip(pts[:-1], pts[1:]):
        _stamp_segment(line, p0, p1, width / 2.0)
    mask = line & (aux["dist"] <= aux["r_edge"] - 1.5)
    shade = rng.uniform(0.06, 0.11)
    img[mask] = np.array([shade, shade * 0.95, shade * 0.9], np.float32)
    return mask


def _inject_poor_wetting(img, geom, aux, rng):
    theta, dist = aux["theta"], aux["dist"]
    theta0 = rng.uniform(-np.pi, np.pi)
    span = rng.uniform(np.deg2rad(60), np.deg2rad(110))
    delta = (theta - theta0) % (2 * np.pi)
    in_sector = delta <= span
    r_in = geom.pad_radius * (0.42 + 0.08 * np.cos(3 * theta + rng.uniform(0, 2 * np.pi)))
    mask = in_sector & (dist >= r_in) & (aux["blob_alpha"] > 0.0)
    img[mask] = aux["board_pad"][mask]
    return mask


def _inject_fiber(img, geom, aux, rng):
    # a stray fiber lies across the edge of the joint: an offset chord that
    # grazes the blob rather than crossing its bright center
    cx, cy = geom.pad_center
    psi = rng.uniform(0.0, 2 * np.pi)
    off = rng.uniform(0.45, 0.95) * geom.blob_radius
    mx, my = cx + off * np.cos(psi), cy + off * np.sin(psi)
    dx, dy = np.cos(psi + np.pi / 2), np.sin(psi + np.pi / 2)
    length = rng.uniform(0.75, 1.05) * geom.pad_radius
    p0 = (mx - length * dx, my - length * dy)
    p1 = (mx + length * rng.uniform(0.8, 1.0) * dx, my + length * rng.uniform(0.8, 1.0) * dy)
    p0 = (float(np.clip(p0[0], 6, 249)), float(np.clip(p0[1], 6, 249)))
    p1 = (float(np.clip(p1[0], 6, 249)), float(np.clip(p1[1], 6, 249)))
    mid = ((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2)
    chord = np.hypot(p1[0] - p0[0], p1[1] - p0[1])
    bend = rng.uniform(-0.15, 0.30) * chord  # biased away from the blob center
    ctrl = (mid[0] + bend * np.cos(psi), mid[1] + bend * np.sin(psi))
    ts = np.linspace(0.0, 1.0, 200)
    bez_x = (1 - ts) ** 2 * p0[0] + 2 * (1 - ts) * ts * ctrl[0] + ts ** 2 * p1[0]
    bez_y = (1 - ts) ** 2 * p0[1] + 2 * (1 - ts) * ts * ctrl[1] + ts ** 2 * p1[1]
    width = rng.uniform(3.0, 4.0)
    line = np.zeros((IMG_SIZE, IMG_SIZE), bool)
    for i in range(len(ts) - 1):
        _stamp_segment(line, (bez_x[i], bez_y[i]), (bez_x[i + 1], bez_y[i + 1]), width / 2.0)
    img[line] = np.array([0.99, 0.985, 0.96], np.float32)
    return line


def _inject_burn(img, geom, aux, rng):
    xx, yy = aux["xx"], aux["yy"]
    cx, cy = geom.pad_center
    phi = rng.uniform(0.0, 2 * np.pi)
    off = rng.uniform(0.15, 0.55) * geom.blob_radius
    bx, by = cx + off * np.cos(phi), cy + off * np.sin(phi)
    r_b = rng.uniform(11.0, 18.0)
    mask = _wobbly_disc(xx, yy, bx, by, r_b, rng, amp=0.15)
    bdist = np.hypot(xx - bx, yy - by)
    shade = 0.085 + 0.055 * np.clip(bdist / r_b, 0.0, 1.0) ** 2
    char = np.stack([shade * 1.15, shade, shade * 0.9], axis=-1).astype(np.float32)
    img[mask] = char[mask]
    return mask


def _inject_disturbed(img, geom, aux, rng):
    xx, yy = aux["xx"], aux["yy"]
    mask = aux["dist"] <= aux["r_edge"] - 2.5
    amp = rng.uniform(0.07, 0.11)
    lam = rng.uniform(4.5, 6.5)
    phi = rng.uniform(0.0, np.pi)
    ph1, ph2 = rng.uniform(0, 2 * np.pi, 2)
    u = np.cos(phi) * xx + np.sin(phi) * yy
    v = np.cos(phi + 1.3) * xx + np.sin(phi + 1.3) * yy
    ripple = amp * np.sin(2 * np.pi * u / lam + ph1) + 0.5 * amp * np.sin(2 * np.pi * v / (1.7 * lam) + ph2)
    img[mask] += ripple[mask, None]
    return mask


_INJECTORS = {
    DefectKind.SPLASH: _inject_splash,
    DefectKind.CRACK: _inject_crack,
    DefectKind.POOR_WETTING: _inject_poor_wetting,
    DefectKind.FIBER: _inject_fiber,
    DefectKind.BURN: _inject_burn,
    DefectKind.DISTURBED: _inject_disturbed,
}


def render_joint(spec: JointSpec) -> RenderResult:
    """Render a joint plus its ground truth and geometry record."""
    rng_base = np.random.default_rng([int(spec.seed), 0x0B5E])
    img, geom, aux = _render_base(spec, rng_base)

    if spec.kind is DefectKind.NONE:
        mask = np.zeros((IMG_SIZE, IMG_SIZE), bool)
        label = LABEL_NON_DEFECTIVE
    else:
        kind_idx = list(DefectKind).index(spec.kind)
        rng_defect = np.random.default_rng([int(spec.seed), 0xDEF, kind_idx])
        mask = _INJECTORS[spec.kind](img, geom, aux, rng_defect)
        label = LABEL_DEFECTIVE

    out = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    truth = GroundTruth(label=label, defect_mask=mask, kind=spec.kind)
    return RenderResult(image=out, truth=truth, geometry=geom)


def generate_joint(spec: JointSpec) -> tuple[np.ndarray, GroundTruth]:
    res = render_joint(spec)
    return res.image, res.truth


# ---------------------------------------------------------------------------
# dataset generation and splitting
# ---------------------------------------------------------------------------

def save_png(path: str | Path, arr: np.ndarray) -> None:
    Image.fromarray(arr).save(str(path))


def load_png(path: str | Path) -> np.ndarray:
    with Image.open(str(path)) as im:
        return np.asarray(im)


def save_mask_png(path: str | Path, mask: np.ndarray) -> None:
    save_png(path, (mask.astype(np.uint8) * 255))


def load_mask_png(path: str | Path) -> np.ndarray:
    return load_png(path) >= 128


def generate_dataset(
    n: int,
    defect_ratio: float,
    out_dir: str | Path,
    kinds: dict[DefectKind, float] | None = None,
    seed: int = 0,
) -> DatasetManifest:
    """Render n joints into out_dir with exactly round(n * defect_ratio) defective.

    Defect kinds are drawn from the `kinds` weight table (uniform over all six
    when omitted). Every entry starts in the train split; use stratified_split
    to assign real splits.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= defect_ratio <= 1.0:
        raise ValueError("defect_ratio must be in [0, 1]")
    if kinds is None:
        kinds = {k: 1.0 for k in DEFECT_KINDS}
    kinds = {DefectKind(k): float(w) for k, w in kinds.items() if float(w) > 0.0}
    n_def = int(np.floor(n * defect_ratio + 0.5))
    if n_def > 0 and not kinds:
        raise ValueError("kind weight table is empty but defect_ratio > 0")

    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    mask_dir = out_dir / "masks"
    img_dir.mkdir(parents=True, exist_ok=True)
    mask_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng([int(seed), 0xDA7A])
    labels = np.zeros(n, dtype=bool)
    labels[:n_def] = True
    labels = labels[rng.permutation(n)]

    kind_names = sorted(kinds, key=lambda k: k.value)
    weights = np.array([kinds[k] for k in kind_names], dtype=np.float64)
    weights /= weights.sum()

    entries = []
    for i in range(n):
        if labels[i]:
            kind = kind_names[rng.choice(len(kind_names), p=weights)]
        else:
            kind = DefectKind.NONE
        spec = JointSpec(
            seed=int(rng.integers(0, 2**63 - 1)),
            kind=kind,
            pad_radius_px=int(rng.integers(44, 85)),
            board_hue=float(rng.uniform()),
        )
        image, truth = generate_joint(spec)
        jid = f"j{i:05d}"
        image_path = img_dir / f"{jid}.png"
        mask_path = mask_dir / f"{jid}.png"
        save_png(image_path, image)
        save_mask_png(mask_path, truth.defect_mask)
        entries.append(ManifestEntry(
            id=jid,
            image_path=str(image_path.resolve()),
            mask_path=str(mask_path.resolve()),
            label=truth.label,
            kind=kind.value,
        ))
    return DatasetManifest(entries)


def _class_split_counts(n: int, fractions: tuple[float, float, float]) -> tuple[int, int, int]:
    """Integer allocation for one class: val/test take floors, with one leftover
    unit promoted to val when the floor remainders sum past a whole sample, so
    every split stays within one sample of its exact share."""
    f_train, f_val, f_test = fractions
    val_exact = f_val * n
    test_exact = f_test * n
    n_val = int(np.floor(val_exact))
    n_test = int(np.floor(test_exact))
    if (val_exact - n_val) + (test_exact - n_test) > 1.0:
        n_val += 1
    n_train = n - n_val - n_test
    return n_train, n_val, n_test


def stratified_split(
    manifest: DatasetManifest,
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
) -> DatasetManifest:
    """Assign train/val/test splits stratified by label, via a seeded permutation."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    if any(f < 0 for f in fractions):
        raise ValueError("fractions must be non-negative")

    rng = np.random.default_rng([int(seed), 0x5917])
    split_by_id: dict[str, str] = {}
    for label in sorted(manifest.by_label()):
        group = manifest.by_label()[label]
        if len(group) < 3:
            warnings.warn(
                f"class {label!r} has only {len(group)} samples; assigning all to train",
                stacklevel=2,
            )
            for e in group:
                split_by_id[e.id] = "train"
            continue
        n_train, n_val, n_test = _class_split_counts(len(group), fractions)
        order = rng.permutation(len(group))
        for pos, idx in enumerate(order):
            if pos < n_train:
                split = "train"
            elif pos < n_train + n_val:
                split = "val"
            else:
                split = "test"
            split_by_id[group[idx].id] = split

    entries = [replace(e, split=split_by_id[e.id]) for e in manifest.entries]
    return DatasetManifest(entries)
