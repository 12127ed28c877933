"""Global JSON configuration shared by the CLI and the review service."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from jointscope.imaging import AugmentPolicy
from jointscope.triage import TriageThresholds
from jointscope.trust import TrustParams
from jointscope.tsne import TsneParams


@dataclass
class XaiConfig:
    grid: int = 16
    subdivide: int = 4
    rho: float = 0.8
    baseline: str = "mean"


@dataclass
class PipelineConfig:
    thresholds: TriageThresholds = field(default_factory=TriageThresholds)
    eval_threshold: float = 0.5
    xai: XaiConfig = field(default_factory=XaiConfig)
    tsne: TsneParams = field(default_factory=TsneParams)
    trust: TrustParams = field(default_factory=TrustParams)
    augment: AugmentPolicy = field(default_factory=AugmentPolicy)
    fsync: str = "never"  # "always" | "never"

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        with open(path) as fh:
            raw = json.load(fh)
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        kwargs: dict = {}
        if "thresholds" in raw:
            kwargs["thresholds"] = TriageThresholds(**raw["thresholds"])
        if "eval_threshold" in raw:
            kwargs["eval_threshold"] = float(raw["eval_threshold"])
        if "xai" in raw:
            kwargs["xai"] = XaiConfig(**raw["xai"])
        if "tsne" in raw:
            kwargs["tsne"] = TsneParams(**raw["tsne"])
        if "trust" in raw:
            kwargs["trust"] = TrustParams(**raw["trust"])
        if "augment" in raw:
            aug = dict(raw["augment"])
            if "rotation_deg" in aug:
                aug["rotation_deg"] = tuple(aug["rotation_deg"])
            kwargs["augment"] = AugmentPolicy(**aug)
        if "fsync" in raw:
            if raw["fsync"] not in ("always", "never"):
                raise ValueError(f"fsync must be 'always' or 'never', got {raw['fsync']!r}")
            kwargs["fsync"] = raw["fsync"]
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
