"""Confidence-region triage and evaluation metrics (accuracy, overkill, escape)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from jointscope.classifier import ScoreRecord, validate_confidence


class TriageDecision(str, Enum):
    NON_DEFECTIVE = "non_defective"
    POSSIBLY_DEFECTIVE = "possibly_defective"
    DEFECTIVE = "defective"

    @property
    def severity(self) -> int:
        return {"non_defective": 0, "possibly_defective": 1, "defective": 2}[self.value]


@dataclass(frozen=True)
class TriageThresholds:
    t_low: float = 0.3
    t_high: float = 0.7

    def __post_init__(self):
        if not 0.0 <= self.t_low <= self.t_high <= 1.0:
            raise ValueError(f"need 0 <= t_low <= t_high <= 1, got ({self.t_low}, {self.t_high})")


def triage(confidence: float, thresholds: TriageThresholds) -> TriageDecision:
    """Closed middle band: confidences equal to either threshold go to review."""
    c = validate_confidence(confidence)
    if c < thresholds.t_low:
        return TriageDecision.NON_DEFECTIVE
    if c > thresholds.t_high:
        return TriageDecision.DEFECTIVE
    return TriageDecision.POSSIBLY_DEFECTIVE


@dataclass(frozen=True)
class EvalReport:
    n: int
    accuracy: float
    overkill: float
    escape: float
    threshold: float

    def __post_init__(self):
        total = self.accuracy + self.overkill + self.escape
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"accuracy + overkill + escape must equal 1, got {total}")
        for name in ("accuracy", "overkill", "escape"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "overkill": self.overkill,
            "escape": self.escape,
            "threshold": self.threshold,
        }


def predict_label(confidence: float, threshold: float = 0.5) -> int:
    """Threshold with >= so ties fail safe toward defective."""
    return 1 if confidence >= threshold else 0


def evaluate(records: list[ScoreRecord], threshold: float = 0.5) -> EvalReport:
    """Accuracy, overkill (FP/n), and escape (FN/n) at a confidence threshold."""
    if not records:
        raise ValueError("records must be non-empty")
    correct = fp = fn = 0
    for rec in records:
        if rec.oracle_label is None:
            raise ValueError(f"record {rec.id!r} is missing its oracle label")
        pred = predict_label(rec.confidence, threshold)
        if pred == rec.oracle_label:
            correct += 1
        elif pred == 1:
            fp += 1
        else:
            fn += 1
    n = len(records)
    return EvalReport(
        n=n,
        accuracy=correct / n,
        overkill=fp / n,
        escape=fn / n,
        threshold=threshold,
    )


def format_eval_row(report: EvalReport, name: str = "") -> str:
    """One table row with percentages at one decimal place."""
    cells = [
        f"{report.accuracy * 100:.1f}",
        f"{report.overkill * 100:.1f}",
        f"{report.escape * 100:.1f}",
    ]
    prefix = f"{name:<24}" if name else ""
    return prefix + "  ".join(f"{c:>8}" for c in cells)


def format_eval_table(rows: list[tuple[str, EvalReport]]) -> str:
    header = f"{'Backend':<24}" + "  ".join(
        f"{h:>8}" for h in ("Acc (%)", "Over (%)", "Esc (%)")
    )
    return "\n".join([header] + [format_eval_row(rep, name) for name, rep in rows])
