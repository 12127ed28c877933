"""Question-answer trust, the 2x2 trust matrix, and the net trust score.

A sample's trust rewards confidence when the model answers like the oracle
(confidence**alpha) and penalizes confidence when it does not
((1 - confidence)**beta). Confidence here means confidence in the *predicted*
answer: a raw defect confidence c predicts non-defective with confidence 1 - c.
"""

from __future__ import annotations

from dataclasses import dataclass

from jointscope.classifier import ScoreRecord, validate_confidence
from jointscope.triage import predict_label


@dataclass(frozen=True)
class TrustParams:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


def qa_trust(confidence: float, predicted: int, oracle: int, params: TrustParams = TrustParams()) -> float:
    """Trust of one answered question; `confidence` is in the predicted answer."""
    c = validate_confidence(confidence)
    if predicted == oracle:
        return c ** params.alpha
    return (1.0 - c) ** params.beta


def confidence_in_prediction(raw_confidence: float, predicted: int) -> float:
    return raw_confidence if predicted == 1 else 1.0 - raw_confidence


@dataclass
class TrustMatrix:
    """cells[oracle][predicted] = mean question-answer trust; None when unseen."""

    cells: list[list[float | None]]
    counts: list[list[int]]

    def to_json(self) -> dict:
        return {"matrix": self.cells, "counts": self.counts}


@dataclass
class TrustReport:
    matrix: TrustMatrix
    net_trust_score: float
    n: int
    params: TrustParams

    def to_json(self) -> dict:
        return {
            "matrix": self.matrix.cells,
            "counts": self.matrix.counts,
            "net_trust_score": self.net_trust_score,
            "n": self.n,
            "params": {"alpha": self.params.alpha, "beta": self.params.beta},
        }


def _record_trust(rec: ScoreRecord, threshold: float, params: TrustParams) -> tuple[int, int, float]:
    if rec.oracle_label is None:
        raise ValueError(f"record {rec.id!r} is missing its oracle label")
    pred = predict_label(rec.confidence, threshold)
    conf = confidence_in_prediction(rec.confidence, pred)
    return rec.oracle_label, pred, qa_trust(conf, pred, rec.oracle_label, params)


def trust_matrix(
    records: list[ScoreRecord],
    threshold: float = 0.5,
    params: TrustParams = TrustParams(),
) -> TrustMatrix:
    sums = [[0.0, 0.0], [0.0, 0.0]]
    counts = [[0, 0], [0, 0]]
    for rec in records:
        oracle, pred, t = _record_trust(rec, threshold, params)
        sums[oracle][pred] += t
        counts[oracle][pred] += 1
    cells: list[list[float | None]] = [
        [sums[o][p] / counts[o][p] if counts[o][p] else None for p in (0, 1)]
        for o in (0, 1)
    ]
    return TrustMatrix(cells=cells, counts=counts)


def net_trust_score(
    records: list[ScoreRecord],
    threshold: float = 0.5,
    params: TrustParams = TrustParams(),
) -> float:
    """Plain mean of question-answer trust across all records."""
    if not records:
        raise ValueError("records must be non-empty")
    total = 0.0
    for rec in records:
        total += _record_trust(rec, threshold, params)[2]
    return total / len(records)


def trust_report(
    records: list[ScoreRecord],
    threshold: float = 0.5,
    params: TrustParams = TrustParams(),
) -> TrustReport:
    return TrustReport(
        matrix=trust_matrix(records, threshold, params),
        net_trust_score=net_trust_score(records, threshold, params),
        n=len(records),
        params=params,
    )
