"""Event-sourced case store for the review workflow.

An append-only line-delimited JSON log is the source of truth; in-memory
state is a fold over it. All mutations funnel through one lock (single-writer
discipline), verdicts use check-state-then-transition under that lock, and a
torn final line left by a crash is skipped on replay.
"""

from __future__ import annotations

import json
import os
import threading
import time
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from jointscope.triage import TriageDecision


class CaseState(str, Enum):
    PENDING = "pending"
    SCORED = "scored"
    AUTO_DEFECT = "auto_defect"
    IN_REVIEW = "in_review"
    AUTO_PASS = "auto_pass"
    REVIEWED_DEFECT = "reviewed_defect"
    REVIEWED_PASS = "reviewed_pass"
    REWORKED = "reworked"
    FAILED = "failed"


ALLOWED_TRANSITIONS: dict[CaseState, frozenset[CaseState]] = {
    CaseState.PENDING: frozenset({CaseState.SCORED, CaseState.FAILED}),
    CaseState.SCORED: frozenset({CaseState.AUTO_DEFECT, CaseState.IN_REVIEW, CaseState.AUTO_PASS}),
    CaseState.IN_REVIEW: frozenset({CaseState.REVIEWED_DEFECT, CaseState.REVIEWED_PASS}),
    CaseState.AUTO_DEFECT: frozenset({CaseState.REWORKED}),
    CaseState.REVIEWED_DEFECT: frozenset({CaseState.REWORKED}),
    CaseState.AUTO_PASS: frozenset(),
    CaseState.REVIEWED_PASS: frozenset(),
    CaseState.REWORKED: frozenset(),
    CaseState.FAILED: frozenset(),
}

TRIAGE_TO_STATE = {
    TriageDecision.DEFECTIVE: CaseState.AUTO_DEFECT,
    TriageDecision.POSSIBLY_DEFECTIVE: CaseState.IN_REVIEW,
    TriageDecision.NON_DEFECTIVE: CaseState.AUTO_PASS,
}

EVENT_KINDS = ("ingested", "scored", "triaged", "explained", "verdict", "reworked", "failed")


class StoreError(Exception):
    pass


class UnknownCaseError(StoreError):
    pass


class StateConflictError(StoreError):
    pass


class IntegrityError(StoreError):
    pass


@dataclass(frozen=True)
class Event:
    seq: int
    timestamp: float
    case_id: str
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "timestamp": self.timestamp,
            "case_id": self.case_id,
            "kind": self.kind,
            "payload": self.payload,
        }


@dataclass(frozen=True)
class ReviewVerdict:
    case_id: str
    decision: str  # "defective" | "non_defective"
    operator: str
    note: Optional[str] = None

    def __post_init__(self):
        if self.decision not in ("defective", "non_defective"):
            raise ValueError(f"decision must be defective/non_defective, got {self.decision!r}")


@dataclass
class JointCase:
    id: str
    image_path: str = ""
    confidence: Optional[float] = None
    triage: Optional[str] = None
    state: CaseState = CaseState.PENDING
    verdict_by: Optional[str] = None
    verdict_decision: Optional[str] = None
    verdict_note: Optional[str] = None
    oracle_label: Optional[int] = None
    kind: Optional[str] = None
    explanation_path: Optional[str] = None
    overlay_path: Optional[str] = None
    error: Optional[str] = None
    timestamps: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "image_path": self.image_path,
            "confidence": self.confidence,
            "triage": self.triage,
            "state": self.state.value,
            "verdict_by": self.verdict_by,
            "verdict_decision": self.verdict_decision,
            "verdict_note": self.verdict_note,
            "oracle_label": self.oracle_label,
            "kind": self.kind,
            "has_explanation": self.explanation_path is not None,
            "error": self.error,
            "timestamps": self.timestamps,
        }


def read_events(path: str | Path) -> list[Event]:
    """Read committed events; a torn final line (crash mid-append) is skipped.

    A record counts as committed once its newline-terminated line parses.
    Corruption anywhere before the final line is an IntegrityError, as is a
    non-increasing seq.
    """
    path = Path(path)
    if not path.exists():
        return []
    raw = path.read_bytes()
    lines = raw.split(b"\n")
    # a trailing newline yields one empty tail element; anything else is torn
    torn_tail = bool(lines) and lines[-1] != b""
    complete = lines[:-1]
    events: list[Event] = []
    last_seq = 0
    for i, line in enumerate(complete):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            event = Event(
                seq=int(rec["seq"]),
                timestamp=float(rec["timestamp"]),
                case_id=str(rec["case_id"]),
                kind=str(rec["kind"]),
                payload=rec["payload"],
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            if i == len(complete) - 1 and not torn_tail:
                warnings.warn(f"skipping unparseable final event line in {path}", stacklevel=2)
                break
            raise IntegrityError(f"{path}: corrupt event line {i + 1}: {exc}") from exc
        if event.seq <= last_seq:
            raise IntegrityError(f"{path}: out-of-order seq {event.seq} after {last_seq}")
        last_seq = event.seq
        events.append(event)
    if torn_tail:
        warnings.warn(f"skipping torn final event line in {path}", stacklevel=2)
    return events


class EventLog:
    """Append-only line-delimited JSON event log (the writable side).

    Opening for append truncates any torn final line a crash left behind (it
    was never committed), so fresh records always start on a clean line.
    """

    def __init__(self, path: str | Path, fsync: str = "never"):
        if fsync not in ("always", "never"):
            raise ValueError("fsync policy must be 'always' or 'never'")
        self.path = Path(path)
        self.fsync = fsync
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            raw = self.path.read_bytes()
            if raw and not raw.endswith(b"\n"):
                with open(self.path, "r+b") as fh:
                    fh.truncate(raw.rfind(b"\n") + 1)
        self._last_seq = 0
        for ev in read_events(self.path):
            self._last_seq = ev.seq
        self._fh = open(self.path, "a")

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def append(self, case_id: str, kind: str, payload: dict, timestamp: Optional[float] = None) -> Event:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        event = Event(
            seq=self._last_seq + 1,
            timestamp=time.time() if timestamp is None else timestamp,
            case_id=case_id,
            kind=kind,
            payload=payload,
        )
        self._fh.write(json.dumps(event.to_json()) + "\n")
        self._fh.flush()
        if self.fsync == "always":
            os.fsync(self._fh.fileno())
        self._last_seq = event.seq
        return event

    def read_events(self) -> list[Event]:
        return read_events(self.path)

    def close(self) -> None:
        self._fh.close()


def _apply_event(cases: dict[str, JointCase], event: Event, strict: bool = True) -> JointCase:
    """Fold one event into the case map; raises IntegrityError on illegal edges."""
    kind, payload = event.kind, event.payload

    if kind == "ingested":
        if event.case_id in cases:
            raise IntegrityError(f"case {event.case_id} ingested twice")
        case = JointCase(
            id=event.case_id,
            image_path=payload.get("image_path", ""),
            oracle_label=payload.get("oracle_label"),
            kind=payload.get("kind"),
        )
        case.timestamps["ingested"] = event.timestamp
        cases[event.case_id] = case
        return case

    case = cases.get(event.case_id)
    if case is None:
        raise IntegrityError(f"event {event.seq} references unknown case {event.case_id}")

    def transition(to: CaseState) -> None:
        if to not in ALLOWED_TRANSITIONS[case.state]:
            raise IntegrityError(
                f"illegal transition {case.state.value} -> {to.value} for case {case.id}"
            )
        case.state = to
        case.timestamps[to.value] = event.timestamp

    if kind == "scored":
        transition(CaseState.SCORED)
        case.confidence = float(payload["confidence"])
    elif kind == "triaged":
        decision = TriageDecision(payload["decision"])
        transition(TRIAGE_TO_STATE[decision])
        case.triage = decision.value
    elif kind == "explained":
        if case.state == CaseState.PENDING:
            raise IntegrityError(f"case {case.id} explained before scoring")
        case.explanation_path = payload.get("explanation_path")
        case.overlay_path = payload.get("overlay_path")
        case.timestamps["explained"] = event.timestamp
    elif kind == "verdict":
        transition(CaseState.REVIEWED_DEFECT if payload["decision"] == "defective"
                   else CaseState.REVIEWED_PASS)
        case.verdict_decision = payload["decision"]
        case.verdict_by = payload.get("operator")
        case.verdict_note = payload.get("note")
    elif kind == "reworked":
        transition(CaseState.REWORKED)
    elif kind == "failed":
        transition(CaseState.FAILED)
        case.error = payload.get("error")
    else:
        raise IntegrityError(f"unknown event kind {kind!r}")
    return case


def replay_state(log_path: str | Path) -> dict[str, JointCase]:
    """Fold the whole log into case state; read-only, deterministic, idempotent."""
    cases: dict[str, JointCase] = {}
    for event in read_events(log_path):
        _apply_event(cases, event)
    return cases


class CaseStore:
    """Materialized case state over an EventLog, safe for concurrent callers."""

    def __init__(self, data_dir: str | Path, fsync: str = "never"):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.log = EventLog(self.data_dir / "events.jsonl", fsync=fsync)
        self._cases: dict[str, JointCase] = {}
        for event in self.log.read_events():
            _apply_event(self._cases, event)

    # -- reads ---------------------------------------------------------------

    def get(self, case_id: str) -> JointCase:
        with self._lock:
            case = self._cases.get(case_id)
            if case is None:
                raise UnknownCaseError(f"unknown case {case_id!r}")
            return case

    def all_cases(self) -> list[JointCase]:
        with self._lock:
            return sorted(self._cases.values(), key=lambda c: c.id)

    def queue(self, state: Optional[str] = None, page: int = 1, page_size: int = 50):
        cases = self.all_cases()
        if state is not None:
            wanted = CaseState(state)
            cases = [c for c in cases if c.state == wanted]
        total = len(cases)
        start = (page - 1) * page_size
        return cases[start:start + page_size], total

    def counts_by_state(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for case in self.all_cases():
            counts[case.state.value] = counts.get(case.state.value, 0) + 1
        return counts

    # -- mutations (single writer) --------------------------------------------

    def _append_and_apply(self, case_id: str, kind: str, payload: dict) -> JointCase:
        # dry-run the fold on a copy so illegal events never reach the log
        probe_map = {}
        if case_id in self._cases:
            probe_map[case_id] = _copy_case(self._cases[case_id])
        probe = Event(seq=self.log.last_seq + 1, timestamp=0.0, case_id=case_id,
                      kind=kind, payload=payload)
        _apply_event(probe_map, probe)
        event = self.log.append(case_id, kind, payload)
        return _apply_event(self._cases, event)

    def ingest(self, case_id: str, image_path: str, oracle_label: Optional[int] = None,
               kind: Optional[str] = None) -> JointCase:
        with self._lock:
            if case_id in self._cases:
                raise StateConflictError(f"case {case_id!r} already exists")
            return self._append_and_apply(case_id, "ingested", {
                "image_path": image_path, "oracle_label": oracle_label, "kind": kind,
            })

    def mark_scored(self, case_id: str, confidence: float) -> JointCase:
        with self._lock:
            self._require(case_id)
            return self._guarded(case_id, "scored", {"confidence": confidence})

    def mark_triaged(self, case_id: str, decision: TriageDecision, thresholds) -> JointCase:
        with self._lock:
            self._require(case_id)
            return self._guarded(case_id, "triaged", {
                "decision": decision.value,
                "thresholds": [thresholds.t_low, thresholds.t_high],
            })

    def attach_explanation(self, case_id: str, explanation_path: str, overlay_path: str) -> JointCase:
        with self._lock:
            self._require(case_id)
            return self._guarded(case_id, "explained", {
                "explanation_path": explanation_path, "overlay_path": overlay_path,
            })

    def mark_failed(self, case_id: str, error: str) -> JointCase:
        with self._lock:
            self._require(case_id)
            return self._guarded(case_id, "failed", {"error": error})

    def submit_verdict(self, verdict: ReviewVerdict) -> JointCase:
        """Atomic check-state-then-transition; idempotent for exact re-submits."""
        with self._lock:
            case = self._require(verdict.case_id)
            if case.state in (CaseState.REVIEWED_DEFECT, CaseState.REVIEWED_PASS):
                if (case.verdict_decision == verdict.decision
                        and case.verdict_by == verdict.operator):
                    return case  # idempotent re-submit, no second event
                raise StateConflictError(
                    f"case {case.id} already reviewed as {case.verdict_decision}"
                )
            if case.state != CaseState.IN_REVIEW:
                raise StateConflictError(
                    f"case {case.id} is {case.state.value}, not in_review"
                )
            return self._guarded(verdict.case_id, "verdict", {
                "decision": verdict.decision,
                "operator": verdict.operator,
                "note": verdict.note,
            })

    def rework(self, case_id: str) -> JointCase:
        with self._lock:
            case = self._require(case_id)
            if case.state not in (CaseState.AUTO_DEFECT, CaseState.REVIEWED_DEFECT):
                raise StateConflictError(
                    f"case {case.id} is {case.state.value}; only defect cases get reworked"
                )
            return self._guarded(case_id, "reworked", {})

    def _require(self, case_id: str) -> JointCase:
        case = self._cases.get(case_id)
        if case is None:
            raise UnknownCaseError(f"unknown case {case_id!r}")
        return case

    def _guarded(self, case_id: str, kind: str, payload: dict) -> JointCase:
        try:
            return self._append_and_apply(case_id, kind, payload)
        except IntegrityError as exc:
            raise StateConflictError(str(exc)) from exc

    # -- snapshots -------------------------------------------------------------

    def save_snapshot(self, path: Optional[str | Path] = None) -> Path:
        """Atomically write the materialized state (write temp + rename)."""
        path = Path(path) if path else self.data_dir / "snapshot.json"
        with self._lock:
            doc = {
                "last_seq": self.log.last_seq,
                "cases": {cid: c.to_json() for cid, c in sorted(self._cases.items())},
            }
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w") as fh:
            json.dump(doc, fh)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
        return path

    def close(self) -> None:
        self.log.close()


def _copy_case(case: JointCase) -> JointCase:
    clone = JointCase(id=case.id)
    clone.__dict__.update({**case.__dict__, "timestamps": dict(case.timestamps)})
    return clone
