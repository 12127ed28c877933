"""Review service: event-sourced case store, pipeline orchestration, HTTP API, CLI."""

from jointscope.service.store import (
    CaseState,
    Event,
    EventLog,
    CaseStore,
    JointCase,
    ReviewVerdict,
    StateConflictError,
    UnknownCaseError,
    IntegrityError,
    replay_state,
)
from jointscope.service.pipeline import run_pipeline, PipelineSummary

__all__ = [
    "CaseState",
    "Event",
    "EventLog",
    "CaseStore",
    "JointCase",
    "ReviewVerdict",
    "StateConflictError",
    "UnknownCaseError",
    "IntegrityError",
    "replay_state",
    "run_pipeline",
    "PipelineSummary",
]
