"""Acquisition layer: git-log parsing, hosted-event fetching, normalization."""

from .events import (
    COMMENT_KINDS,
    EVENT_KINDS,
    TRIAGE_KINDS,
    CommitRecord,
    Event,
    EventStream,
    RawIdentity,
    commit_event,
    is_bot,
    normalize,
    read_ndjson,
    write_ndjson,
)
from .fetch import FetchClient, events_from_payloads, fetch_events, fetch_paged
from .gitlog import parse_git_log, serialize_git_log

__all__ = [
    "COMMENT_KINDS",
    "EVENT_KINDS",
    "TRIAGE_KINDS",
    "CommitRecord",
    "Event",
    "EventStream",
    "RawIdentity",
    "commit_event",
    "is_bot",
    "normalize",
    "read_ndjson",
    "write_ndjson",
    "FetchClient",
    "events_from_payloads",
    "fetch_events",
    "fetch_paged",
    "parse_git_log",
    "serialize_git_log",
]
