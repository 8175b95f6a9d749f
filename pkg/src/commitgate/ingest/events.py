"""Normalized event model and the single chronological event stream.

Every community activity — commits, issue/PR lifecycle actions, reviews,
comments — is reduced to one :class:`Event` shape so downstream metric code
never touches provider payloads. Commits additionally carry their
:class:`CommitRecord` so committer-field evidence survives normalization.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Iterable, Sequence

from ..months import isoformat_z, parse_iso_utc, to_utc

log = logging.getLogger(__name__)

EVENT_KINDS = frozenset(
    {
        "commit",
        "issue_opened",
        "issue_closed",
        "issue_labeled",
        "issue_assigned",
        "pr_opened",
        "pr_merged",
        "pr_closed",
        "pr_review",
        "issue_comment",
        "pr_comment",
        "commit_comment",
    }
)

COMMENT_KINDS = frozenset({"issue_comment", "pr_comment", "commit_comment"})

# Actions that count as triaging someone else's issue. The event model has
# no milestone kind, so milestoning cannot contribute here.
TRIAGE_KINDS = frozenset({"issue_labeled", "issue_assigned", "issue_closed"})


@dataclass(frozen=True)
class RawIdentity:
    """An unresolved identity as it appears in raw data.

    Commits yield (name, email) pairs; hosting-platform events yield logins.
    Sorting/equality are structural, so identities are usable as dict keys.
    """

    name: str | None = None
    email: str | None = None
    login: str | None = None

    def __post_init__(self):
        if not (self.name or self.email or self.login):
            raise ValueError("raw identity needs at least one of name/email/login")

    def sort_key(self) -> tuple:
        # None sorts before any string; the presence flags keep the key
        # injective so equal keys imply equal identities
        return (
            self.name is not None, self.name or "",
            self.email is not None, self.email or "",
            self.login is not None, self.login or "",
        )

    def __lt__(self, other: "RawIdentity") -> bool:
        if not isinstance(other, RawIdentity):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def to_json(self) -> dict:
        return {"name": self.name, "email": self.email, "login": self.login}

    @classmethod
    def from_json(cls, obj: dict) -> "RawIdentity":
        return cls(name=obj.get("name"), email=obj.get("email"), login=obj.get("login"))


@dataclass(frozen=True)
class CommitRecord:
    """One commit with the author and committer identities kept distinct."""

    hash: str
    author_name: str
    author_email: str
    author_time: datetime
    committer_name: str
    committer_email: str
    committer_time: datetime
    repo: str = ""
    files_touched: frozenset[str] = frozenset()
    message: str = ""

    @property
    def author(self) -> RawIdentity:
        return RawIdentity(name=self.author_name, email=self.author_email)

    @property
    def committer(self) -> RawIdentity:
        return RawIdentity(name=self.committer_name, email=self.committer_email)

    def to_json(self) -> dict:
        return {
            "hash": self.hash,
            "author_name": self.author_name,
            "author_email": self.author_email,
            "author_time": isoformat_z(self.author_time),
            "committer_name": self.committer_name,
            "committer_email": self.committer_email,
            "committer_time": isoformat_z(self.committer_time),
            "repo": self.repo,
            "files_touched": sorted(self.files_touched),
            "message": self.message,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CommitRecord":
        return cls(
            hash=obj["hash"],
            author_name=obj["author_name"],
            author_email=obj["author_email"],
            author_time=parse_iso_utc(obj["author_time"], "author_time"),
            committer_name=obj["committer_name"],
            committer_email=obj["committer_email"],
            committer_time=parse_iso_utc(obj["committer_time"], "committer_time"),
            repo=obj.get("repo", ""),
            files_touched=frozenset(obj.get("files_touched", ())),
            message=obj.get("message", ""),
        )


@dataclass(frozen=True)
class Event:
    """One normalized community activity."""

    kind: str
    actor: RawIdentity
    time: datetime
    repo: str
    thread_id: str
    labels: frozenset[str] = frozenset()
    body: str = ""
    opener: RawIdentity | None = None
    commit: CommitRecord | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        object.__setattr__(self, "time", to_utc(self.time))

    def dedup_key(self) -> tuple:
        return (self.kind, self.thread_id, self.actor, self.time)

    def sort_key(self) -> tuple:
        # Documented tie-break is (time, kind, thread_id); the trailing
        # components only break exact collisions so output is a total order.
        return (
            self.time,
            self.kind,
            self.thread_id,
            self.actor,
            self.body,
        )

    def to_json(self) -> dict:
        obj = {
            "kind": self.kind,
            "actor": self.actor.to_json(),
            "time": isoformat_z(self.time),
            "repo": self.repo,
            "thread_id": self.thread_id,
            "labels": sorted(self.labels),
            "body": self.body,
            "opener": self.opener.to_json() if self.opener else None,
        }
        if self.commit is not None:
            obj["commit"] = self.commit.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Event":
        commit = obj.get("commit")
        return cls(
            kind=obj["kind"],
            actor=RawIdentity.from_json(obj["actor"]),
            time=parse_iso_utc(obj["time"], "time"),
            repo=obj["repo"],
            thread_id=obj["thread_id"],
            labels=frozenset(obj.get("labels", ())),
            body=obj.get("body", ""),
            opener=RawIdentity.from_json(obj["opener"]) if obj.get("opener") else None,
            commit=CommitRecord.from_json(commit) if commit else None,
        )


EventStream = tuple[Event, ...]


def commit_event(record: CommitRecord) -> Event:
    """Wrap a commit as a stream event; the actor is the author."""
    return Event(
        kind="commit",
        actor=record.author,
        time=record.committer_time,
        repo=record.repo,
        thread_id=f"commit/{record.hash}",
        opener=record.author,
        commit=record,
    )


def normalize(
    commits: Sequence[CommitRecord], raw_events: Iterable[Event]
) -> EventStream:
    """Merge commits and raw events into one deterministic stream.

    Output is sorted by (time, kind, thread_id); duplicates under the
    (kind, thread_id, actor, time) key are dropped with a warning. Comment
    events missing their thread opener inherit it from the matching
    *_opened/commit event. The result is invariant under permutation of
    either input and idempotent.
    """
    merged: dict[tuple, Event] = {}
    dropped = 0
    for ev in list(raw_events) + [commit_event(c) for c in commits]:
        key = ev.dedup_key()
        if key in merged:
            dropped += 1
            continue
        merged[key] = ev
    if dropped:
        log.warning("normalize: dropped %d duplicate events", dropped)

    stream = sorted(merged.values(), key=Event.sort_key)

    openers = {
        ev.thread_id: ev.opener or ev.actor
        for ev in stream
        if ev.kind in ("issue_opened", "pr_opened", "commit")
    }
    filled = []
    for ev in stream:
        if ev.opener is None and ev.thread_id in openers:
            ev = replace(ev, opener=openers[ev.thread_id])
        filled.append(ev)
    return tuple(filled)


def write_ndjson(stream: Iterable[Event], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in stream:
            fh.write(json.dumps(ev.to_json(), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def read_ndjson(path) -> EventStream:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(Event.from_json(json.loads(line)))
    return tuple(events)


def is_bot(identity: RawIdentity, extra_bots: Iterable[str] = ()) -> bool:
    """Bot heuristic: ``[bot]``-suffixed logins/names or a configured list."""
    extra = {b.lower() for b in extra_bots}
    for candidate in (identity.login, identity.name):
        if candidate is None:
            continue
        lowered = candidate.lower()
        if lowered.endswith("[bot]") or lowered in extra:
            return True
    return False
