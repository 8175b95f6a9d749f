"""Committer-immigration detection, candidate pool, and rank statistics.

A developer immigrates when their identity first appears in a commit's
committer field after some earlier community activity. Developers whose
committer-field debut precedes or coincides with their first activity are
founding committers and never enter the candidate pool. Candidates who
never immigrate are censored at the collection date.
"""

from __future__ import annotations

import csv
import logging
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError
from .identity import IdentityMap
from .ingest.events import Event, EventStream, is_bot
from .months import duration_months, isoformat_z, parse_iso_utc

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ImmigrationEvent:
    """One candidate's outcome: immigration time or censoring."""

    dev: str
    first_appearance: datetime
    immigration_time: datetime | None
    transition_interval: float  # months, fractional

    @property
    def censored(self) -> bool:
        return self.immigration_time is None

    def __post_init__(self):
        if self.immigration_time is not None and self.immigration_time < self.first_appearance:
            raise ValueError("immigration_time precedes first_appearance")


@dataclass(frozen=True)
class CandidatePool:
    candidates: frozenset
    founding_committers: frozenset
    immigrants: frozenset
    exclusions: dict  # dev id -> reason

    def __post_init__(self):
        if self.candidates & self.founding_committers:
            raise ValueError("candidates and founding committers overlap")
        if not self.immigrants <= self.candidates:
            raise ValueError("immigrant outside the candidate pool")


@dataclass(frozen=True)
class Correction:
    dev_id: str
    action: str  # exclude | redate
    timestamp: datetime | None = None
    reason: str = ""

    def __post_init__(self):
        if self.action not in ("exclude", "redate"):
            raise DataError(f"unknown correction action: {self.action!r}")
        if self.action == "redate" and self.timestamp is None:
            raise DataError(f"redate correction for {self.dev_id} needs a timestamp")


def dev_is_bot(dev, extra_bots: Iterable[str] = ()) -> bool:
    from .ingest.events import RawIdentity

    return any(
        is_bot(RawIdentity(name=name or None, email=email or None, login=login or None), extra_bots)
        for name, email, login in dev.aliases
    )


def detect_immigrations(
    stream: EventStream,
    ids: IdentityMap,
    corrections: Sequence[Correction],
    collection_date: datetime,
    *,
    appearance_kinds: Iterable[str] | None = None,
    bot_logins: Iterable[str] = (),
) -> tuple[list[ImmigrationEvent], CandidatePool]:
    """Classify every developer and date each candidate's outcome.

    first_appearance is the earliest event of a configured kind acted by the
    developer (default: every kind). Deterministic and independent of event
    chunking; operator corrections are applied last.
    """
    kinds = set(appearance_kinds) if appearance_kinds is not None else None
    first_activity: dict[str, datetime] = {}
    first_committer: dict[str, datetime] = {}

    for event in stream:
        if event.time > collection_date:
            continue
        dev = ids.id_of(event.actor)
        if kinds is None or event.kind in kinds:
            if dev not in first_activity:
                first_activity[dev] = event.time
        if event.commit is not None:
            committer_dev = ids.id_of(event.commit.committer)
            when = event.commit.committer_time
            if when <= collection_date and (
                committer_dev not in first_committer or when < first_committer[committer_dev]
            ):
                first_committer[committer_dev] = when

    exclusions: dict[str, str] = {}
    founding: set[str] = set()
    candidates: set[str] = set()
    outcomes: dict[str, ImmigrationEvent] = {}

    for dev in sorted(set(first_activity) | set(first_committer)):
        dev_identity = ids.dev(dev)
        if dev_is_bot(dev_identity, bot_logins):
            exclusions[dev] = "bot"
            continue
        appeared = first_activity.get(dev)
        committed = first_committer.get(dev)
        if committed is not None and (appeared is None or committed <= appeared):
            founding.add(dev)
            continue
        if appeared is None:
            continue
        candidates.add(dev)
        immigration = committed  # strictly after appearance when present
        end = immigration if immigration is not None else collection_date
        outcomes[dev] = ImmigrationEvent(
            dev=dev,
            first_appearance=appeared,
            immigration_time=immigration,
            transition_interval=duration_months(appeared, end),
        )

    for correction in corrections:
        if correction.dev_id not in outcomes and correction.dev_id not in founding:
            raise DataError(f"correction references unknown dev id: {correction.dev_id!r}")
        if correction.action == "exclude":
            outcomes.pop(correction.dev_id, None)
            candidates.discard(correction.dev_id)
            founding.discard(correction.dev_id)
            exclusions[correction.dev_id] = correction.reason or "operator exclusion"
        else:  # redate
            old = outcomes.get(correction.dev_id)
            if old is None:
                raise DataError(
                    f"redate correction targets non-candidate dev id: {correction.dev_id!r}"
                )
            outcomes[correction.dev_id] = ImmigrationEvent(
                dev=old.dev,
                first_appearance=old.first_appearance,
                immigration_time=correction.timestamp,
                transition_interval=duration_months(old.first_appearance, correction.timestamp),
            )
            log.info("redated immigration for %s: %s", correction.dev_id, correction.reason)

    events = [outcomes[dev] for dev in sorted(outcomes)]
    pool = CandidatePool(
        candidates=frozenset(candidates),
        founding_committers=frozenset(founding),
        immigrants=frozenset(ev.dev for ev in events if not ev.censored),
        exclusions=exclusions,
    )
    return events, pool


def committer_proportion(stream: EventStream, ids: IdentityMap, bot_logins: Iterable[str] = ()) -> float:
    """Share of contributing developers who ever appear as committer."""
    contributors: set[str] = set()
    committers: set[str] = set()
    for event in stream:
        contributors.add(ids.id_of(event.actor))
        if event.commit is not None:
            dev = ids.id_of(event.commit.committer)
            contributors.add(dev)
            committers.add(dev)
    contributors = {d for d in contributors if not dev_is_bot(ids.dev(d), bot_logins)}
    committers &= contributors
    if not contributors:
        raise DataError("no developers in stream")
    return len(committers) / len(contributors)


def immigration_rate(pool: CandidatePool) -> float:
    if not pool.candidates:
        raise DataError("empty candidate pool")
    return len(pool.immigrants) / len(pool.candidates)


def _midranks(values: Sequence[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1  # average of 1-based positions i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """U statistic for sample a and the two-sided normal-approximation p.

    Midranks handle ties; the variance carries the tie correction and the
    z statistic a continuity correction. Zero variance (all values equal)
    yields p = 1.
    """
    if not a or not b:
        raise DataError("mann_whitney_u requires two non-empty samples")
    n_a, n_b = len(a), len(b)
    combined = list(a) + list(b)
    ranks = _midranks(combined)
    rank_sum_a = sum(ranks[:n_a])
    u_a = rank_sum_a - n_a * (n_a + 1) / 2

    n = n_a + n_b
    tie_counts = {}
    for value in combined:
        tie_counts[value] = tie_counts.get(value, 0) + 1
    tie_term = sum(t**3 - t for t in tie_counts.values())
    variance = n_a * n_b / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if variance <= 0:
        return u_a, 1.0
    mean = n_a * n_b / 2
    z = (abs(u_a - mean) - 0.5) / math.sqrt(variance)
    z = max(z, 0.0)
    p = math.erfc(z / math.sqrt(2))  # two-sided
    return u_a, min(p, 1.0)


def cliffs_delta(a: Sequence[float], b: Sequence[float]) -> float:
    """(#{x>y} - #{x<y}) / (|a|*|b|) over all pairs, via sorted counting."""
    if not a or not b:
        raise DataError("cliffs_delta requires two non-empty samples")
    sorted_b = sorted(b)
    net = 0
    for x in a:
        greater = bisect_left(sorted_b, x)  # y < x
        less = len(sorted_b) - bisect_right(sorted_b, x)  # y > x
        net += greater - less
    return net / (len(a) * len(b))


def read_corrections(path: Path) -> list[Correction]:
    """Parse the corrections CSV (dev_id,action,timestamp,reason)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"dev_id", "action"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(f"corrections file {path} must have columns dev_id,action,timestamp,reason")
        for record in reader:
            raw_ts = (record.get("timestamp") or "").strip()
            rows.append(
                Correction(
                    dev_id=(record.get("dev_id") or "").strip(),
                    action=(record.get("action") or "").strip(),
                    timestamp=parse_iso_utc(raw_ts, "timestamp") if raw_ts else None,
                    reason=(record.get("reason") or "").strip(),
                )
            )
    return rows


IMMIGRATION_COLUMNS = ["dev_id", "first_appearance", "immigration_time", "censored", "interval_months"]


def write_immigrations_csv(events: Sequence[ImmigrationEvent], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(IMMIGRATION_COLUMNS)
        for ev in events:
            writer.writerow(
                [
                    ev.dev,
                    isoformat_z(ev.first_appearance),
                    isoformat_z(ev.immigration_time) if ev.immigration_time else "",
                    int(ev.censored),
                    repr(ev.transition_interval),
                ]
            )


def read_immigrations_csv(path: Path) -> list[ImmigrationEvent]:
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for record in reader:
            immigration = record["immigration_time"]
            events.append(
                ImmigrationEvent(
                    dev=record["dev_id"],
                    first_appearance=parse_iso_utc(record["first_appearance"], "first_appearance"),
                    immigration_time=parse_iso_utc(immigration, "immigration_time") if immigration else None,
                    transition_interval=float(record["interval_months"]),
                )
            )
    return events
