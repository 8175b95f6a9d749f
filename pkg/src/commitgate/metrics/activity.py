"""Per-developer activity metrics M1-M18 evaluated at arbitrary cutoffs.

Every metric at cutoff t is a pure function of events strictly before t
(leak-freedom). The MetricIndex precomputes, per developer, sorted arrays
of qualification times so one cutoff evaluation is a handful of bisects;
the public count_* operations wrap the same builders for single queries.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from collections import defaultdict
from datetime import datetime
from typing import Iterable, Sequence

from ..identity import Denylists, IdentityMap, affiliation_from_emails, load_denylists
from ..ingest.events import COMMENT_KINDS, TRIAGE_KINDS, Event, EventStream
from .offensive import LexiconScorer, Scorer

log = logging.getLogger(__name__)

DEFAULT_NEWCOMER_LABELS = frozenset(
    {"good first issue", "good-first-issue", "first-timers-only", "help wanted"}
)
DEFAULT_FEATURE_LABELS = frozenset({"feature request", "enhancement", "feat"})


def _count_before(times: Sequence[datetime], cutoff: datetime) -> int:
    return bisect_left(times, cutoff)


def _dev_of(ids: IdentityMap, event: Event) -> str | None:
    dev = ids.get_id(event.actor)
    if dev is None:
        log.debug("unresolved actor on %s event; skipped", event.kind)
    return dev


def _is_issue(thread_id: str) -> bool:
    return thread_id.startswith("issue/")


def _norm_labels(labels: Iterable[str]) -> frozenset:
    return frozenset(label.casefold() for label in labels)


class MetricIndex:
    """Sorted qualification-time arrays for every metric, per developer."""

    def __init__(
        self,
        stream: EventStream,
        ids: IdentityMap,
        *,
        org_stream: EventStream | None = None,
        newcomer_labels: Iterable[str] = DEFAULT_NEWCOMER_LABELS,
        feature_labels: Iterable[str] = DEFAULT_FEATURE_LABELS,
        scorer: Scorer | None = None,
        denylists: Denylists | None = None,
    ):
        self.ids = ids
        self.denylists = denylists if denylists is not None else load_denylists()
        newcomer = _norm_labels(newcomer_labels)
        feature = _norm_labels(feature_labels)
        scorer = scorer if scorer is not None else LexiconScorer()

        by_kind: dict[str, dict[str, list[datetime]]] = defaultdict(lambda: defaultdict(list))
        day_times: dict[str, list[datetime]] = defaultdict(list)
        seen_days: dict[str, set] = defaultdict(set)
        email_first: dict[str, list[tuple[datetime, str]]] = defaultdict(list)
        seen_emails: dict[str, set] = defaultdict(set)
        file_steps: dict[str, tuple[list[datetime], list[int]]] = defaultdict(lambda: ([], []))
        seen_files: dict[str, set] = defaultdict(set)
        triage_seen: dict[str, set] = defaultdict(set)
        triage_times: dict[str, list[datetime]] = defaultdict(list)
        merged_own: dict[str, list[datetime]] = defaultdict(list)
        offensive_times: dict[str, list[datetime]] = defaultdict(list)
        newcomer_comment_times: dict[str, list[datetime]] = defaultdict(list)
        feature_qualify: dict[str, list[datetime]] = defaultdict(list)
        issue_open_time: dict[tuple[str, str], datetime] = {}
        newcomer_labeled_at: dict[str, datetime] = {}
        feature_labeled_at: dict[str, datetime] = {}
        thread_commenters: dict[str, dict[str, datetime]] = defaultdict(dict)

        for event in stream:
            dev = _dev_of(ids, event)
            if dev is None:
                continue
            by_kind[event.kind][dev].append(event.time)

            day = event.time.date()
            if day not in seen_days[dev]:
                seen_days[dev].add(day)
                day_times[dev].append(event.time)

            email = event.actor.email
            if event.commit is not None:
                email = event.commit.author_email or email
            if email and email.casefold() not in seen_emails[dev]:
                seen_emails[dev].add(email.casefold())
                email_first[dev].append((event.time, email))

            if event.kind == "commit" and event.commit is not None:
                new_files = {f for f in event.commit.files_touched if f not in seen_files[dev]}
                if new_files:
                    seen_files[dev].update(new_files)
                    times, counts = file_steps[dev]
                    times.append(event.time)
                    counts.append(len(seen_files[dev]))

            if event.kind == "issue_opened":
                issue_open_time[(dev, event.thread_id)] = event.time
                if _norm_labels(event.labels) & newcomer:
                    newcomer_labeled_at.setdefault(event.thread_id, event.time)
                if _norm_labels(event.labels) & feature:
                    feature_labeled_at.setdefault(event.thread_id, event.time)

            if event.kind == "issue_labeled":
                labels = _norm_labels(event.labels)
                if labels & newcomer and event.thread_id not in newcomer_labeled_at:
                    newcomer_labeled_at[event.thread_id] = event.time
                if labels & feature and event.thread_id not in feature_labeled_at:
                    feature_labeled_at[event.thread_id] = event.time

            if event.kind in TRIAGE_KINDS and _is_issue(event.thread_id):
                opener = ids.get_id(event.opener) if event.opener else None
                if opener != dev and event.thread_id not in triage_seen[dev]:
                    triage_seen[dev].add(event.thread_id)
                    triage_times[dev].append(event.time)

            if event.kind == "pr_merged" and event.opener is not None:
                opener = ids.get_id(event.opener)
                if opener is not None:
                    merged_own[opener].append(event.time)

            if event.kind in COMMENT_KINDS:
                thread_commenters[event.thread_id].setdefault(dev, event.time)
                try:
                    flagged = bool(scorer(event.body))
                except Exception:
                    flagged = False
                    log.exception("offensive scorer failed; comment scored 0")
                if flagged:
                    offensive_times[dev].append(event.time)

        # newcomer comments need the full label timeline, so a second pass
        for event in stream:
            if event.kind not in COMMENT_KINDS or not _is_issue(event.thread_id):
                continue
            dev = _dev_of(ids, event)
            if dev is None:
                continue
            labeled = newcomer_labeled_at.get(event.thread_id)
            if labeled is not None and labeled <= event.time:
                newcomer_comment_times[dev].append(event.time)

        for (dev, thread_id), opened in issue_open_time.items():
            labeled = feature_labeled_at.get(thread_id)
            if labeled is not None:
                feature_qualify[dev].append(max(opened, labeled))

        # communicator pair formation: both first comments must precede the
        # cutoff, so the pair forms at the later of the two firsts
        formation: dict[str, dict[str, datetime]] = defaultdict(dict)
        for commenters in thread_commenters.values():
            devs = sorted(commenters)
            for i, d1 in enumerate(devs):
                for d2 in devs[i + 1 :]:
                    formed = max(commenters[d1], commenters[d2])
                    for a, b in ((d1, d2), (d2, d1)):
                        prior = formation[a].get(b)
                        if prior is None or formed < prior:
                            formation[a][b] = formed

        self._by_kind = {
            kind: {dev: sorted(times) for dev, times in devs.items()}
            for kind, devs in by_kind.items()
        }
        self._day_times = {dev: sorted(ts) for dev, ts in day_times.items()}
        self._email_first = {dev: sorted(pairs) for dev, pairs in email_first.items()}
        self._file_steps = dict(file_steps)
        self._triage_times = {dev: sorted(ts) for dev, ts in triage_times.items()}
        self._merged_own = {dev: sorted(ts) for dev, ts in merged_own.items()}
        self._offensive = {dev: sorted(ts) for dev, ts in offensive_times.items()}
        self._newcomer_comments = {dev: sorted(ts) for dev, ts in newcomer_comment_times.items()}
        self._feature_issues = {dev: sorted(ts) for dev, ts in feature_qualify.items()}
        self._formations = {
            dev: sorted(times.values()) for dev, times in formation.items()
        }
        self._org = None
        if org_stream is not None:
            self._org = _OrgIndex(org_stream, ids)

    def _kind_count(self, kind: str, dev: str, cutoff: datetime) -> int:
        return _count_before(self._by_kind.get(kind, {}).get(dev, ()), cutoff)

    def pr_open(self, dev, cutoff):
        return self._kind_count("pr_opened", dev, cutoff)

    def pr_review(self, dev, cutoff):
        return self._kind_count("pr_review", dev, cutoff)

    def commits(self, dev, cutoff):
        return self._kind_count("commit", dev, cutoff)

    def days_active(self, dev, cutoff):
        return _count_before(self._day_times.get(dev, ()), cutoff)

    def issue_open(self, dev, cutoff):
        return self._kind_count("issue_opened", dev, cutoff)

    def issue_triage(self, dev, cutoff):
        return _count_before(self._triage_times.get(dev, ()), cutoff)

    def comment_counts(self, dev, cutoff) -> tuple[int, int, int]:
        return (
            self._kind_count("issue_comment", dev, cutoff),
            self._kind_count("pr_comment", dev, cutoff),
            self._kind_count("commit_comment", dev, cutoff),
        )

    def all_comment(self, dev, cutoff):
        return sum(self.comment_counts(dev, cutoff))

    def communicators(self, dev, cutoff):
        return _count_before(self._formations.get(dev, ()), cutoff)

    def from_company(self, dev, cutoff) -> int:
        pairs = self._email_first.get(dev, ())
        emails = [email for when, email in pairs if when < cutoff]
        return 1 if affiliation_from_emails(emails, self.denylists).kind == "company" else 0

    def newcomer_comments(self, dev, cutoff):
        return _count_before(self._newcomer_comments.get(dev, ()), cutoff)

    def files_modified(self, dev, cutoff):
        times, counts = self._file_steps.get(dev, ((), ()))
        idx = bisect_left(times, cutoff)
        return counts[idx - 1] if idx else 0

    def feature_issues(self, dev, cutoff):
        return _count_before(self._feature_issues.get(dev, ()), cutoff)

    def merge_ratio(self, dev, cutoff) -> float:
        opened = self.pr_open(dev, cutoff)
        if opened == 0:
            return 0.0
        merged = _count_before(self._merged_own.get(dev, ()), cutoff)
        return min(merged / opened, 1.0)

    def offensive_comments(self, dev, cutoff):
        return _count_before(self._offensive.get(dev, ()), cutoff)

    def org_counts(self, dev, cutoff) -> tuple[int | None, int | None, int | None, int | None]:
        if self._org is None:
            return (None, None, None, None)
        return self._org.counts(dev, cutoff)


class _OrgIndex:
    """M10-M13 qualification times over sibling-repo streams."""

    def __init__(self, org_stream: EventStream, ids: IdentityMap):
        issues: dict[str, list[datetime]] = defaultdict(list)
        issue_comments: dict[str, list[datetime]] = defaultdict(list)
        commits: dict[str, list[datetime]] = defaultdict(list)
        commit_comments: dict[str, list[datetime]] = defaultdict(list)
        for event in org_stream:
            dev = ids.get_id(event.actor)
            if dev is None:
                continue
            if event.kind == "issue_opened":
                issues[dev].append(event.time)
            elif event.kind == "issue_comment":
                issue_comments[dev].append(event.time)
            elif event.kind == "commit":
                commits[dev].append(event.time)
            elif event.kind == "commit_comment":
                commit_comments[dev].append(event.time)
        self._issues = {d: sorted(t) for d, t in issues.items()}
        self._issue_comments = {d: sorted(t) for d, t in issue_comments.items()}
        self._commits = {d: sorted(t) for d, t in commits.items()}
        self._commit_comments = {d: sorted(t) for d, t in commit_comments.items()}

    def counts(self, dev, cutoff):
        return (
            _count_before(self._issues.get(dev, ()), cutoff),
            _count_before(self._issue_comments.get(dev, ()), cutoff),
            _count_before(self._commits.get(dev, ()), cutoff),
            _count_before(self._commit_comments.get(dev, ()), cutoff),
        )


def count_communicators(stream: EventStream, ids: IdentityMap, dev: str, before: datetime) -> int:
    """M8: distinct other developers sharing a commented thread with dev."""
    return MetricIndex(stream, ids).communicators(dev, before)


def count_newcomer_comments(
    stream: EventStream,
    ids: IdentityMap,
    dev: str,
    before: datetime,
    labels: Iterable[str] = DEFAULT_NEWCOMER_LABELS,
) -> int:
    """M14: comments under issues already carrying a newcomer label."""
    return MetricIndex(stream, ids, newcomer_labels=labels).newcomer_comments(dev, before)


def count_new_feature_issues(
    stream: EventStream,
    ids: IdentityMap,
    dev: str,
    before: datetime,
    labels: Iterable[str] = DEFAULT_FEATURE_LABELS,
) -> int:
    """M16: issues opened by dev carrying a configured feature label."""
    return MetricIndex(stream, ids, feature_labels=labels).feature_issues(dev, before)


def compute_merge_ratio(stream: EventStream, ids: IdentityMap, dev: str, before: datetime) -> float:
    """M17: merged share of dev's PRs opened before the cutoff; 0 if none."""
    return MetricIndex(stream, ids).merge_ratio(dev, before)


def count_issue_triage(stream: EventStream, ids: IdentityMap, dev: str, before: datetime) -> int:
    """M6: distinct issues not opened by dev that dev labeled/assigned/closed."""
    return MetricIndex(stream, ids).issue_triage(dev, before)


def count_org_scoped(
    org_stream: EventStream, ids: IdentityMap, dev: str, before: datetime
) -> tuple[int, int, int, int]:
    """M10-M13 over sibling repos of the project's organization."""
    return _OrgIndex(org_stream, ids).counts(dev, before)
