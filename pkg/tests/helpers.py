"""Shared factories for the synthetic streams used across test modules."""

from __future__ import annotations

import random
from datetime import datetime, timezone

from commitgate.ingest import CommitRecord, Event, RawIdentity, commit_event

REPO = "acme/widget"
ORG_REPO = "acme/gadget"


def at(year, month, day, hour=0, minute=0, second=0):
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)


def shift_month(ts: datetime) -> datetime:
    """Same wall-clock instant one calendar month later (day must be <= 28)."""
    year, month = (ts.year + 1, 1) if ts.month == 12 else (ts.year, ts.month + 1)
    return ts.replace(year=year, month=month)


def ident(login=None, email=None, name=None) -> RawIdentity:
    return RawIdentity(name=name, email=email, login=login)


def ev(kind, actor, time, thread="issue/1", *, labels=(), body="",
       opener=None, repo=REPO, commit=None) -> Event:
    if isinstance(actor, str):
        actor = ident(login=actor)
    if isinstance(opener, str):
        opener = ident(login=opener)
    return Event(
        kind=kind,
        actor=actor,
        time=time,
        repo=repo,
        thread_id=thread,
        labels=frozenset(labels),
        body=body,
        opener=opener,
        commit=commit,
    )


def commit_record(n, author, when, *, committer=None, c_when=None,
                  files=(), repo=REPO) -> CommitRecord:
    """Commit number n; author/committer are (name, email) pairs."""
    committer = committer or author
    return CommitRecord(
        hash=f"{n:040x}",
        author_name=author[0],
        author_email=author[1],
        author_time=when,
        committer_name=committer[0],
        committer_email=committer[1],
        committer_time=c_when or when,
        repo=repo,
        files_touched=frozenset(files),
    )


def commit_ev(n, author, when, *, committer=None, c_when=None,
              files=(), repo=REPO) -> Event:
    return commit_event(
        commit_record(
            n, author, when, committer=committer, c_when=c_when, files=files, repo=repo
        )
    )


# Demo community. Names are corpus-unique so the unique-name rule links the
# event actor (name + login) with the commit identity (name + email).
ROOT = ("Root Maintainer", "root@acme.io")
WREN = ("Wren Ops", "wren@acme.io")

_DOMAINS = ("blue.dev", "gmail.com", "scarlet.co", "indigo.org", "mit.edu",
            "outlook.com")

N_IMMIGRANTS = 24
N_CENSORED = 12


def _login(idx: int) -> str:
    return f"dev{idx:02d}"


def _pair(idx: int) -> tuple:
    name = f"Dev{idx:02d} Example"
    email = f"dev{idx:02d}@{_DOMAINS[idx % len(_DOMAINS)]}"
    return (name, email)


def demo_spans() -> list:
    """(login, first active month, immigration month or None) ground truth."""
    spans = []
    for idx in range(N_IMMIGRANTS + N_CENSORED):
        first = 1 + idx % 5
        if idx < N_IMMIGRANTS:
            gone = min(first + 1 + (idx * 5) % 9, 11)
        else:
            gone = None
        spans.append((_login(idx), first, gone))
    return spans


def actor(login) -> RawIdentity:
    if login == "root":
        return ident(login="root", name=ROOT[0])
    if login == "wren":
        return ident(login="wren", name=WREN[0])
    idx = int(login[3:])
    return ident(login=login, name=_pair(idx)[0])


def demo_events() -> list:
    """A deterministic synthetic community history for pipeline-level tests.

    root and wren are founding committers; 24 devs immigrate after 1 to 9
    months; 12 are censored at collection (2019-12-01). Monthly activity is
    drawn from a fixed-seed RNG so covariates vary across devs and months
    while every call returns the identical stream.
    """
    rng = random.Random(77)
    events = []
    n_commit = 0

    def next_commit(author, when, committer, files):
        nonlocal n_commit
        n_commit += 1
        return commit_ev(
            n_commit, author, when, committer=committer, c_when=when, files=files
        )

    # founding committers: their very first event is a self-committed commit
    events.append(next_commit(ROOT, at(2019, 1, 1), ROOT, ("core.c",)))
    events.append(next_commit(WREN, at(2019, 1, 1, 1), WREN, ("ops.c",)))

    # monthly maintainer activity: commits, an ops issue, a shared PR
    for m in range(1, 12):
        events.append(
            next_commit(ROOT, at(2019, m, 25, 8), ROOT, (f"core{m}.c", "core.c"))
        )
        events.append(
            ev("issue_opened", actor("root"), at(2019, m, 1, 8), f"issue/ops-{m}",
               opener=actor("root"))
        )
        events.append(
            ev("pr_opened", actor("root"), at(2019, m, 1, 9), f"pr/shared-{m}",
               opener=actor("root"))
        )

    for login, first, gone in demo_spans():
        idx = int(login[3:])
        pair = _pair(idx)
        who = actor(login)
        own_issue = f"issue/{login}"
        events.append(
            ev("issue_opened", who, at(2019, first, 3, 9), own_issue, opener=who)
        )
        events.append(
            ev("issue_comment", actor("root"), at(2019, first, 3, 10), own_issue,
               body="thanks for the report", opener=who)
        )
        last = gone if gone is not None else 11
        for m in range(first, last + 1):
            base_day = 4 + rng.randint(0, 3)
            n_authored = rng.randint(1, 4) if m == first else rng.randint(0, 3)
            for k in range(n_authored):
                events.append(
                    next_commit(
                        pair,
                        at(2019, m, base_day + k, 12),
                        ROOT,
                        (f"{login}/f{m}.c", f"{login}/f{k}.py"),
                    )
                )
            if rng.random() < 0.55:
                thread = f"pr/{login}-{m}"
                events.append(
                    ev("pr_opened", who, at(2019, m, 12), thread, opener=who)
                )
                events.append(
                    ev("pr_comment", actor("root"), at(2019, m, 12, 6), thread,
                       body="looks fine", opener=who)
                )
                if rng.random() < 0.6:
                    events.append(
                        ev("pr_merged", actor("root"), at(2019, m, 13), thread,
                           opener=who)
                    )
            if rng.random() < 0.7:
                events.append(
                    ev("issue_comment", who, at(2019, m, 14, rng.randint(0, 23)),
                       own_issue, body="status update", opener=who)
                )
            if rng.random() < 0.35:
                events.append(
                    ev("pr_review", who, at(2019, m, 15, rng.randint(0, 23)),
                       f"pr/shared-{m}", body="reviewed",
                       opener=actor("root"))
                )
            if rng.random() < 0.3:
                thread = f"issue/{login}-{m}"
                labels = []
                roll = rng.random()
                if roll < 0.35:
                    labels = ["enhancement"]
                elif roll < 0.55:
                    labels = ["good first issue"]
                events.append(
                    ev("issue_opened", who, at(2019, m, 16), thread, opener=who)
                )
                if labels:
                    events.append(
                        ev("issue_labeled", actor("root"), at(2019, m, 16, 4),
                           thread, labels=labels, opener=who)
                    )
            if rng.random() < 0.25:
                events.append(
                    ev("issue_comment", who, at(2019, m, 17, rng.randint(0, 23)),
                       f"issue/ops-{m}", body="I can help", opener=actor("root"))
                )
            if rng.random() < 0.15:
                events.append(
                    ev("issue_closed", who, at(2019, m, 18), f"issue/ops-{m}",
                       opener=actor("root"))
                )
        if gone is not None:
            # immigration: the dev appears in the committer field
            events.append(
                next_commit(pair, at(2019, gone, 20, 9), pair, (f"{login}/own.c",))
            )
    return events


def write_demo_gitlog(path, events) -> int:
    """Extract the demo commits into a git-log file; returns commit count."""
    from commitgate.ingest import serialize_git_log

    records = [e.commit for e in events if e.kind == "commit"]
    path.write_text(serialize_git_log(records), encoding="utf-8")
    return len(records)


def write_demo_ndjson(path, events) -> int:
    from commitgate.ingest import write_ndjson

    rest = [e for e in events if e.kind != "commit"]
    write_ndjson(rest, path)
    return len(rest)


def demo_config_dict(gitlog="history.log", events="events.ndjson") -> dict:
    return {
        "repos": [
            {"id": REPO, "role": "focal", "gitlog": gitlog, "events": events}
        ],
        "collection_date": "2019-12-01T00:00:00Z",
        "output_dir": "out",
        "cache_dir": "cache",
    }


def write_demo_workspace(tmp_path) -> str:
    """Materialize the demo repo and a config file; returns the config path."""
    import json

    events = demo_events()
    write_demo_gitlog(tmp_path / "history.log", events)
    write_demo_ndjson(tmp_path / "events.ndjson", events)
    config_path = tmp_path / "config.json"
    config_path.write_text(
        json.dumps(demo_config_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return str(config_path)
