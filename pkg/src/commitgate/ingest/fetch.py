"""REST client for code-hosting event history, with an on-disk page cache.

Raw page payloads are persisted verbatim (NDJSON, one item per line) under
``cache_dir/<repo>/<endpoint>/page-NNNNN.ndjson`` before any normalization,
so a warm cache replays byte-identically offline. Pagination follows the
``Link: rel="next"`` header; rate-limit responses sleep until the
server-advertised reset; transient failures retry with exponential backoff.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..errors import AuthError, FetchError
from ..months import isoformat_z, parse_iso_utc
from .events import Event, RawIdentity

log = logging.getLogger(__name__)

TOKEN_ENV_VAR = "COMMITGATE_TOKEN"

# (status, headers, parsed json body)
HttpResponse = tuple[int, dict, object]
HttpGet = Callable[[str, dict, dict], HttpResponse]


def _requests_get(url: str, params: dict, headers: dict) -> HttpResponse:
    import requests

    resp = requests.get(url, params=params, headers=headers, timeout=30)
    try:
        body = resp.json()
    except ValueError:
        body = None
    return resp.status_code, dict(resp.headers), body


@dataclass
class FetchClient:
    """Paged GET with auth, rate-limit waits and bounded retries."""

    base_url: str = "https://api.github.com"
    token: str | None = None
    http_get: HttpGet = field(default=None)  # type: ignore[assignment]
    sleep: Callable[[float], None] = time.sleep
    now: Callable[[], float] = time.time
    max_attempts: int = 5
    per_page: int = 100

    def __post_init__(self):
        if self.token is None:
            self.token = os.environ.get(TOKEN_ENV_VAR)
        if self.http_get is None:
            self.http_get = _requests_get

    def _headers(self) -> dict:
        headers = {"Accept": "application/vnd.github+json"}
        if self.token:
            headers["Authorization"] = f"token {self.token}"
        return headers

    def get_page(self, path: str, params: dict) -> tuple[list, bool]:
        """One page of results; returns (items, has_next)."""
        url = self.base_url.rstrip("/") + "/" + path.lstrip("/")
        attempt = 0
        delay = 1.0
        while True:
            attempt += 1
            try:
                status, headers, body = self.http_get(url, params, self._headers())
            except Exception as exc:
                if attempt >= self.max_attempts:
                    raise FetchError(f"GET {path} failed after {attempt} attempts: {exc}")
                self.sleep(delay)
                delay *= 2
                continue

            if status in (401,):
                raise AuthError(f"authentication rejected for {path} (HTTP {status})")
            if status in (403, 429) and self._is_rate_limited(headers):
                wait = self._rate_limit_wait(headers)
                log.info("rate limited on %s; sleeping %.0fs", path, wait)
                self.sleep(wait)
                attempt -= 1  # rate-limit waits do not consume retry attempts
                continue
            if status >= 500 or status in (403, 429):
                if attempt >= self.max_attempts:
                    raise FetchError(f"GET {path} failed with HTTP {status} after {attempt} attempts")
                self.sleep(delay)
                delay *= 2
                continue
            if status == 404:
                raise FetchError(f"GET {path}: not found (HTTP 404)")
            if status != 200:
                raise FetchError(f"GET {path}: unexpected HTTP {status}")

            items = body if isinstance(body, list) else [body]
            link = headers.get("Link") or headers.get("link") or ""
            return items, 'rel="next"' in link

    @staticmethod
    def _is_rate_limited(headers: dict) -> bool:
        if headers.get("Retry-After"):
            return True
        return headers.get("X-RateLimit-Remaining") == "0"

    def _rate_limit_wait(self, headers: dict) -> float:
        if headers.get("Retry-After"):
            return max(0.0, float(headers["Retry-After"]))
        reset = float(headers.get("X-RateLimit-Reset", self.now() + 60))
        return max(0.0, reset - self.now()) + 1.0


def _slug(path: str, params: dict) -> str:
    slug = re.sub(r"[^A-Za-z0-9_.-]+", "_", path.strip("/"))
    keys = {k: v for k, v in sorted(params.items()) if k not in ("page", "per_page")}
    if keys:
        slug += "+" + re.sub(r"[^A-Za-z0-9_.-]+", "_", json.dumps(keys, sort_keys=True))
    return slug


def fetch_paged(
    client: FetchClient, cache_dir: Path, repo: str, path: str, params: dict
) -> list[dict]:
    """All items of a paged endpoint, reading/writing the page cache.

    A ``.complete`` marker records that pagination finished, so warm-cache
    runs issue no requests at all.
    """
    endpoint_dir = Path(cache_dir) / repo.replace("/", "__") / _slug(path, params)
    endpoint_dir.mkdir(parents=True, exist_ok=True)
    marker = endpoint_dir / ".complete"
    last_page = _read_marker(marker)

    items: list[dict] = []
    page = 1
    while True:
        page_file = endpoint_dir / f"page-{page:05d}.ndjson"
        if page_file.exists():
            with open(page_file, encoding="utf-8") as fh:
                page_items = [json.loads(line) for line in fh if line.strip()]
            # without a marker the cached page's has_next is unknown; keep
            # walking, the first missing page triggers a live request
            has_next = last_page is None or page < last_page
        else:
            request_params = dict(params, per_page=client.per_page, page=page)
            page_items, has_next = client.get_page(path, request_params)
            tmp = page_file.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                for item in page_items:
                    fh.write(json.dumps(item, sort_keys=True, ensure_ascii=False) + "\n")
            os.replace(tmp, page_file)
            if not has_next:
                marker.write_text(str(page))
        items.extend(page_items)
        if not has_next:
            break
        page += 1
    return items


def _read_marker(marker: Path) -> int | None:
    try:
        return int(marker.read_text().strip())
    except (OSError, ValueError):
        return None


def fetch_events(
    repo: str,
    kinds: Iterable[str] | None = None,
    *,
    cache_dir: Path,
    client: FetchClient | None = None,
    since: datetime | None = None,
) -> list[Event]:
    """Fetch and normalize a repo's hosted activity into raw events.

    Pages are cached before normalization; de-duplication uses the
    (kind, thread_id, actor, time) key. ``kinds`` filters the output.
    """
    client = client or FetchClient()
    params_since = {"since": isoformat_z(since)} if since else {}

    issues = fetch_paged(
        client, cache_dir, repo, f"repos/{repo}/issues",
        dict(params_since, state="all"),
    )
    issue_events = fetch_paged(client, cache_dir, repo, f"repos/{repo}/issues/events", {})
    issue_comments = fetch_paged(
        client, cache_dir, repo, f"repos/{repo}/issues/comments", dict(params_since)
    )
    pulls = fetch_paged(client, cache_dir, repo, f"repos/{repo}/pulls", {"state": "all"})
    commit_comments = fetch_paged(client, cache_dir, repo, f"repos/{repo}/comments", {})
    reviews = []
    for pull in pulls:
        number = pull.get("number")
        if number is None:
            continue
        for item in fetch_paged(
            client, cache_dir, repo, f"repos/{repo}/pulls/{number}/reviews", {}
        ):
            item = dict(item, _pull_number=number)
            reviews.append(item)

    events = events_from_payloads(
        repo,
        issues=issues,
        issue_events=issue_events,
        issue_comments=issue_comments,
        pulls=pulls,
        reviews=reviews,
        commit_comments=commit_comments,
    )
    if since is not None:
        events = [ev for ev in events if ev.time >= since.astimezone(timezone.utc)]
    if kinds is not None:
        wanted = set(kinds)
        events = [ev for ev in events if ev.kind in wanted]

    seen: set[tuple] = set()
    unique = []
    for ev in events:
        key = ev.dedup_key()
        if key not in seen:
            seen.add(key)
            unique.append(ev)
    return unique


def _login(obj) -> str | None:
    return obj.get("login") if isinstance(obj, dict) else None


def _actor(obj) -> RawIdentity | None:
    login = _login(obj)
    return RawIdentity(login=login) if login else None


def _time(item: dict, key: str) -> datetime | None:
    value = item.get(key)
    if not value:
        return None
    try:
        return parse_iso_utc(value, key)
    except ValueError:
        return None


def _issue_thread(item: dict) -> str:
    number = item.get("number")
    prefix = "pr" if item.get("pull_request") else "issue"
    return f"{prefix}/{number}"


def events_from_payloads(
    repo: str,
    *,
    issues: Sequence[dict] = (),
    issue_events: Sequence[dict] = (),
    issue_comments: Sequence[dict] = (),
    pulls: Sequence[dict] = (),
    reviews: Sequence[dict] = (),
    commit_comments: Sequence[dict] = (),
) -> list[Event]:
    """Map cached provider payloads to events. Pure; safe to replay."""
    out: list[Event] = []

    def emit(kind, actor, when, thread, *, labels=frozenset(), body="", opener=None):
        if actor is None or when is None:
            log.warning("skipping %s event with missing actor or time", kind)
            return
        out.append(
            Event(
                kind=kind,
                actor=actor,
                time=when,
                repo=repo,
                thread_id=thread,
                labels=frozenset(labels),
                body=body or "",
                opener=opener,
            )
        )

    for item in issues:
        if item.get("pull_request"):
            continue  # the issues endpoint lists PRs too; those come from /pulls
        thread = _issue_thread(item)
        opener = _actor(item.get("user"))
        # current labels are not attached to the open event: label timing
        # comes from the issue-events endpoint, otherwise later labels would
        # leak into earlier months
        emit("issue_opened", opener, _time(item, "created_at"), thread, opener=opener)
        if item.get("closed_at"):
            closer = _actor(item.get("closed_by")) or opener
            emit("issue_closed", closer, _time(item, "closed_at"), thread, opener=opener)

    for item in issue_events:
        issue = item.get("issue") or {}
        thread = _issue_thread(issue)
        actor = _actor(item.get("actor"))
        when = _time(item, "created_at")
        action = item.get("event")
        if action == "labeled":
            name = (item.get("label") or {}).get("name")
            emit("issue_labeled", actor, when, thread, labels={name} if name else frozenset())
        elif action == "assigned":
            emit("issue_assigned", actor, when, thread)
        elif action == "closed":
            emit("issue_closed", actor, when, thread)

    for item in issue_comments:
        issue_url = item.get("issue_url") or ""
        number = issue_url.rstrip("/").rsplit("/", 1)[-1]
        is_pr = "/pull/" in (item.get("html_url") or "")
        kind = "pr_comment" if is_pr else "issue_comment"
        thread = f"{'pr' if is_pr else 'issue'}/{number}"
        emit(kind, _actor(item.get("user")), _time(item, "created_at"), thread,
             body=item.get("body") or "")

    for item in pulls:
        number = item.get("number")
        thread = f"pr/{number}"
        opener = _actor(item.get("user"))
        emit("pr_opened", opener, _time(item, "created_at"), thread, opener=opener)
        if item.get("merged_at"):
            merger = _actor(item.get("merged_by")) or opener
            emit("pr_merged", merger, _time(item, "merged_at"), thread, opener=opener)
        elif item.get("closed_at"):
            emit("pr_closed", opener, _time(item, "closed_at"), thread, opener=opener)

    for item in reviews:
        number = item.get("_pull_number")
        if number is None:
            url = item.get("pull_request_url") or ""
            number = url.rstrip("/").rsplit("/", 1)[-1]
        emit(
            "pr_review",
            _actor(item.get("user")),
            _time(item, "submitted_at"),
            f"pr/{number}",
            body=item.get("body") or "",
        )

    for item in commit_comments:
        commit_id = item.get("commit_id") or "unknown"
        emit(
            "commit_comment",
            _actor(item.get("user")),
            _time(item, "created_at"),
            f"commit/{commit_id}",
            body=item.get("body") or "",
        )

    return out
