"""Merge raw identities into resolved developers and infer affiliation.

Merging is the transitive closure of three rules: identical email,
identical login, identical normalized full name when that name is
unambiguous in the corpus. Ambiguous names are left unmerged and listed in
a side report. An operator override file wins over every automatic rule,
including splitting an automatic merge.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter, defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import ConfigError
from .ingest.events import Event, RawIdentity

log = logging.getLogger(__name__)

AFFILIATION_KINDS = ("company", "independent", "unknown")


@dataclass(frozen=True)
class Affiliation:
    kind: str
    domain: str = ""

    def __post_init__(self):
        if self.kind not in AFFILIATION_KINDS:
            raise ValueError(f"unknown affiliation kind: {self.kind!r}")
        if self.kind == "company" and not self.domain:
            raise ValueError("company affiliation requires a domain")
        if self.kind != "company" and self.domain:
            raise ValueError("only company affiliation carries a domain")

    def __str__(self):
        return f"company:{self.domain}" if self.kind == "company" else self.kind

    @classmethod
    def parse(cls, text: str) -> "Affiliation":
        text = text.strip()
        if text.startswith("company:"):
            return cls("company", text.split(":", 1)[1].strip().lower())
        if text in ("independent", "unknown"):
            return cls(text)
        raise ConfigError(f"bad affiliation value: {text!r}")


UNKNOWN = Affiliation("unknown")
INDEPENDENT = Affiliation("independent")


@dataclass(frozen=True)
class DevIdentity:
    """A resolved developer: disjoint alias set plus inferred affiliation."""

    id: str
    aliases: frozenset  # of (name, email, login) triples
    affiliation: Affiliation = UNKNOWN

    def emails(self) -> list[str]:
        return sorted({email for _, email, _ in self.aliases if email})

    def logins(self) -> list[str]:
        return sorted({login for _, _, login in self.aliases if login})

    def names(self) -> list[str]:
        return sorted({name for name, _, _ in self.aliases if name})


@dataclass(frozen=True)
class Denylists:
    public_providers: frozenset = frozenset()
    academic_suffixes: frozenset = frozenset()


@dataclass(frozen=True)
class OverrideRow:
    raw_email: str = ""
    raw_login: str = ""
    dev_id: str = ""
    affiliation: Affiliation | None = None

    def matches(self, raw: RawIdentity) -> bool:
        if self.raw_email and raw.email and raw.email.casefold() == self.raw_email.casefold():
            return True
        if self.raw_login and raw.login and raw.login.casefold() == self.raw_login.casefold():
            return True
        return False


def normalize_name(name: str) -> str:
    """Lowercased, internal whitespace collapsed."""
    return " ".join(name.split()).casefold()


def _domain(email: str) -> str:
    if "@" not in email:
        return ""
    return email.rsplit("@", 1)[1].strip().strip(">").casefold()


def _suffix_match(domain: str, suffixes: Iterable[str]) -> bool:
    for suffix in suffixes:
        if domain == suffix or domain.endswith("." + suffix):
            return True
    return False


def load_denylists(
    public_path: Path | None = None, academic_path: Path | None = None
) -> Denylists:
    """Load denylist files; shipped defaults when paths are omitted."""

    def read(path: Path | None, default_name: str) -> frozenset:
        if path is not None:
            text = Path(path).read_text(encoding="utf-8")
        else:
            text = resources.files("commitgate.data").joinpath(default_name).read_text(
                encoding="utf-8"
            )
        entries = set()
        for line in text.splitlines():
            line = line.strip().casefold()
            if line and not line.startswith("#"):
                entries.add(line.lstrip("."))
        return frozenset(entries)

    return Denylists(
        public_providers=read(public_path, "public_providers.txt"),
        academic_suffixes=read(academic_path, "academic_suffixes.txt"),
    )


def classify_domain(domain: str, denylists: Denylists) -> str:
    """'company', 'denylisted', or 'invalid' for one email domain."""
    if not domain or "." not in domain:
        return "invalid"
    if _suffix_match(domain, denylists.public_providers):
        return "denylisted"
    if _suffix_match(domain, denylists.academic_suffixes):
        return "denylisted"
    return "company"


def affiliation_from_emails(emails: Iterable[str], denylists: Denylists) -> Affiliation:
    """Company iff any qualifying domain exists; the modal one is reported.

    Ties on frequency break to the lexicographically smallest domain so the
    result is order-independent.
    """
    company_domains: Counter = Counter()
    saw_email = False
    for email in emails:
        domain = _domain(email)
        if not domain and "@" not in email:
            continue
        saw_email = True
        if classify_domain(domain, denylists) == "company":
            company_domains[domain] += 1
    if company_domains:
        best = min(company_domains, key=lambda d: (-company_domains[d], d))
        return Affiliation("company", best)
    if saw_email:
        return INDEPENDENT
    return UNKNOWN


def infer_affiliation(dev: DevIdentity, denylists: Denylists | None = None) -> Affiliation:
    denylists = denylists if denylists is not None else load_denylists()
    emails = [email for _, email, _ in dev.aliases if email]
    return affiliation_from_emails(emails, denylists)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller key as root for deterministic group identity
            lo, hi = sorted((ra, rb))
            self.parent[hi] = lo


class IdentityMap(Mapping):
    """Mapping raw identity -> DevIdentity, plus resolution side reports."""

    def __init__(self, by_raw: dict, developers: Sequence[DevIdentity], ambiguous_names: Sequence[str]):
        self._by_raw = dict(by_raw)
        self.developers = tuple(developers)
        self.ambiguous_names = tuple(ambiguous_names)
        self._by_id = {dev.id: dev for dev in self.developers}

    def __getitem__(self, raw: RawIdentity) -> DevIdentity:
        return self._by_id[self._by_raw[raw]]

    def __iter__(self) -> Iterator[RawIdentity]:
        return iter(self._by_raw)

    def __len__(self) -> int:
        return len(self._by_raw)

    def id_of(self, raw: RawIdentity) -> str:
        return self._by_raw[raw]

    def get_id(self, raw: RawIdentity, default: str | None = None) -> str | None:
        return self._by_raw.get(raw, default)

    def dev(self, dev_id: str) -> DevIdentity:
        return self._by_id[dev_id]


def _raw_identities(stream: Iterable[Event]) -> list[RawIdentity]:
    seen: dict[RawIdentity, None] = {}
    for event in stream:
        for raw in (event.actor, event.opener):
            if raw is not None:
                seen.setdefault(raw)
        if event.commit is not None:
            seen.setdefault(event.commit.author)
            seen.setdefault(event.commit.committer)
    return list(seen)


def _canonical_id(raws: Sequence[RawIdentity]) -> str:
    emails = sorted(r.email.casefold() for r in raws if r.email)
    if emails:
        return f"email:{emails[0]}"
    logins = sorted(r.login.casefold() for r in raws if r.login)
    if logins:
        return f"login:{logins[0]}"
    names = sorted(normalize_name(r.name) for r in raws if r.name)
    return f"name:{names[0]}"


def resolve_identities(
    stream: Iterable[Event],
    *,
    overrides: Sequence[OverrideRow] = (),
    denylists: Denylists | None = None,
) -> IdentityMap:
    """Partition the stream's raw identities into resolved developers.

    Deterministic and order-independent: any permutation of the stream
    yields the same partition. Ambiguous shared names never merge; they are
    reported in ``IdentityMap.ambiguous_names``.
    """
    denylists = denylists if denylists is not None else load_denylists()
    raws = sorted(_raw_identities(stream))
    uf = _UnionFind()
    for raw in raws:
        uf.find(raw)

    by_email: dict[str, list[RawIdentity]] = defaultdict(list)
    by_login: dict[str, list[RawIdentity]] = defaultdict(list)
    by_name: dict[str, list[RawIdentity]] = defaultdict(list)
    for raw in raws:
        if raw.email:
            by_email[raw.email.casefold()].append(raw)
        if raw.login:
            by_login[raw.login.casefold()].append(raw)
        if raw.name:
            by_name[normalize_name(raw.name)].append(raw)

    for group in by_email.values():
        for other in group[1:]:
            uf.union(group[0], other)
    for group in by_login.values():
        for other in group[1:]:
            uf.union(group[0], other)

    ambiguous = []
    for name, group in sorted(by_name.items()):
        emails = {r.email.casefold() for r in group if r.email}
        logins = {r.login.casefold() for r in group if r.login}
        if len(emails) <= 1 and len(logins) <= 1:
            for other in group[1:]:
                uf.union(group[0], other)
        else:
            ambiguous.append(name)
            log.info("name %r is ambiguous in the corpus; not merged", name)

    groups: dict[RawIdentity, list[RawIdentity]] = defaultdict(list)
    for raw in raws:
        groups[uf.find(raw)].append(raw)

    # overrides extract matched identities from their automatic group and
    # pin them to the operator-chosen dev id
    forced: dict[str, list[RawIdentity]] = defaultdict(list)
    forced_affiliation: dict[str, Affiliation] = {}
    overridden: set[RawIdentity] = set()
    for row in overrides:
        if not row.dev_id:
            raise ConfigError("override row missing dev_id")
        for raw in raws:
            if raw not in overridden and row.matches(raw):
                overridden.add(raw)
                forced[row.dev_id].append(raw)
        if row.affiliation is not None:
            forced_affiliation[row.dev_id] = row.affiliation

    by_raw: dict[RawIdentity, str] = {}
    developers: list[DevIdentity] = []

    def build(dev_id: str, members: Sequence[RawIdentity], pinned: Affiliation | None):
        aliases = frozenset((r.name, r.email, r.login) for r in members)
        emails = [r.email for r in members if r.email]
        affiliation = pinned if pinned is not None else affiliation_from_emails(emails, denylists)
        developers.append(DevIdentity(id=dev_id, aliases=aliases, affiliation=affiliation))
        for raw in members:
            by_raw[raw] = dev_id

    for root in sorted(groups):
        members = [r for r in groups[root] if r not in overridden]
        if members:
            build(_canonical_id(members), members, None)
    for dev_id in sorted(forced):
        build(dev_id, forced[dev_id], forced_affiliation.get(dev_id))

    return IdentityMap(by_raw, developers, ambiguous)


def read_overrides(path: Path) -> list[OverrideRow]:
    """Parse the operator override CSV (raw_email,raw_login,dev_id,affiliation)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"raw_email", "raw_login", "dev_id", "affiliation"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ConfigError(f"override file {path} must have columns {sorted(required)}")
        for record in reader:
            affiliation = None
            if (record.get("affiliation") or "").strip():
                affiliation = Affiliation.parse(record["affiliation"])
            rows.append(
                OverrideRow(
                    raw_email=(record.get("raw_email") or "").strip(),
                    raw_login=(record.get("raw_login") or "").strip(),
                    dev_id=(record.get("dev_id") or "").strip(),
                    affiliation=affiliation,
                )
            )
    return rows
