"""Run configuration: a single JSON document driving the pipeline.

The config is structural only; numeric threshold semantics (vif bounds,
zscore positivity) are enforced by the stage that consumes them, so a
bad threshold surfaces as that stage's error rather than a config one.
Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .months import isoformat_z, parse_iso_utc

REPO_ROLES = ("focal", "sibling")

DEFAULT_THRESHOLDS = {
    "zscore": 3.0,
    "vif": 5.0,
    "ties": "efron",
    "bandwidth": None,
    "cuts": None,
}

_REPO_KEYS = {"id", "role", "gitlog", "events"}

_CONFIG_KEYS = {
    "repos",
    "collection_date",
    "output_dir",
    "cache_dir",
    "thresholds",
    "newcomer_labels",
    "feature_labels",
    "public_providers",
    "academic_suffixes",
    "overrides",
    "corrections",
    "bot_logins",
    "appearance_kinds",
    "grid_step",
}


@dataclass(frozen=True)
class RepoSpec:
    """One repository: the focal project or an org sibling."""

    id: str
    role: str = "focal"
    gitlog: Optional[str] = None
    events: Optional[str] = None

    def __post_init__(self):
        if not self.id or "/" not in self.id:
            raise ConfigError(f"repo id must look like owner/name: {self.id!r}")
        if self.role not in REPO_ROLES:
            raise ConfigError(f"repo role must be focal or sibling: {self.role!r}")


@dataclass(frozen=True)
class RunConfig:
    repos: tuple
    collection_date: datetime
    output_dir: str = "out"
    cache_dir: str = "cache"
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    newcomer_labels: Optional[tuple] = None
    feature_labels: Optional[tuple] = None
    public_providers: Optional[str] = None
    academic_suffixes: Optional[str] = None
    overrides: Optional[str] = None
    corrections: Optional[str] = None
    bot_logins: tuple = ()
    appearance_kinds: Optional[tuple] = None
    grid_step: float = 0.25

    def __post_init__(self):
        focal = [r for r in self.repos if r.role == "focal"]
        if len(focal) != 1:
            raise ConfigError(
                f"exactly one focal repo required, found {len(focal)}"
            )
        ids = [r.id for r in self.repos]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate repo ids in config")
        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            raise ConfigError(f"unknown threshold keys: {sorted(unknown)}")

    @property
    def focal(self) -> RepoSpec:
        return next(r for r in self.repos if r.role == "focal")

    @property
    def siblings(self) -> tuple:
        return tuple(r for r in self.repos if r.role == "sibling")

    def threshold(self, key: str):
        if key not in DEFAULT_THRESHOLDS:
            raise ConfigError(f"unknown threshold: {key!r}")
        return self.thresholds.get(key, DEFAULT_THRESHOLDS[key])

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("repos", "collection_date"):
            if key not in data:
                raise ConfigError(f"config missing required key: {key!r}")
        repos = []
        for entry in data["repos"]:
            if not isinstance(entry, dict):
                raise ConfigError(f"repo entry must be an object: {entry!r}")
            bad = set(entry) - _REPO_KEYS
            if bad:
                raise ConfigError(f"unknown repo keys: {sorted(bad)}")
            repos.append(RepoSpec(**entry))
        try:
            collected = parse_iso_utc(str(data["collection_date"]), "collection_date")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        thresholds = dict(DEFAULT_THRESHOLDS)
        thresholds.update(data.get("thresholds", {}))

        def tup(key):
            value = data.get(key)
            return None if value is None else tuple(value)

        return cls(
            repos=tuple(repos),
            collection_date=collected,
            output_dir=data.get("output_dir", "out"),
            cache_dir=data.get("cache_dir", "cache"),
            thresholds=thresholds,
            newcomer_labels=tup("newcomer_labels"),
            feature_labels=tup("feature_labels"),
            public_providers=data.get("public_providers"),
            academic_suffixes=data.get("academic_suffixes"),
            overrides=data.get("overrides"),
            corrections=data.get("corrections"),
            bot_logins=tuple(data.get("bot_logins", ())),
            appearance_kinds=tup("appearance_kinds"),
            grid_step=float(data.get("grid_step", 0.25)),
        )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        config = cls.from_dict(data)
        return config.resolved_against(path.parent)

    def resolved_against(self, base) -> "RunConfig":
        """Resolve relative path fields against a base directory."""
        base = Path(base)

        def fix(value):
            if value is None:
                return None
            p = Path(value)
            return str(p) if p.is_absolute() else str(base / p)

        return RunConfig(
            repos=tuple(
                RepoSpec(r.id, r.role, fix(r.gitlog), fix(r.events))
                for r in self.repos
            ),
            collection_date=self.collection_date,
            output_dir=fix(self.output_dir),
            cache_dir=fix(self.cache_dir),
            thresholds=dict(self.thresholds),
            newcomer_labels=self.newcomer_labels,
            feature_labels=self.feature_labels,
            public_providers=fix(self.public_providers),
            academic_suffixes=fix(self.academic_suffixes),
            overrides=fix(self.overrides),
            corrections=fix(self.corrections),
            bot_logins=self.bot_logins,
            appearance_kinds=self.appearance_kinds,
            grid_step=self.grid_step,
        )

    def to_dict(self) -> dict:
        def lst(value):
            return None if value is None else list(value)

        return {
            "repos": [
                {"id": r.id, "role": r.role, "gitlog": r.gitlog, "events": r.events}
                for r in self.repos
            ],
            "collection_date": isoformat_z(self.collection_date),
            "output_dir": self.output_dir,
            "cache_dir": self.cache_dir,
            "thresholds": dict(self.thresholds),
            "newcomer_labels": lst(self.newcomer_labels),
            "feature_labels": lst(self.feature_labels),
            "public_providers": self.public_providers,
            "academic_suffixes": self.academic_suffixes,
            "overrides": self.overrides,
            "corrections": self.corrections,
            "bot_logins": list(self.bot_logins),
            "appearance_kinds": lst(self.appearance_kinds),
            "grid_step": self.grid_step,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def hash(self) -> str:
        """Stable digest of the config content; stamped into the manifest."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
