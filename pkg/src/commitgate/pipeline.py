"""End-to-end orchestration: ingest, identity, lifecycle, metrics, survival.

Outputs are a pure function of (cache contents, config): artifact files
carry no timestamps, floats are written in repr form, and JSON keys are
sorted, so re-running over unchanged inputs reproduces byte-identical
files. The manifest records a sha256 per artifact to certify that.

A failed stage raises StageError naming the stage; whatever artifacts the
run had already produced are moved into a quarantine subdirectory so a
partial run is never mistaken for a complete one.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import RepoSpec, RunConfig
from .errors import ConfigError, ConvergenceError, DataError, StageError
from .identity import load_denylists, read_overrides, resolve_identities
from .ingest import fetch_events, normalize, parse_git_log, read_ndjson
from .lifecycle import detect_immigrations, read_corrections, write_immigrations_csv
from .metrics import build_panel, write_panel_csv
from .months import isoformat_z
from .report import render_coefficient_table
from .survival import (
    drop_sparse,
    fit_cox_tvc,
    model_tests,
    smoothed_hazard,
    vif_screen,
    write_hazard_csv,
    zscore_filter,
)

log = logging.getLogger(__name__)

ARTIFACT_NAMES = (
    "immigrations.csv",
    "panel.csv",
    "coefficient_table.csv",
    "tests.json",
    "hazard_curve.csv",
    "screening_trace.json",
)

MANIFEST_NAME = "manifest.json"
LOCK_NAME = ".commitgate.lock"
QUARANTINE_DIR = "quarantine"

STAGES = ("ingest", "identity", "lifecycle", "metrics", "survival")


@dataclass(frozen=True)
class ReportBundle:
    """Everything a completed run produced, in memory and on disk."""

    config_hash: str
    output_dir: str
    artifacts: dict
    manifest: dict
    immigrations: tuple
    pool: object
    panel: object
    screening: dict
    fit: object
    tests: object
    hazard: tuple


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@contextmanager
def _locked(output: Path):
    lock = output / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"output directory {output} is locked by another run"
            f" (remove {lock} if stale)"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode("ascii"))
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def jsonable(value):
    """JSON-safe copy; non-finite floats become strings for portability."""
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return repr(value)
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"
    path.write_text(text, encoding="utf-8")


def load_repo_stream(repo: RepoSpec, cache_dir) -> tuple:
    """Events for one repo from its configured sources, normalized.

    Local gitlog and NDJSON inputs are merged when both are given;
    with neither, events come from the API fetch layer (or its cache).
    """
    commits = []
    raw = []
    if repo.gitlog:
        path = Path(repo.gitlog)
        if not path.exists():
            raise DataError(f"gitlog not found for {repo.id}: {path}")
        commits = parse_git_log(path.read_text(encoding="utf-8"), repo.id)
    if repo.events:
        path = Path(repo.events)
        if not path.exists():
            raise DataError(f"events file not found for {repo.id}: {path}")
        raw = list(read_ndjson(path))
    if not repo.gitlog and not repo.events:
        raw = list(fetch_events(repo.id, cache_dir=Path(cache_dir)))
    return normalize(commits, raw)


def stage_ingest(config: RunConfig) -> tuple:
    """Load every configured repo; returns (focal, org, combined) streams."""
    focal = load_repo_stream(config.focal, config.cache_dir)
    if not focal:
        raise DataError(f"no events for focal repo {config.focal.id}")
    siblings = [load_repo_stream(r, config.cache_dir) for r in config.siblings]
    org = normalize((), [ev for s in siblings for ev in s]) if siblings else None
    last = max(ev.time for ev in focal)
    if last > config.collection_date:
        log.warning(
            "events extend past collection_date (%s > %s); they will be ignored",
            isoformat_z(last),
            isoformat_z(config.collection_date),
        )
    combined = normalize((), list(focal) + [ev for s in siblings for ev in s])
    return focal, org, combined


def stage_identity(combined, config: RunConfig) -> tuple:
    """Resolve identities over the combined stream; returns (ids, denylists)."""
    overrides = read_overrides(Path(config.overrides)) if config.overrides else ()
    denylists = load_denylists(config.public_providers, config.academic_suffixes)
    ids = resolve_identities(combined, overrides=overrides, denylists=denylists)
    return ids, denylists


def stage_lifecycle(focal, ids, config: RunConfig) -> tuple:
    corrections = (
        read_corrections(Path(config.corrections)) if config.corrections else []
    )
    return detect_immigrations(
        focal,
        ids,
        corrections,
        config.collection_date,
        appearance_kinds=config.appearance_kinds,
        bot_logins=config.bot_logins,
    )


def stage_metrics(focal, ids, pool, immigrations, config: RunConfig, *, org=None,
                  denylists=None):
    label_kwargs = {}
    if config.newcomer_labels is not None:
        label_kwargs["newcomer_labels"] = config.newcomer_labels
    if config.feature_labels is not None:
        label_kwargs["feature_labels"] = config.feature_labels
    return build_panel(
        focal,
        ids,
        pool,
        immigrations,
        config.collection_date,
        org_stream=org,
        denylists=denylists,
        **label_kwargs,
    )


def screen_and_fit(panel, config: RunConfig) -> tuple:
    """Survival stage: outlier filter, sparsity and VIF screens, Cox fit.

    Returns (filtered panel, screening trace dict, fit, tests, curve);
    tests is None when the fit did not converge.
    """
    zpanel, zreport = zscore_filter(panel, threshold=config.threshold("zscore"))
    sparse = drop_sparse(zpanel)
    if len(sparse.kept) >= 2:
        vif = vif_screen(zpanel, threshold=config.threshold("vif"), columns=sparse.kept)
        kept = list(vif.kept)
        vif_trace = {"kept": kept, "dropped": dict(vif.dropped), "values": dict(vif.vif)}
    else:
        kept = list(sparse.kept)
        vif_trace = {
            "kept": kept,
            "dropped": {},
            "values": {},
            "note": "fewer than 2 covariates after sparsity screen",
        }
    if not kept:
        raise DataError("no covariates survived screening")
    screening = {
        "zscore": {
            "threshold": zreport.threshold,
            "rows_before": zreport.rows_before,
            "rows_removed": zreport.rows_removed,
            "by_column": dict(zreport.by_column),
        },
        "sparse": {"kept": list(sparse.kept), "dropped": dict(sparse.dropped)},
        "vif": vif_trace,
    }
    fit = fit_cox_tvc(
        zpanel,
        ties=config.threshold("ties"),
        columns=kept,
        baseline_cuts=config.threshold("cuts"),
    )
    tests = model_tests(fit) if fit.converged else None
    curve = smoothed_hazard(
        zpanel,
        bandwidth=config.threshold("bandwidth"),
        grid_step=config.grid_step,
    )
    return zpanel, screening, fit, tests, curve


def tests_payload(fit, tests) -> dict:
    payload = {
        "converged": fit.converged,
        "iterations": fit.iterations,
        "ties": fit.ties,
        "df": fit.df,
        "n_rows": fit.n_rows,
        "n_events": fit.n_events,
        "covariates": list(fit.covariate_names),
        "loglik_null": fit.loglik_null,
        "loglik_fit": fit.loglik_fit,
    }
    if tests is not None:
        for name, result in (("lr", tests.lr), ("wald", tests.wald), ("score", tests.score)):
            payload[name] = {
                "statistic": result.statistic,
                "df": result.df,
                "p": result.p,
            }
    return payload


def _quarantine(output: Path, written: list) -> None:
    survivors = [p for p in written if p.exists()]
    if not survivors:
        return
    pen = output / QUARANTINE_DIR
    pen.mkdir(exist_ok=True)
    for path in survivors:
        os.replace(path, pen / path.name)
    log.warning("moved %d partial outputs to %s", len(survivors), pen)


def run_pipeline(config: RunConfig) -> ReportBundle:
    """Execute every stage and write the artifact set plus manifest."""
    output = Path(config.output_dir)
    output.mkdir(parents=True, exist_ok=True)
    with _locked(output):
        return _run_stages(config, output)


def _run_stages(config: RunConfig, output: Path) -> ReportBundle:
    written = []

    def target(name: str) -> Path:
        path = output / name
        written.append(path)
        return path

    try:
        with _stage("ingest"):
            focal, org, combined = stage_ingest(config)

        with _stage("identity"):
            ids, denylists = stage_identity(combined, config)

        with _stage("lifecycle"):
            immigrations, pool = stage_lifecycle(focal, ids, config)
            write_immigrations_csv(immigrations, target("immigrations.csv"))

        with _stage("metrics"):
            panel = stage_metrics(
                focal, ids, pool, immigrations, config, org=org, denylists=denylists
            )
            write_panel_csv(panel, target("panel.csv"))

        with _stage("survival"):
            zpanel, screening, fit, tests, curve = screen_and_fit(panel, config)
            if not fit.converged:
                raise ConvergenceError(
                    f"cox fit did not converge in {fit.iterations} iterations"
                )
            table = render_coefficient_table(fit, format="csv")
            target("coefficient_table.csv").write_text(table, encoding="utf-8")
            write_json(target("tests.json"), tests_payload(fit, tests))
            write_hazard_csv(curve, target("hazard_curve.csv"))
            write_json(target("screening_trace.json"), screening)
    except StageError:
        _quarantine(output, written)
        raise

    from . import __version__

    artifacts = {name: str(output / name) for name in ARTIFACT_NAMES}
    manifest = {
        "config_hash": config.hash(),
        "version": __version__,
        "artifacts": {name: _sha256(output / name) for name in ARTIFACT_NAMES},
    }
    write_json(output / MANIFEST_NAME, manifest)
    return ReportBundle(
        config_hash=manifest["config_hash"],
        output_dir=str(output),
        artifacts=artifacts,
        manifest=manifest,
        immigrations=tuple(immigrations),
        pool=pool,
        panel=zpanel,
        screening=screening,
        fit=fit,
        tests=tests,
        hazard=tuple(curve),
    )
