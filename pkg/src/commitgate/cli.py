"""Command line interface.

Subcommands cover the pipeline stages individually (fetch, parse-log,
detect, panel, fit, report) plus `all` for the end-to-end run. Exit
codes: 0 success, 1 internal error, 2 configuration or input error,
3 statistical nonconvergence. API requests authenticate with the
COMMITGATE_TOKEN environment variable when it is set.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig
from .errors import (
    CommitgateError,
    ConfigError,
    ConvergenceError,
    DataError,
    FetchError,
    ParseError,
    StageError,
)
from .ingest import fetch_events, normalize, parse_git_log, write_ndjson
from .lifecycle import write_immigrations_csv
from .metrics import read_panel_csv, write_panel_csv
from .pipeline import (
    run_pipeline,
    screen_and_fit,
    stage_identity,
    stage_ingest,
    stage_lifecycle,
    stage_metrics,
    tests_payload,
    write_json,
)
from .report import render_coefficient_table
from .survival import write_hazard_csv

log = logging.getLogger(__name__)


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the documented process exit code."""
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, ConvergenceError):
        return 3
    if isinstance(exc, (ConfigError, DataError, FetchError, ParseError)):
        return 2
    return 1


def _load_config(args) -> RunConfig:
    config = RunConfig.from_json(args.config)
    replacements = {}
    for field in ("output_dir", "cache_dir"):
        value = getattr(args, field, None)
        if value is not None:
            replacements[field] = value
    thresholds = dict(config.thresholds)
    changed = False
    for key in ("zscore", "vif", "ties", "bandwidth"):
        value = getattr(args, key, None)
        if value is not None:
            thresholds[key] = value
            changed = True
    if getattr(args, "cuts", None) is not None:
        thresholds["cuts"] = [float(c) for c in args.cuts.split(",") if c.strip()]
        changed = True
    if changed:
        replacements["thresholds"] = thresholds
    if getattr(args, "grid_step", None) is not None:
        replacements["grid_step"] = args.grid_step
    if replacements:
        config = dataclasses.replace(config, **replacements)
    return config


def _panel_for(args, config: RunConfig):
    """Panel from --panel csv when given, else mined from the event data."""
    if getattr(args, "panel", None):
        return read_panel_csv(Path(args.panel))
    focal, org, combined = stage_ingest(config)
    ids, denylists = stage_identity(combined, config)
    immigrations, pool = stage_lifecycle(focal, ids, config)
    return stage_metrics(
        focal, ids, pool, immigrations, config, org=org, denylists=denylists
    )


def _emit(text: str, out) -> None:
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_fetch(args) -> int:
    config = _load_config(args)
    for repo in config.repos:
        events = fetch_events(repo.id, cache_dir=Path(config.cache_dir))
        print(f"{repo.id}: {len(events)} events cached")
        if args.ndjson_dir:
            out = Path(args.ndjson_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_ndjson(events, out / (repo.id.replace("/", "__") + ".ndjson"))
    return 0


def cmd_parse_log(args) -> int:
    if args.gitlog == "-":
        text = sys.stdin.read()
    else:
        path = Path(args.gitlog)
        if not path.exists():
            raise DataError(f"gitlog not found: {path}")
        text = path.read_text(encoding="utf-8")
    records = parse_git_log(text, args.repo)
    stream = normalize(records, ())
    if args.out:
        write_ndjson(stream, Path(args.out))
        print(f"{len(stream)} events -> {args.out}")
    else:
        for ev in stream:
            sys.stdout.write(
                json.dumps(ev.to_json(), sort_keys=True, ensure_ascii=False) + "\n"
            )
    return 0


def cmd_detect(args) -> int:
    config = _load_config(args)
    focal, _, combined = stage_ingest(config)
    ids, _ = stage_identity(combined, config)
    immigrations, pool = stage_lifecycle(focal, ids, config)
    out = Path(args.out) if args.out else Path(config.output_dir) / "immigrations.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_immigrations_csv(immigrations, out)
    observed = sum(1 for ev in immigrations if not ev.censored)
    print(
        f"{len(pool.candidates)} candidates, {len(pool.founding_committers)} founding,"
        f" {observed} immigrations -> {out}"
    )
    return 0


def cmd_panel(args) -> int:
    config = _load_config(args)
    panel = _panel_for(args, config)
    out = Path(args.out) if args.out else Path(config.output_dir) / "panel.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_panel_csv(panel, out)
    devs = len({row.dev for row in panel.rows})
    print(f"{len(panel.rows)} rows over {devs} developers -> {out}")
    return 0


def cmd_fit(args) -> int:
    config = _load_config(args)
    panel = _panel_for(args, config)
    _, screening, fit, tests, curve = screen_and_fit(panel, config)
    _emit(render_coefficient_table(fit, format="csv"), args.table)
    if args.diagnostics:
        payload = tests_payload(fit, tests)
        payload["screening"] = screening
        path = Path(args.diagnostics)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_json(path, payload)
    if args.hazard:
        path = Path(args.hazard)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_hazard_csv(curve, path)
    if not fit.converged:
        log.warning("fit did not converge after %d iterations", fit.iterations)
        return 3
    return 0


def cmd_report(args) -> int:
    config = _load_config(args)
    panel = _panel_for(args, config)
    _, _, fit, _, _ = screen_and_fit(panel, config)
    _emit(render_coefficient_table(fit, format="markdown"), args.out)
    return 3 if not fit.converged else 0


def cmd_all(args) -> int:
    config = _load_config(args)
    bundle = run_pipeline(config)
    for name in sorted(bundle.artifacts):
        print(f"wrote {bundle.artifacts[name]}")
    print(f"wrote {Path(bundle.output_dir) / 'manifest.json'}")
    print(f"config hash {bundle.config_hash}")
    return 0


def _add_config_options(parser) -> None:
    parser.add_argument("--config", required=True, help="path to the run config JSON")
    parser.add_argument("--output-dir", help="override the configured output directory")
    parser.add_argument("--cache-dir", help="override the configured cache directory")
    parser.add_argument("--zscore", type=float, help="outlier z-score threshold")
    parser.add_argument("--vif", type=float, help="VIF screening threshold")
    parser.add_argument("--ties", choices=["efron", "breslow"], help="tie handling")
    parser.add_argument("--bandwidth", type=float, help="hazard smoothing bandwidth")
    parser.add_argument("--cuts", help="comma-separated piecewise interval cuts")
    parser.add_argument("--grid-step", type=float, help="hazard curve grid step")


def _add_panel_option(parser) -> None:
    parser.add_argument(
        "--panel", help="fit a previously written panel.csv instead of mining events"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commitgate",
        description="Mine a repository's history and model committer immigration.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v info, -vv debug"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fetch", help="populate the event cache for configured repos")
    _add_config_options(p)
    p.add_argument("--ndjson-dir", help="also dump each repo's events as NDJSON here")
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("parse-log", help="parse a git log dump into events NDJSON")
    p.add_argument("gitlog", help="git log file, or - for stdin")
    p.add_argument("--repo", required=True, help="owner/name to stamp on the events")
    p.add_argument("--out", help="NDJSON output path (default stdout)")
    p.set_defaults(func=cmd_parse_log)

    p = sub.add_parser("detect", help="detect immigrations; write immigrations.csv")
    _add_config_options(p)
    p.add_argument("--out", help="output csv (default <output_dir>/immigrations.csv)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("panel", help="build the monthly panel; write panel.csv")
    _add_config_options(p)
    _add_panel_option(p)
    p.add_argument("--out", help="output csv (default <output_dir>/panel.csv)")
    p.set_defaults(func=cmd_panel)

    p = sub.add_parser("fit", help="screen covariates and fit the hazard model")
    _add_config_options(p)
    _add_panel_option(p)
    p.add_argument("--table", help="coefficient table csv path (default stdout)")
    p.add_argument("--diagnostics", help="write tests and screening JSON here")
    p.add_argument("--hazard", help="write the smoothed hazard curve csv here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="render the coefficient table as markdown")
    _add_config_options(p)
    _add_panel_option(p)
    p.add_argument("--out", help="markdown output path (default stdout)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("all", help="run the full pipeline and write all artifacts")
    _add_config_options(p)
    p.set_defaults(func=cmd_all)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CommitgateError as exc:
        print(f"commitgate: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except Exception as exc:  # pragma: no cover - defensive
        log.exception("internal error")
        print(f"commitgate: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
