"""Command-line interface, run in process via cli.main."""

import io
import json
import math
import re
from pathlib import Path

import pytest

from commitgate import cli
from commitgate.errors import (
    ConfigError,
    ConvergenceError,
    DataError,
    FetchError,
    ParseError,
    StageError,
)
from commitgate.ingest import read_ndjson
from commitgate.report import read_coefficient_csv
from commitgate.survival.cox import CoxFit

from helpers import demo_config_dict, demo_events, write_demo_gitlog, write_demo_workspace


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cliws")
    return tmp, write_demo_workspace(tmp)


@pytest.fixture(scope="module")
def panel_csv(workspace):
    tmp, config = workspace
    out = tmp / "panel.csv"
    assert cli.main(["panel", "--config", config, "--out", str(out)]) == 0
    return str(out)


def nonconverged_fit():
    return CoxFit(
        covariate_names=("m17_merge_ratio",),
        beta=(25.0,),
        exp_beta=(math.exp(25.0),),
        se=(40.0,),
        z=(0.625,),
        p=(0.53,),
        loglik_null=-50.0,
        loglik_fit=-49.0,
        lr_stat=2.0,
        wald_stat=0.4,
        score_stat=0.5,
        df=1,
        baseline=(),
        converged=False,
        iterations=100,
        ties="efron",
        n_rows=40,
        n_events=4,
    )


class TestParseLog:
    def test_file_to_ndjson(self, tmp_path, capsys):
        log_path = tmp_path / "history.log"
        n_commits = write_demo_gitlog(log_path, demo_events())
        out = tmp_path / "commits.ndjson"

        rc = cli.main(
            ["parse-log", str(log_path), "--repo", "acme/widget", "--out", str(out)]
        )

        assert rc == 0
        events = list(read_ndjson(out))
        assert len(events) == n_commits
        assert all(ev.kind == "commit" for ev in events)
        assert f"{n_commits} events -> {out}" in capsys.readouterr().out

    def test_stdout_mode_emits_one_json_per_line(self, tmp_path, capsys):
        log_path = tmp_path / "history.log"
        n_commits = write_demo_gitlog(log_path, demo_events())

        rc = cli.main(["parse-log", str(log_path), "--repo", "acme/widget"])

        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == n_commits
        first = json.loads(lines[0])
        assert first["kind"] == "commit"
        assert first["repo"] == "acme/widget"

    def test_stdin_mode(self, tmp_path, monkeypatch, capsys):
        log_path = tmp_path / "history.log"
        n_commits = write_demo_gitlog(log_path, demo_events())
        monkeypatch.setattr(
            "sys.stdin", io.StringIO(log_path.read_text(encoding="utf-8"))
        )

        rc = cli.main(["parse-log", "-", "--repo", "acme/widget"])

        assert rc == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == n_commits

    def test_missing_file_exits_2(self, tmp_path, capsys):
        rc = cli.main(
            ["parse-log", str(tmp_path / "absent.log"), "--repo", "acme/widget"]
        )
        assert rc == 2
        assert "gitlog not found" in capsys.readouterr().err


class TestDetect:
    def test_writes_csv_and_prints_summary(self, workspace, tmp_path, capsys):
        _, config = workspace
        out = tmp_path / "immigrations.csv"

        rc = cli.main(["detect", "--config", config, "--out", str(out)])

        assert rc == 0
        assert out.is_file()
        assert "36 candidates, 2 founding, 24 immigrations" in capsys.readouterr().out


class TestPanel:
    def test_writes_csv_and_prints_summary(self, workspace, tmp_path, capsys):
        _, config = workspace
        out = tmp_path / "panel.csv"

        rc = cli.main(["panel", "--config", config, "--out", str(out)])

        assert rc == 0
        assert out.is_file()
        assert re.search(r"\d+ rows over 36 developers", capsys.readouterr().out)


class TestFit:
    def test_fits_a_panel_csv(self, workspace, panel_csv, tmp_path, capsys):
        _, config = workspace
        table = tmp_path / "table.csv"
        diagnostics = tmp_path / "diag.json"
        hazard = tmp_path / "hazard.csv"

        rc = cli.main(
            [
                "fit",
                "--config",
                config,
                "--panel",
                panel_csv,
                "--table",
                str(table),
                "--diagnostics",
                str(diagnostics),
                "--hazard",
                str(hazard),
            ]
        )

        assert rc == 0
        rows = read_coefficient_csv(table.read_text(encoding="utf-8"))
        assert rows, "expected at least one coefficient row"
        payload = json.loads(diagnostics.read_text(encoding="utf-8"))
        assert payload["converged"] is True
        assert set(payload["screening"]) == {"zscore", "sparse", "vif"}
        assert hazard.read_text(encoding="utf-8").startswith("t,hazard")

    def test_table_defaults_to_stdout(self, workspace, panel_csv, capsys):
        from commitgate.metrics.panel import ALL_COVARIATES

        _, config = workspace

        rc = cli.main(["fit", "--config", config, "--panel", panel_csv])

        assert rc == 0
        rows = read_coefficient_csv(capsys.readouterr().out)
        assert rows
        assert {row["name"] for row in rows} <= set(ALL_COVARIATES)

    def test_ties_override_reaches_the_fit(self, workspace, panel_csv, tmp_path):
        _, config = workspace
        diagnostics = tmp_path / "diag.json"

        rc = cli.main(
            [
                "fit",
                "--config",
                config,
                "--panel",
                panel_csv,
                "--ties",
                "breslow",
                "--table",
                str(tmp_path / "t.csv"),
                "--diagnostics",
                str(diagnostics),
            ]
        )

        assert rc == 0
        assert json.loads(diagnostics.read_text(encoding="utf-8"))["ties"] == "breslow"

    def test_bad_vif_threshold_exits_2(self, workspace, panel_csv, capsys):
        _, config = workspace
        rc = cli.main(
            ["fit", "--config", config, "--panel", panel_csv, "--vif", "1.0"]
        )
        assert rc == 2
        assert "exceed 1" in capsys.readouterr().err

    def test_bad_zscore_threshold_exits_2(self, workspace, panel_csv, capsys):
        _, config = workspace
        rc = cli.main(
            ["fit", "--config", config, "--panel", panel_csv, "--zscore=-1"]
        )
        assert rc == 2
        assert "positive" in capsys.readouterr().err

    def test_nonconverged_fit_exits_3(self, workspace, panel_csv, monkeypatch, capsys):
        _, config = workspace
        monkeypatch.setattr(
            cli, "screen_and_fit", lambda panel, cfg: (panel, {}, nonconverged_fit(), None, [])
        )

        rc = cli.main(["fit", "--config", config, "--panel", panel_csv])

        assert rc == 3
        assert "NONCONVERGED" in capsys.readouterr().out


class TestReport:
    def test_markdown_on_stdout(self, workspace, panel_csv, capsys):
        _, config = workspace

        rc = cli.main(["report", "--config", config, "--panel", panel_csv])

        assert rc == 0
        out = capsys.readouterr().out
        assert "| Covariate | Coef | EXP(Coef) | SE(Coef) | Z |" in out
        assert "Likelihood ratio test" in out

    def test_nonconverged_fit_exits_3(self, workspace, panel_csv, monkeypatch, capsys):
        _, config = workspace
        monkeypatch.setattr(
            cli, "screen_and_fit", lambda panel, cfg: (panel, {}, nonconverged_fit(), None, [])
        )

        rc = cli.main(["report", "--config", config, "--panel", panel_csv])

        assert rc == 3
        assert "NONCONVERGED" in capsys.readouterr().out


class TestAll:
    def test_full_run_lists_artifacts(self, tmp_path, capsys):
        config = write_demo_workspace(tmp_path)

        rc = cli.main(["all", "--config", config])

        assert rc == 0
        out = capsys.readouterr().out
        wrote = [ln for ln in out.splitlines() if ln.startswith("wrote ")]
        assert len(wrote) == 7  # six artifacts plus the manifest
        assert any("manifest.json" in ln for ln in wrote)
        assert re.search(r"config hash [0-9a-f]{64}", out)
        for name in ("immigrations.csv", "panel.csv", "coefficient_table.csv"):
            assert (tmp_path / "out" / name).is_file()

    def test_vif_misconfiguration_exits_2_naming_the_stage(self, tmp_path, capsys):
        config = write_demo_workspace(tmp_path)

        rc = cli.main(["all", "--config", config, "--vif", "1.0"])

        assert rc == 2
        err = capsys.readouterr().err
        assert "survival" in err
        assert "exceed 1" in err

    def test_missing_events_file_exits_2(self, tmp_path, capsys):
        write_demo_workspace(tmp_path)
        data = demo_config_dict(events="missing.ndjson")
        config_path = tmp_path / "bad.json"
        config_path.write_text(json.dumps(data), encoding="utf-8")

        rc = cli.main(["all", "--config", str(config_path)])

        assert rc == 2
        assert "ingest" in capsys.readouterr().err


class TestFetch:
    def test_fetch_writes_ndjson_dumps(self, tmp_path, monkeypatch, capsys):
        config = write_demo_workspace(tmp_path)
        canned = [ev for ev in demo_events() if ev.kind != "commit"][:25]
        monkeypatch.setattr(
            cli, "fetch_events", lambda repo, cache_dir: list(canned)
        )
        dump_dir = tmp_path / "dumps"

        rc = cli.main(
            ["fetch", "--config", config, "--ndjson-dir", str(dump_dir)]
        )

        assert rc == 0
        assert "acme/widget: 25 events cached" in capsys.readouterr().out
        dumped = list(read_ndjson(dump_dir / "acme__widget.ndjson"))
        assert len(dumped) == 25


class TestExitCodes:
    def test_mapping(self):
        assert cli.exit_code_for(ConvergenceError("x")) == 3
        assert cli.exit_code_for(ConfigError("x")) == 2
        assert cli.exit_code_for(DataError("x")) == 2
        assert cli.exit_code_for(FetchError("x")) == 2
        assert cli.exit_code_for(ParseError("x")) == 2
        assert cli.exit_code_for(RuntimeError("x")) == 1

    def test_stage_error_unwraps_to_its_cause(self):
        assert cli.exit_code_for(StageError("survival", ConvergenceError("x"))) == 3
        assert cli.exit_code_for(StageError("ingest", DataError("x"))) == 2
        assert cli.exit_code_for(StageError("metrics", RuntimeError("x"))) == 1
