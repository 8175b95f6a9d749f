"""Screening steps: Z-score outlier removal, sparsity drop, VIF screen."""

import math

import numpy as np
import pytest

from commitgate.errors import CollinearityError, ConfigError, DataError
from commitgate.metrics.panel import Panel, PanelRow
from commitgate.survival.preprocess import (
    SparseReport,
    VifResult,
    ZScoreReport,
    drop_sparse,
    vif_screen,
    vif_values,
    zscore_filter,
)


def make_panel(columns):
    """One row per index; each row is its own one-month developer."""
    n = len(next(iter(columns.values())))
    rows = []
    for i in range(n):
        x = {name: values[i] for name, values in columns.items()}
        rows.append(PanelRow(dev=f"d{i}", month_index=1, start=0.0, stop=1.0, x=x, y=0))
    return Panel(rows=tuple(rows))


class TestZScoreFilter:
    def test_removes_single_outlier(self):
        # z of the 1000.0 row is ~4.47; everything else stays below 0.27
        values = [float(i) for i in range(1, 21)] + [1000.0]
        panel = make_panel({"m03_commit": values})

        filtered, report = zscore_filter(panel, threshold=3.0)

        assert isinstance(report, ZScoreReport)
        assert report.threshold == 3.0
        assert report.rows_before == 21
        assert report.rows_removed == 1
        assert report.by_column == {"m03_commit": 1}
        assert len(filtered.rows) == 20
        assert all(row.x["m03_commit"] != 1000.0 for row in filtered.rows)

    def test_constant_column_removes_nothing(self):
        panel = make_panel({
            "m03_commit": [7.0] * 10,
            "m05_issue_open": [float(i) for i in range(10)],
        })

        filtered, report = zscore_filter(panel, threshold=3.0)

        assert report.rows_removed == 0
        assert report.by_column == {}
        assert len(filtered.rows) == 10

    def test_row_outlying_on_two_columns_counted_once(self):
        base = [float(i) for i in range(1, 21)]
        panel = make_panel({
            "m03_commit": base + [1000.0],
            "m05_issue_open": base + [-900.0],
        })

        filtered, report = zscore_filter(panel)

        assert report.rows_removed == 1
        assert report.by_column == {"m03_commit": 1, "m05_issue_open": 1}
        assert len(filtered.rows) == 20

    def test_survivors_keep_original_order(self):
        values = [1.0, 2.0, 1000.0, 3.0, 4.0] + [float(i) for i in range(5, 21)]
        panel = make_panel({"m03_commit": values})

        filtered, _ = zscore_filter(panel)

        kept = [row.x["m03_commit"] for row in filtered.rows]
        assert kept == [v for v in values if v != 1000.0]

    def test_nonpositive_threshold_rejected(self):
        panel = make_panel({"m03_commit": [1.0, 2.0]})
        with pytest.raises(ConfigError, match="positive"):
            zscore_filter(panel, threshold=0.0)
        with pytest.raises(ConfigError, match="positive"):
            zscore_filter(panel, threshold=-1.0)

    def test_empty_panel_rejected(self):
        with pytest.raises(DataError, match="empty"):
            zscore_filter(Panel(rows=()))


class TestDropSparse:
    def test_constant_column_dropped_for_variance(self):
        panel = make_panel({
            "m03_commit": [4.0] * 12,
            "m05_issue_open": [float(i) for i in range(12)],
        })

        report = drop_sparse(panel)

        assert isinstance(report, SparseReport)
        assert report.kept == ["m05_issue_open"]
        assert report.dropped == {"m03_commit": "variance 0 below 1e-10"}

    def test_mostly_zero_column_dropped_for_nonzero_count(self):
        # 3 nonzero entries out of 12: variance is fine, count is not
        sparse = [0.0] * 9 + [5.0, 9.0, 2.0]
        panel = make_panel({
            "m03_commit": sparse,
            "m05_issue_open": [float(i) for i in range(12)],
        })

        report = drop_sparse(panel)

        assert report.kept == ["m05_issue_open"]
        assert report.dropped == {"m03_commit": "only 3 nonzero entries (< 5)"}

    def test_dense_varied_columns_kept(self):
        panel = make_panel({
            "m03_commit": [float(i) for i in range(12)],
            "m05_issue_open": [float(i % 3 + 1) for i in range(12)],
        })

        report = drop_sparse(panel)

        assert report.kept == ["m03_commit", "m05_issue_open"]
        assert report.dropped == {}

    def test_variance_reason_wins_when_both_apply(self):
        # all-zero column fails both screens; the variance reason is reported
        panel = make_panel({
            "m03_commit": [0.0] * 12,
            "m05_issue_open": [float(i) for i in range(12)],
        })

        report = drop_sparse(panel)

        assert "variance" in report.dropped["m03_commit"]

    def test_empty_panel_rejected(self):
        with pytest.raises(DataError, match="empty"):
            drop_sparse(Panel(rows=()))


class TestVifValues:
    def test_orthogonal_design_gives_one(self):
        x = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
        vifs = vif_values(x)
        assert vifs[0] == pytest.approx(1.0, abs=1e-12)
        assert vifs[1] == pytest.approx(1.0, abs=1e-12)

    def test_matches_inverse_correlation_diagonal(self):
        # classic identity: VIF_j is the j-th diagonal of the inverse
        # correlation matrix of the covariates
        rng = np.random.default_rng(42)
        n = 200
        x1 = rng.normal(size=n)
        x2 = rng.normal(size=n)
        x3 = x1 + x2 + 0.3 * rng.normal(size=n)
        x = np.column_stack([x1, x2, x3])

        vifs = vif_values(x)
        oracle = np.diag(np.linalg.inv(np.corrcoef(x, rowvar=False)))

        for got, want in zip(vifs, oracle):
            assert got == pytest.approx(float(want), abs=1e-9)

    def test_constant_column_is_infinite(self):
        x = np.column_stack([np.ones(6), np.arange(6.0)])
        vifs = vif_values(x)
        assert vifs[0] == math.inf
        assert vifs[1] != math.inf

    def test_duplicated_columns_are_infinite(self):
        col = np.arange(8.0)
        vifs = vif_values(np.column_stack([col, col]))
        assert vifs == [math.inf, math.inf]


class TestVifScreen:
    def test_duplicate_drops_later_metric_order_column(self):
        col = [float(i % 4) for i in range(16)]
        other = [float((i * 7) % 5) for i in range(16)]
        panel = make_panel({
            "m03_commit": col,
            "m05_issue_open": list(col),
            "m06_issue_triage": other,
        })

        result = vif_screen(panel, threshold=5.0)

        assert isinstance(result, VifResult)
        assert result.dropped == [("m05_issue_open", math.inf)]
        assert "m03_commit" in result.kept
        assert "m06_issue_triage" in result.kept
        assert set(result.vif) == set(result.kept)
        assert all(v <= 5.0 for v in result.vif.values())

    def test_clean_design_drops_nothing(self):
        rng = np.random.default_rng(7)
        panel = make_panel({
            "m03_commit": rng.normal(size=30).tolist(),
            "m05_issue_open": rng.normal(size=30).tolist(),
        })

        result = vif_screen(panel, threshold=5.0)

        assert result.dropped == []
        assert result.kept == ["m03_commit", "m05_issue_open"]

    def test_explicit_columns_restrict_the_screen(self):
        col = [float(i % 4) for i in range(16)]
        panel = make_panel({
            "m03_commit": col,
            "m05_issue_open": list(col),
            "m06_issue_triage": [float((i * 7) % 5) for i in range(16)],
        })

        result = vif_screen(
            panel, threshold=5.0, columns=["m03_commit", "m06_issue_triage"]
        )

        # the duplicate m05 column is outside the screen, so nothing drops
        assert result.dropped == []
        assert result.kept == ["m03_commit", "m06_issue_triage"]

    def test_threshold_must_exceed_one(self):
        panel = make_panel({
            "m03_commit": [1.0, 2.0, 3.0],
            "m05_issue_open": [3.0, 1.0, 2.0],
        })
        with pytest.raises(ConfigError, match="exceed 1"):
            vif_screen(panel, threshold=1.0)

    def test_requires_two_covariates(self):
        panel = make_panel({"m03_commit": [1.0, 2.0, 3.0]})
        with pytest.raises(DataError, match="at least 2"):
            vif_screen(panel)

    def test_two_constant_columns_stay_singular(self):
        panel = make_panel({
            "m03_commit": [1.0] * 8,
            "m05_issue_open": [2.0] * 8,
        })
        with pytest.raises(CollinearityError, match="singular"):
            vif_screen(panel)
