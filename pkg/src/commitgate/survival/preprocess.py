"""Panel preprocessing: Z-score outlier removal, sparsity and VIF screens.

All three screens report what they changed so the pipeline can emit a
screening trace next to the fit.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import CollinearityError, ConfigError, DataError
from ..metrics.panel import Panel

log = logging.getLogger(__name__)

SPARSE_MIN_VARIANCE = 1e-10
SPARSE_MIN_NONZERO = 5


@dataclass
class ZScoreReport:
    threshold: float
    rows_before: int
    rows_removed: int
    by_column: dict = field(default_factory=dict)


def zscore_filter(panel: Panel, threshold: float = 3.0) -> tuple:
    """Remove rows where any covariate sits more than threshold sds out.

    Mean and sd (population) are computed per covariate over all rows; a
    zero-sd column removes nothing.
    """
    if threshold <= 0:
        raise ConfigError("zscore threshold must be positive")
    if not panel.rows:
        raise DataError("empty panel")
    names = panel.covariate_names()
    values = {
        name: np.array([float(row.x[name]) for row in panel.rows]) for name in names
    }
    keep = np.ones(len(panel.rows), dtype=bool)
    by_column: dict = {}
    for name in names:
        column = values[name]
        sd = float(column.std())
        if sd == 0:
            continue
        mean = float(column.mean())
        outliers = np.abs(column - mean) / sd > threshold
        if outliers.any():
            by_column[name] = int(outliers.sum())
            keep &= ~outliers
    kept_rows = tuple(row for row, ok in zip(panel.rows, keep) if ok)
    report = ZScoreReport(
        threshold=threshold,
        rows_before=len(panel.rows),
        rows_removed=int((~keep).sum()),
        by_column=by_column,
    )
    return Panel(rows=kept_rows), report


@dataclass
class SparseReport:
    kept: list
    dropped: dict = field(default_factory=dict)  # column -> reason


def drop_sparse(panel: Panel, *, min_variance: float = SPARSE_MIN_VARIANCE,
                min_nonzero: int = SPARSE_MIN_NONZERO) -> SparseReport:
    """Flag near-zero-variance or nearly-all-zero covariates for removal."""
    if not panel.rows:
        raise DataError("empty panel")
    kept, dropped = [], {}
    for name in panel.covariate_names():
        column = np.array([float(row.x[name]) for row in panel.rows])
        variance = float(column.var())
        nonzero = int((column != 0).sum())
        if variance < min_variance:
            dropped[name] = f"variance {variance:.3g} below {min_variance:g}"
        elif nonzero < min_nonzero:
            dropped[name] = f"only {nonzero} nonzero entries (< {min_nonzero})"
        else:
            kept.append(name)
    for name, reason in dropped.items():
        log.info("dropping sparse covariate %s: %s", name, reason)
    return SparseReport(kept=kept, dropped=dropped)


def vif_values(x: np.ndarray) -> list:
    """VIF_j = 1/(1-R^2_j) regressing column j on the others + intercept."""
    x = np.asarray(x, dtype=float)
    n, p = x.shape
    out = []
    for j in range(p):
        target = x[:, j]
        ss_tot = float(((target - target.mean()) ** 2).sum())
        if ss_tot <= 0:
            out.append(math.inf)
            continue
        design = np.column_stack([np.delete(x, j, axis=1), np.ones(n)])
        coef, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
        ss_res = float(((target - design @ coef) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot
        out.append(math.inf if 1.0 - r2 < 1e-12 else 1.0 / (1.0 - r2))
    return out


@dataclass
class VifResult:
    kept: list
    vif: dict  # final VIF per kept column
    dropped: list  # (column, vif at drop time) in drop order


def vif_screen(panel: Panel, threshold: float = 5.0,
               columns: Sequence[str] | None = None) -> VifResult:
    """Iteratively drop the largest-VIF covariate above the threshold.

    Ties (e.g. duplicated columns, both infinite) drop the later column in
    the fixed metric order, keeping the earlier one.
    """
    if threshold <= 1:
        raise ConfigError("vif threshold must exceed 1")
    names = list(columns) if columns is not None else panel.covariate_names()
    if len(names) < 2:
        raise DataError("vif_screen requires at least 2 covariates")
    matrix = {
        name: np.array([float(row.x[name]) for row in panel.rows]) for name in names
    }

    kept = list(names)
    dropped = []
    while len(kept) >= 2:
        x = np.column_stack([matrix[name] for name in kept])
        vifs = vif_values(x)
        worst = max(vifs)
        if worst <= threshold:
            break
        ties_at_worst = [i for i, v in enumerate(vifs) if v == worst]
        drop_idx = ties_at_worst[-1]  # later M-order column goes
        dropped.append((kept[drop_idx], worst))
        log.info("vif screen dropping %s (VIF %.3g)", kept[drop_idx], worst)
        kept.pop(drop_idx)

    x = np.column_stack([matrix[name] for name in kept])
    design = np.column_stack([x, np.ones(x.shape[0])])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise CollinearityError(
            kept, f"design remains singular after VIF screening: {', '.join(kept)}"
        )
    final = vif_values(x) if len(kept) >= 2 else [1.0] * len(kept)
    return VifResult(kept=kept, vif=dict(zip(kept, final)), dropped=dropped)
