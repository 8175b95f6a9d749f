"""Nelson-Aalen increments and the kernel-smoothed hazard curve.

Increments dN(t)/R(t) at each event time are smoothed with an Epanechnikov
kernel; reflection about t=0 keeps the kernel mass inside the observable
range, so the smoothed curve integrates to the total cumulative hazard.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DataError

DEFAULT_GRID_STEP = 0.25
BANDWIDTH_GAP_FACTOR = 1.5


def nelson_aalen(start, stop, y) -> list:
    """[(t, dN/R, R, dN)] at each distinct event time, ascending."""
    start = np.asarray(start, dtype=float)
    stop = np.asarray(stop, dtype=float)
    y = np.asarray(y, dtype=float)
    times = np.unique(stop[y == 1.0])
    out = []
    for t in times:
        at_risk = int(((start < t) & (t <= stop)).sum())
        d = int(((stop == t) & (y == 1.0)).sum())
        if at_risk == 0:
            raise DataError(f"event at t={t} with an empty risk set")
        out.append((float(t), d / at_risk, at_risk, d))
    return out


def _epanechnikov(u: np.ndarray) -> np.ndarray:
    mask = np.abs(u) <= 1.0
    return np.where(mask, 0.75 * (1.0 - u * u), 0.0)


def default_bandwidth(event_times: Sequence[float]) -> float:
    """1.5 x median inter-event gap; 1.0 month when gaps are undefined."""
    times = sorted(set(float(t) for t in event_times))
    if len(times) < 2:
        return 1.0
    gaps = np.diff(times)
    bandwidth = BANDWIDTH_GAP_FACTOR * float(np.median(gaps))
    return bandwidth if bandwidth > 0 else 1.0


def smoothed_hazard_arrays(
    start,
    stop,
    y,
    *,
    bandwidth: float | None = None,
    grid_step: float = DEFAULT_GRID_STEP,
) -> list:
    """[(t, hazard)] on a regular grid; empty when there are no events."""
    y = np.asarray(y, dtype=float)
    if not (y == 1.0).any():
        return []
    increments = nelson_aalen(start, stop, y)
    times = np.array([t for t, _, _, _ in increments])
    mass = np.array([dh for _, dh, _, _ in increments])
    if bandwidth is None:
        bandwidth = default_bandwidth(times)
    if bandwidth <= 0:
        raise DataError("bandwidth must be positive")

    t_max = float(times.max()) + bandwidth
    n_points = int(np.ceil(t_max / grid_step)) + 1
    grid = np.arange(n_points) * grid_step
    direct = _epanechnikov((grid[:, None] - times[None, :]) / bandwidth)
    reflected = _epanechnikov((grid[:, None] + times[None, :]) / bandwidth)
    hazard = ((direct + reflected) / bandwidth) @ mass
    return [(float(t), float(h)) for t, h in zip(grid, hazard)]


def smoothed_hazard(
    panel,
    bandwidth: float | None = None,
    *,
    grid_step: float = DEFAULT_GRID_STEP,
) -> list:
    """Smoothed hazard estimate of a Panel's immigration events."""
    start, stop, y, _, _ = panel.to_matrix([])
    return smoothed_hazard_arrays(start, stop, y, bandwidth=bandwidth, grid_step=grid_step)


def write_hazard_csv(curve: Sequence, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "hazard"])
        for t, h in curve:
            writer.writerow([repr(float(t)), repr(float(h))])


def read_hazard_csv(path: Path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [(float(row["t"]), float(row["hazard"])) for row in reader]
