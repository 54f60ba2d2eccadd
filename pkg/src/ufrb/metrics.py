"""Projection quality numbers: both stresses, distance correlation, rejection rate."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .data import Dataset
from .fuzzy import Projection
from .train import stress


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class MetricReport:
    geodesic_stress: float
    sammon_stress: float
    distance_correlation: float
    rejection_rate: float
    degenerate_correlation: bool = False

    def as_lines(self) -> str:
        return "\n".join(f"{k}={_fmt(v)}" for k, v in asdict(self).items())

    def as_dict(self) -> dict:
        return asdict(self)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    return repr(float(v))


def distance_correlation(reference: np.ndarray, coords: np.ndarray) -> tuple[float, bool]:
    """Pearson correlation between reference distances and output distances over
    all unordered pairs. Zero variance on either side gives (0.0, True)."""
    ref = squareform(np.asarray(reference, dtype=float), checks=False)
    out = pdist(np.asarray(coords, dtype=float))
    ref = ref - ref.mean()
    out = out - out.mean()
    denom = np.sqrt(np.dot(ref, ref) * np.dot(out, out))
    if denom == 0 or not np.isfinite(denom):
        return 0.0, True
    return float(np.clip(np.dot(ref, out) / denom, -1.0, 1.0)), False


def evaluate(projection: Projection, dataset: Dataset | np.ndarray,
             gd: np.ndarray) -> MetricReport:
    points = dataset.points if isinstance(dataset, Dataset) else np.asarray(dataset, float)
    n = points.shape[0]
    if n < 3:
        raise InsufficientDataError(f"need at least 3 points, got {n}")
    if projection.coords.shape[0] != n or np.shape(gd) != (n, n):
        raise ValueError("projection, dataset and geodesic matrix sizes disagree")
    y = projection.coords
    corr, degenerate = distance_correlation(gd, y)
    return MetricReport(
        geodesic_stress=stress(y, gd, "geodesic_stress"),
        sammon_stress=stress(y, squareform(pdist(points)), "sammon_stress"),
        distance_correlation=corr,
        rejection_rate=projection.rejection_rate,
        degenerate_correlation=degenerate,
    )
