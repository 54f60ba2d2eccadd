"""Synthetic manifolds, CSV ingestion and feature-wise [0, 1] scaling."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    """Raised for malformed CSV input (ragged rows, non-numeric cells)."""


@dataclass(frozen=True)
class Dataset:
    points: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be a non-empty n x d matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=float).reshape(-1)
            if lab.shape[0] != pts.shape[0]:
                raise ValueError(f"labels length {lab.shape[0]} != number of points {pts.shape[0]}")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        labels = None if self.labels is None else self.labels[idx]
        return Dataset(self.points[idx], labels, self.name)


@dataclass(frozen=True)
class NormStats:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=float).reshape(-1)
        hi = np.asarray(self.maximum, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("minimum and maximum must have equal length")
        if np.any(lo > hi):
            raise ValueError("minimum exceeds maximum for some feature")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map raw points with the stored affine transform. Values are not clamped."""
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.minimum.shape[0]:
            raise ValueError(
                f"expected {self.minimum.shape[0]} features, got {points.shape[-1]}")
        span = self.maximum - self.minimum
        safe = np.where(span > 0, span, 1.0)
        out = (points - self.minimum) / safe
        return np.where(span > 0, out, 0.0)

    def apply_dataset(self, dataset: Dataset) -> Dataset:
        return Dataset(self.apply(dataset.points), dataset.labels, dataset.name)


def _check_count(n: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n}")


def generate_swiss_roll(n: int, seed: int = 0) -> Dataset:
    """Swiss Roll with t in [1.5 pi, 4.5 pi] and height uniform in [0, 21].

    Points are (t cos t, h, t sin t); the label is the unrolled parameter t.
    """
    _check_count(n)
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.uniform(size=n))
    h = 21.0 * rng.uniform(size=n)
    pts = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    return Dataset(pts, t, "swiss-roll")


def generate_s_curve(n: int, seed: int = 0) -> Dataset:
    """S Curve with t in [-1.5 pi, 1.5 pi] and height uniform in [0, 2]."""
    _check_count(n)
    rng = np.random.default_rng(seed)
    t = 3.0 * np.pi * (rng.uniform(size=n) - 0.5)
    h = 2.0 * rng.uniform(size=n)
    pts = np.column_stack([np.sin(t), h, np.sign(t) * (np.cos(t) - 1.0)])
    return Dataset(pts, t, "s-curve")


def generate_helix(t_min: float = -20.0, t_max: float = 20.0, step: float = 0.02) -> Dataset:
    """Helix (cos z, sin z, z) with z = t / sqrt(2), t swept from t_min to t_max.

    The sweep includes both end points, so the default arguments give 2001 rows.
    """
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not t_max > t_min:
        raise ValueError(f"t_max must exceed t_min, got [{t_min}, {t_max}]")
    # tolerance absorbs the representation error of step (0.02 is not exact in binary)
    count = int(np.floor((t_max - t_min) / step + 1e-9)) + 1
    t = t_min + step * np.arange(count)
    z = t / np.sqrt(2.0)
    pts = np.column_stack([np.cos(z), np.sin(z), z])
    return Dataset(pts, t, "helix")


GENERATORS = {
    "swiss-roll": generate_swiss_roll,
    "s-curve": generate_s_curve,
}


def load_csv(path, has_header: bool = True, label_column: int | None = None,
             name: str | None = None) -> Dataset:
    """Read a numeric CSV into a Dataset.

    ``label_column`` may be negative (counted from the end). Errors name the
    1-based file row and 0-based column of the offending cell.
    """
    path = Path(path)
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        width = None
        for lineno, row in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {width}")
            vals = []
            for col, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataFormatError(
                        f"{path}: non-numeric value {cell!r} at row {lineno}, column {col}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    labels = None
    if label_column is not None:
        col = label_column % arr.shape[1]
        labels = arr[:, col]
        arr = np.delete(arr, col, axis=1)
        if arr.shape[1] == 0:
            raise DataFormatError(f"{path}: no feature columns left after removing labels")
    return Dataset(arr, labels, name or path.stem)


def csv_header(path) -> list[str]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return next(csv.reader(fh), [])


def save_csv(dataset: Dataset, path) -> None:
    cols = [f"x{q + 1}" for q in range(dataset.dim)]
    data = dataset.points
    if dataset.labels is not None:
        cols.append("label")
        data = np.column_stack([data, dataset.labels])
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in data:
            w.writerow([repr(float(v)) for v in row])


def fit_norm_stats(points: np.ndarray) -> NormStats:
    points = np.asarray(points, dtype=float)
    return NormStats(points.min(axis=0), points.max(axis=0))


def normalize_unit(dataset: Dataset) -> tuple[Dataset, NormStats]:
    """Scale each feature to [0, 1]; constant features map to 0."""
    stats = fit_norm_stats(dataset.points)
    return stats.apply_dataset(dataset), stats
