"""First-order Takagi-Sugeno rule base with Gaussian antecedents.

Rule k fires with strength ``prod_q exp(-(x_q - v_kq)^2 / (2 s_kq^2))`` and
proposes the affine output ``A_k @ [1, x]``; the model output is the
firing-weighted average of the rule outputs.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import Dataset, NormStats

MODEL_SCHEMA = "ufrb-model/1"
UNDERFLOW_FLOOR = 1e-300
DEFAULT_REJECT_THRESHOLD = 0.15
_LOG_FLOOR = np.log(UNDERFLOW_FLOOR)
_BROADCAST_LIMIT = 20_000_000


class DegenerateFiringError(ArithmeticError):
    """No rule fires above the underflow floor for the given input."""


@dataclass(frozen=True)
class RuleBase:
    centers: np.ndarray        # (n_c, d_h)
    spreads: np.ndarray        # (n_c, d_h)
    consequents: np.ndarray    # (n_c, d_l, d_h + 1), column 0 is the bias
    norm_stats: NormStats | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.centers, dtype=float)
        s = np.asarray(self.spreads, dtype=float)
        a = np.asarray(self.consequents, dtype=float)
        if v.ndim != 2 or s.shape != v.shape:
            raise ValueError(f"centers {v.shape} and spreads {s.shape} must be equal n_c x d_h")
        if a.ndim != 3 or a.shape[0] != v.shape[0] or a.shape[2] != v.shape[1] + 1:
            raise ValueError(f"consequents shape {a.shape} inconsistent with centers {v.shape}")
        if np.any(s <= 0):
            raise ValueError("all spreads must be positive")
        for name, arr in (("centers", v), ("spreads", s), ("consequents", a)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contain non-finite values")
        if self.norm_stats is not None and self.norm_stats.minimum.shape[0] != v.shape[1]:
            raise ValueError("norm_stats dimensionality does not match the rule base")
        object.__setattr__(self, "centers", v)
        object.__setattr__(self, "spreads", s)
        object.__setattr__(self, "consequents", a)

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def d_h(self) -> int:
        return self.centers.shape[1]

    @property
    def d_l(self) -> int:
        return self.consequents.shape[1]

    def with_params(self, centers, spreads, consequents) -> "RuleBase":
        return replace(self, centers=centers, spreads=spreads, consequents=consequents)

    def describe(self) -> str:
        lines = []
        for k in range(self.n_rules):
            ante = " AND ".join(
                f"x{q + 1} is close to {self.centers[k, q]:.4g} (s={self.spreads[k, q]:.3g})"
                for q in range(self.d_h))
            for m in range(self.d_l):
                a = self.consequents[k, m]
                rhs = f"{a[0]:.4g}" + "".join(f" + {a[q + 1]:.4g}*x{q + 1}" for q in range(self.d_h))
                lines.append(f"R{k + 1},{m + 1}: IF {ante} THEN y{m + 1} = {rhs}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Projection:
    coords: np.ndarray
    max_firing: np.ndarray
    rejected: np.ndarray
    degenerate: np.ndarray

    @property
    def rejection_rate(self) -> float:
        return float(np.mean(self.rejected)) if self.rejected.size else 0.0


def membership(x_q: float, v_kq: float, sigma_kq: float) -> float:
    if not sigma_kq > 0:
        raise ValueError(f"spread must be positive, got {sigma_kq}")
    return float(np.exp(-((x_q - v_kq) ** 2) / (2.0 * sigma_kq ** 2)))


def log_firing(x: np.ndarray, centers: np.ndarray, spreads: np.ndarray) -> np.ndarray:
    """Summed log-memberships, shape (n, n_c). Exponentiate for firing strengths."""
    x = np.atleast_2d(x)
    n, d = x.shape
    k = centers.shape[0]
    if n * k * d <= _BROADCAST_LIMIT:
        z = (x[:, None, :] - centers[None, :, :]) / spreads[None, :, :]
        return -0.5 * np.einsum("ikq,ikq->ik", z, z)
    inv2 = 1.0 / spreads ** 2
    quad = (x ** 2) @ inv2.T - 2.0 * x @ (centers * inv2).T + np.sum(centers ** 2 * inv2, axis=1)
    return -0.5 * np.maximum(quad, 0.0)


def firing_strengths(rulebase: RuleBase, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.exp(log_firing(x.reshape(1, -1), rulebase.centers, rulebase.spreads)[0])


def normalized_weights(logf: np.ndarray) -> np.ndarray:
    """Row-wise alpha_k / sum_p alpha_p, computed stably from log strengths."""
    shifted = logf - logf.max(axis=1, keepdims=True)
    w = np.exp(shifted)
    return w / w.sum(axis=1, keepdims=True)


def augment(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return np.hstack([np.ones((x.shape[0], 1)), x])


def rule_outputs(consequents: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-rule affine outputs, shape (n, n_c, d_l)."""
    return np.einsum("kmq,iq->ikm", consequents, augment(x))


def forward(rulebase: RuleBase, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Model outputs (n, d_l) and log firing strengths (n, n_c) for model-space inputs."""
    logf = log_firing(x, rulebase.centers, rulebase.spreads)
    w = normalized_weights(logf)
    y = np.einsum("ik,ikm->im", w, rule_outputs(rulebase.consequents, x))
    return y, logf


def _model_input(rulebase: RuleBase, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x if rulebase.norm_stats is None else rulebase.norm_stats.apply(x)


def project(rulebase: RuleBase, x: np.ndarray, raw: bool = False) -> tuple[np.ndarray, float]:
    """Project one point. ``raw=True`` applies the stored normalization first."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != rulebase.d_h:
        raise ValueError(f"expected {rulebase.d_h} features, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    if raw:
        x = _model_input(rulebase, x)
    y, logf = forward(rulebase, x)
    top = logf.max()
    if top + np.log(np.exp(logf - top).sum()) < _LOG_FLOOR:
        raise DegenerateFiringError("sum of firing strengths underflows; input is far from every rule")
    return y[0], float(np.exp(top))


def project_batch(rulebase: RuleBase, dataset: Dataset | np.ndarray,
                  reject_threshold: float = DEFAULT_REJECT_THRESHOLD,
                  raw: bool = False) -> Projection:
    points = dataset.points if isinstance(dataset, Dataset) else np.asarray(dataset, float)
    points = np.atleast_2d(points)
    if points.shape[1] != rulebase.d_h:
        raise ValueError(
            f"dimension mismatch: model expects {rulebase.d_h} features, data has {points.shape[1]}")
    if not 0.0 <= reject_threshold < 1.0:
        raise ValueError(f"reject_threshold must lie in [0, 1), got {reject_threshold}")
    if raw:
        points = _model_input(rulebase, points)
    y, logf = forward(rulebase, points)
    top = logf.max(axis=1)
    total = top + np.log(np.exp(logf - top[:, None]).sum(axis=1))
    max_firing = np.exp(top)
    return Projection(y, max_firing, max_firing < reject_threshold, total < _LOG_FLOOR)


def suggest_reject_threshold(train_max_firings, quantile: float = 0.01) -> float:
    """Low quantile of the training max-firing values, floored at zero."""
    f = np.asarray(train_max_firings, dtype=float).reshape(-1)
    if f.size == 0:
        raise ValueError("need at least one training firing value")
    return float(max(np.quantile(f, quantile), 0.0))


def firing_summary(max_firings: np.ndarray, bins: int = 10) -> dict:
    f = np.asarray(max_firings, dtype=float)
    counts, edges = np.histogram(f, bins=bins, range=(0.0, 1.0))
    return {
        "bin_edges": [float(e) for e in edges],
        "counts": [int(c) for c in counts],
        "min": float(f.min()),
        "p01": float(np.quantile(f, 0.01)),
        "median": float(np.median(f)),
        "max": float(f.max()),
    }


def _floats(arr: np.ndarray) -> list:
    return [float(v) for v in np.asarray(arr).reshape(-1)]


def model_to_dict(rulebase: RuleBase) -> dict:
    doc = {
        "schema": MODEL_SCHEMA,
        "d_h": rulebase.d_h,
        "d_l": rulebase.d_l,
        "n_c": rulebase.n_rules,
        "centers": _floats(rulebase.centers),
        "spreads": _floats(rulebase.spreads),
        "consequents": _floats(rulebase.consequents),
        "norm_stats": None if rulebase.norm_stats is None else {
            "minimum": _floats(rulebase.norm_stats.minimum),
            "maximum": _floats(rulebase.norm_stats.maximum),
        },
    }
    doc.update(rulebase.meta)
    return doc


def model_from_dict(doc: dict) -> RuleBase:
    if doc.get("schema") != MODEL_SCHEMA:
        raise ValueError(f"unsupported model schema {doc.get('schema')!r}")
    n_c, d_h, d_l = int(doc["n_c"]), int(doc["d_h"]), int(doc["d_l"])
    ns = doc.get("norm_stats")
    stats = None if ns is None else NormStats(np.array(ns["minimum"]), np.array(ns["maximum"]))
    core = {"schema", "d_h", "d_l", "n_c", "centers", "spreads", "consequents", "norm_stats"}
    return RuleBase(
        np.array(doc["centers"], dtype=float).reshape(n_c, d_h),
        np.array(doc["spreads"], dtype=float).reshape(n_c, d_h),
        np.array(doc["consequents"], dtype=float).reshape(n_c, d_l, d_h + 1),
        stats,
        {k: v for k, v in doc.items() if k not in core},
    )


def save_model(rulebase: RuleBase, path) -> None:
    # json writes floats with repr, which round-trips float64 exactly
    text = json.dumps(model_to_dict(rulebase), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path) -> RuleBase:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
