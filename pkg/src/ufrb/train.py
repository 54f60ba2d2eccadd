"""Stress objectives, closed-form gradients and the momentum descent loop.

Both objectives share one form,

    E = (1 / C) * sum_{i<j} (r_ij - ||y_i - y_j||)^2 / r_ij,

where ``r`` is the geodesic matrix (geodesic stress) or the Euclidean input
distance matrix (Sammon stress). For geodesic stress C is the number of
pairs, making E a per-pair mean; for Sammon stress C = sum_{i<j} r_ij as in
Sammon's original cost. Pairs with r_ij == 0 are left out.

Gradient derivation (see README for the long form):
    dE/dy_i  = sum_j c_ij (y_i - y_j),  c_ij = -2 (r_ij - e_ij) / (C r_ij e_ij)
    dE/dA_kmq = sum_i g_im w_ik x_iq                 (x_i0 = 1)
    u_ik     = w_ik (s_ik - sum_p w_ip s_ip),  s_ik = sum_m g_im y^k_im
    dE/dv_kq = sum_i u_ik (x_iq - v_kq) / s_kq^2
    dE/ds_kq = sum_i u_ik (x_iq - v_kq)^2 / s_kq^3
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .data import Dataset, NormStats
from .fuzzy import RuleBase, augment, log_firing, normalized_weights, rule_outputs
from .gcm import ClusterResult

log = logging.getLogger(__name__)

OBJECTIVES = ("geodesic_stress", "sammon_stress")
SIGMA_MIN_RATIO = 1e-3


class TrainingDivergedError(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    objective: str = "geodesic_stress"
    learning_rate: float = 0.1
    momentum: float = 0.5
    max_iter: int = 1000
    spread_init_ratio: float = 0.2
    consequent_init_range: tuple[float, float] = (-0.5, 0.5)
    seed: int = 0
    log_every: int = 1
    antecedent_init: str = "gcm"
    early_stop_tol: float | None = None
    pair_fraction: float | None = None

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.spread_init_ratio > 0:
            raise ValueError("spread_init_ratio must be positive")
        lo, hi = self.consequent_init_range
        if not lo < hi:
            raise ValueError("consequent_init_range must satisfy low < high")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")
        if self.antecedent_init not in ("gcm", "random"):
            raise ValueError("antecedent_init must be 'gcm' or 'random'")
        if self.pair_fraction is not None and not 0 < self.pair_fraction <= 1:
            raise ValueError("pair_fraction must lie in (0, 1]")


@dataclass
class TrainReport:
    stress_trace: list[tuple[int, float]] = field(default_factory=list)
    final_stress: float = math.nan
    iterations_run: int = 0
    initial_stress: float = math.nan

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "stress"])
            for it, e in self.stress_trace:
                w.writerow([it, repr(float(e))])


def _points(data) -> np.ndarray:
    return data.points if isinstance(data, Dataset) else np.asarray(data, dtype=float)


def reference_distances(data, gd: np.ndarray | None, objective: str) -> np.ndarray:
    if objective == "geodesic_stress":
        if gd is None:
            raise ValueError("geodesic objective needs a geodesic matrix")
        return np.asarray(gd, dtype=float)
    if objective == "sammon_stress":
        x = _points(data)
        return cdist(x, x)
    raise ValueError(f"unknown objective {objective!r}")


_warned_duplicates = False


def _pair_mask(ref: np.ndarray) -> np.ndarray:
    global _warned_duplicates
    mask = ref > 0
    np.fill_diagonal(mask, False)
    if not _warned_duplicates and np.count_nonzero(mask) < ref.shape[0] * (ref.shape[0] - 1):
        log.warning("pairs with zero reference distance are excluded from the stress")
        _warned_duplicates = True
    return mask


def _normalizer(ref_upper: np.ndarray, objective: str) -> float:
    if objective == "geodesic_stress":
        return float(ref_upper.size)
    if objective == "sammon_stress":
        return float(np.sum(ref_upper))
    raise ValueError(f"unknown objective {objective!r}")


def stress(y: np.ndarray, reference: np.ndarray, objective: str = "geodesic_stress",
           mask: np.ndarray | None = None) -> float:
    """Normalized stress of output configuration ``y`` against reference distances."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    ref = np.asarray(reference, dtype=float)
    if ref.shape != (y.shape[0], y.shape[0]):
        raise ValueError(f"reference shape {ref.shape} does not match {y.shape[0]} outputs")
    if mask is None:
        mask = _pair_mask(ref)
    e = cdist(y, y)
    upper = np.triu(mask, 1)
    r = ref[upper]
    return float(np.sum((r - e[upper]) ** 2 / r) / _normalizer(r, objective))


def _stress_and_output_grad(y, ref, mask, objective):
    e = cdist(y, y)
    upper = np.triu(mask, 1)
    total = _normalizer(ref[upper], objective)
    r = np.where(mask, ref, 1.0)
    resid = np.where(mask, r - e, 0.0)
    value = float(np.sum(resid[upper] ** 2 / r[upper]) / total)
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(mask & (e > 0), -2.0 * resid / (r * e * total), 0.0)
    g = coef.sum(axis=1)[:, None] * y - coef @ y
    return value, g


def value_and_gradients(rulebase: RuleBase, data, reference: np.ndarray,
                        objective: str = "geodesic_stress", mask: np.ndarray | None = None):
    """Stress and its gradients with respect to centers, spreads and consequents."""
    x = _points(data)
    if mask is None:
        mask = _pair_mask(reference)
    v, s, a = rulebase.centers, rulebase.spreads, rulebase.consequents
    w = normalized_weights(log_firing(x, v, s))
    rule_y = rule_outputs(a, x)
    y = np.einsum("ik,ikm->im", w, rule_y)
    value, g = _stress_and_output_grad(y, reference, mask, objective)
    d_a = np.einsum("im,ik,iq->kmq", g, w, augment(x))
    s_ik = np.einsum("im,ikm->ik", g, rule_y)
    u = w * (s_ik - np.sum(w * s_ik, axis=1, keepdims=True))
    usum = u.sum(axis=0)[:, None]
    ux = u.T @ x
    ux2 = u.T @ (x * x)
    d_v = (ux - usum * v) / s ** 2
    d_s = (ux2 - 2.0 * v * ux + usum * v * v) / s ** 3
    return value, d_v, d_s, d_a


def gradients(rulebase: RuleBase, data, gd: np.ndarray | None, kind: str = "geodesic_stress"):
    ref = reference_distances(data, gd, kind)
    _, d_v, d_s, d_a = value_and_gradients(rulebase, data, ref, kind)
    return d_v, d_s, d_a


def objective_value(rulebase: RuleBase, data, gd: np.ndarray | None,
                    kind: str = "geodesic_stress") -> float:
    x = _points(data)
    return stress(_outputs(rulebase, x), reference_distances(x, gd, kind), kind)


def feature_range(x: np.ndarray) -> np.ndarray:
    return x.max(axis=0) - x.min(axis=0)


def _spread_init(x: np.ndarray, n_c: int, ratio: float) -> np.ndarray:
    rng_q = feature_range(x)
    if np.any(rng_q == 0):
        log.warning("zero-range feature(s) %s: spread falls back to ratio * 1.0",
                    np.flatnonzero(rng_q == 0).tolist())
    rng_q = np.where(rng_q > 0, rng_q, 1.0)
    return np.tile(ratio * rng_q, (n_c, 1))


def _streams(seed: int):
    centers_ss, cons_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(centers_ss), np.random.default_rng(cons_ss)


def _consequent_init(rng, n_c, d_l, d_h, config) -> np.ndarray:
    lo, hi = config.consequent_init_range
    return rng.uniform(lo, hi, size=(n_c, d_l, d_h + 1))


def init_rulebase(dataset, clusters: ClusterResult, d_l: int, config: TrainConfig,
                  norm_stats: NormStats | None = None) -> RuleBase:
    """Rule antecedents from GCM centroids, shared spreads, random consequents."""
    x = _points(dataset)
    if d_l < 1:
        raise ValueError("d_l must be >= 1")
    idx = np.asarray(clusters.centroid_indices)
    if idx.min() < 0 or idx.max() >= x.shape[0]:
        raise ValueError("cluster centroids do not index into the dataset")
    _, cons_rng = _streams(config.seed)
    n_c = idx.size
    return RuleBase(x[idx].copy(), _spread_init(x, n_c, config.spread_init_ratio),
                    _consequent_init(cons_rng, n_c, d_l, x.shape[1], config), norm_stats)


def init_rulebase_random(dataset, n_c: int, d_l: int, config: TrainConfig,
                         norm_stats: NormStats | None = None) -> RuleBase:
    """Antecedent centers drawn uniformly from the bounding box of the data."""
    x = _points(dataset)
    centers_rng, cons_rng = _streams(config.seed)
    centers = centers_rng.uniform(x.min(axis=0), x.max(axis=0), size=(n_c, x.shape[1]))
    return RuleBase(centers, _spread_init(x, n_c, config.spread_init_ratio),
                    _consequent_init(cons_rng, n_c, d_l, x.shape[1], config), norm_stats)


def fit(rulebase: RuleBase, dataset, gd: np.ndarray | None,
        config: TrainConfig) -> tuple[RuleBase, TrainReport]:
    """Full-batch gradient descent with momentum on all rule parameters."""
    x = _points(dataset)
    ref = reference_distances(x, gd, config.objective)
    if ref.shape != (x.shape[0], x.shape[0]):
        raise ValueError(f"reference matrix {ref.shape} does not match n={x.shape[0]}")
    full_mask = _pair_mask(ref)
    sigma_min = SIGMA_MIN_RATIO * np.where(feature_range(x) > 0, feature_range(x), 1.0)
    pair_rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(3)[2])

    v, s, a = rulebase.centers.copy(), rulebase.spreads.copy(), rulebase.consequents.copy()
    dv_buf, ds_buf, da_buf = np.zeros_like(v), np.zeros_like(s), np.zeros_like(a)
    eta, mu = config.learning_rate, config.momentum
    report = TrainReport()
    prev = None
    it = 0
    for it in range(config.max_iter):
        mask = full_mask
        if config.pair_fraction is not None and config.pair_fraction < 1:
            keep = np.triu(pair_rng.random(ref.shape) < config.pair_fraction, 1)
            mask = full_mask & (keep | keep.T)
        current = rulebase.with_params(v, s, a)
        e, gv, gs, ga = value_and_gradients(current, x, ref, config.objective, mask)
        if not np.isfinite(e) or not all(np.all(np.isfinite(g)) for g in (gv, gs, ga)):
            raise TrainingDivergedError(f"non-finite stress or gradient at iteration {it}")
        if it == 0:
            report.initial_stress = e if mask is full_mask else stress(
                _outputs(current, x), ref, config.objective, full_mask)
        if it % config.log_every == 0:
            report.stress_trace.append((it, e))
        dv_buf = -gv + mu * dv_buf
        ds_buf = -gs + mu * ds_buf
        da_buf = -ga + mu * da_buf
        v = v + eta * dv_buf
        s = np.maximum(s + eta * ds_buf, sigma_min)
        a = a + eta * da_buf
        if config.early_stop_tol is not None and prev is not None:
            if abs(prev - e) <= config.early_stop_tol * max(abs(prev), 1e-300):
                it += 1
                break
        prev = e
    else:
        it = config.max_iter
    trained = rulebase.with_params(v, s, a)
    final = stress(_outputs(trained, x), ref, config.objective, full_mask)
    if not np.isfinite(final):
        raise TrainingDivergedError(f"non-finite stress after iteration {it}")
    report.stress_trace.append((it, final))
    report.final_stress = final
    report.iterations_run = it
    return trained, report


def _outputs(rulebase: RuleBase, x: np.ndarray) -> np.ndarray:
    w = normalized_weights(log_firing(x, rulebase.centers, rulebase.spreads))
    return np.einsum("ik,ikm->im", w, rule_outputs(rulebase.consequents, x))
