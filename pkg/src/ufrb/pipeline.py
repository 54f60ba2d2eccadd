"""End-to-end training: geodesics -> GCM -> rule base -> momentum descent, with restarts."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .data import Dataset, NormStats
from .fuzzy import RuleBase, firing_summary, project_batch, suggest_reject_threshold
from .gcm import ClusterResult, gcm_cluster
from .train import TrainConfig, TrainReport, fit, init_rulebase, init_rulebase_random

log = logging.getLogger(__name__)


@dataclass
class FitResult:
    rulebase: RuleBase
    report: TrainReport
    clusters: ClusterResult | None
    restart_stresses: list[float]
    best_restart: int


def fit_once(dataset: Dataset, gd: np.ndarray, n_c: int, d_l: int, config: TrainConfig,
             norm_stats: NormStats | None = None, gcm_max_iter: int = 100):
    clusters = None
    if config.antecedent_init == "gcm":
        clusters = gcm_cluster(dataset, gd, n_c, gcm_max_iter, config.seed)
        rb = init_rulebase(dataset, clusters, d_l, config, norm_stats)
    else:
        rb = init_rulebase_random(dataset, n_c, d_l, config, norm_stats)
    rb, report = fit(rb, dataset, gd, config)
    return rb, report, clusters


def fit_restarts(dataset: Dataset, gd: np.ndarray, n_c: int, d_l: int, config: TrainConfig,
                 restarts: int = 1, norm_stats: NormStats | None = None,
                 epsilon: int | None = None, gcm_max_iter: int = 100) -> FitResult:
    """Train ``restarts`` models (seeds seed, seed+1, ...) and keep the lowest final stress."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = None
    stresses = []
    for r in range(restarts):
        cfg = replace(config, seed=config.seed + r)
        rb, report, clusters = fit_once(dataset, gd, n_c, d_l, cfg, norm_stats, gcm_max_iter)
        stresses.append(report.final_stress)
        log.info("restart %d: final stress %.6g", r, report.final_stress)
        if best is None or report.final_stress < best[1].final_stress:
            best = (rb, report, clusters, r)
    rb, report, clusters, r_best = best
    firings = project_batch(rb, dataset.points, 0.0).max_firing
    meta = {
        "objective": config.objective,
        "epsilon": epsilon,
        "seed": config.seed + r_best,
        "learning_rate": config.learning_rate,
        "momentum": config.momentum,
        "iterations": report.iterations_run,
        "spread_init_ratio": config.spread_init_ratio,
        "antecedent_init": config.antecedent_init,
        "final_stress": report.final_stress,
        "training_max_firing": firing_summary(firings),
        "suggested_reject_threshold": suggest_reject_threshold(firings),
    }
    rb = replace(rb, meta=meta)
    return FitResult(rb, report, clusters, stresses, r_best)
