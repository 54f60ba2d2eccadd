"""Unsupervised fuzzy rule-based dimensionality reduction.

A first-order Takagi-Sugeno model maps high-dimensional points to 2-D/3-D
coordinates; its parameters are trained to preserve kNN-graph geodesic
distances as Euclidean output distances.
"""
from .data import (Dataset, NormStats, generate_helix, generate_s_curve, generate_swiss_roll,
                   load_csv, normalize_unit)
from .fuzzy import (Projection, RuleBase, firing_strengths, load_model, membership, project,
                    project_batch, save_model, suggest_reject_threshold)
from .gcm import ClusterResult, gcm_cluster
from .graph import (NeighborGraph, build_knn_graph, check_connectivity, extend_geodesics,
                    geodesic_all_pairs)
from .metrics import MetricReport, evaluate
from .pipeline import fit_restarts
from .train import TrainConfig, TrainReport, fit, gradients, init_rulebase, stress

__version__ = "0.1.0"

__all__ = [
    "Dataset", "NormStats", "generate_helix", "generate_s_curve", "generate_swiss_roll",
    "load_csv", "normalize_unit",
    "Projection", "RuleBase", "firing_strengths", "load_model", "membership", "project",
    "project_batch", "save_model", "suggest_reject_threshold",
    "ClusterResult", "gcm_cluster",
    "NeighborGraph", "build_knn_graph", "check_connectivity", "extend_geodesics",
    "geodesic_all_pairs",
    "MetricReport", "evaluate", "fit_restarts",
    "TrainConfig", "TrainReport", "fit", "gradients", "init_rulebase", "stress",
]
