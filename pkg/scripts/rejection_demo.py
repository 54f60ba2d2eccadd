"""Histogram of max firing strengths for training, held-out and far-away points."""
import numpy as np
from scipy.spatial.distance import cdist

from ufrb.data import generate_swiss_roll
from ufrb.fuzzy import project_batch, suggest_reject_threshold
from ufrb.graph import geodesic_distances
from ufrb.pipeline import fit_restarts
from ufrb.train import TrainConfig


def main():
    ds = generate_swiss_roll(500, seed=0)
    perm = np.random.default_rng(0).permutation(ds.n)
    train, test = ds.subset(np.sort(perm[:375])), ds.subset(np.sort(perm[375:]))
    gd = geodesic_distances(train, 5)
    res = fit_restarts(train, gd, 5, 2, TrainConfig(max_iter=500, spread_init_ratio=0.3),
                       epsilon=5)
    far = test.points + 5 * cdist(train.points, train.points).max()
    edges = np.linspace(0, 1, 11)
    for name, pts in (("train", train.points), ("held-out", test.points), ("far", far)):
        f = project_batch(res.rulebase, pts, 0.0).max_firing
        counts, _ = np.histogram(f, edges)
        print(f"{name:9s} rejected@0.15={np.mean(f < 0.15):6.1%}  hist={counts.tolist()}")
    train_f = project_batch(res.rulebase, train.points, 0.0).max_firing
    print(f"suggested threshold from training data: {suggest_reject_threshold(train_f):.4f}")


if __name__ == "__main__":
    main()
