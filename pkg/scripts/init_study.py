"""Average final geodesic stress with GCM-centroid vs random-hyperbox antecedents."""
import argparse

import numpy as np

from ufrb.data import generate_swiss_roll
from ufrb.graph import default_epsilon, geodesic_distances
from ufrb.pipeline import fit_restarts
from ufrb.train import TrainConfig


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--nc", type=int, nargs="+", default=[5, 10])
    p.add_argument("--spread-ratio", type=float, nargs="+", default=[0.2, 0.3])
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--iters", type=int, default=500)
    args = p.parse_args()

    ds = generate_swiss_roll(args.n, seed=0)
    eps = max(default_epsilon(ds.n), 5)
    gd = geodesic_distances(ds, eps)
    print("n_c  r     gcm_mean  random_mean")
    for n_c in args.nc:
        for r in args.spread_ratio:
            means = []
            for init in ("gcm", "random"):
                finals = [
                    fit_restarts(ds, gd, n_c, 2,
                                 TrainConfig(max_iter=args.iters, seed=s, spread_init_ratio=r,
                                             antecedent_init=init, log_every=args.iters),
                                 epsilon=eps).report.final_stress
                    for s in range(args.runs)]
                means.append(np.mean(finals))
            print(f"{n_c:<4d} {r:<5.2f} {means[0]:.5f}   {means[1]:.5f}")


if __name__ == "__main__":
    main()
