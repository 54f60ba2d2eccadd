"""Train on a synthetic manifold and write model, projection CSV, SVG and metrics.

Defaults are the full-scale settings (n=2000, 1% rules/neighbours, 1000 iterations,
five restarts); pass --n 500 --iters 500 for a quick run.
"""
import argparse
import logging
from pathlib import Path

from ufrb.cli import write_projection
from ufrb.data import generate_helix, generate_s_curve, generate_swiss_roll
from ufrb.fuzzy import project_batch, save_model
from ufrb.gcm import default_n_clusters
from ufrb.graph import default_epsilon, geodesic_distances
from ufrb.metrics import evaluate
from ufrb.pipeline import fit_restarts
from ufrb.plot import scatter_svg
from ufrb.train import TrainConfig


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("manifold", choices=["swiss-roll", "s-curve", "helix"])
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--spread-ratio", type=float, default=0.2)
    p.add_argument("--objective", choices=["geodesic_stress", "sammon_stress"],
                   default="geodesic_stress")
    p.add_argument("--epsilon", type=int, default=None, help="default: 1%% of n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="runs")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    if args.manifold == "helix":
        ds = generate_helix(-20, 20, 40 / (args.n - 1))
    elif args.manifold == "s-curve":
        ds = generate_s_curve(args.n, args.seed)
    else:
        ds = generate_swiss_roll(args.n, args.seed)
    eps, n_c = args.epsilon or default_epsilon(ds.n), default_n_clusters(ds.n)
    gd = geodesic_distances(ds, eps)
    cfg = TrainConfig(objective=args.objective, max_iter=args.iters,
                      spread_init_ratio=args.spread_ratio, seed=args.seed, log_every=50)
    res = fit_restarts(ds, gd, n_c, 2, cfg, args.restarts, epsilon=eps)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.manifold}-{ds.n}-{args.objective}"
    save_model(res.rulebase, out / f"{stem}.json")
    res.report.to_csv(out / f"{stem}.trace.csv")
    proj = project_batch(res.rulebase, ds)
    write_projection(out / f"{stem}.proj.csv", proj, ds.labels)
    (out / f"{stem}.svg").write_text(scatter_svg(proj.coords, ds.labels, proj.rejected))
    print(f"restart final stresses: {[round(s, 5) for s in res.restart_stresses]}")
    print(evaluate(proj, ds, gd).as_lines())


if __name__ == "__main__":
    main()
