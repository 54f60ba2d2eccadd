"""Command-line entry point: generate, fit, project, evaluate, plot.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import logging
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .data import DataFormatError, Dataset, load_csv, normalize_unit, save_csv
from .fuzzy import DEFAULT_REJECT_THRESHOLD, load_model, project_batch, save_model
from .gcm import default_n_clusters
from .graph import (DisconnectedGraphError, build_knn_graph, default_epsilon,
                    geodesic_all_pairs, load_gdm, save_gdm)
from .metrics import evaluate
from .pipeline import fit_restarts
from .plot import scatter_svg
from .train import TrainConfig

log = logging.getLogger("ufrb")

OBJECTIVE_FLAGS = {"geodesic": "geodesic_stress", "sammon": "sammon_stress"}
SMALL_N = 100
SMALL_N_FLOOR = 5


class UsageError(Exception):
    pass


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--out", required=True, help="output file")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="CSV file (first row is a header unless --no-header)")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--label-column", type=int, default=None,
                   help="column holding per-point labels (default: a column named 'label')")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ufrb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic manifold to CSV")
    g.add_argument("manifold", choices=["swiss-roll", "s-curve", "helix"])
    g.add_argument("--n", type=int, default=2000)
    g.add_argument("--t-min", type=float, default=-20.0)
    g.add_argument("--t-max", type=float, default=20.0)
    g.add_argument("--step", type=float, default=0.02)
    _add_shared(g)

    f = sub.add_parser("fit", help="train a rule base and save it")
    _add_input(f)
    _add_shared(f)
    f.add_argument("--epsilon", type=int, default=None, help="kNN neighbours (default 1%% of n)")
    f.add_argument("--nc", type=int, default=None, help="number of rules (default 1%% of n)")
    f.add_argument("--dl", type=int, default=2, choices=[2, 3])
    f.add_argument("--objective", choices=sorted(OBJECTIVE_FLAGS), default="geodesic")
    f.add_argument("--restarts", type=int, default=1)
    f.add_argument("--spread-ratio", type=float, default=0.2)
    f.add_argument("--lr", type=float, default=0.1)
    f.add_argument("--momentum", type=float, default=0.5)
    f.add_argument("--iters", type=int, default=1000)
    f.add_argument("--init", choices=["gcm", "random"], default="gcm")
    f.add_argument("--pair-fraction", type=float, default=None,
                   help="subsample this fraction of pairs per iteration")
    f.add_argument("--early-stop", type=float, default=None,
                   help="stop when relative stress change falls below this")
    f.add_argument("--normalize", action="store_true",
                   help="scale features to [0, 1] and store the statistics in the model")
    f.add_argument("--reject-threshold", type=float, default=DEFAULT_REJECT_THRESHOLD)
    f.add_argument("--trace", default=None, help="stress trace CSV (default: <out>.trace.csv)")
    f.add_argument("--cache-dir", default=".ufrb-cache")
    f.add_argument("--no-cache", action="store_true")

    pr = sub.add_parser("project", help="project points with a saved model")
    pr.add_argument("model")
    _add_input(pr)
    _add_shared(pr)
    pr.add_argument("--reject-threshold", type=float, default=DEFAULT_REJECT_THRESHOLD)

    ev = sub.add_parser("evaluate", help="print quality metrics of a model on a data set")
    ev.add_argument("model")
    _add_input(ev)
    ev.add_argument("--epsilon", type=int, default=None)
    ev.add_argument("--reject-threshold", type=float, default=DEFAULT_REJECT_THRESHOLD)
    ev.add_argument("--threads", type=int, default=1)
    ev.add_argument("-o", "--out", default=None, help="also write metrics to this file")
    ev.add_argument("-v", "--verbose", action="store_true")

    pl = sub.add_parser("plot", help="render a projection CSV as an SVG scatter plot")
    pl.add_argument("projection")
    pl.add_argument("--axes", default=None, help="output axis pair for 3-D projections, e.g. 0,2")
    pl.add_argument("-o", "--out", required=True)
    pl.add_argument("-v", "--verbose", action="store_true")
    return parser


def read_input(args) -> Dataset:
    path = Path(args.input)
    has_header = not args.no_header
    label_col = args.label_column
    if label_col is None and has_header:
        header = [h.strip().lower() for h in data_mod.csv_header(path)]
        if "label" in header:
            label_col = header.index("label")
    return load_csv(path, has_header=has_header, label_column=label_col)


def _floor(n: int) -> int:
    return SMALL_N_FLOOR if n < SMALL_N else 1


def cmd_generate(args) -> int:
    try:
        if args.manifold == "helix":
            ds = data_mod.generate_helix(args.t_min, args.t_max, args.step)
        else:
            ds = data_mod.GENERATORS[args.manifold](args.n, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    save_csv(ds, args.out)
    print(f"wrote {ds.n} points to {args.out}")
    return 0


def _geodesics(ds: Dataset, epsilon: int, args) -> np.ndarray:
    cache = None
    if not getattr(args, "no_cache", True):
        key = hashlib.sha256(np.ascontiguousarray(ds.points).tobytes()
                             + f"|{ds.points.shape}|{epsilon}".encode()).hexdigest()[:32]
        cache = Path(args.cache_dir) / f"{key}.gdm"
        if cache.exists():
            gd = load_gdm(cache)
            if gd.shape == (ds.n, ds.n):
                log.info("geodesic cache hit %s", cache)
                return gd
    gd = geodesic_all_pairs(build_knn_graph(ds, epsilon), threads=args.threads)
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        save_gdm(gd, cache)
    return gd


def cmd_fit(args) -> int:
    ds = read_input(args)
    if ds.n < 3:
        raise UsageError("fit needs at least 3 points")
    stats = None
    if args.normalize:
        ds, stats = normalize_unit(ds)
    epsilon = args.epsilon if args.epsilon is not None else default_epsilon(ds.n, _floor(ds.n))
    n_c = args.nc if args.nc is not None else default_n_clusters(ds.n, _floor(ds.n))
    try:
        config = TrainConfig(
            objective=OBJECTIVE_FLAGS[args.objective], learning_rate=args.lr,
            momentum=args.momentum, max_iter=args.iters, spread_init_ratio=args.spread_ratio,
            seed=args.seed, antecedent_init=args.init, early_stop_tol=args.early_stop,
            pair_fraction=args.pair_fraction)
        if not 1 <= epsilon < ds.n:
            raise ValueError(f"--epsilon must lie in [1, {ds.n - 1}]")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    gd = _geodesics(ds, epsilon, args)
    result = fit_restarts(ds, gd, n_c, args.dl, config, args.restarts, stats, epsilon)
    save_model(result.rulebase, args.out)
    trace = args.trace or str(Path(args.out).with_suffix("")) + ".trace.csv"
    result.report.to_csv(trace)
    proj = project_batch(result.rulebase, ds.points, args.reject_threshold)
    report = evaluate(proj, ds, gd)
    print(f"model={args.out}")
    print(f"trace={trace}")
    print(f"n={ds.n} epsilon={epsilon} n_c={n_c} restarts={args.restarts} "
          f"best_restart={result.best_restart}")
    print(f"initial_stress={result.report.initial_stress!r}")
    print(f"final_stress={result.report.final_stress!r}")
    print(report.as_lines())
    return 0


def write_projection(path, proj, labels=None) -> None:
    d_l = proj.coords.shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        header = [f"y{m + 1}" for m in range(d_l)] + ["max_firing", "rejected"]
        if labels is not None:
            header.append("label")
        w.writerow(header)
        for i in range(proj.coords.shape[0]):
            row = [repr(float(v)) for v in proj.coords[i]]
            row += [repr(float(proj.max_firing[i])), str(int(proj.rejected[i]))]
            if labels is not None:
                row.append(repr(float(labels[i])))
            w.writerow(row)


def _project(args):
    model = load_model(args.model)
    ds = read_input(args)
    if ds.dim != model.d_h:
        raise UsageError(f"dimension mismatch: model expects {model.d_h} features, "
                         f"{args.input} has {ds.dim}")
    if not 0.0 <= args.reject_threshold < 1.0:
        raise UsageError("--reject-threshold must lie in [0, 1)")
    proj = project_batch(model, ds.points, args.reject_threshold, raw=True)
    return model, ds, proj


def cmd_project(args) -> int:
    _, ds, proj = _project(args)
    write_projection(args.out, proj, ds.labels)
    print(f"wrote {ds.n} projected points to {args.out}")
    print(f"rejected={int(proj.rejected.sum())} rejection_rate={proj.rejection_rate!r}")
    return 0


def cmd_evaluate(args) -> int:
    model, ds, proj = _project(args)
    x = ds.points if model.norm_stats is None else model.norm_stats.apply(ds.points)
    model_ds = Dataset(x, ds.labels, ds.name)
    epsilon = args.epsilon or model.meta.get("epsilon") or default_epsilon(ds.n, _floor(ds.n))
    epsilon = min(int(epsilon), ds.n - 1)
    gd = geodesic_all_pairs(build_knn_graph(model_ds, epsilon), threads=args.threads)
    text = evaluate(proj, model_ds, gd).as_lines()
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def cmd_plot(args) -> int:
    path = Path(args.projection)
    header = data_mod.csv_header(path)
    if not header:
        raise UsageError(f"{path} is empty")
    raw = load_csv(path, has_header=True)
    cols = [h.strip() for h in header]
    coord_idx = [i for i, c in enumerate(cols) if c.startswith("y")]
    labels = raw.points[:, cols.index("label")] if "label" in cols else None
    rejected = raw.points[:, cols.index("rejected")] > 0 if "rejected" in cols else None
    coords = raw.points[:, coord_idx]
    if args.axes is not None:
        try:
            a, b = (int(v) for v in args.axes.split(","))
            coords = coords[:, [a, b]]
        except (ValueError, IndexError):
            raise UsageError(f"--axes expects two output indices like 0,1; got {args.axes!r}") from None
    elif coords.shape[1] != 2:
        raise UsageError(f"projection has {coords.shape[1]} output dimensions; "
                         "choose an axis pair with --axes, e.g. --axes 0,1")
    svg = scatter_svg(coords, labels, rejected, title=path.stem)
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"wrote {coords.shape[0]} points to {args.out}")
    return 0


COMMANDS = {
    "generate": cmd_generate, "fit": cmd_fit, "project": cmd_project,
    "evaluate": cmd_evaluate, "plot": cmd_plot,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ufrb {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except DisconnectedGraphError as exc:
        print(f"ufrb {args.command}: error: {exc}", file=sys.stderr)
        print("hint: raise --epsilon so the neighbourhood graph becomes connected", file=sys.stderr)
        return 1
    except (DataFormatError, ValueError, OSError, ArithmeticError) as exc:
        print(f"ufrb {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
