"""Command line entry point: ``basketclust {cluster,generate,experiment}``.

Options may also come from a ``--config`` file of ``key = value`` lines (keys
are option names with dashes or underscores). Precedence: command line, then
config file, then built-in defaults.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import experiments as ex
from .genetic import GaConfig
from .metrics import evaluate
from .model import BasketError, read_baskets_csv, read_categories_csv, write_baskets_csv, write_categories_csv
from .synthgen import Scenario, generate

log = logging.getLogger("basketclust")


def _stall(value: str):
    return None if str(value).lower() in ("none", "off", "0") else int(value)


def _floats(value: str):
    return [float(v) for v in str(value).split(",") if v.strip()]


def _ints(value: str):
    out = []
    for part in str(value).split(","):
        if "-" in part.strip()[1:]:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part.strip():
            out.append(int(part))
    return out


def _mix(value: str):
    parts = _floats(value)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("customer mix needs three comma-separated shares")
    return tuple(parts)


# name -> (type, default, help); defaults of None mean "not set"
SHARED = {
    "seed": (int, 0, "RNG seed"),
    "jobs": (int, 1, "parallel worker processes"),
    "out": (str, "basketclust", "output file prefix"),
}
GA_OPTS = {
    "population_size": (int, 500, "GA population size"),
    "max_generations": (int, 1000, "GA generation limit"),
    "elite_ratio": (float, 0.1, "share of the population copied unchanged"),
    "mutation_chance": (float, 0.01, "per-gene mutation probability"),
    "stall_limit": (_stall, 50, "stop after this many generations without improvement (none disables)"),
}
BASELINE_OPTS = {
    "restarts": (int, 1000, "k-means restarts"),
    "max_iter": (int, 1000, "k-means iteration limit per restart"),
    "diag": (str, "frequency", "co-occurrence diagonal: frequency or zero"),
}
SCENARIO_OPTS = {
    "n_categories": (int, 10, "number of categories"),
    "products_per_category": (int, 10, "products in each category"),
    "n_baskets": (int, 10_000, "number of baskets"),
    "categories_per_basket": (int, 4, "categories drawn per basket"),
    "second_product_prob": (float, 0.1, "chance of a second product within a category"),
    "customer_mix": (_mix, (1.0, 0.0, 0.0), "shares of customer types A,B,C"),
}
TYPES = {k: v[0] for d in (SHARED, GA_OPTS, BASELINE_OPTS, SCENARIO_OPTS) for k, v in d.items()}
TYPES.update(min_items=int, n_clusters=int, replicates=int, grid=str, desk_scale=bool)


def _add(parser, opts: dict):
    for name, (typ, default, text) in opts.items():
        parser.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None,
                            help=f"{text} (default: {default})")


def read_config(path) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BasketError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in TYPES:
            raise BasketError(f"{path}:{lineno}: unknown option {key!r}")
        typ = TYPES[key]
        values[key] = value.lower() in ("1", "true", "yes", "on") if typ is bool else typ(value)
    return values


def resolve(args, *tables) -> dict:
    """Merge command line values over config values over defaults."""
    config = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for table in tables:
        for name, (_, default, _) in table.items():
            value = getattr(args, name, None)
            out[name] = value if value is not None else config.get(name, default)
    for name in ("desk_scale", "n_clusters", "min_items", "replicates", "grid"):
        if hasattr(args, name):
            value = getattr(args, name)
            if value is None or value is False:
                value = config.get(name, value)
            out[name] = value
    return out


def _json_ready(value):
    if isinstance(value, float):
        return round(value, 6)
    if isinstance(value, dict):
        return {k: _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    return value


def cmd_cluster(args) -> int:
    opts = resolve(args, SHARED, GA_OPTS, BASELINE_OPTS)
    k = opts["n_clusters"] or 10
    min_items = opts["min_items"] or 2
    if opts["desk_scale"] and args.stall_limit is None:
        opts["stall_limit"] = ex.DESK_STALL
    m = read_baskets_csv(args.baskets_csv, min_items)
    r = read_categories_csv(args.categories, m.product_ids) if args.categories else None
    ga = None
    if args.method == "ga":
        ga = GaConfig(
            max_clusters=k,
            population_size=opts["population_size"],
            max_generations=opts["max_generations"],
            elite_ratio=opts["elite_ratio"],
            mutation_chance=opts["mutation_chance"],
            stall_limit=opts["stall_limit"],
            seed=opts["seed"],
        )
    start = time.perf_counter()
    clustering, trace = ex.run_method(
        m, args.method, k, ga, opts["restarts"], opts["max_iter"], opts["seed"], opts["diag"]
    )
    wall = time.perf_counter() - start
    report = evaluate(m, clustering, r)

    prefix = opts["out"]
    assignment_path = f"{prefix}_assignment.csv"
    with open(assignment_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["product_id", "cluster"])
        for pid, label in zip(m.product_ids, clustering.labels):
            w.writerow([pid, int(label)])
    trace_path = None
    if trace is not None:
        trace_path = f"{prefix}_trace.csv"
        ex.write_trace(trace_path, trace)

    config = {"n_clusters": k, "min_items": min_items, "seed": opts["seed"]}
    if ga is not None:
        config.update(
            population_size=ga.population_size, max_generations=ga.max_generations,
            elite_ratio=ga.elite_ratio, mutation_chance=ga.mutation_chance,
            stall_limit=ga.stall_limit, generations_run=len(trace) - 1,
        )
    elif args.method == "kmeans":
        config.update(restarts=opts["restarts"], max_iter=opts["max_iter"], diag=opts["diag"])
    else:
        config.update(diag=opts["diag"])
    report_doc = {
        "method": args.method,
        "config": config,
        "n_baskets": m.n_baskets,
        "n_products": m.n_products,
        "dropped_baskets": m.dropped_baskets,
        "evaluation": report.to_dict(),
        "assignment": {pid: int(c) for pid, c in zip(m.product_ids, clustering.labels)},
        "wall_time": wall,
        "trace_path": trace_path,
    }
    Path(f"{prefix}_report.json").write_text(
        json.dumps(_json_ready(report_doc), indent=2) + "\n", encoding="utf-8"
    )
    print(f"{args.method}: cost {report.cost:.6f}, {clustering.n_clusters_used} clusters used"
          + (f", rand {report.rand_index:.6f}" if r is not None else ""))
    return 0


def scenario_from(opts: dict) -> Scenario:
    return Scenario(**{name: opts[name] for name in SCENARIO_OPTS}, seed=opts["seed"])


def cmd_generate(args) -> int:
    opts = resolve(args, SHARED, SCENARIO_OPTS)
    if opts["desk_scale"] and args.n_baskets is None:
        opts["n_baskets"] = ex.DESK_BASKETS
    scenario = scenario_from(opts)
    m, r = generate(scenario)
    prefix = opts["out"]
    write_baskets_csv(f"{prefix}_baskets.csv", m)
    write_categories_csv(f"{prefix}_categories.csv", m.product_ids, r)
    print(f"wrote {m.n_baskets} baskets over {m.n_products} products to {prefix}_*.csv")
    return 0


def cmd_experiment(args) -> int:
    opts = resolve(args, SHARED, GA_OPTS, BASELINE_OPTS, SCENARIO_OPTS)
    desk = bool(opts["desk_scale"])
    if desk and args.n_baskets is None and "n_baskets" not in _config_keys(args):
        opts["n_baskets"] = ex.DESK_BASKETS
    if args.stall_limit is None and "stall_limit" not in _config_keys(args):
        opts["stall_limit"] = ex.DESK_STALL if desk else None
    scenario = scenario_from(opts)
    matrix = categories = None
    if args.baskets:
        matrix = read_baskets_csv(args.baskets, opts["min_items"] or 2)
        categories = read_categories_csv(args.categories, matrix.product_ids) if args.categories else None
    ga = GaConfig(
        max_clusters=opts["n_clusters"] or scenario.n_categories,
        population_size=opts["population_size"],
        max_generations=opts["max_generations"],
        elite_ratio=opts["elite_ratio"],
        mutation_chance=opts["mutation_chance"],
        stall_limit=opts["stall_limit"],
    )
    settings = ex.StudySettings(
        scenario=scenario, ga=ga, replicates=opts["replicates"] or 1, seed=opts["seed"],
        kmeans_restarts=opts["restarts"], kmeans_max_iter=opts["max_iter"],
        matrix=matrix, categories=categories,
    )
    grid = None
    if opts["grid"]:
        if args.name == "param-grid":
            pairs = (pair.split(":") for pair in str(opts["grid"]).split(","))
            grid = [(int(pop), float(mut)) for pop, mut in pairs]
        elif args.name in ("cluster-count", "baseline-compare"):
            grid = _ints(opts["grid"])
        else:
            grid = _floats(opts["grid"])
    results = ex.run_experiment(args.name, settings, grid, jobs=opts["jobs"])
    prefix = opts["out"]
    ex.write_summary(f"{prefix}_summary.csv", results)
    if args.traces:
        for i, res in enumerate(results):
            if res.trace is not None:
                ex.write_trace(f"{prefix}_trace_{i:03d}.csv", res.trace)
    print(f"{args.name}: {len(results)} grid points written to {prefix}_summary.csv")
    return 0


def _config_keys(args) -> set:
    return set(read_config(args.config)) if getattr(args, "config", None) else set()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="basketclust", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        _add(p, SHARED)
        p.add_argument("--desk-scale", action="store_true", default=False,
                       help="2 000 baskets and stall-based stopping")
        p.add_argument("--config", help="file of key = value option lines")

    p = sub.add_parser("cluster", help="cluster products of a receipt CSV")
    p.add_argument("baskets_csv")
    p.add_argument("--method", choices=("ga", "kmeans", "ward"), default="ga")
    p.add_argument("--n-clusters", dest="n_clusters", type=int, default=None)
    p.add_argument("--categories", help="product_id,category_id CSV for evaluation")
    p.add_argument("--min-items", dest="min_items", type=int, default=None)
    common(p)
    _add(p, GA_OPTS)
    _add(p, BASELINE_OPTS)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("generate", help="write a synthetic receipt and category CSV")
    common(p)
    _add(p, SCENARIO_OPTS)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("experiment", help="run a parameter study")
    p.add_argument("name", choices=ex.EXPERIMENTS)
    p.add_argument("--grid", default=None,
                   help="comma-separated grid values (population:mutation pairs for param-grid)")
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--n-clusters", dest="n_clusters", type=int, default=None)
    p.add_argument("--baskets", help="use this receipt CSV instead of synthetic data")
    p.add_argument("--categories", help="category CSV for --baskets")
    p.add_argument("--min-items", dest="min_items", type=int, default=None)
    p.add_argument("--traces", action="store_true", help="also write GA trace CSVs")
    common(p)
    _add(p, GA_OPTS)
    _add(p, BASELINE_OPTS)
    _add(p, SCENARIO_OPTS)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (BasketError, ValueError, OSError) as exc:
        print(f"basketclust: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
