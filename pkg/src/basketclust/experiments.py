"""Parameter studies over synthetic (or supplied) basket data.

Every study expands to a list of grid points. A grid point is self-contained:
it carries its data recipe and its derived seeds, so points can run in any
order or in separate processes and still give identical rows.
"""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import baselines
from .genetic import GaConfig, run_ga
from .metrics import evaluate
from .model import BasketMatrix, CategoryLabels, Clustering
from .synthgen import Scenario, derive_seed, generate, mix_for_share

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "mutation-sweep",
    "param-grid",
    "second-product",
    "cluster-count",
    "customer-mix",
    "baseline-compare",
)
SUMMARY_FIELDS = ("grid_key", "cost", "purity", "reverse_purity", "rand_index", "runtime_s")

DEFAULT_GRIDS = {
    "mutation-sweep": [0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.1, 0.15, 0.2],
    "param-grid": [(p, m) for m in (0.01, 0.1) for p in (50, 200, 500)],
    "second-product": [0.0, 0.05, 0.1, 0.15, 0.18, 0.2, 0.25, 0.3],
    "cluster-count": list(range(2, 21)),
    "customer-mix": [round(0.1 * i, 1) for i in range(11)],
    "baseline-compare": list(range(2, 21)),
}
DESK_BASKETS = 2000
DESK_STALL = 50


@dataclass(frozen=True)
class Dataset:
    """Either a scenario to generate or an already loaded matrix."""

    scenario: Scenario | None = None
    matrix: BasketMatrix | None = None
    categories: CategoryLabels | None = None

    def load(self) -> tuple[BasketMatrix, CategoryLabels | None]:
        if self.matrix is not None:
            return self.matrix, self.categories
        return generate(self.scenario)


@dataclass(frozen=True)
class GridPoint:
    key: str
    data: Dataset
    method: str
    n_clusters: int
    ga: GaConfig | None = None
    kmeans_restarts: int = 1000
    kmeans_max_iter: int = 1000
    seed: int = 0
    order: tuple = field(default=(0, 0), compare=False)


@dataclass
class GridResult:
    point: GridPoint
    clustering: Clustering
    row: dict
    trace: np.ndarray | None = None


def run_method(m, method, n_clusters, ga=None, restarts=1000, max_iter=1000, seed=0, diag="frequency"):
    """Cluster the products of ``m``; returns ``(clustering, trace or None)``."""
    if method == "ga":
        cfg = ga or GaConfig(n_clusters, seed=seed)
        result = run_ga(m, cfg)
        return result.best, result.cost_trace
    features = baselines.cooccurrence(m, diag=diag)
    if method == "kmeans":
        return baselines.kmeans(features, n_clusters, restarts, max_iter, seed), None
    if method == "ward":
        return baselines.ward(features, n_clusters), None
    raise ValueError(f"unknown method {method!r}")


def run_point(point: GridPoint) -> GridResult:
    m, r = point.data.load()
    start = time.perf_counter()
    clustering, trace = run_method(
        m, point.method, point.n_clusters, point.ga,
        point.kmeans_restarts, point.kmeans_max_iter, point.seed,
    )
    runtime = time.perf_counter() - start
    report = evaluate(m, clustering, r)
    row = {
        "grid_key": point.key,
        "cost": report.cost,
        "purity": report.purity,
        "reverse_purity": report.reverse_purity,
        "rand_index": report.rand_index,
        "runtime_s": runtime,
    }
    log.info("%s: cost %.6f rand %s", point.key, report.cost, report.rand_index)
    return GridResult(point, clustering, row, trace)


@dataclass(frozen=True)
class StudySettings:
    scenario: Scenario = Scenario()
    ga: GaConfig = GaConfig(10, stall_limit=None)
    replicates: int = 1
    seed: int = 0
    kmeans_restarts: int = 1000
    kmeans_max_iter: int = 1000
    matrix: BasketMatrix | None = None
    categories: CategoryLabels | None = None

    @classmethod
    def desk(cls, **kw) -> "StudySettings":
        """Reduced size: 2 000 baskets and stall-based stopping."""
        scenario = kw.pop("scenario", Scenario()).with_(n_baskets=DESK_BASKETS)
        ga = kw.pop("ga", GaConfig(10)).with_(stall_limit=DESK_STALL)
        return cls(scenario=scenario, ga=ga, **kw)


def _fmt(v) -> str:
    return f"{v:g}"


def build_grid(name: str, settings: StudySettings, grid=None) -> list[GridPoint]:
    """Expand a named study into grid points.

    Replicate ``rep`` uses data seed ``derive_seed(seed, rep)``; grid point
    ``i`` of that replicate runs its search with ``derive_seed(data_seed, 1 + i)``.
    """
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    values = list(DEFAULT_GRIDS[name] if grid is None else grid)
    s = settings
    points = []
    for rep in range(s.replicates):
        data_seed = derive_seed(s.seed, rep)
        base = s.scenario.with_(seed=data_seed)
        fixed = Dataset(base, s.matrix, s.categories) if s.matrix is not None else Dataset(base)
        k0 = s.ga.max_clusters if s.matrix is not None else base.n_categories

        def point(i, key, data=fixed, method="ga", k=k0, **ga_changes):
            seed = derive_seed(data_seed, 1 + i)
            ga = s.ga.with_(max_clusters=k, seed=seed, **ga_changes) if method == "ga" else None
            return GridPoint(
                f"{key},rep={rep}", data, method, k, ga,
                s.kmeans_restarts, s.kmeans_max_iter, seed, order=(i, rep),
            )

        if name == "mutation-sweep":
            for i, mut in enumerate(values):
                points.append(point(i, f"mutation={_fmt(mut)}", mutation_chance=mut))
        elif name == "param-grid":
            for i, (pop, mut) in enumerate(values):
                points.append(point(i, f"population={pop},mutation={_fmt(mut)}",
                                    population_size=int(pop), mutation_chance=mut))
        elif name == "second-product":
            for i, p in enumerate(values):
                data = Dataset(base.with_(second_product_prob=p, seed=derive_seed(data_seed, 10_000 + i)))
                points.append(point(i, f"second_product={_fmt(p)}", data=data))
        elif name == "cluster-count":
            for i, k in enumerate(values):
                points.append(point(i, f"k={k}", k=int(k)))
        elif name == "customer-mix":
            for i, share in enumerate(values):
                data = Dataset(base.with_(customer_mix=mix_for_share(share)))
                points.append(point(i, f"bc_share={_fmt(share)}", data=data))
        elif name == "baseline-compare":
            for i, k in enumerate(values):
                for j, method in enumerate(("ga", "kmeans", "ward")):
                    points.append(point(3 * i + j, f"method={method},k={k}", method=method, k=int(k)))
    return points


def run_grid(points: list[GridPoint], jobs: int = 1) -> list[GridResult]:
    """Run every grid point; results come back in grid order whatever ``jobs`` is."""
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_point, points))
    else:
        results = [run_point(p) for p in points]
    return sorted(results, key=lambda res: res.point.order)


def run_experiment(name: str, settings: StudySettings, grid=None, jobs: int = 1) -> list[GridResult]:
    return run_grid(build_grid(name, settings, grid), jobs)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def write_summary(path, results: list[GridResult]) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_FIELDS)
        for res in results:
            w.writerow([format_value(res.row[f]) for f in SUMMARY_FIELDS])


def write_trace(path, trace) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generation", "best_cost"])
        for g, c in enumerate(trace):
            w.writerow([g, f"{c:.6f}"])
