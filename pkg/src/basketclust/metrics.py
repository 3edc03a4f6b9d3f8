"""External validity of a clustering against known product categories."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from .cost import cost
from .model import BasketError, BasketMatrix, CategoryLabels, Clustering


@dataclass(frozen=True)
class PairCounts:
    true_positive: int
    true_negative: int
    total_pairs: int


@dataclass(frozen=True)
class EvaluationReport:
    cost: float
    n_clusters_used: int
    purity: float | None = None
    reverse_purity: float | None = None
    rand_index: float | None = None
    per_category_violation: tuple[float, ...] | None = None
    global_violation_ratio: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _labels(x) -> np.ndarray:
    if isinstance(x, (Clustering, CategoryLabels)):
        return x.labels
    return np.asarray(x, dtype=np.int64)


def contingency(c, r) -> np.ndarray:
    """Counts ``table[i, j]`` of products with cluster value ``i`` and category value ``j``.

    Rows and columns follow the sorted distinct labels, so empty clusters are absent.
    """
    a, b = _labels(c), _labels(r)
    if a.shape != b.shape:
        raise BasketError(f"partitions differ in length: {a.size} vs {b.size}")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def purity(c, r) -> float:
    """Share of products whose cluster's most frequent category is their own."""
    table = contingency(c, r)
    return float(table.max(axis=1).sum() / table.sum())


def reverse_purity(c, r) -> float:
    """Purity with clusters and categories exchanged."""
    return purity(r, c)


def majority_category(c, r) -> dict[int, int]:
    """Cluster label -> most frequent category; ties go to the lowest category."""
    a, b = _labels(c), _labels(r)
    table = contingency(a, b)
    clusters, cats = np.unique(a), np.unique(b)
    return {int(k): int(cats[np.argmax(row)]) for k, row in zip(clusters, table)}


def pair_counts(c, r) -> PairCounts:
    table = contingency(c, r)
    n = int(table.sum())
    if n < 2:
        raise BasketError("the Rand index needs at least two products")
    both = sum(comb(int(v), 2) for v in table.ravel())
    same_c = sum(comb(int(v), 2) for v in table.sum(axis=1))
    same_r = sum(comb(int(v), 2) for v in table.sum(axis=0))
    total = comb(n, 2)
    return PairCounts(both, total - same_c - same_r + both, total)


def rand_index(c, r) -> float:
    """Share of product pairs on which the two partitions agree."""
    pc = pair_counts(c, r)
    return (pc.true_positive + pc.true_negative) / pc.total_pairs


def _category_hits(m: BasketMatrix, r: CategoryLabels) -> np.ndarray:
    if len(r) != m.n_products:
        raise BasketError(f"{len(r)} category labels for {m.n_products} products")
    onehot = np.zeros((m.n_products, r.n_categories), dtype=np.int64)
    onehot[np.arange(m.n_products), r.labels - 1] = 1
    return m.incidence.astype(np.int64) @ onehot


def violation_ratios(m: BasketMatrix, r: CategoryLabels) -> np.ndarray:
    """Per category: baskets with two or more of its products over baskets with any.

    A category that never appears gets 0.
    """
    hits = _category_hits(m, r)
    present = (hits >= 1).sum(axis=0)
    multiple = (hits >= 2).sum(axis=0)
    return np.divide(multiple, present, out=np.zeros(len(present)), where=present > 0)


def global_violation_ratio(m: BasketMatrix, r: CategoryLabels) -> float:
    """Share of all baskets holding at least two products of some category."""
    return float((_category_hits(m, r) >= 2).any(axis=1).mean())


def evaluate(m: BasketMatrix, c: Clustering, r: CategoryLabels | None = None) -> EvaluationReport:
    """Cost of ``c`` and, when categories are known, its agreement with them."""
    value = cost(m, c)
    if r is None:
        return EvaluationReport(cost=value, n_clusters_used=c.n_clusters_used)
    return EvaluationReport(
        cost=value,
        n_clusters_used=c.n_clusters_used,
        purity=purity(c, r),
        reverse_purity=reverse_purity(c, r),
        rand_index=rand_index(c, r),
        per_category_violation=tuple(float(v) for v in violation_ratios(m, r)),
        global_violation_ratio=global_violation_ratio(m, r),
    )
