"""Basket pair-decision cost of a product clustering.

For a basket of ``d`` products there are ``C(d, 2)`` pair decisions; a pair is
violating when both products carry the same cluster label. The cost of a
clustering is the mean over baskets of the violating share of decisions, so 0
means no basket ever holds two products of one cluster and 1 means every
basket is single-cluster.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .model import BasketError, BasketMatrix, Clustering

EXHAUSTIVE_BUDGET = 10**7


@dataclass(frozen=True)
class BasketCostTerms:
    basket_size: int
    total_decisions: int
    violating_decisions: int

    @property
    def ratio(self) -> float:
        return self.violating_decisions / self.total_decisions


def basket_terms(row, c: Clustering) -> BasketCostTerms:
    """Decision counts of one basket row under clustering ``c``."""
    row = np.asarray(row)
    if row.shape != c.labels.shape:
        raise BasketError(f"row has {row.size} products, clustering has {len(c)}")
    d = int(row.sum())
    if d < 2:
        raise BasketError(f"basket has {d} products; at least 2 are required")
    occupancy = np.bincount(c.labels[row.astype(bool)], minlength=c.max_clusters + 1)
    v = int(sum(comb(int(k), 2) for k in occupancy if k > 1))
    return BasketCostTerms(d, comb(d, 2), v)


def population_cost(m: BasketMatrix, labels, chunk: int = 2048) -> np.ndarray:
    """Cost of every label vector in ``labels`` (shape ``(n, n_products)``).

    Only product pairs that share a basket can violate, so the cost is a sum
    over co-purchased pairs with equal labels. Violating pairs are counted as
    exact integers per basket size and divided once per size, so the result
    does not depend on basket order.
    """
    labels = np.asarray(labels)
    if labels.ndim == 1:
        labels = labels[None, :]
    if labels.shape[1] != m.n_products:
        raise BasketError(
            f"clustering has {labels.shape[1]} products, matrix has {m.n_products}"
        )
    first, second, counts, sizes = m.pair_table
    # float32 sums of 0/1 times integer counts stay exact below 2**24
    dtype = np.float32 if counts.sum(axis=0).max(initial=0) < 2**24 else np.float64
    weights = np.ascontiguousarray(counts.T, dtype=dtype)
    scale = [1.0 / comb(int(d), 2) for d in sizes]
    small = np.int16 if labels.size == 0 or labels.max() < 2**15 else np.int64
    out = np.empty(labels.shape[0])
    for lo in range(0, labels.shape[0], chunk):
        block = np.ascontiguousarray(labels[lo:lo + chunk].T, dtype=small)
        same = (block[first] == block[second]).view(np.uint8).astype(dtype)
        violating = (weights @ same).astype(np.float64)
        # fixed summation order: ascending basket size
        total = np.zeros(block.shape[1])
        for g, w in enumerate(scale):
            total += violating[g] * w
        out[lo:lo + chunk] = total / m.n_baskets
    return out


def cost(m: BasketMatrix, c: Clustering) -> float:
    """Average share of same-cluster pair decisions over all baskets."""
    if len(c) != m.n_products:
        raise BasketError(f"clustering has {len(c)} products, matrix has {m.n_products}")
    return float(population_cost(m, c.labels)[0])


def _label_block(start: int, stop: int, n_products: int, n_clusters: int) -> np.ndarray:
    # lexicographic order: product 1 is the most significant digit
    codes = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, n_products), dtype=np.int64)
    for j in range(n_products - 1, -1, -1):
        out[:, j] = codes % n_clusters
        codes //= n_clusters
    return out + 1


def exhaustive_minimum(
    m: BasketMatrix, n_clusters: int, budget: int = EXHAUSTIVE_BUDGET, block: int = 8192
) -> tuple[Clustering, float]:
    """Global cost minimiser over all ``n_clusters ** n_products`` label vectors.

    Ties go to the lexicographically smallest label vector.
    """
    if n_clusters < 1:
        raise BasketError("n_clusters must be at least 1")
    total = n_clusters**m.n_products
    if total > budget:
        raise BasketError(
            f"exhaustive search needs {total} enumerations, budget is {budget}"
        )
    best_cost, best_labels = np.inf, None
    for start in range(0, total, block):
        labels = _label_block(start, min(start + block, total), m.n_products, n_clusters)
        costs = population_cost(m, labels)
        k = int(np.argmin(costs))
        if costs[k] < best_cost:
            best_cost, best_labels = float(costs[k]), labels[k]
    return Clustering(best_labels, n_clusters), best_cost
