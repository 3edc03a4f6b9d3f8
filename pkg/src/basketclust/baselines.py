"""Classical clustering baselines on co-occurrence features.

Products are described by their rows of the joint co-purchase frequency
matrix and clustered with Lloyd k-means or Ward agglomeration. Neither method
sees the basket cost, which makes them a reference point for the GA.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import BasketError, BasketMatrix, Clustering


@dataclass(frozen=True, eq=False)
class CooccurrenceFeatures:
    matrix: np.ndarray
    normalization: str = "joint-frequency"
    diag: str = "frequency"

    @property
    def n_products(self) -> int:
        return self.matrix.shape[0]


def cooccurrence(m: BasketMatrix, diag: str = "frequency") -> CooccurrenceFeatures:
    """Share of baskets containing both products; the diagonal is the product's own share
    (``diag="frequency"``) or zero (``diag="zero"``)."""
    if diag not in ("frequency", "zero"):
        raise ValueError(f"unknown diagonal mode {diag!r}")
    a = m.incidence.astype(np.float64)
    f = (a.T @ a) / m.n_baskets
    if diag == "zero":
        np.fill_diagonal(f, 0.0)
    f.setflags(write=False)
    return CooccurrenceFeatures(f, diag=diag)


def _points(f) -> np.ndarray:
    return np.asarray(f.matrix if isinstance(f, CooccurrenceFeatures) else f, dtype=np.float64)


def canonical_labels(raw) -> np.ndarray:
    """Relabel to 1..k in order of first appearance."""
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(1, len(first) + 1)
    return rank[inverse]


def _sq_dist(x, centers) -> np.ndarray:
    d = (x**2).sum(1)[:, None] - 2 * x @ centers.T + (centers**2).sum(1)[None, :]
    return np.maximum(d, 0.0)


@dataclass
class LloydRun:
    labels: np.ndarray
    centers: np.ndarray
    wcss: float
    history: list[float]
    iterations: int


def lloyd(x: np.ndarray, k: int, max_iter: int, rng: np.random.Generator) -> LloydRun:
    """One Lloyd k-means run from ``k`` distinct random points.

    An empty cluster takes over the point farthest from its own centroid.
    """
    n = len(x)
    centers = x[rng.choice(n, size=k, replace=False)].copy()
    labels = None
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        dist = _sq_dist(x, centers)
        new = np.argmin(dist, axis=1)
        own = dist[np.arange(n), new]
        for j in range(k):
            if np.any(new == j):
                continue
            counts = np.bincount(new, minlength=k)
            # donors must leave their cluster non-empty and be off their centroid
            movable = (counts[new] > 1) & (own > 0)
            if not movable.any():
                break
            far = int(np.argmax(np.where(movable, own, -1.0)))
            new[far], own[far] = j, 0.0
            centers[j] = x[far]
        for j in range(k):
            members = new == j
            if members.any():
                centers[j] = x[members].mean(axis=0)
        diff = x - centers[new]
        history.append(float((diff**2).sum()))
        if labels is not None and np.array_equal(new, labels):
            labels = new
            break
        labels = new
    return LloydRun(labels, centers, history[-1], history, it)


def kmeans(
    f, k: int, restarts: int = 1000, max_iter: int = 1000, seed: int = 0
) -> Clustering:
    """Best of ``restarts`` Lloyd runs by within-cluster sum of squares."""
    x = _points(f)
    if not 1 <= k <= len(x):
        raise BasketError(f"k={k} must lie in 1..{len(x)}")
    if restarts < 1:
        raise BasketError("restarts must be at least 1")
    best = None
    for child in np.random.SeedSequence(seed).spawn(restarts):
        run = lloyd(x, k, max_iter, np.random.Generator(np.random.PCG64(child)))
        if best is None or run.wcss < best.wcss:
            best = run
    return Clustering(canonical_labels(best.labels), k)


@dataclass
class WardTree:
    """Merged slot pairs and the within-cluster sum of squares added by each merge."""

    merges: list[tuple[int, int]]
    heights: np.ndarray


def ward_tree(f, stop_at: int = 1) -> tuple[WardTree, np.ndarray]:
    """Agglomerate until ``stop_at`` clusters remain.

    Returns the merge sequence and the slot index of each point's cluster. A
    merged cluster keeps the smaller slot index; among equal merge costs the
    lexicographically smallest slot pair wins.
    """
    x = _points(f)
    n = len(x)
    d = _sq_dist(x, x)
    np.fill_diagonal(d, np.inf)
    d[np.tril_indices(n)] = np.inf
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    slot = np.arange(n)
    merges, heights = [], []
    for _ in range(n - stop_at):
        flat = int(np.argmin(d))
        i, j = divmod(flat, n)
        dij = d[i, j]
        merges.append((i, j))
        heights.append(dij / 2)
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != j)]
        ni, nj, nk = sizes[i], sizes[j], sizes[others]
        dik = np.where(others < i, d[others, i], d[i, others])
        djk = np.where(others < j, d[others, j], d[j, others])
        new = ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk)
        lo = others < i
        d[others[lo], i] = new[lo]
        d[i, others[~lo]] = new[~lo]
        d[j, :] = np.inf
        d[:, j] = np.inf
        active[j] = False
        sizes[i] += sizes[j]
        slot[slot == j] = i
    return WardTree(merges, np.array(heights)), slot


def ward(f, k: int) -> Clustering:
    """Ward agglomerative clustering cut at ``k`` clusters."""
    x = _points(f)
    if not 1 <= k <= len(x):
        raise BasketError(f"k={k} must lie in 1..{len(x)}")
    _, slot = ward_tree(x, stop_at=k)
    return Clustering(canonical_labels(slot), k)
