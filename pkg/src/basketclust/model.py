"""Core data types: basket incidence matrices, clusterings and categories."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np


class BasketError(ValueError):
    """Raised for malformed basket data or clusterings."""


@dataclass(frozen=True, eq=False)
class BasketMatrix:
    """Binary basket x product incidence matrix.

    Row ``i`` is one receipt, column ``j`` is ``product_ids[j]``; an entry is 1
    when the product appears in the basket. Every row holds at least
    ``min_items`` products so the pair count of each basket is positive.
    """

    incidence: np.ndarray
    product_ids: tuple
    min_items: int = 2
    dropped_baskets: int = 0

    def __post_init__(self):
        a = np.asarray(self.incidence)
        if a.ndim != 2:
            raise BasketError("incidence must be a 2-D matrix")
        if a.size and not np.isin(a, (0, 1)).all():
            raise BasketError("incidence entries must be 0 or 1")
        if len(self.product_ids) != a.shape[1]:
            raise BasketError(
                f"{len(self.product_ids)} product ids for {a.shape[1]} columns"
            )
        if len(set(self.product_ids)) != len(self.product_ids):
            raise BasketError("product ids must be unique")
        if self.min_items < 2:
            raise BasketError("min_items must be at least 2")
        if a.shape[0] == 0:
            raise BasketError("no usable baskets")
        sizes = a.sum(axis=1)
        short = np.flatnonzero(sizes < self.min_items)
        if short.size:
            raise BasketError(
                f"basket {short[0]} has {sizes[short[0]]} products, "
                f"fewer than min_items={self.min_items}"
            )
        a = a.astype(np.uint8)
        a.setflags(write=False)
        object.__setattr__(self, "incidence", a)
        object.__setattr__(self, "product_ids", tuple(self.product_ids))

    @classmethod
    def from_array(cls, incidence, product_ids: Sequence | None = None, min_items: int = 2):
        incidence = np.asarray(incidence)
        if product_ids is None:
            product_ids = [f"p{j + 1}" for j in range(incidence.shape[1])]
        return cls(incidence, tuple(product_ids), min_items)

    @property
    def n_baskets(self) -> int:
        return self.incidence.shape[0]

    @property
    def n_products(self) -> int:
        return self.incidence.shape[1]

    @cached_property
    def basket_sizes(self) -> np.ndarray:
        return self.incidence.sum(axis=1).astype(np.int64)

    @cached_property
    def size_groups(self) -> tuple[tuple[int, np.ndarray, np.ndarray], ...]:
        """Baskets grouped by size ``d`` in ascending order.

        Each entry is ``(d, rows, items)`` where ``items[r]`` lists the product
        columns of basket ``rows[r]`` in ascending column order.
        """
        groups = []
        sizes = self.basket_sizes
        for d in np.unique(sizes):
            rows = np.flatnonzero(sizes == d)
            _, cols = np.nonzero(self.incidence[rows])
            groups.append((int(d), rows, cols.reshape(len(rows), int(d))))
        return tuple(groups)

    @cached_property
    def pair_table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Co-purchased product pairs and their counts per basket size.

        Returns ``(first, second, counts, sizes)``: ``first[k] < second[k]`` are
        the columns of the k-th pair that share at least one basket, and
        ``counts[k, g]`` is the number of baskets of size ``sizes[g]`` holding
        both. Counts are integers stored as float64 so matrix products stay exact.
        """
        sizes = np.unique(self.basket_sizes)
        per_size = []
        for d in sizes:
            a = self.incidence[self.basket_sizes == d].astype(np.int64)
            per_size.append(np.triu(a.T @ a, k=1))
        stacked = np.stack(per_size, axis=-1)
        first, second = np.nonzero(stacked.sum(axis=-1))
        return first, second, stacked[first, second].astype(np.float64), sizes


@dataclass(frozen=True, eq=False)
class Clustering:
    """Cluster label per product, labels in ``1..max_clusters``."""

    labels: np.ndarray
    max_clusters: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        validate_clustering(self)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return self.max_clusters == other.max_clusters and np.array_equal(
            self.labels, other.labels
        )

    @property
    def n_clusters_used(self) -> int:
        return int(np.unique(self.labels).size)


@dataclass(frozen=True, eq=False)
class CategoryLabels:
    """Ground-truth category per product; every category 1..n_categories is used."""

    labels: np.ndarray
    n_categories: int = field(default=0)

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64).reshape(-1)
        n = self.n_categories or (int(labels.max()) if labels.size else 0)
        if labels.size == 0:
            raise BasketError("category labels are empty")
        if labels.min() < 1 or labels.max() > n:
            raise BasketError(f"category labels must lie in 1..{n}")
        missing = np.setdiff1d(np.arange(1, n + 1), labels)
        if missing.size:
            raise BasketError(f"category {missing[0]} has no products")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_categories", n)

    def __len__(self):
        return len(self.labels)

    def as_clustering(self) -> Clustering:
        return Clustering(self.labels, self.n_categories)


def validate_clustering(c: Clustering) -> None:
    """Raise :class:`BasketError` unless every label lies in ``1..max_clusters``.

    The error message names the first offending product using 1-based indexing.
    """
    if c.max_clusters < 1:
        raise BasketError("max_clusters must be at least 1")
    bad = np.flatnonzero((c.labels < 1) | (c.labels > c.max_clusters))
    if bad.size:
        i = int(bad[0])
        raise BasketError(
            f"label {c.labels[i]} at index {i + 1} outside 1..{c.max_clusters}"
        )


def build_matrix(
    records: Iterable[tuple[Hashable, Hashable]], min_items: int = 2
) -> BasketMatrix:
    """Build a basket matrix from ``(basket_id, product_id)`` pairs.

    Repeated pairs collapse to presence. Products are ordered by first
    appearance, baskets likewise; baskets with fewer than ``min_items``
    distinct products are dropped and counted in ``dropped_baskets``.
    """
    if min_items < 2:
        raise BasketError("min_items must be at least 2")
    baskets: dict = {}
    product_index: dict = {}
    for basket_id, product_id in records:
        items = baskets.setdefault(basket_id, {})
        items[product_index.setdefault(product_id, len(product_index))] = None
    kept = [items for items in baskets.values() if len(items) >= min_items]
    if not kept:
        raise BasketError("no usable baskets")
    # products seen only in dropped baskets get no column
    used = sorted({j for items in kept for j in items})
    remap = {j: k for k, j in enumerate(used)}
    ids = list(product_index)
    incidence = np.zeros((len(kept), len(used)), dtype=np.uint8)
    for i, items in enumerate(kept):
        incidence[i, [remap[j] for j in items]] = 1
    return BasketMatrix(
        incidence,
        tuple(ids[j] for j in used),
        min_items,
        dropped_baskets=len(baskets) - len(kept),
    )


def _read_pairs(path, header: tuple[str, str]) -> list[tuple[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise BasketError(f"{path}: empty file") from None
        if tuple(h.strip() for h in first) != header:
            raise BasketError(f"{path}: expected header {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2 or not row[0] or not row[1]:
                raise BasketError(f"{path}:{lineno}: expected two non-empty fields")
            rows.append((row[0], row[1]))
    return rows


def read_baskets_csv(path, min_items: int = 2) -> BasketMatrix:
    """Read a ``basket_id,product_id`` receipt file."""
    return build_matrix(_read_pairs(path, ("basket_id", "product_id")), min_items)


def read_categories_csv(path, product_ids: Sequence) -> CategoryLabels:
    """Read ``product_id,category_id`` and align it with ``product_ids``.

    Category ids are mapped to 1..n in order of first appearance in the file.
    """
    rows = _read_pairs(path, ("product_id", "category_id"))
    mapping = dict(rows)
    missing = [p for p in product_ids if p not in mapping]
    if missing:
        raise BasketError(f"{path}: no category for product {missing[0]!r}")
    wanted = {mapping[p] for p in product_ids}
    codes: dict = {}
    for _, cat in rows:
        if cat in wanted:
            codes.setdefault(cat, len(codes) + 1)
    return CategoryLabels([codes[mapping[p]] for p in product_ids], len(codes))


def write_baskets_csv(path, m: BasketMatrix, basket_prefix: str = "b") -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["basket_id", "product_id"])
        for i, row in enumerate(m.incidence):
            for j in np.flatnonzero(row):
                w.writerow([f"{basket_prefix}{i + 1}", m.product_ids[j]])


def write_categories_csv(path, product_ids: Sequence, r: CategoryLabels) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["product_id", "category_id"])
        for pid, cat in zip(product_ids, r.labels):
            w.writerow([pid, int(cat)])
