"""Synthetic shopping baskets with known product categories.

Each basket belongs to a customer type. Type A picks its categories from all
of them, type B only from the first half and type C only from the second
half. Within each picked category one product is bought, and with
``second_product_prob`` a second, different product of the same category.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import BasketMatrix, CategoryLabels


@dataclass(frozen=True)
class Scenario:
    n_categories: int = 10
    products_per_category: int = 10
    n_baskets: int = 10_000
    categories_per_basket: int = 4
    second_product_prob: float = 0.1
    customer_mix: tuple[float, float, float] = (1.0, 0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if self.n_categories < 1 or self.products_per_category < 1:
            raise ValueError("need at least one category and one product per category")
        if self.n_baskets < 1:
            raise ValueError("n_baskets must be positive")
        if not 2 <= self.categories_per_basket <= self.n_categories:
            raise ValueError("categories_per_basket must lie in 2..n_categories")
        if not 0 <= self.second_product_prob <= 1:
            raise ValueError("second_product_prob must lie in [0, 1]")
        if self.second_product_prob > 0 and self.products_per_category < 2:
            raise ValueError("a second product needs products_per_category >= 2")
        mix = tuple(float(s) for s in self.customer_mix)
        if len(mix) != 3 or min(mix) < 0 or abs(sum(mix) - 1) > 1e-9:
            raise ValueError("customer_mix must be three non-negative shares summing to 1")
        object.__setattr__(self, "customer_mix", mix)
        half = self.n_categories // 2
        if (mix[1] > 0 or mix[2] > 0) and self.categories_per_basket > half:
            raise ValueError(
                f"customer types B/C draw from {half} categories, "
                f"fewer than categories_per_basket={self.categories_per_basket}"
            )

    @property
    def n_products(self) -> int:
        return self.n_categories * self.products_per_category

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def derive_seed(seed: int, index: int) -> int:
    """Independent 63-bit seed for the ``index``-th member of a sweep."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0] >> 1)


def category_labels(s: Scenario) -> CategoryLabels:
    return CategoryLabels(np.repeat(np.arange(1, s.n_categories + 1), s.products_per_category),
                          s.n_categories)


def generate(s: Scenario) -> tuple[BasketMatrix, CategoryLabels]:
    """Draw ``s.n_baskets`` baskets; product ``k * ppc + i`` belongs to category ``k + 1``."""
    rng = np.random.Generator(np.random.PCG64(s.seed))
    n, cats, ppc, k = s.n_baskets, s.n_categories, s.products_per_category, s.categories_per_basket
    half = cats // 2

    ctype = rng.choice(3, size=n, p=s.customer_mix)
    allowed = np.ones((n, cats), dtype=bool)
    allowed[ctype == 1, half:] = False
    allowed[ctype == 2, :half] = False
    # k distinct allowed categories: the k smallest random keys among allowed ones
    keys = np.where(allowed, rng.random((n, cats)), np.inf)
    chosen = np.argsort(keys, axis=1, kind="stable")[:, :k]

    first = rng.integers(0, ppc, size=(n, k))
    doubled = rng.random((n, k)) < s.second_product_prob
    offset = rng.integers(1, max(ppc, 2), size=(n, k))
    second = (first + offset) % ppc

    incidence = np.zeros((n, s.n_products), dtype=np.uint8)
    rows = np.repeat(np.arange(n), k)
    base = (chosen * ppc).ravel()
    incidence[rows, base + first.ravel()] = 1
    extra = doubled.ravel()
    incidence[rows[extra], base[extra] + second.ravel()[extra]] = 1

    ids = [f"c{c + 1}p{i + 1}" for c in range(cats) for i in range(ppc)]
    return BasketMatrix(incidence, tuple(ids)), category_labels(s)


def sweep_second_product(base: Scenario, probs) -> list[tuple[BasketMatrix, CategoryLabels]]:
    return [
        generate(base.with_(second_product_prob=p, seed=derive_seed(base.seed, i)))
        for i, p in enumerate(probs)
    ]


def mix_for_share(share: float) -> tuple[float, float, float]:
    """Customer mix with a B+C share split evenly between B and C."""
    return (1.0 - share, share / 2, share / 2)


def sweep_customer_mix(base: Scenario, bc_shares) -> list[tuple[BasketMatrix, CategoryLabels]]:
    # every share reuses base.seed: common random numbers across the sweep
    return [generate(base.with_(customer_mix=mix_for_share(s))) for s in bc_shares]
