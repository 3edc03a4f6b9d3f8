import itertools

import numpy as np
import pytest

from basketclust.cost import basket_terms
from basketclust.model import BasketMatrix, Clustering


def reference_cost(m: BasketMatrix, labels, n_clusters=None) -> float:
    """Per-basket V_b / D_b averaged in ascending basket order."""
    labels = np.asarray(labels)
    c = Clustering(labels, n_clusters or int(labels.max()))
    total = 0.0
    for row in m.incidence:
        t = basket_terms(row, c)
        total += t.violating_decisions / t.total_decisions
    return total / m.n_baskets


def pair_rand(a, b) -> float:
    """Rand index by enumerating every product pair."""
    agree = total = 0
    for i, j in itertools.combinations(range(len(a)), 2):
        total += 1
        agree += (a[i] == a[j]) == (b[i] == b[j])
    return agree / total


def random_matrix(rng, n_baskets, n_products, max_items=None) -> BasketMatrix:
    max_items = max_items or n_products
    a = np.zeros((n_baskets, n_products), dtype=np.uint8)
    for i in range(n_baskets):
        d = rng.integers(2, max_items + 1)
        a[i, rng.choice(n_products, size=d, replace=False)] = 1
    return BasketMatrix.from_array(a)


@pytest.fixture
def rng():
    return np.random.default_rng(20161001)


@pytest.fixture
def small_matrix():
    return BasketMatrix.from_array([[1, 1, 1, 0], [0, 1, 1, 1]])


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
