"""Integer-encoded genetic algorithm minimising the basket pair-decision cost.

Each generation the population is sorted by cost, the elite is copied
unchanged and every remaining slot is filled by a child of two rank-selected
parents (one-point crossover followed by per-gene mutation).

All randomness comes from one ``numpy.random.Generator`` (PCG64). The draw
order is fixed: the initial population, then per generation

1. parent indices, shape ``(n_children, 2)``,
2. crossover cut points, ``(n_children,)``,
3. prefix coins, ``(n_children,)``,
4. mutation uniforms, ``(n_children, n_products)``,
5. replacement labels, ``(n_children, n_products)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from math import ceil

import numpy as np

from .cost import population_cost
from .model import BasketError, BasketMatrix, Clustering

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig:
    max_clusters: int
    population_size: int = 500
    max_generations: int = 1000
    elite_ratio: float = 0.1
    mutation_chance: float = 0.01
    stall_limit: int | None = 50
    seed: int = 0

    def __post_init__(self):
        if self.max_clusters < 1:
            raise ValueError("max_clusters must be at least 1")
        if self.population_size < 2:
            raise ValueError("population_size must be at least 2")
        if self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")
        if not 0 <= self.elite_ratio < 1:
            raise ValueError("elite_ratio must lie in [0, 1)")
        if not 0 <= self.mutation_chance <= 1:
            raise ValueError("mutation_chance must lie in [0, 1]")
        if self.stall_limit is not None and self.stall_limit < 1:
            raise ValueError("stall_limit must be positive or None")
        if self.elite_count >= self.population_size:
            raise ValueError("elite must leave room for at least one child")

    @property
    def elite_count(self) -> int:
        if self.elite_ratio == 0:
            return 0
        # round first so 0.1 * 200 style products do not ceil up
        return max(1, ceil(round(self.elite_ratio * self.population_size, 9)))

    def with_(self, **changes) -> "GaConfig":
        return replace(self, **changes)


@dataclass
class GaResult:
    best: Clustering
    best_cost: float
    cost_trace: np.ndarray = field(repr=False)
    generations_run: int
    stopped_early: bool


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def rank_weights(n: int) -> np.ndarray:
    """Selection probabilities for ranks 1..n (best first): ``(n - r + 1) / (n(n+1)/2)``."""
    w = np.arange(n, 0, -1, dtype=float)
    return w / w.sum()


def init_population(n_products: int, cfg: GaConfig, rng: np.random.Generator) -> np.ndarray:
    if n_products < 1:
        raise BasketError("need at least one product")
    return rng.integers(1, cfg.max_clusters + 1, size=(cfg.population_size, n_products))


def select_parent_indices(n: int, size, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise BasketError("cannot select from an empty population")
    return rng.choice(n, size=size, p=rank_weights(n))


def select_parent(sorted_population, rng: np.random.Generator):
    """Pick one individual from a population sorted by ascending cost."""
    return sorted_population[int(select_parent_indices(len(sorted_population), 1, rng)[0])]


def crossover_batch(prefix_from, suffix_from, cuts) -> np.ndarray:
    """Children taking genes ``[0, cut)`` from ``prefix_from`` and the rest from ``suffix_from``."""
    positions = np.arange(prefix_from.shape[1])
    return np.where(positions < np.asarray(cuts)[:, None], prefix_from, suffix_from)


def draw_cuts(n_children: int, n_products: int, rng: np.random.Generator) -> np.ndarray:
    # a single product leaves no interior cut; the coin alone then picks the parent
    if n_products < 2:
        return np.full(n_children, n_products)
    return rng.integers(1, n_products, size=n_children)


def crossover_one_point(parent_a, parent_b, rng: np.random.Generator) -> np.ndarray:
    a, b = np.asarray(parent_a), np.asarray(parent_b)
    if a.shape != b.shape:
        raise BasketError("parents differ in length")
    cut = draw_cuts(1, a.size, rng)
    a_first = rng.random(1) < 0.5
    prefix = np.where(a_first, a, b)[None, :]
    suffix = np.where(a_first, b, a)[None, :]
    return crossover_batch(prefix, suffix, cut)[0]


def mutate_batch(children, mutation_chance: float, n_clusters: int, rng) -> np.ndarray:
    hit = rng.random(children.shape) < mutation_chance
    fresh = rng.integers(1, n_clusters + 1, size=children.shape)
    return np.where(hit, fresh, children)


def mutate(child, mutation_chance: float, n_clusters: int, rng: np.random.Generator) -> np.ndarray:
    """Resample each gene with probability ``mutation_chance``; the draw may keep the old label."""
    return mutate_batch(np.asarray(child)[None, :], mutation_chance, n_clusters, rng)[0]


def breed(sorted_pop: np.ndarray, n_children: int, cfg: GaConfig, rng) -> np.ndarray:
    n, n_products = sorted_pop.shape
    parents = select_parent_indices(n, (n_children, 2), rng)
    cuts = draw_cuts(n_children, n_products, rng)
    a_first = (rng.random(n_children) < 0.5)[:, None]
    a, b = sorted_pop[parents[:, 0]], sorted_pop[parents[:, 1]]
    children = crossover_batch(np.where(a_first, a, b), np.where(a_first, b, a), cuts)
    return mutate_batch(children, cfg.mutation_chance, cfg.max_clusters, rng)


def run_ga(m: BasketMatrix, cfg: GaConfig, initial=None) -> GaResult:
    """Evolve clusterings of the products of ``m`` into at most ``cfg.max_clusters`` groups.

    ``initial`` optionally supplies label vectors that replace the first rows of
    the random initial population (the random draw still happens, so the RNG
    stream is unchanged).

    ``cost_trace[0]`` is the best cost of the initial population and
    ``cost_trace[g]`` the best cost seen after generation ``g``.
    """
    rng = make_rng(cfg.seed)
    pop = init_population(m.n_products, cfg, rng)
    if initial is not None:
        seeds = np.atleast_2d(np.asarray(initial, dtype=np.int64))
        for row in seeds:
            Clustering(row, cfg.max_clusters)
        k = min(len(seeds), len(pop))
        pop[:k] = seeds[:k]
    costs = population_cost(m, pop)

    best_i = int(np.argmin(costs))
    best_labels, best_cost = pop[best_i].copy(), float(costs[best_i])
    trace = [best_cost]
    n_elite = cfg.elite_count
    stall, generation, stopped = 0, 0, False

    while generation < cfg.max_generations:
        generation += 1
        order = np.argsort(costs, kind="stable")
        pop, costs = pop[order], costs[order]
        children = breed(pop, cfg.population_size - n_elite, cfg, rng)
        pop = np.concatenate([pop[:n_elite], children])
        costs = np.concatenate([costs[:n_elite], population_cost(m, children)])

        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_labels, best_cost = pop[i].copy(), float(costs[i])
            stall = 0
        else:
            stall += 1
        trace.append(best_cost)
        if cfg.stall_limit is not None and stall >= cfg.stall_limit:
            stopped = True
            break

    log.debug("ga finished after %d generations, cost %.6f", generation, best_cost)
    return GaResult(
        best=Clustering(best_labels, cfg.max_clusters),
        best_cost=best_cost,
        cost_trace=np.array(trace),
        generations_run=generation,
        stopped_early=stopped,
    )
