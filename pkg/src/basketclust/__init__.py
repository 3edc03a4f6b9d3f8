"""Product clustering from market basket data.

Products are grouped so that a basket rarely holds two products of the same
group; the grouping is searched with an integer-encoded genetic algorithm.
"""
from .cost import basket_terms, cost, exhaustive_minimum, population_cost
from .genetic import GaConfig, GaResult, run_ga
from .metrics import EvaluationReport, evaluate, purity, rand_index, reverse_purity, violation_ratios
from .model import BasketError, BasketMatrix, CategoryLabels, Clustering, build_matrix, validate_clustering
from .synthgen import Scenario, generate

__all__ = [
    "BasketError",
    "BasketMatrix",
    "CategoryLabels",
    "Clustering",
    "EvaluationReport",
    "GaConfig",
    "GaResult",
    "Scenario",
    "basket_terms",
    "build_matrix",
    "cost",
    "evaluate",
    "exhaustive_minimum",
    "generate",
    "population_cost",
    "purity",
    "rand_index",
    "reverse_purity",
    "run_ga",
    "validate_clustering",
    "violation_ratios",
]
