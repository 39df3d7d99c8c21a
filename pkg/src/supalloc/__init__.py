"""Two-objective supervisor allocation with structure-preserving genetic operators."""

from .engine import EvolutionResult, GAConfig, Individual, evolve, nondominated_sort
from .matching import Matching, ProblemInstance, is_feasible, random_feasible_matching, structure_of
from .objectives import ObjectivePair, evaluate_pair, s_metric
from .operators import MutationParams, gsp_crossover, hopcroft_karp_crossover, mutate, new_gene_ratio
from .oracle import BudgetExceededError, exact_best, exact_pareto_frontier
from .preferences import RankedPreference, RankWeights, build_evaluation_matrices, evaluate
from .taxonomy import TopicTree, load_taxonomy, topic_similarity

__all__ = [
    "BudgetExceededError", "EvolutionResult", "GAConfig", "Individual", "Matching",
    "MutationParams", "ObjectivePair", "ProblemInstance", "RankWeights", "RankedPreference",
    "TopicTree", "build_evaluation_matrices", "evaluate", "evaluate_pair", "evolve",
    "exact_best", "exact_pareto_frontier", "gsp_crossover", "hopcroft_karp_crossover",
    "is_feasible", "load_taxonomy", "mutate", "new_gene_ratio", "nondominated_sort",
    "random_feasible_matching", "s_metric", "structure_of", "topic_similarity",
]
__version__ = "0.1.0"
