"""Exhaustive ground truth for small instances."""

from __future__ import annotations

from typing import Iterator, List, Optional, Tuple

from .matching import Matching, ProblemInstance
from .objectives import ObjectivePair, evaluate_pair
from .preferences import EvaluationMatrices, build_evaluation_matrices

DEFAULT_ENUM_BUDGET = 10**7
OBJECTIVES = ("students", "supervisors")


class BudgetExceededError(RuntimeError):
    pass


def enumeration_size(instance: ProblemInstance) -> int:
    """Upper bound on the assignment vectors an enumeration may touch (m ** n)."""
    return instance.m ** instance.n


def check_budget(instance: ProblemInstance, budget: int = DEFAULT_ENUM_BUDGET) -> None:
    size = enumeration_size(instance)
    if size > budget:
        raise BudgetExceededError(
            f"exhaustive search over {instance.m}^{instance.n} = {size} assignments "
            f"exceeds the budget of {budget}"
        )


def enumerate_feasible(
    instance: ProblemInstance, budget: int = DEFAULT_ENUM_BUDGET
) -> Iterator[Matching]:
    """Yield every feasible matching once, in lexicographic assignment order.

    Branches are cut as soon as a supervisor would exceed its upper quota or
    the remaining students cannot cover the outstanding lower quotas.
    """
    check_budget(instance, budget)
    n, m = instance.n, instance.m
    c_min, c_max = instance.c_min, instance.c_max
    counts = [0] * m
    assign = [0] * n
    deficit = sum(c_min)

    def rec(i: int) -> Iterator[Matching]:
        nonlocal deficit
        if i == n:
            yield Matching(tuple(assign), m)
            return
        remaining = n - i
        for j in range(m):
            if counts[j] == c_max[j]:
                continue
            covers = counts[j] < c_min[j]
            if remaining - 1 < deficit - covers:
                continue
            counts[j] += 1
            deficit -= covers
            assign[i] = j
            yield from rec(i + 1)
            counts[j] -= 1
            deficit += covers

    yield from rec(0)


def _scored(
    instance: ProblemInstance, matrices: Optional[EvaluationMatrices], budget: int
) -> Iterator[Tuple[ObjectivePair, Matching]]:
    if matrices is None:
        matrices = build_evaluation_matrices(instance)
    for matching in enumerate_feasible(instance, budget):
        yield evaluate_pair(matching, matrices, instance), matching


def exact_pareto_frontier(
    instance: ProblemInstance,
    matrices: Optional[EvaluationMatrices] = None,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> List[Tuple[ObjectivePair, Matching]]:
    """Nondominated objective pairs over all feasible matchings, one matching per pair.

    Sorted by student objective, descending.
    """
    first: dict = {}
    for pair, matching in _scored(instance, matrices, budget):
        first.setdefault(pair, matching)
    ordered = sorted(first, key=lambda p: (-p[0], -p[1]))
    front = []
    best_sup = float("-inf")
    for pair in ordered:
        if pair[1] > best_sup:
            front.append((pair, first[pair]))
            best_sup = pair[1]
    return front


def exact_best(
    instance: ProblemInstance,
    objective: str,
    matrices: Optional[EvaluationMatrices] = None,
    budget: int = DEFAULT_ENUM_BUDGET,
) -> Tuple[float, Matching]:
    """Maximum of one objective (``"students"`` or ``"supervisors"``) and a matching attaining it."""
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}, got {objective!r}")
    k = OBJECTIVES.index(objective)
    best: Optional[Tuple[float, Matching]] = None
    for pair, matching in _scored(instance, matrices, budget):
        if best is None or pair[k] > best[0]:
            best = (pair[k], matching)
    assert best is not None  # instance invariants guarantee a feasible matching
    return best
