"""Student and supervisor objectives, and the two-objective S-metric."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np

from .matching import Matching, ProblemInstance, workload_sigma
from .preferences import EvaluationMatrices

DEFAULT_REFERENCE = (1.0, 1.0)


class ObjectivePair(NamedTuple):
    f_students: float
    f_supervisors: float


def student_objective(matching: Matching, matrices: EvaluationMatrices) -> float:
    """Mean value students give to their assigned supervisors."""
    V = matrices.V
    return float(V[np.arange(V.shape[0]), matching.assignment].mean())


def balance_penalty(sigma: float, alpha: float) -> float:
    return 1.0 / (1.0 + sigma) ** alpha


def supervisor_objective(
    matching: Matching,
    matrices: EvaluationMatrices,
    alpha: float,
    instance: ProblemInstance,
) -> float:
    """Balance penalty times the mean over supervisors of their mean student value.

    A supervisor without students contributes 0 to the mean.
    """
    Vp = matrices.V_prime
    assignment = np.asarray(matching.assignment)
    values = Vp[assignment, np.arange(assignment.size)]
    sums = np.bincount(assignment, weights=values, minlength=Vp.shape[0])
    counts = np.asarray(matching.counts, dtype=float)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    sigma = workload_sigma(matching.counts, instance.c_max)
    return balance_penalty(sigma, alpha) * float(means.mean())


def evaluate_pair(
    matching: Matching, matrices: EvaluationMatrices, instance: ProblemInstance
) -> ObjectivePair:
    return ObjectivePair(
        student_objective(matching, matrices),
        supervisor_objective(matching, matrices, instance.alpha, instance),
    )


def nondominated_points(points: Iterable[Sequence[float]]) -> list:
    """Distinct mutually nondominated points (maximisation), sorted by first objective descending."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points}, key=lambda p: (-p[0], -p[1]))
    front = []
    best_y = -np.inf
    for x, y in pts:
        if y > best_y:
            front.append((x, y))
            best_y = y
    return front


def s_metric(frontier: Iterable[Sequence[float]], ref: Tuple[float, float] = DEFAULT_REFERENCE) -> float:
    """Area of the reference box not dominated by the frontier (lower is better).

    Computed as ``ref_x * ref_y`` minus the origin-anchored area dominated by
    the frontier. Dominated points are dropped first.
    """
    points = [(float(p[0]), float(p[1])) for p in frontier]
    if not points:
        raise ValueError("s_metric of an empty frontier")
    rx, ry = float(ref[0]), float(ref[1])
    for x, y in points:
        if not (0.0 <= x < rx and 0.0 <= y < ry):
            raise ValueError(f"frontier point {(x, y)} outside the box [0, {(rx, ry)})")
    area = 0.0
    prev_y = 0.0
    for x, y in nondominated_points(points):
        area += x * (y - prev_y)
        prev_y = y
    return rx * ry - area
