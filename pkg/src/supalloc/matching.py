"""Problem instances and the matching chromosome.

A matching is stored as a dense student -> supervisor index array; the
bipartite graph view is ``{(i, assignment[i])}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence, Set, Tuple

import numpy as np

from .preferences import RankedPreference, RankWeights
from .taxonomy import TopicTree

AllocationStructure = Tuple[int, ...]


class InfeasibleMatchingError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemInstance:
    student_prefs: Tuple[RankedPreference, ...]
    supervisor_prefs: Tuple[RankedPreference, ...]
    c_min: Tuple[int, ...]
    c_max: Tuple[int, ...]
    weights: RankWeights
    alpha: float
    tree: TopicTree
    student_ids: Optional[Tuple[str, ...]] = None
    supervisor_ids: Optional[Tuple[str, ...]] = None

    def __post_init__(self) -> None:
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("student_prefs", tuple(self.student_prefs))
        set_("supervisor_prefs", tuple(self.supervisor_prefs))
        set_("c_min", tuple(int(c) for c in self.c_min))
        set_("c_max", tuple(int(c) for c in self.c_max))
        set_("alpha", float(self.alpha))
        n, m = len(self.student_prefs), len(self.supervisor_prefs)
        if n < 1 or m < 1:
            raise ValueError(f"need at least one student and one supervisor (n={n}, m={m})")
        if len(self.c_min) != m or len(self.c_max) != m:
            raise ValueError("quota vectors must have one entry per supervisor")
        for j, (lo, hi) in enumerate(zip(self.c_min, self.c_max)):
            if lo < 0 or hi < 1 or lo > hi:
                raise ValueError(f"supervisor {j}: invalid quotas c_min={lo}, c_max={hi}")
        if not sum(self.c_min) <= n <= sum(self.c_max):
            raise ValueError(
                f"no feasible matching: sum(c_min)={sum(self.c_min)}, n={n}, "
                f"sum(c_max)={sum(self.c_max)}"
            )
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        k = len(self.weights)
        for who, prefs in (("student", self.student_prefs), ("supervisor", self.supervisor_prefs)):
            for idx, p in enumerate(prefs):
                if len(p) != k:
                    raise ValueError(f"{who} {idx} lists {len(p)} topics, expected {k}")
                p.validate(self.tree)
        set_("student_ids", tuple(self.student_ids or (f"s{i + 1}" for i in range(n))))
        set_("supervisor_ids", tuple(self.supervisor_ids or (f"r{j + 1}" for j in range(m))))
        if len(self.student_ids) != n or len(set(self.student_ids)) != n:
            raise ValueError("student ids must be unique, one per student")
        if len(self.supervisor_ids) != m or len(set(self.supervisor_ids)) != m:
            raise ValueError("supervisor ids must be unique, one per supervisor")

    @property
    def n(self) -> int:
        return len(self.student_prefs)

    @property
    def m(self) -> int:
        return len(self.supervisor_prefs)

    def with_parameters(self, weights: Optional[RankWeights] = None,
                        alpha: Optional[float] = None) -> "ProblemInstance":
        from dataclasses import replace

        return replace(
            self,
            weights=self.weights if weights is None else weights,
            alpha=self.alpha if alpha is None else alpha,
        )


@dataclass(frozen=True)
class Matching:
    """Total assignment of students to supervisors.

    ``counts`` is derived from ``assignment`` and cached.
    """

    assignment: Tuple[int, ...]
    m: int
    counts: Tuple[int, ...] = field(init=False, compare=False)

    def __post_init__(self) -> None:
        assignment = tuple(int(j) for j in self.assignment)
        counts = [0] * self.m
        for j in assignment:
            if not 0 <= j < self.m:
                raise ValueError(f"supervisor index {j} out of range for m={self.m}")
            counts[j] += 1
        object.__setattr__(self, "assignment", assignment)
        object.__setattr__(self, "counts", tuple(counts))

    @property
    def n(self) -> int:
        return len(self.assignment)

    def __len__(self) -> int:
        return len(self.assignment)

    def edges(self) -> Set[Tuple[int, int]]:
        return set(enumerate(self.assignment))

    def students_of(self, j: int) -> list:
        return [i for i, a in enumerate(self.assignment) if a == j]


@dataclass(frozen=True)
class WorkloadStats:
    levels: np.ndarray
    sigma: float


def _check_dims(matching: Matching, instance: ProblemInstance) -> None:
    if matching.n != instance.n or matching.m != instance.m:
        raise ValueError(
            f"matching is {matching.n}x{matching.m}, instance is {instance.n}x{instance.m}"
        )


def is_feasible(matching: Matching, instance: ProblemInstance) -> bool:
    _check_dims(matching, instance)
    return all(
        lo <= c <= hi for c, lo, hi in zip(matching.counts, instance.c_min, instance.c_max)
    )


def require_feasible(matching: Matching, instance: ProblemInstance) -> None:
    if not is_feasible(matching, instance):
        raise InfeasibleMatchingError(
            f"structure {matching.counts} violates quotas [{instance.c_min}, {instance.c_max}]"
        )


def under_subscribed(matching: Matching, instance: ProblemInstance) -> Set[int]:
    return {
        j
        for j, (c, lo, hi) in enumerate(zip(matching.counts, instance.c_min, instance.c_max))
        if lo <= c < hi
    }


def structure_of(matching: Matching) -> AllocationStructure:
    return matching.counts


def workload_levels(counts: Sequence[int], c_max: Sequence[int]) -> np.ndarray:
    return np.asarray(counts, dtype=float) / np.asarray(c_max, dtype=float)


def workload_sigma(counts: Sequence[int], c_max: Sequence[int]) -> float:
    # population standard deviation (divide by m)
    return float(np.std(workload_levels(counts, c_max)))


def workload_stats(matching: Matching, instance: ProblemInstance) -> WorkloadStats:
    levels = workload_levels(matching.counts, instance.c_max)
    return WorkloadStats(levels=levels, sigma=float(np.std(levels)))


def random_feasible_matching(instance: ProblemInstance, rng: random.Random) -> Matching:
    """Quota-first random fill.

    Students are shuffled, the first ``sum(c_min)`` of them are dealt to
    supervisors in order to meet every lower quota, and each remaining one
    goes to a uniformly random under-subscribed supervisor.
    """
    order = list(range(instance.n))
    rng.shuffle(order)
    assignment = [0] * instance.n
    counts = [0] * instance.m
    pos = 0
    for j, lo in enumerate(instance.c_min):
        for _ in range(lo):
            assignment[order[pos]] = j
            pos += 1
        counts[j] = lo
    open_ = [j for j in range(instance.m) if counts[j] < instance.c_max[j]]
    for i in order[pos:]:
        idx = rng.randrange(len(open_))
        j = open_[idx]
        assignment[i] = j
        counts[j] += 1
        if counts[j] == instance.c_max[j]:
            open_.pop(idx)
    return Matching(tuple(assignment), instance.m)
