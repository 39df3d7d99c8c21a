"""Ranked topic preferences and the two-sided evaluation values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Sequence, Tuple

import numpy as np

from .taxonomy import TopicTree, topic_similarity

if TYPE_CHECKING:
    from .matching import ProblemInstance

# Exponentially decreasing rank weights used in the reference experiments (k = 5).
DEFAULT_WEIGHTS = (0.561, 0.258, 0.129, 0.064, 0.032)


@dataclass(frozen=True)
class RankedPreference:
    """Ordered list of distinct topics; position 1 is the most preferred."""

    topics: Tuple[str, ...]

    def __post_init__(self) -> None:
        topics = tuple(self.topics)
        if not topics:
            raise ValueError("a ranked preference needs at least one topic")
        if len(set(topics)) != len(topics):
            raise ValueError(f"repeated topic in ranked preference {topics!r}")
        object.__setattr__(self, "topics", topics)

    def __len__(self) -> int:
        return len(self.topics)

    def __iter__(self):
        return iter(self.topics)

    def position(self, topic: str) -> int:
        """1-based rank of ``topic``."""
        try:
            return self.topics.index(topic) + 1
        except ValueError:
            raise KeyError(f"topic {topic!r} not in preference list {self.topics!r}") from None

    def validate(self, tree: TopicTree) -> None:
        missing = [t for t in self.topics if t not in tree]
        if missing:
            raise ValueError(f"topics not in taxonomy: {missing}")


@dataclass(frozen=True)
class RankWeights:
    weights: Tuple[float, ...]

    def __post_init__(self) -> None:
        w = tuple(float(x) for x in self.weights)
        if not w:
            raise ValueError("weight vector is empty")
        if any(x < 0 for x in w):
            raise ValueError(f"weights must be nonnegative: {w}")
        if any(a < b for a, b in zip(w, w[1:])):
            raise ValueError(f"weights must be nonincreasing: {w}")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total(self) -> float:
        """Upper bound of any evaluation value."""
        return float(sum(self.weights))


@dataclass(frozen=True)
class EvaluationMatrices:
    """``V[i, j]``: student i's value for supervisor j.
    ``V_prime[j, i]``: supervisor j's value for student i."""

    V: np.ndarray
    V_prime: np.ndarray

    def __post_init__(self) -> None:
        V = np.asarray(self.V, dtype=float)
        Vp = np.asarray(self.V_prime, dtype=float)
        if V.ndim != 2 or Vp.shape != V.shape[::-1]:
            raise ValueError(f"incompatible shapes {V.shape} and {Vp.shape}")
        V.setflags(write=False)
        Vp.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "V_prime", Vp)

    @property
    def n(self) -> int:
        return self.V.shape[0]

    @property
    def m(self) -> int:
        return self.V.shape[1]


def rank_similarity(
    kw_i: str, kw_j: str, list_i: RankedPreference, list_j: RankedPreference
) -> float:
    return 1.0 / (1.0 + abs(list_i.position(kw_i) - list_j.position(kw_j)))


def best_matching_topic(kw: str, other: RankedPreference, tree: TopicTree) -> str:
    """Topic of ``other`` most similar to ``kw``; ties go to the earliest position."""
    best, best_sim = None, -1.0
    for candidate in other.topics:
        sim = topic_similarity(kw, candidate, tree)
        if sim > best_sim:
            best, best_sim = candidate, sim
    return best


def evaluate(
    list_i: RankedPreference,
    list_j: RankedPreference,
    weights: RankWeights,
    tree: TopicTree,
) -> float:
    """Value that the owner of ``list_i`` gives to being paired with the owner of ``list_j``."""
    if not (len(list_i) == len(list_j) == len(weights)):
        raise ValueError(
            f"length mismatch: {len(list_i)} vs {len(list_j)} topics, {len(weights)} weights"
        )
    total = 0.0
    for r, (w, kw) in enumerate(zip(weights.weights, list_i.topics), start=1):
        star = best_matching_topic(kw, list_j, tree)
        s_rnk = 1.0 / (1.0 + abs(r - list_j.position(star)))
        total += w * s_rnk * topic_similarity(kw, star, tree)
    return total


def _evaluate_cached(
    list_i: RankedPreference,
    list_j: RankedPreference,
    weights: RankWeights,
    tree: TopicTree,
    cache: Dict[Tuple[Tuple[str, ...], Tuple[str, ...]], float],
) -> float:
    key = (list_i.topics, list_j.topics)
    value = cache.get(key)
    if value is None:
        value = cache[key] = evaluate(list_i, list_j, weights, tree)
    return value


def build_evaluation_matrices(instance: "ProblemInstance") -> EvaluationMatrices:
    students: Sequence[RankedPreference] = instance.student_prefs
    supervisors: Sequence[RankedPreference] = instance.supervisor_prefs
    cache: dict = {}
    V = np.empty((len(students), len(supervisors)))
    Vp = np.empty((len(supervisors), len(students)))
    for i, s in enumerate(students):
        for j, r in enumerate(supervisors):
            V[i, j] = _evaluate_cached(s, r, instance.weights, instance.tree, cache)
            Vp[j, i] = _evaluate_cached(r, s, instance.weights, instance.tree, cache)
    return EvaluationMatrices(V, Vp)
