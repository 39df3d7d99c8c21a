import random
from typing import Optional, Sequence

import pytest

from supalloc.experiments import generate_instance
from supalloc.matching import ProblemInstance
from supalloc.preferences import RankedPreference, RankWeights
from supalloc.taxonomy import TopicTree


def chain_tree() -> TopicTree:
    """root -> A -> B -> C"""
    return TopicTree.from_edges("root", [("root", "A"), ("A", "B"), ("B", "C")])


def flat_instance(
    c_min: Sequence[int],
    c_max: Sequence[int],
    n: int,
    alpha: float = 2.0,
    lists: Optional[Sequence[Sequence[str]]] = None,
) -> ProblemInstance:
    """k=1 instance over the chain tree; every participant lists topic A unless ``lists`` says otherwise."""
    m = len(c_min)
    lists = lists or [["A"]] * (n + m)
    prefs = [RankedPreference(tuple(t)) for t in lists]
    return ProblemInstance(
        student_prefs=tuple(prefs[:n]),
        supervisor_prefs=tuple(prefs[n:n + m]),
        c_min=tuple(c_min),
        c_max=tuple(c_max),
        weights=RankWeights((1.0,)),
        alpha=alpha,
        tree=chain_tree(),
    )


def small_random_instance(seed: int, n: int = 6, m: int = 3, c_max_range=(2, 3)) -> ProblemInstance:
    """c_min = 1, integer c_max drawn from ``c_max_range`` until capacity covers n."""
    rng = random.Random(seed)
    while True:
        c_max = tuple(rng.randint(*c_max_range) for _ in range(m))
        if sum(c_max) >= n:
            break
    base = generate_instance(n, m, surplus=1, seed=seed, quota_range=(max(c_max_range), max(c_max_range)))
    return ProblemInstance(base.student_prefs, base.supervisor_prefs, (1,) * m, c_max,
                           base.weights, base.alpha, base.tree)


@pytest.fixture
def chain():
    return chain_tree()


@pytest.fixture(scope="session")
def instance_50():
    return generate_instance(50, 8, surplus=20, seed=11)
