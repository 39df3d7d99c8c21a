import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from supalloc import engine
from supalloc.engine import (
    GAConfig,
    Individual,
    crowding_distance,
    dominates,
    evolve,
    nondominated_sort,
    select_truncated,
    substreams,
    tournament_select,
)
from supalloc.matching import Matching, is_feasible
from supalloc.objectives import ObjectivePair, s_metric
from supalloc.oracle import exact_pareto_frontier
from conftest import small_random_instance

DUMMY = Matching((0,), 1)


def ind(x, y, rank=-1, crowding=0.0):
    return Individual(DUMMY, ObjectivePair(x, y), rank, crowding)


def brute_ranks(points):
    """Peel nondominated layers with an all-pairs check."""
    ranks = [None] * len(points)
    remaining = set(range(len(points)))
    level = 0
    while remaining:
        layer = {i for i in remaining if not any(dominates(points[j], points[i]) for j in remaining)}
        for i in layer:
            ranks[i] = level
        remaining -= layer
        level += 1
    return ranks


def test_dominates():
    assert dominates((0.3, 0.3), (0.2, 0.2))
    assert not dominates((0.3, 0.1), (0.1, 0.3))
    assert not dominates((0.1, 0.3), (0.3, 0.1))
    assert not dominates((0.3, 0.3), (0.3, 0.3))
    assert dominates((0.3, 0.3), (0.3, 0.2))


def test_sort_single_front():
    pop = [ind(0.1 * k, 1 - 0.1 * k) for k in range(5)]
    fronts = nondominated_sort(pop)
    assert len(fronts) == 1 and len(fronts[0]) == 5


def test_sort_chain():
    pop = [ind(0.1 * k, 0.1 * k) for k in range(4)]
    fronts = nondominated_sort(pop)
    assert [len(f) for f in fronts] == [1, 1, 1, 1]
    assert [f[0].objectives[0] for f in fronts] == pytest.approx([0.3, 0.2, 0.1, 0.0])


coords = st.integers(0, 6).map(lambda v: v / 6)


@settings(max_examples=300)
@given(st.lists(st.tuples(coords, coords), min_size=1, max_size=60))
def test_sort_matches_brute_force(points):
    pop = [ind(*p) for p in points]
    nondominated_sort(pop)
    assert [p.rank for p in pop] == brute_ranks(points)


def test_crowding_boundary():
    front = [ind(0.1, 0.9), ind(0.9, 0.1)]
    crowding_distance(front)
    assert all(math.isinf(p.crowding) for p in front)


def test_crowding_even_spacing():
    front = [ind(0.0, 1.0), ind(0.5, 0.5), ind(1.0, 0.0)]
    crowding_distance(front)
    assert front[1].crowding == pytest.approx(2.0)
    assert math.isinf(front[0].crowding) and math.isinf(front[2].crowding)


def test_crowding_degenerate_objective():
    front = [ind(0.5, 0.1), ind(0.5, 0.2), ind(0.5, 0.4)]
    crowding_distance(front)
    assert front[1].crowding == pytest.approx(1.0)
    front = [ind(0.5, 0.5)] * 3
    crowding_distance(front)
    assert all(math.isfinite(p.crowding) for p in front)


def test_tournament_rank_and_crowding():
    rng = random.Random(0)
    good, bad = ind(0, 0, rank=0, crowding=0.1), ind(0, 0, rank=3, crowding=math.inf)
    picks = [engine._better(good, bad, rng) for _ in range(50)] + [engine._better(bad, good, rng) for _ in range(50)]
    assert all(p is good for p in picks)
    wide, narrow = ind(0, 0, rank=1, crowding=2.0), ind(0, 0, rank=1, crowding=0.5)
    assert engine._better(wide, narrow, rng) is wide
    assert engine._better(narrow, wide, rng) is wide


def test_tournament_size_and_uniformity():
    rng = random.Random(1)
    pop = [ind(0, 0, rank=0, crowding=1.0) for _ in range(8)]
    pairs = tournament_select(pop, rng)
    assert len(pairs) == 4
    slot = {id(p): k for k, p in enumerate(pop)}
    counts = [0] * 8
    for _ in range(2000):
        for a, b in tournament_select(pop, rng):
            counts[slot[id(a)]] += 1
            counts[slot[id(b)]] += 1
    expected = 2000 * 8 / 8
    assert all(abs(c - expected) < 5 * math.sqrt(expected) for c in counts)


def test_truncation_keeps_distinct_points_first():
    front = [ind(0.5, 0.5), ind(0.5, 0.5), ind(0.2, 0.8), ind(0.8, 0.2)]
    crowding_distance(front)
    kept = select_truncated(front, 3)
    assert {p.objectives for p in kept} == {(0.5, 0.5), (0.2, 0.8), (0.8, 0.2)}


def test_substreams_independent():
    a, b = substreams(3), substreams(3)
    assert [a["mutation"].random() for _ in range(3)] == [b["mutation"].random() for _ in range(3)]
    assert substreams(3)["init"].random() != substreams(3)["mutation"].random()


def test_config_validation():
    with pytest.raises(ValueError):
        GAConfig(pop_max=7)
    with pytest.raises(ValueError):
        GAConfig(crossover_kind="magic")
    with pytest.raises(ValueError):
        GAConfig(it_max=0)


@pytest.fixture(scope="module")
def tiny():
    return small_random_instance(3)


def test_elitism_and_feasibility(instance_50, monkeypatch):
    checked = []
    real = engine.evaluate_pair

    def spy(matching, matrices, instance):
        assert is_feasible(matching, instance)
        checked.append(1)
        return real(matching, matrices, instance)

    monkeypatch.setattr(engine, "evaluate_pair", spy)
    config = GAConfig(pop_max=20, it_max=30, patience=30, seed=2)
    result = evolve(instance_50, config)
    sm = [r.s_metric for r in result.history]
    assert all(b <= a for a, b in zip(sm, sm[1:]))
    best_s = [r.best_f_students for r in result.history]
    best_r = [r.best_f_supervisors for r in result.history]
    assert all(b >= a for a, b in zip(best_s, best_s[1:]))
    assert all(b >= a for a, b in zip(best_r, best_r[1:]))
    assert len(checked) == 20 + 30 * 30


@pytest.mark.parametrize("kind", ["gsp", "hopcroft-karp", "uniform", "k-point", "none"])
def test_offspring_counts(instance_50, monkeypatch, kind):
    calls = {"mutate": 0}
    real = engine.mutate

    def counting(*args):
        calls["mutate"] += 1
        return real(*args)

    monkeypatch.setattr(engine, "mutate", counting)
    config = GAConfig(pop_max=16, it_max=6, patience=50, crossover_kind=kind, seed=4)
    result = evolve(instance_50, config)
    assert result.iterations == 6 and not result.converged
    assert calls["mutate"] == 6 * 16
    pool = sum(len(f) for f in result.frontiers)
    assert pool == 16 + 16 + (0 if kind == "none" else 8)


def test_patience_stops(tiny):
    result = evolve(tiny, GAConfig(pop_max=16, it_max=500, patience=5, seed=0))
    assert result.converged
    assert result.iterations < 500
    assert sum(len(f) for f in result.frontiers) == 16


def test_no_crossover_student_best_nondecreasing(instance_50):
    result = evolve(instance_50, GAConfig(pop_max=20, it_max=25, crossover_kind="none", seed=5))
    best = [r.best_f_students for r in result.history]
    assert all(b >= a for a, b in zip(best, best[1:]))


def test_tiny_instance_matches_oracle():
    inst = small_random_instance(5)
    inst = type(inst)(inst.student_prefs, inst.supervisor_prefs, (1, 1, 1), (2, 3, 3),
                      inst.weights, inst.alpha, inst.tree)
    exact = exact_pareto_frontier(inst)
    exact_pts = {p for p, _ in exact}
    exact_sm = s_metric(list(exact_pts))
    for seed in range(10):
        result = evolve(inst, GAConfig(pop_max=32, it_max=400, patience=20, seed=seed))
        pts = {p.objectives for p in result.pareto}
        assert pts <= exact_pts
        assert abs(result.s_metric() - exact_sm) <= 0.01 * exact_sm


def test_determinism(instance_50):
    cfg = GAConfig(pop_max=16, it_max=10, seed=7)
    a, b = evolve(instance_50, cfg), evolve(instance_50, cfg)
    assert [p.matching for p in a.pareto] == [p.matching for p in b.pareto]
    assert [r.s_metric for r in a.history] == [r.s_metric for r in b.history]


def test_initial_population_is_used(instance_50):
    from supalloc.matching import random_feasible_matching

    rng = random.Random(0)
    start = [random_feasible_matching(instance_50, rng) for _ in range(8)]
    result = evolve(instance_50, GAConfig(pop_max=8, it_max=1, seed=1), initial_population=start)
    assert result.history[0].frontier_size >= 1


def test_config_overrides_instance(instance_50):
    cfg = GAConfig(pop_max=8, it_max=2, alpha=0.0, seed=1)
    res = evolve(instance_50, cfg)
    assert res.history[0].s_metric > 0
    assert engine.resolve_instance(instance_50, cfg).alpha == 0.0
    assert engine.resolve_instance(instance_50, GAConfig()) is instance_50
