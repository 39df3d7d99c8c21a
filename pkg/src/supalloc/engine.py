"""NSGA-II style evolutionary loop for the two-objective allocation problem."""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .matching import Matching, ProblemInstance, random_feasible_matching
from .objectives import DEFAULT_REFERENCE, ObjectivePair, evaluate_pair, s_metric
from .operators import (
    MutationParams,
    gsp_crossover,
    hopcroft_karp_crossover,
    k_point_crossover,
    mutate,
    uniform_crossover,
)
from .preferences import EvaluationMatrices, build_evaluation_matrices

log = logging.getLogger(__name__)

CROSSOVERS = ("hopcroft-karp", "gsp", "uniform", "k-point", "none")
STREAMS = ("init", "mutation", "selection", "crossover")
IMPROVEMENT_EPS = 1e-12


@dataclass
class Individual:
    matching: Matching
    objectives: ObjectivePair
    rank: int = -1
    crowding: float = 0.0


@dataclass(frozen=True)
class GAConfig:
    pop_max: int = 128
    it_max: int = 250
    patience: int = 20
    mutation: MutationParams = field(default_factory=MutationParams)
    crossover_kind: str = "gsp"
    k_points: int = 8
    alpha: Optional[float] = None
    ref: Tuple[float, float] = DEFAULT_REFERENCE
    seed: int = 0
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.pop_max < 2 or self.pop_max % 2:
            raise ValueError(f"pop_max must be even and >= 2, got {self.pop_max}")
        if self.it_max < 1:
            raise ValueError("it_max must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.crossover_kind not in CROSSOVERS:
            raise ValueError(f"unknown crossover {self.crossover_kind!r}; pick one of {CROSSOVERS}")
        if self.k_points < 1:
            raise ValueError("k_points must be >= 1")
        if self.alpha is not None and self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        object.__setattr__(self, "ref", (float(self.ref[0]), float(self.ref[1])))


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Pareto dominance for maximisation."""
    return a[0] >= b[0] and a[1] >= b[1] and (a[0] != b[0] or a[1] != b[1])


def nondominated_sort(population: List[Individual]) -> List[List[Individual]]:
    """Partition into successive nondominated frontiers and set ``rank``.

    Two-objective sweep: after ordering by (f1, f2) descending, a point is
    dominated by an earlier member of a frontier exactly when that frontier's
    most recent member has a higher f2, or an equal f2 with a different f1.
    """
    order = sorted(
        range(len(population)),
        key=lambda k: (-population[k].objectives[0], -population[k].objectives[1], k),
    )
    fronts: List[List[Individual]] = []
    tails: List[Tuple[float, float]] = []
    for k in order:
        ind = population[k]
        x, y = ind.objectives
        placed = False
        for r, (tx, ty) in enumerate(tails):
            if ty < y or (ty == y and tx == x):
                fronts[r].append(ind)
                tails[r] = (x, y)
                ind.rank = r
                placed = True
                break
        if not placed:
            ind.rank = len(fronts)
            fronts.append([ind])
            tails.append((x, y))
    return fronts


def crowding_distance(frontier: List[Individual]) -> None:
    """Assign NSGA-II crowding distances in place.

    Per objective: extremes get infinity, interior points accumulate the
    normalised gap between their neighbours. A constant objective adds nothing.
    """
    size = len(frontier)
    for ind in frontier:
        ind.crowding = 0.0
    if size <= 2:
        for ind in frontier:
            ind.crowding = math.inf
        return
    for obj in (0, 1):
        ranked = sorted(range(size), key=lambda k: frontier[k].objectives[obj])
        lo = frontier[ranked[0]].objectives[obj]
        hi = frontier[ranked[-1]].objectives[obj]
        if hi == lo:
            continue
        frontier[ranked[0]].crowding = math.inf
        frontier[ranked[-1]].crowding = math.inf
        span = hi - lo
        for pos in range(1, size - 1):
            gap = frontier[ranked[pos + 1]].objectives[obj] - frontier[ranked[pos - 1]].objectives[obj]
            frontier[ranked[pos]].crowding += gap / span


def _better(a: Individual, b: Individual, rng: random.Random) -> Individual:
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def tournament_select(
    population: Sequence[Individual], rng: random.Random, n_pairs: Optional[int] = None
) -> List[Tuple[Individual, Individual]]:
    """Binary tournaments (drawn with replacement) until ``len(population) // 2`` pairs exist."""
    size = len(population)
    if size < 2:
        raise ValueError("tournament selection needs at least two individuals")
    if n_pairs is None:
        n_pairs = size // 2

    def pick() -> Individual:
        a = population[rng.randrange(size)]
        b = population[rng.randrange(size)]
        return _better(a, b, rng)

    return [(pick(), pick()) for _ in range(n_pairs)]


def select_truncated(frontier: List[Individual], count: int) -> List[Individual]:
    """Keep ``count`` members of the overflowing frontier, by descending crowding.

    Members whose objective pair is already represented yield to distinct
    pairs, so the frontier's distinct points survive whenever they fit.
    """
    ranked = sorted(range(len(frontier)), key=lambda k: -frontier[k].crowding)
    seen = set()
    first, repeats = [], []
    for k in ranked:
        key = tuple(frontier[k].objectives)
        (repeats if key in seen else first).append(k)
        seen.add(key)
    return [frontier[k] for k in (first + repeats)[:count]]


@dataclass
class IterationRecord:
    iteration: int
    s_metric: float
    best_f_students: float
    best_f_supervisors: float
    frontier_size: int


@dataclass
class EvolutionResult:
    frontiers: List[List[Individual]]
    history: List[IterationRecord]
    iterations: int
    converged: bool

    @property
    def pareto(self) -> List[Individual]:
        return self.frontiers[0]

    def s_metric(self, ref: Tuple[float, float] = DEFAULT_REFERENCE) -> float:
        return s_metric([ind.objectives for ind in self.pareto], ref)


def substreams(seed: int) -> Dict[str, random.Random]:
    """Independent per-purpose random streams derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAMS))
    return {
        name: random.Random(int.from_bytes(child.generate_state(2).tobytes(), "little"))
        for name, child in zip(STREAMS, children)
    }


def crossover_operator(config: GAConfig) -> Optional[Callable]:
    kind = config.crossover_kind
    if kind == "none":
        return None
    if kind == "k-point":
        k = config.k_points
        return lambda p1, p2, alpha, inst, rng: k_point_crossover(p1, p2, alpha, inst, rng, k=k)
    return {"hopcroft-karp": hopcroft_karp_crossover, "gsp": gsp_crossover,
            "uniform": uniform_crossover}[kind]


def resolve_instance(instance: ProblemInstance, config: GAConfig) -> ProblemInstance:
    """Apply the config's alpha/weights overrides, if any."""
    from .preferences import RankWeights

    weights = RankWeights(config.weights) if config.weights is not None else None
    if weights is None and config.alpha is None:
        return instance
    return instance.with_parameters(weights=weights, alpha=config.alpha)


def _front_summary(front: Sequence[Individual], ref) -> Tuple[float, float, float]:
    pts = [ind.objectives for ind in front]
    return s_metric(pts, ref), max(p[0] for p in pts), max(p[1] for p in pts)


def evolve(
    instance: ProblemInstance,
    config: GAConfig,
    matrices: Optional[EvaluationMatrices] = None,
    initial_population: Optional[Sequence[Matching]] = None,
    callback: Optional[Callable[[IterationRecord], None]] = None,
) -> EvolutionResult:
    """Run the generational loop until ``it_max`` or ``patience`` iterations without S-metric gain.

    Each iteration sorts survivors plus offspring, refills ``pop_max``
    survivors frontier by frontier, then breeds one mutant per survivor and
    one crossover child per tournament pair.
    """
    instance = resolve_instance(instance, config)
    if matrices is None:
        matrices = build_evaluation_matrices(instance)
    streams = substreams(config.seed)
    cross = crossover_operator(config)
    alpha = instance.alpha

    def make(matching: Matching) -> Individual:
        return Individual(matching, evaluate_pair(matching, matrices, instance))

    if initial_population is None:
        initial_population = [
            random_feasible_matching(instance, streams["init"]) for _ in range(config.pop_max)
        ]
    survivors = [make(mt) for mt in initial_population]
    offspring: List[Individual] = []
    history: List[IterationRecord] = []
    best = math.inf
    stale = 0
    converged = False
    it = 0
    while it < config.it_max:
        pool = survivors + offspring
        frontiers = nondominated_sort(pool)
        survivors = []
        for front in frontiers:
            crowding_distance(front)
            room = config.pop_max - len(survivors)
            if len(front) <= room:
                survivors.extend(front)
            else:
                survivors.extend(select_truncated(front, room))
                break
        front0 = [ind for ind in survivors if ind.rank == 0]
        sm, bs, br = _front_summary(front0, config.ref)
        record = IterationRecord(it, sm, bs, br, len(front0))
        history.append(record)
        if callback is not None:
            callback(record)
        if sm < best - IMPROVEMENT_EPS:
            best, stale = sm, 0
        else:
            stale += 1
            if stale >= config.patience:
                converged = True
                offspring = []
                break

        offspring = [
            make(mutate(ind.matching, config.mutation, instance, streams["mutation"]))
            for ind in survivors
        ]
        if cross is not None:
            for a, b in tournament_select(survivors, streams["selection"]):
                offspring.append(make(cross(a.matching, b.matching, alpha, instance, streams["crossover"])))
        it += 1

    frontiers = nondominated_sort(survivors + offspring)
    for front in frontiers:
        crowding_distance(front)
    return EvolutionResult(frontiers, history, it, converged)
