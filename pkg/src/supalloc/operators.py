"""Genetic operators on matchings.

All operators take a caller-supplied ``random.Random`` stream and never
modify their parents. Mutation and both structure-preserving crossovers map
feasible matchings to feasible matchings; the uniform and k-point baselines
rely on :func:`repair` to get there.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import List, Sequence, Set, Tuple

from .matching import (
    AllocationStructure,
    Matching,
    ProblemInstance,
    require_feasible,
    workload_sigma,
)
from .objectives import balance_penalty


@dataclass(frozen=True)
class MutationParams:
    p_mt: float = 0.05
    p_sw: float = 0.2

    def __post_init__(self) -> None:
        for name in ("p_mt", "p_sw"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")


# -- mutation ----------------------------------------------------------------


def mutate(
    parent: Matching,
    params: MutationParams,
    instance: ProblemInstance,
    rng: random.Random,
) -> Matching:
    """Swap/transfer mutation.

    Each student's edge mutates with probability ``p_mt``. A mutating edge
    becomes a transfer to a random under-subscribed supervisor when a second
    draw exceeds ``p_sw``, the current supervisor is above its lower quota
    and some other supervisor can take a student; otherwise it is swapped
    with a random student of a random supervisor (identity if the draw hits
    the same supervisor).
    """
    require_feasible(parent, instance)
    p_mt, p_sw = params.p_mt, params.p_sw
    if p_mt <= 0.0:
        return parent
    n, m = parent.n, parent.m
    c_min, c_max = instance.c_min, instance.c_max
    assign = list(parent.assignment)
    counts = list(parent.counts)
    members: List[List[int]] = [[] for _ in range(m)]
    pos = [0] * n
    for i, j in enumerate(assign):
        pos[i] = len(members[j])
        members[j].append(i)
    is_under = [c_min[q] <= counts[q] < c_max[q] for q in range(m)]
    rand = rng.random
    randrange = rng.randrange

    for i in range(n):
        if rand() >= p_mt:
            continue
        j = assign[i]
        if rand() > p_sw and counts[j] > c_min[j]:
            targets = [q for q in range(m) if is_under[q] and q != j]
        else:
            targets = None
        if targets:
            q = targets[randrange(len(targets))]
            row = members[j]
            last = row.pop()
            if last != i:
                row[pos[i]] = last
                pos[last] = pos[i]
            pos[i] = len(members[q])
            members[q].append(i)
            assign[i] = q
            counts[j] -= 1
            counts[q] += 1
            is_under[j] = c_min[j] <= counts[j] < c_max[j]
            is_under[q] = c_min[q] <= counts[q] < c_max[q]
        else:
            q = randrange(m)
            if counts[q] == 0:
                continue
            p = members[q][randrange(counts[q])]
            if q == j:
                continue
            members[j][pos[i]] = p
            members[q][pos[p]] = i
            pos[i], pos[p] = pos[p], pos[i]
            assign[i], assign[p] = q, j
    return Matching(tuple(assign), m)


# -- structure inheritance -----------------------------------------------------


def inherit_structure(
    p1: Matching,
    p2: Matching,
    alpha: float,
    instance: ProblemInstance,
    rng: random.Random,
) -> AllocationStructure:
    """Pick one parent's structure with probability proportional to its balance penalty."""
    w1 = balance_penalty(workload_sigma(p1.counts, instance.c_max), alpha)
    w2 = balance_penalty(workload_sigma(p2.counts, instance.c_max), alpha)
    return p1.counts if rng.random() <= w1 / (w1 + w2) else p2.counts


# -- maximum cardinality bipartite matching -------------------------------------


@dataclass(frozen=True)
class TransformedGraph:
    """Students on the left; one copy ``(j, l)`` per slot of supervisor j on the right.

    ``adjacency[i]`` lists the copy indices adjacent to student i.
    """

    n_students: int
    copies: Tuple[Tuple[int, int], ...]
    adjacency: Tuple[Tuple[int, ...], ...]

    def edges(self) -> Set[Tuple[int, int]]:
        return {(i, c) for i, adj in enumerate(self.adjacency) for c in adj}


def transform_graph(
    candidates: Sequence[Sequence[int]], structure: Sequence[int]
) -> TransformedGraph:
    """Expand every supervisor into ``structure[j]`` slot copies.

    ``candidates[i]`` are the supervisors adjacent to student i; each such
    edge is replicated to all copies of its supervisor.
    """
    copies = []
    first = []
    for j, size in enumerate(structure):
        first.append(len(copies))
        copies.extend((j, l) for l in range(1, size + 1))
    adjacency = tuple(
        tuple(c for j in cands for c in range(first[j], first[j] + structure[j]))
        for cands in candidates
    )
    return TransformedGraph(len(candidates), tuple(copies), adjacency)


def max_cardinality_matching(graph: TransformedGraph) -> Set[Tuple[int, int]]:
    """Hopcroft-Karp: alternate BFS layering and disjoint shortest augmenting paths.

    Returns ``(student, copy)`` edges of a maximum-cardinality matching.
    """
    adj = graph.adjacency
    n = graph.n_students
    inf = n + 1
    match_l = [-1] * n
    match_r = [-1] * len(graph.copies)
    dist = [0] * n

    while True:
        queue = deque()
        for u in range(n):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = inf
        free_layer = inf
        while queue:
            u = queue.popleft()
            if dist[u] >= free_layer:
                continue
            for v in adj[u]:
                w = match_r[v]
                if w == -1:
                    if free_layer == inf:
                        free_layer = dist[u] + 1
                elif dist[w] == inf:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if free_layer == inf:
            break

        cursor = [0] * n
        for root in range(n):
            if match_l[root] != -1:
                continue
            stack = [root]
            via: List[int] = []
            while stack:
                x = stack[-1]
                if cursor[x] == len(adj[x]):
                    dist[x] = inf
                    stack.pop()
                    if via:
                        via.pop()
                    continue
                v = adj[x][cursor[x]]
                cursor[x] += 1
                w = match_r[v]
                if w == -1:
                    if dist[x] + 1 != free_layer:
                        continue
                    via.append(v)
                    for u, vv in zip(stack, via):
                        match_l[u] = vv
                        match_r[vv] = u
                    break
                if dist[w] == dist[x] + 1:
                    stack.append(w)
                    via.append(v)

    return {(u, v) for u, v in enumerate(match_l) if v != -1}


# -- crossovers ------------------------------------------------------------------


def _merged_candidates(p1: Matching, p2: Matching) -> List[List[int]]:
    return [[a] if a == b else [a, b] for a, b in zip(p1.assignment, p2.assignment)]


def hopcroft_karp_crossover(
    p1: Matching,
    p2: Matching,
    alpha: float,
    instance: ProblemInstance,
    rng: random.Random,
) -> Matching:
    """Child with an inherited parent structure, built only from parent genes.

    The merged parent graph is expanded into supervisor slot copies and a
    perfect matching on it is found with Hopcroft-Karp; the chosen parent's
    own edges guarantee that one exists.
    """
    require_feasible(p1, instance)
    require_feasible(p2, instance)
    structure = inherit_structure(p1, p2, alpha, instance, rng)
    candidates = _merged_candidates(p1, p2)
    for cands in candidates:
        if len(cands) > 1:
            rng.shuffle(cands)
    graph = transform_graph(candidates, structure)
    edges = max_cardinality_matching(graph)
    if len(edges) != p1.n:
        raise AssertionError("merged parent graph has no perfect matching")
    assign = [0] * p1.n
    for i, c in edges:
        assign[i] = graph.copies[c][0]
    return Matching(tuple(assign), p1.m)


class _IndexedSet:
    """Set of ints with O(1) add, remove and uniform random choice."""

    __slots__ = ("items", "where")

    def __init__(self) -> None:
        self.items: List[int] = []
        self.where: dict = {}

    def add(self, x: int) -> None:
        self.where[x] = len(self.items)
        self.items.append(x)

    def discard(self, x: int) -> None:
        idx = self.where.pop(x, None)
        if idx is None:
            return
        last = self.items.pop()
        if last != x:
            self.items[idx] = last
            self.where[last] = idx

    def choice(self, rng: random.Random) -> int:
        return self.items[rng.randrange(len(self.items))]

    def __len__(self) -> int:
        return len(self.items)


def gsp_crossover(
    p1: Matching,
    p2: Matching,
    alpha: float,
    instance: ProblemInstance,
    rng: random.Random,
) -> Matching:
    """Greedy structural preservation crossover.

    Works on the merged parent graph: edges of students left with a single
    option are locked (to a fixpoint), then random unlocked edges are locked
    one by one, dropping a student's other edges on lock and a supervisor's
    unlocked edges once its inherited slot count is reached. Students left
    without edges are finally dealt to random supervisors with free slots,
    which is the only place new genes appear.
    """
    require_feasible(p1, instance)
    require_feasible(p2, instance)
    structure = inherit_structure(p1, p2, alpha, instance, rng)
    n, m = p1.n, p1.m
    target = structure
    sadj = _merged_candidates(p1, p2)
    radj: List[Set[int]] = [set() for _ in range(m)]
    unlocked = _IndexedSet()
    for i, cands in enumerate(sadj):
        for j in cands:
            radj[j].add(i)
            unlocked.add(i * m + j)
    locked_to = [-1] * n
    n_locked = [0] * m
    pending: deque = deque()
    simplifying = True

    def saturate(j: int) -> None:
        for u in radj[j]:
            sadj[u].remove(j)
            unlocked.discard(u * m + j)
            if simplifying and len(sadj[u]) == 1:
                pending.append(u)
        radj[j].clear()

    def lock(i: int, j: int) -> None:
        locked_to[i] = j
        for l in sadj[i]:
            radj[l].discard(i)
            unlocked.discard(i * m + l)
        sadj[i] = [j]
        n_locked[j] += 1
        if n_locked[j] == target[j]:
            saturate(j)

    for j in range(m):
        if target[j] == 0:
            saturate(j)
    pending.extend(i for i in range(n) if len(sadj[i]) == 1)
    while pending:
        u = pending.popleft()
        if locked_to[u] == -1 and len(sadj[u]) == 1:
            lock(u, sadj[u][0])
    simplifying = False

    while len(unlocked):
        code = unlocked.choice(rng)
        lock(*divmod(code, m))

    free_students = [i for i in range(n) if locked_to[i] == -1]
    open_slots = [j for j in range(m) if n_locked[j] != target[j]]
    while free_students:
        idx = rng.randrange(len(free_students))
        free_students[idx], free_students[-1] = free_students[-1], free_students[idx]
        i = free_students.pop()
        jdx = rng.randrange(len(open_slots))
        j = open_slots[jdx]
        locked_to[i] = j
        n_locked[j] += 1
        if n_locked[j] == target[j]:
            open_slots[jdx] = open_slots[-1]
            open_slots.pop()
    return Matching(tuple(locked_to), m)


def repair(assign: List[int], instance: ProblemInstance, rng: random.Random) -> Matching:
    """Make an arbitrary assignment feasible by random student moves.

    Students are moved off over-subscribed supervisors onto ones below their
    upper quota, then onto supervisors still below their lower quota from
    supervisors that can spare one.
    """
    m = instance.m
    c_min, c_max = instance.c_min, instance.c_max
    members: List[List[int]] = [[] for _ in range(m)]
    for i, j in enumerate(assign):
        members[j].append(i)

    def move(src: int, dst: int) -> None:
        row = members[src]
        k = rng.randrange(len(row))
        row[k], row[-1] = row[-1], row[k]
        i = row.pop()
        members[dst].append(i)
        assign[i] = dst

    while True:
        over = [j for j in range(m) if len(members[j]) > c_max[j]]
        if not over:
            break
        room = [j for j in range(m) if len(members[j]) < c_max[j]]
        move(rng.choice(over), rng.choice(room))
    while True:
        short = [j for j in range(m) if len(members[j]) < c_min[j]]
        if not short:
            break
        spare = [j for j in range(m) if len(members[j]) > c_min[j]]
        move(rng.choice(spare), rng.choice(short))
    return Matching(tuple(assign), m)


def uniform_crossover(
    p1: Matching, p2: Matching, alpha: float, instance: ProblemInstance, rng: random.Random
) -> Matching:
    """Per-gene coin flip between parents, then :func:`repair`. Baseline only."""
    assign = [a if rng.random() < 0.5 else b for a, b in zip(p1.assignment, p2.assignment)]
    return repair(assign, instance, rng)


def k_point_crossover(
    p1: Matching,
    p2: Matching,
    alpha: float,
    instance: ProblemInstance,
    rng: random.Random,
    k: int = 8,
) -> Matching:
    """Alternate parent segments between ``k`` random cut points, then :func:`repair`. Baseline only."""
    n = p1.n
    cuts = sorted(rng.sample(range(1, n), min(k, n - 1))) if n > 1 else []
    assign = []
    source = (p1.assignment, p2.assignment)
    start, side = 0, 0
    for cut in cuts + [n]:
        assign.extend(source[side][start:cut])
        start, side = cut, 1 - side
    return repair(assign, instance, rng)


# -- diagnostics --------------------------------------------------------------------


def new_gene_ratio(child: Matching, p1: Matching, p2: Matching) -> float:
    """Fraction of the child's genes found in neither parent."""
    new = sum(
        1 for c, a, b in zip(child.assignment, p1.assignment, p2.assignment) if c != a and c != b
    )
    return new / child.n
