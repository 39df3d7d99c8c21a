"""Instance generation and the solve / grid / bench / compare drivers behind the CLI."""

from __future__ import annotations

import gc
import json
import logging
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import formats
from .engine import GAConfig, evolve, resolve_instance
from .matching import ProblemInstance, random_feasible_matching
from .objectives import s_metric
from .operators import gsp_crossover, hopcroft_karp_crossover, new_gene_ratio
from .oracle import DEFAULT_ENUM_BUDGET, check_budget, exact_best, exact_pareto_frontier
from .preferences import DEFAULT_WEIGHTS, RankedPreference, RankWeights, build_evaluation_matrices
from .taxonomy import TopicTree

log = logging.getLogger(__name__)

QUOTA_RANGE = (4, 10)


class CapacityError(ValueError):
    """Requested capacity surplus cannot be reached with the quota range."""


def derive_seed(*parts: int) -> int:
    """Deterministic 63-bit seed from integer coordinates."""
    state = np.random.SeedSequence([int(p) for p in parts]).generate_state(2)
    return int.from_bytes(state.tobytes(), "little") >> 1


# -- synthetic taxonomy and preference pools ---------------------------------------


def synthetic_taxonomy(branching: Sequence[int] = (5, 4, 3, 3), root: str = "root") -> TopicTree:
    """Complete tree with ``branching[d]`` children per node at depth ``d``; ids encode the path."""
    edges = []
    level = [root]
    for width in branching:
        nxt = []
        for parent in level:
            for c in range(1, width + 1):
                child = f"{parent}.{c}" if parent != root else f"T{c}"
                edges.append((parent, child))
                nxt.append(child)
        level = nxt
    return TopicTree.from_edges(root, edges)


@dataclass
class PreferencePool:
    tree: TopicTree
    students: List[RankedPreference]
    supervisors: List[RankedPreference]


def _sample_list(tree_levels: List[List[str]], k: int, depth_weights: Sequence[float],
                 rng: random.Random) -> RankedPreference:
    chosen: List[str] = []
    # topics cluster around a few interests so lists overlap in subtrees
    anchor = rng.choice(tree_levels[0])
    while len(chosen) < k:
        depth = rng.choices(range(len(depth_weights)), weights=depth_weights)[0]
        level = tree_levels[depth]
        if rng.random() < 0.6:
            near = [t for t in level if t == anchor or t.startswith(anchor + ".")]
            topic = rng.choice(near or level)
        else:
            topic = rng.choice(level)
        if topic not in chosen:
            chosen.append(topic)
    return RankedPreference(tuple(chosen))


def synthetic_pool(n_students: int, n_supervisors: int, seed: int, k: int = 5,
                   tree: Optional[TopicTree] = None) -> PreferencePool:
    """Random ranked lists; students favour specific (deep) topics, supervisors general ones."""
    tree = tree or synthetic_taxonomy()
    rng = random.Random(derive_seed(seed, 0x5EED))
    by_depth: Dict[int, List[str]] = {}
    for node in sorted(tree.nodes):
        if node != tree.root:
            by_depth.setdefault(tree.depth(node), []).append(node)
    levels = [by_depth[d] for d in sorted(by_depth)]
    depth_count = len(levels)
    student_w = [d + 1.0 for d in range(depth_count)]
    supervisor_w = [float(depth_count - d) for d in range(depth_count)]
    return PreferencePool(
        tree,
        [_sample_list(levels, k, student_w, rng) for _ in range(n_students)],
        [_sample_list(levels, k, supervisor_w, rng) for _ in range(n_supervisors)],
    )


def read_pool(taxonomy: Path, students: Path, supervisors: Path) -> PreferencePool:
    from .taxonomy import load_taxonomy

    tree = load_taxonomy(taxonomy)
    return PreferencePool(
        tree,
        list(formats.read_preferences(students, tree).values()),
        list(formats.read_preferences(supervisors, tree).values()),
    )


# -- instance generation ----------------------------------------------------------------


def required_capacity(n: int, surplus: float) -> int:
    """Smallest integer capacity that exceeds ``n`` by ``surplus`` percent."""
    return math.ceil(n * (100.0 + surplus) / 100.0 - 1e-9)


def draw_upper_quotas(m: int, required: int, rng: random.Random,
                      quota_range: Tuple[int, int] = QUOTA_RANGE) -> List[int]:
    """i.i.d. integer uniform quotas, redrawn as a whole until they sum to ``required`` or more."""
    lo, hi = quota_range
    if m * hi < required:
        raise CapacityError(
            f"{m} supervisors with quotas at most {hi} cannot reach a capacity of {required}"
        )
    while True:
        c_max = [rng.randint(lo, hi) for _ in range(m)]
        if sum(c_max) >= required:
            return c_max


def scaled_quota_range(n: int, m: int, surplus: float,
                       quota_range: Tuple[int, int] = QUOTA_RANGE) -> Tuple[int, int]:
    """Stretch the quota range so its mean capacity covers ``n`` plus surplus.

    Needed when the student/supervisor ratio is too high for the base range
    (e.g. m = n/10 with quotas up to 10 can never exceed n).
    """
    lo, hi = quota_range
    scale = required_capacity(n, surplus) / (m * (lo + hi) / 2.0)
    if scale <= 1.0:
        return quota_range
    return max(1, round(lo * scale)), math.ceil(hi * scale)


def generate_instance(
    n: int,
    m: int,
    surplus: float = 20.0,
    seed: int = 0,
    pool: Optional[PreferencePool] = None,
    quota_range: Tuple[int, int] = QUOTA_RANGE,
    alpha: float = 2.0,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
) -> ProblemInstance:
    """Random instance: c_min = 1, c_max ~ U{lo..hi} with total capacity >= n * (1 + surplus%)."""
    if surplus <= 0:
        raise ValueError("surplus must be a positive percentage")
    if m > n:
        raise CapacityError(f"m={m} supervisors with c_min=1 need at least {m} students")
    rng = random.Random(derive_seed(seed, n, m))
    if pool is None:
        pool = synthetic_pool(n, m, seed, k=len(weights))
    required = required_capacity(n, surplus)
    c_max = draw_upper_quotas(m, required, rng, quota_range)

    def take(lists: List[RankedPreference], count: int, who: str) -> List[RankedPreference]:
        if len(lists) >= count:
            return rng.sample(lists, count)
        log.warning("pool has %d %s lists, sampling %d with replacement", len(lists), who, count)
        return [rng.choice(lists) for _ in range(count)]

    return ProblemInstance(
        student_prefs=tuple(take(pool.students, n, "student")),
        supervisor_prefs=tuple(take(pool.supervisors, m, "supervisor")),
        c_min=(1,) * m,
        c_max=tuple(c_max),
        weights=RankWeights(tuple(weights)),
        alpha=alpha,
        tree=pool.tree,
    )


# -- solve -------------------------------------------------------------------------------

REPORT_HEADER = ("iteration", "s_metric", "best_f_students", "best_f_supervisors", "frontier_size")


def run_solve(instance: ProblemInstance, config: GAConfig, out_dir: Path) -> dict:
    """Run the GA and write ``report.csv``, the frontier files and ``config.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = evolve(instance, config)
    fmt = formats.fmt
    formats.write_records(
        out_dir / "report.csv", REPORT_HEADER,
        ((r.iteration, fmt(r.s_metric), fmt(r.best_f_students), fmt(r.best_f_supervisors),
          r.frontier_size) for r in result.history),
    )
    resolved = resolve_instance(instance, config)
    entries = formats.frontier_entries(result.pareto)
    sm = result.s_metric(config.ref)
    formats.write_frontier(out_dir, entries, resolved, sm, config.ref, exact=False)
    formats.save_config(config, out_dir / "config.json")
    return {
        "s_metric": sm,
        "best_f_students": max(p[0] for p, _ in entries),
        "best_f_supervisors": max(p[1] for p, _ in entries),
        "frontier_size": len(entries),
        "iterations": result.iterations,
        "converged": result.converged,
    }


# -- grid search ---------------------------------------------------------------------------

GRID_METRICS = ("s_metric", "best_f_students", "best_f_supervisors")


def frange(start: float, stop: float, step: float) -> List[float]:
    """Inclusive float range, rounded to suppress accumulation noise."""
    if step <= 0:
        raise ValueError("step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty range {start}..{stop}")
    return [round(start + k * step, 10) for k in range(count)]


def _grid_run(args) -> Tuple[int, int, int, int, dict]:
    inst_idx, instance, a, b, p_mt, p_sw, seed, base = args
    config = replace(
        base,
        mutation=type(base.mutation)(p_mt, p_sw),
        seed=derive_seed(seed, a, b),
    )
    result = evolve(instance, config)
    pts = [ind.objectives for ind in result.pareto]
    metrics = {
        "s_metric": s_metric(pts, config.ref),
        "best_f_students": max(p[0] for p in pts),
        "best_f_supervisors": max(p[1] for p in pts),
    }
    return inst_idx, a, b, seed, metrics


@dataclass
class GridResult:
    p_mt: List[float]
    p_sw: List[float]
    runs: Dict[Tuple[int, int, int, int], dict] = field(default_factory=dict)

    def cell_mean(self, a: int, b: int, metric: str, instance: Optional[int] = None) -> float:
        vals = [v[metric] for (i, aa, bb, _), v in self.runs.items()
                if aa == a and bb == b and (instance is None or i == instance)]
        return float(np.mean(vals))

    def records(self) -> List[Tuple[float, float, str, float]]:
        return [
            (self.p_mt[a], self.p_sw[b], metric, self.cell_mean(a, b, metric))
            for a in range(len(self.p_mt))
            for b in range(len(self.p_sw))
            for metric in GRID_METRICS
        ]


def run_grid(
    instances: Sequence[ProblemInstance],
    p_mt_values: Sequence[float],
    p_sw_values: Sequence[float],
    seeds: Sequence[int],
    base: GAConfig,
    threads: int = 1,
) -> GridResult:
    """Every (p_mt, p_sw) cell on every instance and seed.

    A run's GA seed is ``derive_seed(seed, a, b)`` for cell indices ``(a, b)``.
    """
    if not p_mt_values or not p_sw_values or not seeds or not instances:
        raise ValueError("grid needs nonempty instances, p_mt/p_sw ranges and seeds")
    jobs = [
        (k, inst, a, b, p_mt, p_sw, seed, base)
        for k, inst in enumerate(instances)
        for a, p_mt in enumerate(p_mt_values)
        for b, p_sw in enumerate(p_sw_values)
        for seed in seeds
    ]
    result = GridResult(list(p_mt_values), list(p_sw_values))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(_grid_run, jobs))
    else:
        outputs = [_grid_run(job) for job in jobs]
    for k, a, b, seed, metrics in outputs:
        result.runs[(k, a, b, seed)] = metrics
    return result


def write_grid(result: GridResult, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = formats.fmt
    formats.write_records(out_dir / "grid.csv", ("p_mt", "p_sw", "metric", "value"),
                          ((fmt(a), fmt(b), metric, fmt(v)) for a, b, metric, v in result.records()))


# -- operator benchmark ------------------------------------------------------------------------

CURVES = {
    "linear": lambda n: n,
    "linearithmic": lambda n: n * np.log(n),
    "n^1.5": lambda n: n ** 1.5,
    "quadratic": lambda n: n ** 2,
}


def fit_curves(ns: Sequence[float], ts: Sequence[float]) -> Dict[str, float]:
    """Residual sum of squares of ``t = a + b * g(n)`` for each growth class."""
    ns = np.asarray(ns, dtype=float)
    ts = np.asarray(ts, dtype=float)
    out = {}
    for name, g in CURVES.items():
        A = np.column_stack([np.ones_like(ns), g(ns)])
        coef, *_ = np.linalg.lstsq(A, ts, rcond=None)
        out[name] = float(np.sum((A @ coef - ts) ** 2))
    return out


def best_curve(rss: Dict[str, float]) -> str:
    return min(rss, key=rss.get)


@dataclass
class BenchResult:
    timing: List[Tuple[str, int, int, float]]  # operator, n, m, mean seconds
    ratios: List[Tuple[int, int, int, float]]  # n, ratio class (n/m), m, mean new-gene ratio
    fits: Dict[str, Dict[str, float]]

    def curve_class(self, operator: str) -> str:
        return best_curve(self.fits[operator])

    def mean_time(self, operator: str, n: int) -> float:
        return next(t for op, nn, _, t in self.timing if op == operator and nn == n)


def _timed(fn, *args) -> Tuple[float, object]:
    start = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - start, out


def run_bench(
    sizes: Sequence[int] = tuple(range(50, 501, 50)),
    trials: int = 1000,
    seed: int = 0,
    ratio_classes: Sequence[int] = (8, 10, 12),
    timing_class: int = 10,
    surplus: float = 20.0,
    alpha: float = 2.0,
) -> BenchResult:
    """Crossover timings and GSP new-gene ratios over random parent pairs.

    One instance per (n, m) with ``m = n / ratio``; quota ranges are stretched
    where the base range cannot supply the requested surplus.
    """
    timing = []
    ratios = []
    for n in sizes:
        for ratio in ratio_classes:
            m = max(1, round(n / ratio))
            instance = generate_instance(
                n, m, surplus, seed=derive_seed(seed, n, ratio),
                quota_range=scaled_quota_range(n, m, surplus), alpha=alpha,
            )
            rng = random.Random(derive_seed(seed, n, ratio, 1))
            gsp_time = hk_time = 0.0
            gene_ratio = 0.0
            gc_was_enabled = gc.isenabled()
            gc.disable()
            try:
                for _ in range(trials):
                    p1 = random_feasible_matching(instance, rng)
                    p2 = random_feasible_matching(instance, rng)
                    dt, child = _timed(gsp_crossover, p1, p2, alpha, instance, rng)
                    gsp_time += dt
                    gene_ratio += new_gene_ratio(child, p1, p2)
                    if ratio == timing_class:
                        dt, _ = _timed(hopcroft_karp_crossover, p1, p2, alpha, instance, rng)
                        hk_time += dt
            finally:
                if gc_was_enabled:
                    gc.enable()
            ratios.append((n, ratio, m, gene_ratio / trials))
            if ratio == timing_class:
                timing.append(("gsp", n, m, gsp_time / trials))
                timing.append(("hopcroft-karp", n, m, hk_time / trials))
            log.info("bench n=%d m=%d done", n, m)
    fits = {}
    for op in ("gsp", "hopcroft-karp"):
        rows = [(n, t) for o, n, _, t in timing if o == op]
        if len(rows) >= 3:
            fits[op] = fit_curves([r[0] for r in rows], [r[1] for r in rows])
    return BenchResult(timing, ratios, fits)


def write_bench(result: BenchResult, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = formats.fmt
    classes = {op: best_curve(rss) for op, rss in result.fits.items()}
    formats.write_records(
        out_dir / "timing.csv", ("operator", "n", "m", "mean_time", "fitted_curve_class"),
        ((op, n, m, fmt(t), classes.get(op, "")) for op, n, m, t in result.timing),
    )
    formats.write_records(
        out_dir / "new_gene_ratio.csv", ("n", "m_ratio_class", "m", "mean_ratio"),
        ((n, f"n/{r}", m, fmt(v)) for n, r, m, v in result.ratios),
    )


# -- GA vs exhaustive oracle ----------------------------------------------------------------------


def run_compare(instance: ProblemInstance, config: GAConfig,
                budget: int = DEFAULT_ENUM_BUDGET) -> dict:
    """GA best per objective as a fraction of the exact optimum, and both S-metrics."""
    resolved = resolve_instance(instance, config)
    check_budget(resolved, budget)
    matrices = build_evaluation_matrices(resolved)
    result = evolve(resolved, replace(config, alpha=None, weights=None), matrices=matrices)
    ga_pts = [ind.objectives for ind in result.pareto]
    exact_front = exact_pareto_frontier(resolved, matrices, budget)
    best_s, _ = exact_best(resolved, "students", matrices, budget)
    best_r, _ = exact_best(resolved, "supervisors", matrices, budget)
    ga_s = max(p[0] for p in ga_pts)
    ga_r = max(p[1] for p in ga_pts)
    return {
        "optimality_students": ga_s / best_s,
        "optimality_supervisors": ga_r / best_r,
        "ga_best_students": ga_s,
        "ga_best_supervisors": ga_r,
        "exact_best_students": best_s,
        "exact_best_supervisors": best_r,
        "ga_s_metric": s_metric(ga_pts, config.ref),
        "exact_s_metric": s_metric([p for p, _ in exact_front], config.ref),
        "ga_frontier_size": len(set(ga_pts)),
        "exact_frontier_size": len(exact_front),
        "iterations": result.iterations,
    }


def dump_json(obj, path: Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
