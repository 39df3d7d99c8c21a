"""Command-line harness: generate, solve, grid, bench, compare, oracle.

Exit status: 0 on success, 1 on invalid input, 2 when the exhaustive
search would exceed its enumeration budget.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from . import experiments, formats
from .engine import GAConfig, resolve_instance
from .objectives import s_metric
from .oracle import DEFAULT_ENUM_BUDGET, BudgetExceededError, check_budget, enumeration_size, exact_pareto_frontier

log = logging.getLogger("supalloc")

EXIT_OK, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2


def _config(args: argparse.Namespace) -> GAConfig:
    config = formats.load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    return config


def cmd_generate(args: argparse.Namespace) -> int:
    pool = None
    if args.pool:
        pool = experiments.read_pool(*(Path(p) for p in args.pool))
    quota_range = tuple(args.quota_range)
    if args.scale_quotas:
        quota_range = experiments.scaled_quota_range(args.n, args.m, args.surplus, quota_range)
    instance = experiments.generate_instance(
        args.n, args.m, args.surplus, seed=args.seed or 0, pool=pool,
        quota_range=quota_range, alpha=args.alpha,
    )
    path = formats.save_instance(instance, Path(args.out_dir) / "instance.json")
    log.info("wrote %s (n=%d, m=%d, capacity=%d)", path, instance.n, instance.m, sum(instance.c_max))
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    instance = formats.load_instance(args.instance)
    config = _config(args)
    summary = experiments.run_solve(instance, config, Path(args.out_dir))
    log.info("S-metric %.6f after %d iterations, %d frontier points",
             summary["s_metric"], summary["iterations"], summary["frontier_size"])
    return EXIT_OK


def cmd_grid(args: argparse.Namespace) -> int:
    instances = [formats.load_instance(p) for p in args.instance]
    config = _config(args)
    seeds = [config.seed + r for r in range(args.repeats)]
    result = experiments.run_grid(
        instances, experiments.frange(*args.p_mt), experiments.frange(*args.p_sw),
        seeds, config, threads=args.threads,
    )
    experiments.write_grid(result, Path(args.out_dir))
    formats.save_config(config, Path(args.out_dir) / "config.json")
    log.info("grid of %d x %d cells written", len(result.p_mt), len(result.p_sw))
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = args.sizes or list(range(50, 501, 50))
    result = experiments.run_bench(sizes, args.trials, seed=args.seed or 0, surplus=args.surplus)
    experiments.write_bench(result, Path(args.out_dir))
    for op in result.fits:
        log.info("%s best fit: %s", op, result.curve_class(op))
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    instance = formats.load_instance(args.instance)
    config = _config(args)
    log.info("estimated enumeration size %d", enumeration_size(instance))
    report = experiments.run_compare(instance, config, args.enum_budget)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    experiments.dump_json(report, out / "compare.json")
    log.info("optimality: students %.2f%%, supervisors %.2f%%",
             100 * report["optimality_students"], 100 * report["optimality_supervisors"])
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    config = _config(args)
    instance = resolve_instance(formats.load_instance(args.instance), config)
    log.info("estimated enumeration size %d (budget %d)", enumeration_size(instance), args.enum_budget)
    check_budget(instance, args.enum_budget)
    front = exact_pareto_frontier(instance, budget=args.enum_budget)
    sm = s_metric([p for p, _ in front], config.ref)
    formats.write_frontier(Path(args.out_dir), front, instance, sm, config.ref, exact=True)
    log.info("exact frontier: %d points, S-metric %.6f", len(front), sm)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supalloc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, instance: bool = True, config: bool = True) -> None:
        if instance:
            p.add_argument("--instance", required=True, help="instance JSON file")
        if config:
            p.add_argument("--config", help="GA config JSON file (defaults if omitted)")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out-dir", default=".", help="output directory")

    p = sub.add_parser("generate", help="write a random instance")
    common(p, instance=False, config=False)
    p.add_argument("--n", type=int, required=True, help="students")
    p.add_argument("--m", type=int, required=True, help="supervisors")
    p.add_argument("--surplus", type=float, default=20.0, help="capacity surplus in percent")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--quota-range", type=int, nargs=2, default=list(experiments.QUOTA_RANGE),
                   metavar=("LO", "HI"))
    p.add_argument("--scale-quotas", action="store_true",
                   help="stretch the quota range when it cannot reach the surplus")
    p.add_argument("--pool", nargs=3, metavar=("TAXONOMY", "STUDENTS", "SUPERVISORS"),
                   help="preference pool files (synthetic pool if omitted)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run the GA on one instance")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("grid", help="p_mt x p_sw grid search")
    common(p, instance=False)
    p.add_argument("--instance", nargs="+", required=True, help="instance JSON files")
    p.add_argument("--p-mt", type=float, nargs=3, default=[0.05, 0.5, 0.05], metavar=("START", "STOP", "STEP"))
    p.add_argument("--p-sw", type=float, nargs=3, default=[0.1, 0.9, 0.1], metavar=("START", "STOP", "STEP"))
    p.add_argument("--repeats", type=int, default=1, help="seeds per cell, counted up from --seed")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="crossover timing and new-gene ratios")
    common(p, instance=False, config=False)
    p.add_argument("--sizes", type=int, nargs="+")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--surplus", type=float, default=20.0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("compare", help="GA against the exhaustive optimum")
    common(p)
    p.add_argument("--enum-budget", type=int, default=DEFAULT_ENUM_BUDGET)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exact Pareto frontier by enumeration")
    common(p)
    p.add_argument("--enum-budget", type=int, default=DEFAULT_ENUM_BUDGET)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (FileNotFoundError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
