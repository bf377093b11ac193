"""Command-line entry point: evolve, eval, compare, inspect."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .experiment import (
    REFERENCE_NAME,
    ExperimentConfig,
    FitnessEvaluator,
    compare,
    evaluate_tree,
    load_tree,
    make_policy,
    run_experiment,
)
from .interpretability import metric
from .seeding import TEST_STREAM, derive_seed, episode_seeds
from .tree import reference_tree, with_stages


def _config(path: str | None) -> ExperimentConfig:
    return ExperimentConfig.load(path) if path else ExperimentConfig()


def _with(config: ExperimentConfig, **changes) -> ExperimentConfig:
    d = config.to_dict()
    d["experiment"].update({k: v for k, v in changes.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def cmd_evolve(args) -> int:
    config = _with(_config(args.config), master_seed=args.seed, num_runs=args.runs, output_dir=args.out)
    runs = range(args.run, args.run + 1) if args.run is not None else None
    results = run_experiment(config, runs)
    for r in results:
        row = r.row()
        print(
            f"run {row['seed']}: train {row['train_mean_return']:.3f}  "
            f"test {row['test_mean_return']:.3f} +- {row['test_std_return']:.3f}  "
            f"M {row['M']:.2f}  {row['tree']}"
        )
    print(f"results written to {config.output_dir}")
    return 0


def _tree_for_eval(source: str, args, config: ExperimentConfig):
    if source == REFERENCE_NAME:
        return reference_tree()
    tree = load_tree(source)
    if args.stages:
        return with_stages(tree, [int(s) for s in args.stages.split(",")])
    if not Path(source).is_file() or not source.endswith(".json"):
        # text trees carry no Q-values, so train them first
        FitnessEvaluator(config.sim, config.q).train(tree, derive_seed(config.master_seed, 99))
    return tree


def cmd_eval(args) -> int:
    config = _with(_config(args.config), master_seed=args.seed)
    tree = _tree_for_eval(args.tree, args, config)
    seeds = episode_seeds(config.master_seed, args.episodes, TEST_STREAM)
    returns = evaluate_tree(tree, config.sim, seeds)
    print(tree.to_text())
    print(f"greedy stages per leaf: {tree.greedy_stages()}")
    print(f"test return over {len(seeds)} episodes: {np.mean(returns):.4f} +- {np.std(returns):.4f}")
    return 0


def cmd_compare(args) -> int:
    config = _with(_config(args.config), master_seed=args.seed)
    names = [n.strip() for n in (args.policies or ",".join(config.policies)).split(",") if n.strip()]
    episodes = args.episodes or config.compare_episodes
    policies = {n: make_policy(n, config) for n in names}
    report = compare(policies, config.sim, episodes, config.master_seed, args.test, config.workers)
    out = Path(args.out or config.output_dir) / "compare"
    report.write(out)
    width = max(len(n) for n in names)
    first = names[0]
    for n in names:
        p = report.pvalues[(first, n)]
        print(
            f"{n:<{width}}  return {report.mean(n):9.4f} +- {report.std(n):.4f}  "
            f"infected {np.mean(report.cumulative_infected[n]):7.1f}  p vs {first} {p:.3g}"
        )
    print(f"{report.test} p-values and panels written to {out}")
    return 0


def cmd_inspect(args) -> int:
    tree = reference_tree() if args.tree == REFERENCE_NAME else load_tree(args.tree)
    report = metric(tree)
    print(tree.to_text())
    for leaf in tree.leaves:
        q = ", ".join(f"{v:.4f}" for v in leaf.q_values)
        print(f"leaf#{leaf.id}: stage {int(np.argmax(leaf.q_values))}  q=[{q}]")
    print(json.dumps({"conditions": tree.n_conditions, "depth": tree.depth, **report.to_dict()}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pandemic-ge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evolve", help="evolve decision trees and test the champions")
    e.add_argument("--config", help="YAML experiment config")
    e.add_argument("--seed", type=int, help="master seed (overrides the config)")
    e.add_argument("--runs", type=int, help="number of independent runs")
    e.add_argument("--run", type=int, help="only this run index")
    e.add_argument("--out", help="output directory")
    e.set_defaults(func=cmd_evolve)

    v = sub.add_parser("eval", help="greedy test episodes of one tree")
    v.add_argument("--tree", required=True, help=f"champion JSON, text file, inline tree text, or {REFERENCE_NAME}")
    v.add_argument("--episodes", type=int, default=10)
    v.add_argument("--stages", help="comma-separated fixed stage per leaf instead of training")
    v.add_argument("--config")
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", help="compare policies on common random numbers")
    c.add_argument("--policies", help=f"comma-separated names: {REFERENCE_NAME}, baselines, or tree files")
    c.add_argument("--episodes", type=int)
    c.add_argument("--test", choices=("rank-sum", "signed-rank"), default="rank-sum")
    c.add_argument("--config")
    c.add_argument("--seed", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    i = sub.add_parser("inspect", help="print a tree, its leaf stages and interpretability")
    i.add_argument("--tree", required=True)
    i.set_defaults(func=cmd_inspect)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
