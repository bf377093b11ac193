"""Full protocol: independent GE runs, per-run summary table, then the best
champion (by test mean) compared against every baseline.

    python3 scripts/run_protocol.py --config configs/default.yaml --out results
"""

import argparse
import json
from pathlib import Path

from pandemic_ge.experiment import ExperimentConfig, compare, make_policy, run_experiment
from pandemic_ge.tree import DecisionTree, TreePolicy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config")
    ap.add_argument("--out", default="results")
    ap.add_argument("--runs", type=int)
    args = ap.parse_args()

    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.runs:
        d = config.to_dict()
        d["experiment"]["num_runs"] = args.runs
        config = ExperimentConfig.from_dict(d)
    out = Path(args.out)
    results = run_experiment(config, out_dir=out)
    for r in results:
        row = r.row()
        print(f"run {row['seed']}: train {row['train_mean_return']:.3f} test {row['test_mean_return']:.3f} "
              f"+- {row['test_std_return']:.3f} M {row['M']:.2f}")

    best = max(results, key=lambda r: r.row()["test_mean_return"])
    champion = json.loads((out / f"run_{best.run:02d}" / "champion.json").read_text())
    policies = {"DT": TreePolicy(DecisionTree.from_record(champion["tree_record"]), "DT")}
    policies.update({n: make_policy(n, config) for n in config.policies})
    report = compare(policies, config.sim, config.compare_episodes, config.master_seed, workers=config.workers)
    report.write(out / "compare")
    for n in report.names:
        print(f"{n:9s} {report.mean(n):9.3f} +- {report.std(n):.3f}  p vs DT {report.pvalues[('DT', n)]:.2g}")


if __name__ == "__main__":
    main()
