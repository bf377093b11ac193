"""Check that a simulator configuration lets the reference tree beat every
baseline: higher mean return than all ten, significant against the constant
stages, fewer infections than S0, S1 and SWE. Repeats over several blocks of
common-random-number episodes so a lucky block cannot hide a weak margin.

    python3 scripts/check_dynamics.py --blocks 20
    python3 scripts/check_dynamics.py --set beta=0.35 --set detection_probability=0.8
"""

import argparse

import numpy as np
import yaml

from pandemic_ge.baselines import BASELINE_KINDS, CONSTANT_KINDS
from pandemic_ge.experiment import REFERENCE_NAME, ExperimentConfig, compare, make_policy


def check(config, episodes, seed):
    names = (REFERENCE_NAME,) + BASELINE_KINDS
    rep = compare({n: make_policy(n, config) for n in names}, config.sim, episodes, seed)
    fix = rep.mean(REFERENCE_NAME)
    inf = rep.cumulative_infected
    ok = (
        all(fix > rep.mean(n) for n in BASELINE_KINDS)
        and all(rep.pvalues[(REFERENCE_NAME, n)] < 0.05 for n in CONSTANT_KINDS)
        and all(inf[REFERENCE_NAME].mean() < inf[n].mean() for n in ("S0", "S1", "SWE"))
    )
    margin = fix - max(rep.mean(n) for n in BASELINE_KINDS)
    return ok, margin, rep


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--config")
    ap.add_argument("--set", action="append", default=[], help="sim override, e.g. beta=0.5")
    ap.add_argument("--episodes", type=int, default=30)
    ap.add_argument("--blocks", type=int, default=10)
    args = ap.parse_args()

    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    d = config.to_dict()
    for item in args.set:
        key, _, value = item.partition("=")
        d["sim"][key] = yaml.safe_load(value)
    config = ExperimentConfig.from_dict(d)

    passed, margins = 0, []
    for block in range(args.blocks):
        ok, margin, rep = check(config, args.episodes, block)
        passed += ok
        margins.append(margin)
        if block == 0:
            for n in rep.names:
                print(f"{n:9s} return {rep.mean(n):8.3f} +- {rep.std(n):.3f}  "
                      f"infected {rep.cumulative_infected[n].mean():7.1f}")
    print(f"dominance held in {passed}/{args.blocks} blocks; margin over best baseline "
          f"min {min(margins):.3f} mean {np.mean(margins):.3f}")


if __name__ == "__main__":
    main()
