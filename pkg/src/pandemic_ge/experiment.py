"""Experiment orchestration: fitness wiring, test episodes, policy comparison, reports."""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import yaml

from .baselines import BASELINE_KINDS, BaselineConfig, make_baseline
from .evolution import EvolutionConfig, EvolutionLog, Individual, evolve
from .interpretability import metric
from .qlearning import QConfig, init_q, run_training_episode
from .seeding import COMPARE_STREAM, EVOLUTION_STREAM, TEST_STREAM, agent_rng, derive_seed, episode_seeds
from .sim import ConfigError, Epidemic, SimConfig
from .stats import rank_sum, signed_rank
from .tree import DecisionTree, TreePolicy, from_text, reference_tree

PANELS = ("cumulative_reward", "critical", "dead", "infected", "never_infected", "recovered")
REFERENCE_NAME = "FIX"


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    q: QConfig = field(default_factory=QConfig)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    num_runs: int = 10
    test_episodes: int = 10
    compare_episodes: int = 30
    policies: tuple[str, ...] = (REFERENCE_NAME,) + BASELINE_KINDS
    output_dir: str = "results"
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.num_runs < 1:
            raise ConfigError("num_runs must be >= 1")
        if self.test_episodes < 1 or self.compare_episodes < 1:
            raise ConfigError("episode counts must be >= 1")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d or {})
        known = {"sim", "evolution", "q", "baselines", "experiment"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
        exp = dict(d.get("experiment") or {})
        exp_keys = {"num_runs", "test_episodes", "compare_episodes", "policies", "output_dir", "master_seed", "workers"}
        if set(exp) - exp_keys:
            raise ConfigError(f"unknown experiment keys: {sorted(set(exp) - exp_keys)}")
        if "policies" in exp:
            exp["policies"] = tuple(exp["policies"])
        return cls(
            sim=SimConfig.from_dict(d.get("sim") or {}),
            evolution=EvolutionConfig.from_dict(d.get("evolution") or {}),
            q=QConfig.from_dict(d.get("q") or {}),
            baselines=BaselineConfig.from_dict(d.get("baselines") or {}),
            **exp,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def to_dict(self) -> dict:
        return {
            "sim": self.sim.to_dict(),
            "evolution": self.evolution.to_dict(),
            "q": self.q.to_dict(),
            "baselines": self.baselines.to_dict(),
            "experiment": {
                "num_runs": self.num_runs,
                "test_episodes": self.test_episodes,
                "compare_episodes": self.compare_episodes,
                "policies": list(self.policies),
                "output_dir": self.output_dir,
                "master_seed": self.master_seed,
                "workers": self.workers,
            },
        }


class FitnessEvaluator:
    """Fitness of a decoded tree: mean return over Q-learning training episodes.

    Leaves start from uniform random Q-values and keep learning across the
    sequential episodes; the trained Q-values stay on the individual's tree.
    """

    def __init__(self, sim: SimConfig = SimConfig(), q: QConfig = QConfig()):
        self.sim = sim
        self.q = q

    def train(self, tree: DecisionTree, seed: int) -> list[float]:
        init_q(tree, self.q, np.random.default_rng(derive_seed(seed, 0)))
        env = Epidemic(self.sim)
        returns = []
        for episode_seed in episode_seeds(seed, self.q.train_episodes, 1):
            env.reset(episode_seed)
            returns.append(run_training_episode(tree, env, self.q, agent_rng(episode_seed)))
        return returns

    def __call__(self, ind: Individual, seed: int) -> float:
        return float(np.mean(self.train(ind.tree, seed)))


@dataclass
class EpisodeResult:
    ret: float
    series: dict[str, np.ndarray]  # per-day true-state series, day 1..T
    stages: np.ndarray

    @property
    def cumulative_infected(self) -> int:
        return int(self.series["cumulative_infected"][-1])


def run_test_episode(policy, sim_config: SimConfig, seed: int) -> EpisodeResult:
    """One greedy episode (no learning) recording the true state each day."""
    env = Epidemic(sim_config)
    obs = env.reset(seed)
    policy.reset()
    keys = PANELS + ("cumulative_infected",)
    series = {k: [] for k in keys}
    stages = []
    total = 0.0
    day = 0
    while not env.done:
        stage = policy.act(day, obs)
        out = env.step(stage)
        total += out.reward
        s = out.state
        obs = out.observation
        day += 1
        stages.append(stage)
        series["cumulative_reward"].append(total)
        series["critical"].append(s.critical)
        series["dead"].append(s.dead)
        series["infected"].append(s.infected)
        series["never_infected"].append(s.never_infected)
        series["recovered"].append(s.recovered)
        series["cumulative_infected"].append(s.cumulative_infected)
    return EpisodeResult(total, {k: np.asarray(v) for k, v in series.items()}, np.asarray(stages))


def make_policy(name: str, config: ExperimentConfig | None = None):
    """Policy by name: a baseline kind, the reference tree, or a tree file / text."""
    config = config or ExperimentConfig()
    if name in BASELINE_KINDS:
        return make_baseline(name, config.sim.population_size, config.baselines)
    if name == REFERENCE_NAME:
        return TreePolicy(reference_tree(), REFERENCE_NAME)
    return TreePolicy(load_tree(name), name)


def load_tree(source: str) -> DecisionTree:
    """Tree from a champion/record JSON file, a text file, or inline canonical text."""
    if os.path.isfile(source):
        text = Path(source).read_text()
        if source.endswith(".json"):
            data = json.loads(text)
            return DecisionTree.from_record(data.get("tree_record", data))
        return from_text(text.strip())
    return from_text(source)


def _policy_returns(args) -> list[EpisodeResult]:
    policy, sim_config, seeds = args
    return [run_test_episode(policy, sim_config, s) for s in seeds]


@dataclass
class ComparisonReport:
    names: list[str]
    returns: dict[str, np.ndarray]
    panels: dict[str, dict[str, np.ndarray]]  # panel -> policy -> per-day mean
    cumulative_infected: dict[str, np.ndarray]
    pvalues: dict[tuple[str, str], float]
    test: str
    seeds: list[int]

    def mean(self, name: str) -> float:
        return float(np.mean(self.returns[name]))

    def std(self, name: str) -> float:
        return float(np.std(self.returns[name]))

    def significant(self, a: str, b: str, alpha: float = 0.05) -> bool:
        return self.pvalues[(a, b)] < alpha

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        days = len(next(iter(self.panels["critical"].values())))
        for panel, by_policy in self.panels.items():
            with open(out / f"panel_{panel}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["day"] + self.names)
                for d in range(days):
                    w.writerow([d + 1] + [repr(float(by_policy[n][d])) for n in self.names])
        with open(out / "episode_returns.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["episode", "seed"] + self.names)
            for e, seed in enumerate(self.seeds):
                w.writerow([e, seed] + [repr(float(self.returns[n][e])) for n in self.names])
        with open(out / "significance.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.test] + self.names)
            for a in self.names:
                w.writerow([a] + [repr(self.pvalues[(a, b)]) for b in self.names])
        with open(out / "summary.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["policy", "mean_return", "std_return", "mean_cumulative_infected"])
            for n in self.names:
                w.writerow([n, repr(self.mean(n)), repr(self.std(n)), repr(float(np.mean(self.cumulative_infected[n])))])


def compare(
    policies: dict[str, object],
    sim_config: SimConfig,
    episodes: int,
    master_seed: int = 0,
    test: str = "rank-sum",
    workers: int = 1,
) -> ComparisonReport:
    """Evaluate every policy on the same episode seeds and test all pairs."""
    if len(policies) < 2:
        raise ValueError("compare needs at least two policies")
    if test not in ("rank-sum", "signed-rank"):
        raise ValueError(f"unknown test {test!r}")
    seeds = episode_seeds(master_seed, episodes, COMPARE_STREAM)
    names = list(policies)
    jobs = [(policies[n], sim_config, seeds) for n in names]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_policy_returns, jobs))
    else:
        results = [_policy_returns(j) for j in jobs]
    by_name = dict(zip(names, results))
    returns = {n: np.array([r.ret for r in rs]) for n, rs in by_name.items()}
    panels = {p: {n: np.mean([r.series[p] for r in rs], axis=0) for n, rs in by_name.items()} for p in PANELS}
    infected = {n: np.array([r.cumulative_infected for r in rs]) for n, rs in by_name.items()}
    pvalues = {}
    for a in names:
        for b in names:
            if test == "rank-sum":
                pvalues[(a, b)] = rank_sum(returns[a], returns[b]).pvalue
            else:
                pvalues[(a, b)] = signed_rank(returns[a], returns[b])
    return ComparisonReport(names, returns, panels, infected, pvalues, test, seeds)


def evaluate_tree(tree: DecisionTree, sim_config: SimConfig, seeds: Sequence[int]) -> np.ndarray:
    """Greedy returns of a trained tree on the given seeds."""
    policy = TreePolicy(tree)
    return np.array([run_test_episode(policy, sim_config, s).ret for s in seeds])


@dataclass
class RunResult:
    run: int
    champion: Individual
    log: EvolutionLog
    test_returns: np.ndarray

    def row(self) -> dict:
        return {
            "seed": self.run,
            "train_mean_return": self.champion.fitness,
            "test_mean_return": float(np.mean(self.test_returns)),
            "test_std_return": float(np.std(self.test_returns)),
            "M": metric(self.champion.tree).M,
            "conditions": self.champion.tree.n_conditions,
            "tree": self.champion.tree.to_text(),
        }


def run_evolution(config: ExperimentConfig, run: int, on_generation: Callable | None = None) -> RunResult:
    """One independent GE run followed by greedy testing of its champion."""
    evo = EvolutionConfig.from_dict(
        {**config.evolution.to_dict(), "master_seed": derive_seed(config.master_seed, EVOLUTION_STREAM, run)}
    )
    champion, log = evolve(evo, FitnessEvaluator(config.sim, config.q), workers=config.workers)
    if champion.tree is None:
        raise RuntimeError("no valid individual was found")
    seeds = episode_seeds(config.master_seed, config.test_episodes, TEST_STREAM)
    returns = evaluate_tree(champion.tree, config.sim, seeds)
    log.champion.update(
        run=run,
        test_seeds=seeds,
        test_returns=[float(r) for r in returns],
        interpretability=metric(champion.tree).to_dict(),
        greedy_stages=champion.tree.greedy_stages(),
    )
    return RunResult(run, champion, log, returns)


TABLE_COLUMNS = ("seed", "train_mean_return", "test_mean_return", "test_std_return", "M", "conditions", "tree")


def write_run(result: RunResult, out_dir) -> None:
    out = Path(out_dir) / f"run_{result.run:02d}"
    out.mkdir(parents=True, exist_ok=True)
    result.log.write_jsonl(out / "evolution_log.jsonl")
    with open(out / "champion.json", "w") as fh:
        json.dump(result.log.champion, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_table(results: Sequence[RunResult], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=TABLE_COLUMNS)
        w.writeheader()
        for r in results:
            row = r.row()
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def run_experiment(config: ExperimentConfig, runs: Sequence[int] | None = None, out_dir=None) -> list[RunResult]:
    out_dir = Path(out_dir or config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "config.yaml", "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=True)
    results = []
    for run in runs if runs is not None else range(config.num_runs):
        result = run_evolution(config, run)
        write_run(result, out_dir)
        results.append(result)
    write_table(results, out_dir / "runs.csv")
    return results
