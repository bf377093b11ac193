"""Steady-state grammatical evolution without crossover.

Each generation, every population slot runs a size-2 tournament, mutates a
copy of the winner, decodes and evaluates it. Once all offspring of the
generation are evaluated, each one replaces the parent it came from if its
fitness is strictly better.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from .grammar import DEFAULT_GRAMMAR, Grammar, map_genotype
from .sim import ConfigError
from .seeding import derive_seed
from .tree import DecisionTree

INVALID_FITNESS = -1e6


@dataclass(frozen=True)
class EvolutionConfig:
    population_size: int = 45
    generations: int = 50
    tournament_size: int = 2
    mutation_probability: float = 1.0
    mutation_rate: float = 0.1
    genotype_length: int = 100
    M: int = 4000
    max_wraps: int = 4
    master_seed: int = 0

    def __post_init__(self):
        for name in ("population_size", "tournament_size", "genotype_length", "M"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.generations < 0 or self.max_wraps < 0 or self.master_seed < 0:
            raise ConfigError("generations, max_wraps and master_seed must be >= 0")
        for name in ("mutation_probability", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "EvolutionConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown evolution keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Individual:
    genes: np.ndarray
    tree: DecisionTree | None = None
    fitness: float | None = None
    seed: int | None = None  # evaluation seed, enough to replay the fitness
    origin: tuple[int, int] = (0, 0)  # (generation, slot) where it was created

    @property
    def valid(self) -> bool:
        return self.tree is not None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


FitnessFn = Callable[[Individual, int], float]


class EvaluationError(RuntimeError):
    pass


def random_genotype(length: int, M: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, M + 1, size=length)


def tournament_select(fitnesses: Sequence[float], rng: np.random.Generator, size: int = 2) -> int:
    """Index of the fittest of ``size`` uniform draws (with replacement); ties go to the earliest draw."""
    draws = rng.integers(len(fitnesses), size=size)
    best = int(draws[0])
    for i in draws[1:]:
        if fitnesses[int(i)] > fitnesses[best]:
            best = int(i)
    return best


def uniform_mutation(genes: np.ndarray, rate: float, rng: np.random.Generator, M: int = 4000) -> np.ndarray:
    """Copy of ``genes`` with each gene resampled uniformly in [0, M] with probability ``rate``."""
    mask = rng.random(genes.shape[0]) < rate
    out = genes.copy()
    out[mask] = rng.integers(0, M + 1, size=int(mask.sum()))
    return out


def _evaluate(fitness_fn: FitnessFn, ind: Individual) -> tuple[float, DecisionTree | None]:
    # returns the tree too, because worker processes train a copy of it
    if ind.tree is None:
        return INVALID_FITNESS, None
    return float(fitness_fn(ind, ind.seed)), ind.tree


def _tree_text(ind: Individual) -> str | None:
    return None if ind.tree is None else ind.tree.to_text()


@dataclass
class EvolutionLog:
    records: list[dict] = field(default_factory=list)
    champion: dict | None = None

    def lines(self) -> list[str]:
        out = [json.dumps(r, sort_keys=True) for r in self.records]
        if self.champion is not None:
            out.append(json.dumps(self.champion, sort_keys=True))
        return out

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")

    @property
    def best_so_far(self) -> list[float]:
        return [r["best_so_far"] for r in self.records]


def champion_record(ind: Individual, config: EvolutionConfig) -> dict:
    return {
        "kind": "champion",
        "master_seed": config.master_seed,
        "generation": ind.origin[0],
        "slot": ind.origin[1],
        "eval_seed": ind.seed,
        "genotype": [int(g) for g in ind.genes],
        "tree": _tree_text(ind),
        "tree_record": None if ind.tree is None else ind.tree.to_record(),
        "train_fitness": ind.fitness,
    }


class Evolution:
    """Generation loop; ``workers > 1`` evaluates each generation in a process pool."""

    def __init__(
        self,
        config: EvolutionConfig,
        fitness_fn: FitnessFn,
        grammar: Grammar = DEFAULT_GRAMMAR,
        workers: int = 1,
    ):
        self.config = config
        self.fitness_fn = fitness_fn
        self.grammar = grammar
        self.workers = workers
        self.n_evaluations = 0

    def _make(self, genes: np.ndarray, generation: int, slot: int) -> Individual:
        cfg = self.config
        tree = map_genotype(genes, self.grammar, cfg.max_wraps)
        seed = derive_seed(cfg.master_seed, generation, slot, 1)
        return Individual(genes, tree, None, seed, (generation, slot))

    def _evaluate_all(self, inds: list[Individual], pool) -> None:
        if pool is None:
            results = []
            for ind in inds:
                try:
                    results.append(_evaluate(self.fitness_fn, ind))
                except Exception as exc:
                    raise EvaluationError(f"fitness failed at generation {ind.origin[0]}, slot {ind.origin[1]}") from exc
        else:
            results = list(pool.map(_evaluate, [self.fitness_fn] * len(inds), inds))
        for ind, (fit, tree) in zip(inds, results):
            ind.fitness = fit
            ind.tree = tree
        self.n_evaluations += len(inds)

    def _record(self, generation: int, population: list[Individual], best: Individual, replaced: int) -> dict:
        fits = [ind.fitness for ind in population]
        gen_best = population[int(np.argmax(fits))]
        return {
            "kind": "generation",
            "generation": generation,
            "best_fitness": gen_best.fitness,
            "mean_fitness": float(np.mean(fits)),
            "valid_fraction": sum(ind.valid for ind in population) / len(population),
            "replacements": replaced,
            "evaluations": self.n_evaluations,
            "best_so_far": best.fitness,
            "champion_genotype": [int(g) for g in gen_best.genes],
            "champion_tree": _tree_text(gen_best),
        }

    def run(self) -> tuple[Individual, EvolutionLog]:
        cfg = self.config
        log = EvolutionLog()
        pool = ProcessPoolExecutor(self.workers) if self.workers > 1 else None
        try:
            init_rng = np.random.default_rng(derive_seed(cfg.master_seed, 0))
            population = [
                self._make(random_genotype(cfg.genotype_length, cfg.M, init_rng), 0, slot)
                for slot in range(cfg.population_size)
            ]
            self._evaluate_all(population, pool)
            best = population[int(np.argmax([ind.fitness for ind in population]))]
            log.records.append(self._record(0, population, best, 0))

            for gen in range(1, cfg.generations + 1):
                fits = [ind.fitness for ind in population]
                parents, offspring = [], []
                for slot in range(cfg.population_size):
                    rng = np.random.default_rng(derive_seed(cfg.master_seed, gen, slot, 0))
                    parent = tournament_select(fits, rng, cfg.tournament_size)
                    genes = population[parent].genes
                    if rng.random() < cfg.mutation_probability:
                        genes = uniform_mutation(genes, cfg.mutation_rate, rng, cfg.M)
                    parents.append(parent)
                    offspring.append(self._make(genes, gen, slot))
                self._evaluate_all(offspring, pool)
                replaced = 0
                for parent, child in zip(parents, offspring):
                    # compare against the slot's current occupant, which an
                    # earlier offspring of this generation may already have replaced
                    if child.fitness > population[parent].fitness:
                        population[parent] = child
                        replaced += 1
                    if child.fitness > best.fitness:
                        best = child
                log.records.append(self._record(gen, population, best, replaced))
        finally:
            if pool is not None:
                pool.shutdown()
        log.champion = champion_record(best, cfg)
        return best, log


def evolve(
    config: EvolutionConfig,
    fitness_fn: FitnessFn,
    grammar: Grammar = DEFAULT_GRAMMAR,
    workers: int = 1,
) -> tuple[Individual, EvolutionLog]:
    """Run GE and return the all-time best individual and the generation log."""
    return Evolution(config, fitness_fn, grammar, workers).run()
