import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pandemic_ge.evolution import (
    INVALID_FITNESS,
    EvaluationError,
    EvolutionConfig,
    evolve,
    tournament_select,
    uniform_mutation,
)
from pandemic_ge.sim import ConfigError


def fewer_conditions(ind, seed):
    return -float(ind.tree.n_conditions)


def small(**kw):
    base = dict(population_size=16, generations=10)
    base.update(kw)
    return EvolutionConfig(**base)


class TestConfig:
    def test_defaults(self):
        c = EvolutionConfig()
        assert (c.population_size, c.generations, c.tournament_size) == (45, 50, 2)
        assert (c.mutation_probability, c.mutation_rate, c.genotype_length, c.M, c.max_wraps) == (1.0, 0.1, 100, 4000, 4)

    @pytest.mark.parametrize("kw", [{"population_size": 0}, {"mutation_rate": 1.5}, {"M": 0}, {"generations": -1}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            EvolutionConfig(**kw)


class FixedDraws:
    def __init__(self, draws):
        self.draws = np.array(draws)

    def integers(self, n, size):
        return self.draws


class TestTournament:
    def test_better_of_two(self):
        assert tournament_select([-1, -2], FixedDraws([0, 1])) == 0
        assert tournament_select([-1, -2], FixedDraws([1, 0])) == 0

    def test_degenerate(self):
        assert tournament_select([-1, -2], FixedDraws([1, 1])) == 1

    def test_tie_goes_to_first_drawn(self):
        assert tournament_select([-1, -1], FixedDraws([1, 0])) == 1

    def test_win_rate(self):
        rng = np.random.default_rng(0)
        n = 10_000
        wins = sum(tournament_select([-1, -2], rng) == 0 for _ in range(n))
        assert abs(wins / n - 0.75) < 3 * math.sqrt(0.75 * 0.25 / n)


class TestMutation:
    def test_rate_zero(self):
        g = np.arange(100)
        np.testing.assert_array_equal(uniform_mutation(g, 0.0, np.random.default_rng(0)), g)

    def test_rate_one(self):
        rng = np.random.default_rng(1)
        g = np.full(100, 7)
        changed = []
        for _ in range(200):
            m = uniform_mutation(g, 1.0, rng)
            assert m.min() >= 0 and m.max() <= 4000
            changed.append(np.mean(m != g))
        assert np.mean(changed) == pytest.approx(1 - 1 / 4001, abs=0.002)

    def test_rate_tenth_binomial(self):
        rng = np.random.default_rng(2)
        g = rng.integers(0, 4001, 100)
        trials = 5000
        counts = [int((uniform_mutation(g, 0.1, rng) != g).sum()) for _ in range(trials)]
        p = 0.1 * 4000 / 4001
        assert abs(np.mean(counts) - 100 * p) < 3 * math.sqrt(100 * p * (1 - p) / trials)

    @given(st.lists(st.integers(0, 4000), min_size=1, max_size=200), st.floats(0, 1), st.integers(0, 2**32))
    def test_length_and_bounds(self, genes, rate, seed):
        g = np.array(genes)
        m = uniform_mutation(g, rate, np.random.default_rng(seed))
        assert m.shape == g.shape and m.min() >= 0 and m.max() <= 4000
        np.testing.assert_array_equal(g, np.array(genes))  # input untouched


class TestEvolve:
    def test_evaluation_count(self):
        calls = []

        def fit(ind, seed):
            calls.append(seed)
            return 0.0

        cfg = EvolutionConfig(population_size=45, generations=50)
        best, log = evolve(cfg, fit)
        assert log.records[-1]["evaluations"] == 45 + 45 * 50
        assert len(calls) <= 45 + 45 * 50

    def test_every_individual_evaluated_once(self):
        seen = []

        def fit(ind, seed):
            seen.append((ind.origin, seed))
            return 0.0

        _, log = evolve(small(), fit)
        assert len(seen) == len(set(seen))
        assert log.records[-1]["evaluations"] == 16 * 11

    def test_constant_fitness_never_replaces(self):
        best, log = evolve(small(), lambda ind, seed: 1.0)
        # a valid child still strictly beats an invalid parent, so each
        # replacement must turn an invalid slot into a valid one
        for prev, cur in zip(log.records, log.records[1:]):
            gained = round((cur["valid_fraction"] - prev["valid_fraction"]) * 16)
            assert cur["replacements"] == gained
        assert log.records[-1]["best_fitness"] == log.records[0]["best_fitness"] == 1.0
        assert best.origin[0] == 0

    def test_selection_pressure(self):
        for seed in range(5):
            best, log = evolve(small(master_seed=seed), fewer_conditions)
            assert best.tree.n_conditions == 1

    def test_invalid_individuals_get_sentinel(self):
        # genotype length 1 makes most individuals invalid
        _, log = evolve(small(genotype_length=1, generations=2), fewer_conditions)
        assert any(r["valid_fraction"] < 1 for r in log.records)
        assert INVALID_FITNESS < -1e5

    def test_reproducible(self):
        a = evolve(small(master_seed=3), fewer_conditions)[1].lines()
        b = evolve(small(master_seed=3), fewer_conditions)[1].lines()
        c = evolve(small(master_seed=4), fewer_conditions)[1].lines()
        assert a == b and a != c

    def test_errors_carry_context(self):
        def boom(ind, seed):
            if ind.origin[0] == 2:
                raise RuntimeError("nope")
            return 0.0

        with pytest.raises(EvaluationError, match="generation 2, slot"):
            evolve(small(), boom)

    def test_champion_record(self):
        best, log = evolve(small(), fewer_conditions)
        rec = log.champion
        assert rec["tree"] == best.tree.to_text()
        assert rec["genotype"] == [int(g) for g in best.genes]
        assert rec["train_fitness"] == best.fitness
        assert rec["eval_seed"] == best.seed


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.integers(2, 12), st.integers(0, 6))
def test_best_so_far_monotone_and_genes_bounded(seed, pop, gens):
    rng_fit = {}

    def noisy(ind, s):
        # arbitrary but deterministic fitness
        return rng_fit.setdefault(s, float(np.random.default_rng(s).normal()))

    best, log = evolve(EvolutionConfig(population_size=pop, generations=gens, master_seed=seed), noisy)
    bsf = log.best_so_far
    assert all(b >= a for a, b in zip(bsf, bsf[1:]))
    assert bsf[-1] == best.fitness
    assert max(r["best_fitness"] for r in log.records) == best.fitness
    for r in log.records:
        assert all(0 <= g <= 4000 for g in r["champion_genotype"])
