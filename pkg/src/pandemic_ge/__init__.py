"""Grammatical evolution of decision-tree policies with Q-learned leaves for pandemic control."""

from .baselines import BASELINE_KINDS, BaselineConfig, BaselinePolicy, make_baseline
from .evolution import INVALID_FITNESS, EvolutionConfig, EvolutionLog, Individual, evolve
from .experiment import ExperimentConfig, FitnessEvaluator, compare, run_test_episode
from .grammar import DEFAULT_GRAMMAR, map_genotype
from .interpretability import InterpretabilityReport, metric
from .qlearning import QConfig
from .sim import Epidemic, Observation, SimConfig, SimState, observe, reset, reward_of, step
from .stats import rank_sum, signed_rank, wilcoxon_rank_sum
from .tree import DecisionTree, from_text, reference_tree

__all__ = [
    "BASELINE_KINDS",
    "BaselineConfig",
    "BaselinePolicy",
    "DEFAULT_GRAMMAR",
    "DecisionTree",
    "Epidemic",
    "EvolutionConfig",
    "EvolutionLog",
    "ExperimentConfig",
    "FitnessEvaluator",
    "INVALID_FITNESS",
    "Individual",
    "InterpretabilityReport",
    "Observation",
    "QConfig",
    "SimConfig",
    "SimState",
    "compare",
    "evolve",
    "from_text",
    "make_baseline",
    "map_genotype",
    "metric",
    "observe",
    "rank_sum",
    "reference_tree",
    "reset",
    "reward_of",
    "run_test_episode",
    "signed_rank",
    "step",
    "wilcoxon_rank_sum",
]
