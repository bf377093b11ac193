"""Epsilon-greedy tabular Q-learning where each tree leaf is a state."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .sim import N_STAGES, ConfigError, Epidemic
from .tree import DecisionTree, Leaf, act_greedy


@dataclass(frozen=True)
class QConfig:
    alpha: float = 0.001
    epsilon: float = 0.05
    gamma: float = 0.99
    q_init_low: float = -1.0
    q_init_high: float = 1.0
    train_episodes: int = 10

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError("gamma must lie in [0, 1]")
        if self.q_init_low > self.q_init_high:
            raise ConfigError("q_init_low must be <= q_init_high")
        if self.train_episodes < 1:
            raise ConfigError("train_episodes must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "QConfig":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown q keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def init_q(tree: DecisionTree, qcfg: QConfig, rng: np.random.Generator) -> None:
    """Fill every leaf with Q-values drawn uniformly from the init range."""
    q = rng.uniform(qcfg.q_init_low, qcfg.q_init_high, size=(len(tree.leaves), N_STAGES))
    tree.set_q_table(q)


def select_action(leaf: Leaf, epsilon: float, rng: np.random.Generator) -> int:
    """Uniform random stage with probability epsilon, otherwise the greedy one."""
    if epsilon > 0.0 and rng.random() < epsilon:
        return int(rng.integers(N_STAGES))
    return act_greedy(leaf)


def q_update(prev_leaf: Leaf, action: int, reward: float, next_leaf: Leaf | None, qcfg: QConfig) -> None:
    """One Q-learning backup on ``prev_leaf[action]``; ``next_leaf=None`` marks a terminal step."""
    bootstrap = 0.0 if next_leaf is None else qcfg.gamma * float(np.max(next_leaf.q_values))
    q = prev_leaf.q_values
    q[action] += qcfg.alpha * (reward + bootstrap - q[action])


def run_training_episode(tree: DecisionTree, env: Epidemic, qcfg: QConfig, rng: np.random.Generator) -> float:
    """Play one episode from the env's current (freshly reset) state, learning as it goes.

    Every simulated day gives exactly one backup. Returns the undiscounted return.
    """
    if env.observation is None:
        raise RuntimeError("env must be reset before training")
    leaf = tree.traverse(env.observation)
    total = 0.0
    done = env.done
    while not done:
        action = select_action(leaf, qcfg.epsilon, rng)
        out = env.step(action)
        total += out.reward
        done = out.done
        next_leaf = None if done else tree.traverse(out.observation)
        q_update(leaf, action, out.reward, next_leaf, qcfg)
        leaf = next_leaf
    return total
