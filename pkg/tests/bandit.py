"""Stationary multi-armed bandit played by a single-leaf tree."""

import numpy as np

from pandemic_ge.qlearning import QConfig, init_q, q_update, select_action
from pandemic_ge.tree import from_text

ARM_MEANS = (-0.4, -0.3, -0.2, -0.1, 0.0)
# each pull is a one-step episode, so there is nothing to bootstrap from
BANDIT_Q = QConfig(alpha=0.05, epsilon=0.1, gamma=0.0)


def train_bandit(seed, steps=10_000, qcfg=BANDIT_Q, means=ARM_MEANS, noise=0.1):
    rng = np.random.default_rng(seed)
    tree = from_text("leaf#0")
    init_q(tree, qcfg, rng)
    leaf = tree.leaves[0]
    for _ in range(steps):
        a = select_action(leaf, qcfg.epsilon, rng)
        q_update(leaf, a, rng.normal(means[a], noise), None, qcfg)
    return tree
