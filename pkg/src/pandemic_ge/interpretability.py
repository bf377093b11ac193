"""Structural interpretability score of a decision tree (lower is simpler)."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .tree import DecisionTree

WEIGHTS = (0.2, 0.5, 3.4, 4.5)

# Per condition: symbols {if, variable, comparator, constant, else}; operations
# {branch, comparison}, both non-arithmetic and nested two deep. With the weights
# above every condition costs 17.8.
PER_CONDITION = (5, 2, 2, 2)


@dataclass(frozen=True)
class InterpretabilityReport:
    ell: int
    n_o: int
    n_nao: int
    n_naoc: int

    @property
    def M(self) -> float:
        return round(sum(w * c for w, c in zip(WEIGHTS, (self.ell, self.n_o, self.n_nao, self.n_naoc))), 10)

    def to_dict(self) -> dict:
        return {**asdict(self), "M": self.M}


def metric_for_conditions(c: int) -> InterpretabilityReport:
    if c < 0:
        raise ValueError("condition count must be >= 0")
    if c == 0:
        # a bare leaf is a single symbol with no operations
        return InterpretabilityReport(1, 0, 0, 0)
    return InterpretabilityReport(*(k * c for k in PER_CONDITION))


def metric(tree: DecisionTree) -> InterpretabilityReport:
    return metric_for_conditions(tree.n_conditions)
