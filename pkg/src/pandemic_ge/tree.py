"""Decision-tree policies: representation, traversal, text and record forms.

Canonical text form::

    if n_d gt 0.9 then if i_g gt 0.0 then leaf#0 else leaf#1 else leaf#2

Leaves are numbered in left-to-right (pre-order) position. The parser also
accepts bare ``leaf`` tokens, as emitted by the grammar mapping, and numbers
them the same way.
"""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

import numpy as np

from .sim import FEATURES, N_STAGES, Observation

COMPARATORS = ("lt", "gt")
BOOLEAN_FEATURES = ("l", "h")


_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(10))
_CONSTANTS = tuple((0.0, 0.5) if var in BOOLEAN_FEATURES else _FRACTIONS for var in FEATURES)


def constant_set(var_index: int) -> tuple[float, ...]:
    """Thresholds the grammar can emit for a variable."""
    return _CONSTANTS[var_index]


class TreeParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at character {position})")
        self.position = position


@dataclass(frozen=True)
class Condition:
    var_index: int
    comparator: str
    threshold: float

    def __post_init__(self):
        if not 0 <= self.var_index < len(FEATURES):
            raise ValueError(f"var_index {self.var_index} out of range")
        if self.comparator not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.threshold not in constant_set(self.var_index):
            raise ValueError(f"threshold {self.threshold} not in the constant set of {self.variable}")

    @property
    def variable(self) -> str:
        return FEATURES[self.var_index]

    def holds(self, obs) -> bool:
        x = obs[self.var_index]
        return x < self.threshold if self.comparator == "lt" else x > self.threshold

    def __str__(self):
        return f"{self.variable} {self.comparator} {self.threshold:.1f}"


@dataclass
class Leaf:
    id: int
    q_values: np.ndarray = field(default_factory=lambda: np.zeros(N_STAGES), compare=False, repr=False)


@dataclass(frozen=True)
class Node:
    condition: Condition
    if_true: "Tree"
    if_false: "Tree"


Tree = Union[Node, Leaf]


def act_greedy(leaf: Leaf) -> int:
    """Stage with the highest Q-value; ties go to the lowest stage."""
    return int(np.argmax(leaf.q_values))


class DecisionTree:
    def __init__(self, root: Tree):
        self.root = root
        self.leaves: list[Leaf] = sorted(_iter_leaves(root), key=lambda leaf: leaf.id)
        ids = [leaf.id for leaf in self.leaves]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate leaf ids {ids}")

    def traverse(self, obs: Observation) -> Leaf:
        node = self.root
        while isinstance(node, Node):
            node = node.if_true if node.condition.holds(obs) else node.if_false
        return node

    def act(self, obs: Observation) -> int:
        return act_greedy(self.traverse(obs))

    @property
    def n_conditions(self) -> int:
        return sum(1 for _ in _iter_nodes(self.root))

    @property
    def depth(self) -> int:
        def rec(t):
            return 0 if isinstance(t, Leaf) else 1 + max(rec(t.if_true), rec(t.if_false))

        return rec(self.root)

    def conditions(self) -> list[Condition]:
        return [n.condition for n in _iter_nodes(self.root)]

    def greedy_stages(self) -> list[int]:
        return [act_greedy(leaf) for leaf in self.leaves]

    def q_table(self) -> np.ndarray:
        return np.array([leaf.q_values for leaf in self.leaves])

    def set_q_table(self, q: np.ndarray) -> None:
        q = np.asarray(q, dtype=float)
        if q.shape != (len(self.leaves), N_STAGES):
            raise ValueError(f"q table must have shape {(len(self.leaves), N_STAGES)}, got {q.shape}")
        for leaf, row in zip(self.leaves, q):
            leaf.q_values = row.copy()

    def copy(self) -> "DecisionTree":
        return DecisionTree(copy.deepcopy(self.root))

    def to_text(self) -> str:
        return to_text(self)

    def __eq__(self, other):
        return isinstance(other, DecisionTree) and self.root == other.root

    def __repr__(self):
        return f"DecisionTree({self.to_text()!r})"

    def to_record(self) -> dict:
        def rec(t):
            if isinstance(t, Leaf):
                return {"leaf": t.id, "q": [float(v) for v in t.q_values]}
            c = t.condition
            return {
                "var": c.variable,
                "op": c.comparator,
                "const": c.threshold,
                "then": rec(t.if_true),
                "else": rec(t.if_false),
            }

        return rec(self.root)

    @classmethod
    def from_record(cls, record: dict) -> "DecisionTree":
        def rec(r):
            if "leaf" in r:
                q = np.asarray(r.get("q", np.zeros(N_STAGES)), dtype=float)
                if q.shape != (N_STAGES,):
                    raise ValueError(f"leaf {r['leaf']} needs {N_STAGES} q-values")
                return Leaf(int(r["leaf"]), q)
            cond = Condition(FEATURES.index(r["var"]), r["op"], float(r["const"]))
            return Node(cond, rec(r["then"]), rec(r["else"]))

        return cls(rec(record))

    @classmethod
    def from_text(cls, text: str) -> "DecisionTree":
        return from_text(text)


def _iter_nodes(t: Tree) -> Iterator[Node]:
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Node):
            yield t
            stack.append(t.if_false)
            stack.append(t.if_true)


def _iter_leaves(t: Tree) -> Iterator[Leaf]:
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Leaf):
            yield t
        else:
            stack.append(t.if_false)
            stack.append(t.if_true)


def to_text(tree: DecisionTree) -> str:
    out: list[str] = []

    def rec(t):
        if isinstance(t, Leaf):
            out.append(f"leaf#{t.id}")
            return
        out.append(f"if {t.condition} then")
        rec(t.if_true)
        out.append("else")
        rec(t.if_false)

    rec(tree.root)
    return " ".join(out)


_TOKEN = re.compile(r"\S+")
_LEAF = re.compile(r"leaf(?:#(\d+))?$")


def parse_tokens(tokens: list[tuple[str, int]]) -> DecisionTree:
    """Build a tree from ``(token, char_position)`` pairs."""
    pos = 0
    next_leaf = 0
    numbered: set[bool] = set()

    def take(what: str, literal: bool = False) -> tuple[str, int]:
        nonlocal pos
        if pos >= len(tokens):
            end = tokens[-1][1] + len(tokens[-1][0]) if tokens else 0
            raise TreeParseError(f"unexpected end of input, expected {what}", end)
        tok = tokens[pos]
        if literal and tok[0] != what:
            raise TreeParseError(f"expected {what!r}, found {tok[0]!r}", tok[1])
        pos += 1
        return tok

    def subtree() -> Tree:
        nonlocal next_leaf
        word, at = take("'if' or a leaf")
        m = _LEAF.match(word)
        if m:
            numbered.add(m.group(1) is not None)
            if len(numbered) > 1:
                raise TreeParseError("mix of numbered and bare leaves", at)
            if m.group(1) is None:
                leaf_id = next_leaf
                next_leaf += 1
            else:
                leaf_id = int(m.group(1))
            return Leaf(leaf_id)
        if word != "if":
            raise TreeParseError(f"expected 'if' or a leaf, found {word!r}", at)
        var, var_at = take("a variable")
        if var not in FEATURES:
            raise TreeParseError(f"unknown variable {var!r}", var_at)
        op, op_at = take("a comparator")
        if op not in COMPARATORS:
            raise TreeParseError(f"unknown comparator {op!r}", op_at)
        const, const_at = take("a constant")
        try:
            value = float(const)
        except ValueError:
            raise TreeParseError(f"malformed constant {const!r}", const_at) from None
        var_index = FEATURES.index(var)
        allowed = constant_set(var_index)
        matches = [c for c in allowed if abs(c - value) < 1e-9]
        if not matches:
            raise TreeParseError(f"constant {const} not allowed for {var}; choices {allowed}", const_at)
        take("then", literal=True)
        yes = subtree()
        take("else", literal=True)
        no = subtree()
        return Node(Condition(var_index, op, matches[0]), yes, no)

    root = subtree()
    if pos != len(tokens):
        raise TreeParseError(f"trailing input {tokens[pos][0]!r}", tokens[pos][1])
    try:
        return DecisionTree(root)
    except ValueError as exc:
        raise TreeParseError(str(exc), 0) from None


def from_text(text: str) -> DecisionTree:
    tokens = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
    if not tokens:
        raise TreeParseError("empty tree text", 0)
    return parse_tokens(tokens)


def one_hot(stage: int) -> np.ndarray:
    q = np.zeros(N_STAGES)
    q[stage] = 1.0
    return q


def with_stages(tree: DecisionTree, stages) -> DecisionTree:
    """Copy of ``tree`` whose leaves greedily pick ``stages`` (by leaf id)."""
    out = tree.copy()
    if len(stages) != len(out.leaves):
        raise ValueError(f"need {len(out.leaves)} stages, got {len(stages)}")
    out.set_q_table(np.array([one_hot(int(s)) for s in stages]))
    return out


REFERENCE_TREE_TEXT = "if n_d gt 0.9 then if i_g gt 0.0 then leaf#0 else leaf#1 else leaf#2"
REFERENCE_STAGES = (3, 0, 2)


def reference_tree() -> DecisionTree:
    """Hand-checkable reference policy: early strong response, relaxed once cases spread.

    Most people never infected -> stage 3 if any case is known, else stage 0;
    otherwise stage 2.
    """
    return with_stages(from_text(REFERENCE_TREE_TEXT), REFERENCE_STAGES)


class TreePolicy:
    """Greedy (test-time) execution of a tree; no learning."""

    def __init__(self, tree: DecisionTree, name: str = "tree"):
        self.tree = tree
        self.name = name

    def reset(self) -> None:
        pass

    def act(self, day: int, obs: Observation) -> int:
        return self.tree.act(obs)
