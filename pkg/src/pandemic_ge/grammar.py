"""BNF grammar for decision trees and the GE genotype-to-phenotype mapping."""

from __future__ import annotations

import re
from typing import Sequence

from .sim import FEATURES
from .tree import DecisionTree, constant_set, parse_tokens

# The condition rule has one production per input variable, so the gene that
# expands <condition> picks the variable, and each production carries the
# constant set bound to that variable.
_CONDITIONS = " | ".join(
    f"{var} <comp_op> <{'const_bool' if len(constant_set(i)) == 2 else 'const_frac'}>"
    for i, var in enumerate(FEATURES)
)

DT_BNF = f"""
<dt> ::= <if>
<if> ::= if <condition> then <action> else <action>
<condition> ::= {_CONDITIONS}
<action> ::= leaf | <if>
<comp_op> ::= lt | gt
<const_frac> ::= {" | ".join(f"{c:.1f}" for c in constant_set(0))}
<const_bool> ::= {" | ".join(f"{c:.1f}" for c in constant_set(FEATURES.index("h")))}
"""

_NT = re.compile(r"<([\w]+)>")


class Grammar:
    """Ordered production rules; non-terminals are written ``<name>``."""

    def __init__(self, rules: dict[str, list[list[str]]], start: str):
        self.rules = rules
        self.start = start
        self._compiled = None
        for name, prods in rules.items():
            if not prods:
                raise ValueError(f"rule {name!r} has no productions")
            for prod in prods:
                for sym in prod:
                    m = _NT.fullmatch(sym)
                    if m and m.group(1) not in rules:
                        raise ValueError(f"rule {name!r} references undefined <{m.group(1)}>")

    @classmethod
    def from_bnf(cls, text: str) -> "Grammar":
        rules: dict[str, list[list[str]]] = {}
        start = None
        for line in text.strip().splitlines():
            line = line.strip()
            if not line:
                continue
            lhs, _, rhs = line.partition("::=")
            m = _NT.fullmatch(lhs.strip())
            if not m or not rhs:
                raise ValueError(f"malformed rule line: {line!r}")
            name = m.group(1)
            start = start or name
            rules[name] = [alt.split() for alt in rhs.split("|")]
        if start is None:
            raise ValueError("empty grammar")
        return cls(rules, start)

    def compiled(self) -> dict[str, tuple[list[list[str]], int]]:
        """Per ``<rule>``: productions reversed for stack pushing, and their count.

        Symbols keep their written form, so a symbol is a non-terminal exactly
        when it is a key of this table.
        """
        if self._compiled is None:
            self._compiled = {f"<{name}>": ([p[::-1] for p in prods], len(prods)) for name, prods in self.rules.items()}
        return self._compiled

    def n_choices(self, rule: str) -> int:
        return len(self.rules[rule])


DEFAULT_GRAMMAR = Grammar.from_bnf(DT_BNF)


def derive(genes: Sequence[int], grammar: Grammar = DEFAULT_GRAMMAR, max_wraps: int = 4) -> list[str] | None:
    """Leftmost derivation driven by ``genes``; None when the wrap budget runs out.

    Each gene, read left to right, replaces the leftmost non-terminal with
    production ``gene mod k`` (k = number of productions of that rule). Genes
    are re-read from the start up to ``max_wraps`` times.
    """
    genes = genes.tolist() if hasattr(genes, "tolist") else list(genes)
    if not genes:
        return None
    # reading past the end of the wrapped copy means the wrap budget ran out
    codons = genes * (max_wraps + 1)
    used = 0
    out: list[str] = []
    table = grammar.compiled()
    # expanding symbols depth-first from a stack is exactly leftmost derivation
    stack = [f"<{grammar.start}>"]
    pop, push, emit = stack.pop, stack.extend, out.append
    try:
        while stack:
            sym = pop()
            rule = table.get(sym)
            if rule is None:
                emit(sym)
                continue
            prods, k = rule
            push(prods[codons[used] % k])
            used += 1
    except IndexError:
        return None
    return out


def phenotype_text(genes: Sequence[int], grammar: Grammar = DEFAULT_GRAMMAR, max_wraps: int = 4) -> str | None:
    tokens = derive(genes, grammar, max_wraps)
    return None if tokens is None else " ".join(tokens)


def map_genotype(genes: Sequence[int], grammar: Grammar = DEFAULT_GRAMMAR, max_wraps: int = 4) -> DecisionTree | None:
    """Decode a genotype into a tree with empty (zero) leaves, or None if invalid."""
    tokens = derive(genes, grammar, max_wraps)
    return None if tokens is None else tree_from_tokens(tokens)


def tree_from_tokens(tokens: list[str]) -> DecisionTree:
    """Tree from a derived token list; parse errors report token indices."""
    return parse_tokens([(tok, i) for i, tok in enumerate(tokens)])
