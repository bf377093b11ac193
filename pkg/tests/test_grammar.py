import numpy as np
import pytest
from hypothesis import given

from pandemic_ge.grammar import DEFAULT_GRAMMAR, DT_BNF, Grammar, derive, map_genotype, phenotype_text
from pandemic_ge.sim import FEATURES
from pandemic_ge.tree import Condition, from_text
from strategies import genotypes


def reference_derive(genes, grammar=DEFAULT_GRAMMAR, max_wraps=4):
    """Textbook GE: rescan the sentential form for its leftmost non-terminal each step."""
    form = ["<" + grammar.start + ">"]
    used, budget = 0, len(genes) * (max_wraps + 1)
    while True:
        nts = [i for i, s in enumerate(form) if s.startswith("<")]
        if not nts:
            return form
        if used >= budget:
            return None
        i = nts[0]
        prods = grammar.rules[form[i][1:-1]]
        form[i : i + 1] = prods[int(genes[used % len(genes)]) % len(prods)]
        used += 1


def test_table_structure():
    g = DEFAULT_GRAMMAR
    assert g.start == "dt"
    assert g.rules["dt"] == [["<if>"]]
    assert g.rules["if"] == [["if", "<condition>", "then", "<action>", "else", "<action>"]]
    assert g.rules["action"] == [["leaf"], ["<if>"]]
    assert g.rules["comp_op"] == [["lt"], ["gt"]]
    assert [p[0] for p in g.rules["condition"]] == list(FEATURES)
    assert g.n_choices("const_frac") == 10 and g.n_choices("const_bool") == 2


def test_all_zeros():
    assert phenotype_text(np.zeros(100, dtype=int)) == "if i_g lt 0.0 then leaf else leaf"


def test_worked_gene_order():
    genes = [0, 0, 9, 1, 9, 0, 0] + [0] * 93
    assert phenotype_text(genes) == "if n_d gt 0.9 then leaf else leaf"
    assert map_genotype(genes).to_text() == "if n_d gt 0.9 then leaf#0 else leaf#1"


def test_wrap_budget_exhaustion():
    # every <action> picks <if>, so the tree never closes
    assert derive([1]) is None
    assert map_genotype([1], max_wraps=4) is None
    assert map_genotype([3] * 100) is None


def test_wrapping_rereads_genes():
    # 7 codons read cyclically from 3 genes: dt, if, condition=c_g | lt, 0.0, leaf | leaf
    assert phenotype_text([0, 0, 2]) == "if c_g lt 0.0 then leaf else leaf"
    assert phenotype_text([0, 0, 2], max_wraps=1) is None


def test_empty_genotype_invalid():
    assert derive([]) is None


def test_grammar_validation():
    with pytest.raises(ValueError, match="undefined"):
        Grammar.from_bnf("<a> ::= <b> | x")
    with pytest.raises(ValueError):
        Grammar.from_bnf("")
    assert Grammar.from_bnf(DT_BNF).rules == DEFAULT_GRAMMAR.rules


@given(genotypes)
def test_matches_textbook_mapping(genes):
    assert derive(genes) == reference_derive(genes)


@given(genotypes)
def test_decoding_pure_and_reparses(genes):
    a, b = map_genotype(genes), map_genotype(genes.copy())
    assert (a is None) == (b is None)
    if a is not None:
        assert a.to_text() == b.to_text()
        assert from_text(a.to_text()) == a
        assert a.n_conditions >= 1
        for c in a.conditions():
            assert isinstance(c, Condition)  # threshold-set closure is enforced by Condition itself
        np.testing.assert_array_equal(a.q_table(), np.zeros((len(a.leaves), 5)))
