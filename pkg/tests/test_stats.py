import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import mannwhitneyu, wilcoxon

from pandemic_ge.stats import (
    dp_pvalue,
    exact_pvalue,
    normal_pvalue,
    rank_sum,
    rank_sum_null_counts,
    signed_rank,
    wilcoxon_rank_sum,
)


def brute_force(xs, ys):
    """Two-sided p over every relabelling of the pooled values, ranks recomputed by sorting."""
    pooled = list(xs) + list(ys)
    n1, n = len(xs), len(pooled)

    def rank_sum_of(idx):
        order = sorted(pooled)
        ranks = [np.mean([k + 1 for k, v in enumerate(order) if v == pooled[i]]) for i in idx]
        return sum(ranks)

    mu = n1 * (n + 1) / 2
    obs = abs(rank_sum_of(range(n1)) - mu)
    splits = list(itertools.combinations(range(n), n1))
    return sum(abs(rank_sum_of(s) - mu) >= obs - 1e-9 for s in splits) / len(splits)


samples = st.lists(st.integers(-3, 3).map(float), min_size=1, max_size=6)


def test_separated_samples():
    p = wilcoxon_rank_sum(range(1, 11), range(11, 21))
    assert p == pytest.approx(2 / comb(20, 10), rel=1e-9)
    assert p < 1e-4


def test_three_vs_three_enumeration():
    # rank sums over all 20 splits; |W - 10.5| >= 1.5 for 14 of them
    assert rank_sum([1, 3, 5], [2, 4, 6]).pvalue == pytest.approx(14 / 20)


@pytest.mark.parametrize("x", [[1, 2, 3, 4, 5], [0.5] * 6, [3, 1, 4, 1, 5, 9, 2]])
def test_identical_samples(x):
    for method in ("auto", "normal", "exact"):
        assert rank_sum(x, x, method).pvalue >= 0.99


@given(samples, samples)
def test_exact_matches_brute_force(xs, ys):
    assert exact_pvalue(xs, ys) == pytest.approx(brute_force(xs, ys), abs=1e-12)


@given(
    st.lists(st.floats(-100, 100), min_size=5, max_size=15),
    st.lists(st.floats(-100, 100), min_size=5, max_size=15),
)
def test_normal_matches_scipy(xs, ys):
    expected = mannwhitneyu(xs, ys, alternative="two-sided", use_continuity=True, method="asymptotic").pvalue
    if np.isnan(expected):
        expected = 1.0
    assert normal_pvalue(xs, ys) == pytest.approx(expected, abs=1e-9)


@given(st.integers(1, 12), st.integers(1, 12), st.randoms(use_true_random=False))
def test_dp_matches_scipy_exact(n1, n2, r):
    values = r.sample(range(1000), n1 + n2)
    xs, ys = values[:n1], values[n1:]
    expected = mannwhitneyu(xs, ys, alternative="two-sided", method="exact").pvalue
    assert dp_pvalue(xs, ys) == pytest.approx(expected, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("n1, n2", [(1, 1), (3, 4), (6, 6), (10, 10)])
def test_null_counts_total(n1, n2):
    counts = rank_sum_null_counts(n1, n2)
    assert counts.sum() == pytest.approx(comb(n1 + n2, n1))
    nz = np.nonzero(counts)[0]
    assert nz[0] == n1 * (n1 + 1) // 2 and nz[-1] == n1 * (2 * (n1 + n2) - n1 + 1) // 2
    np.testing.assert_allclose(counts[nz], counts[nz][::-1])  # symmetric


def test_method_selection():
    rng = np.random.default_rng(0)
    assert rank_sum([1, 2, 3], [4, 5, 6]).method == "exact"
    assert rank_sum(rng.normal(size=20), rng.normal(size=20)).method == "exact-dp"
    assert rank_sum([1.0] * 10 + [2.0] * 10, [2.0] * 10).method == "normal"


def test_small_samples():
    with pytest.raises(ValueError, match="exact"):
        normal_pvalue([1, 2, 3], [4, 5, 6, 7, 8])
    with pytest.raises(ValueError):
        rank_sum([], [1, 2])
    with pytest.raises(ValueError):
        rank_sum([1, 2], [3], method="bogus")
    with pytest.raises(ValueError):
        dp_pvalue([1, 1, 2], [3, 4])


def test_all_tied_is_one():
    assert normal_pvalue([2.0] * 5, [2.0] * 7) == 1.0


@given(
    st.lists(st.floats(-10, 10), min_size=6, max_size=30).flatmap(
        lambda xs: st.tuples(st.just(xs), st.lists(st.floats(-10, 10), min_size=len(xs), max_size=len(xs)))
    )
)
def test_signed_rank_matches_scipy(pair):
    xs, ys = pair
    p = signed_rank(xs, ys)
    assert 0.0 <= p <= 1.0
    if any(a != b for a, b in zip(xs, ys)):
        assert p == pytest.approx(wilcoxon(xs, ys).pvalue)


def test_signed_rank_identical():
    assert signed_rank([1, 2, 3, 4, 5, 6], [1, 2, 3, 4, 5, 6]) == 1.0
    with pytest.raises(ValueError):
        signed_rank([1, 2], [1])
