"""Two-sided Wilcoxon tests for comparing policy returns.

``rank_sum`` is the unpaired Wilcoxon rank-sum (Mann-Whitney) test. Small
samples use exact permutation enumeration, larger tie-free samples use the
exact null distribution by dynamic programming, and everything else falls
back to the normal approximation with tie-corrected variance and continuity
correction. ``signed_rank`` is the paired variant for common-random-number
designs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata, wilcoxon

ENUMERATION_LIMIT = 12  # auto mode enumerates up to this many pooled values
ENUMERATION_MAX = 20  # hard cap for explicit enumeration
DP_LIMIT = 120
MIN_NORMAL_SIZE = 5
_EPS = 1e-9


@dataclass(frozen=True)
class RankSumResult:
    statistic: float  # rank sum of the first sample
    pvalue: float
    method: str


def _validate(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("samples must be finite")
    return x, y


def normal_pvalue(xs, ys) -> float:
    """Normal approximation with midranks, tie-corrected variance and 0.5 continuity correction."""
    x, y = _validate(xs, ys)
    n1, n2 = x.size, y.size
    if min(n1, n2) < MIN_NORMAL_SIZE:
        raise ValueError(
            f"normal approximation needs at least {MIN_NORMAL_SIZE} values per sample; "
            "use the exact method for smaller samples"
        )
    return _normal_from_ranks(rankdata(np.concatenate([x, y])), n1)


def _normal_from_ranks(ranks: np.ndarray, n1: int) -> float:
    n = ranks.size
    n2 = n - n1
    w = ranks[:n1].sum()
    mu = n1 * (n + 1) / 2.0
    _, counts = np.unique(ranks, return_counts=True)
    ties = float((counts**3 - counts).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - ties / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = max(abs(w - mu) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def exact_pvalue(xs, ys) -> float:
    """Two-sided p by enumerating every split of the pooled midranks."""
    x, y = _validate(xs, ys)
    n1, n = x.size, x.size + y.size
    if n > ENUMERATION_MAX:
        raise ValueError(f"enumeration over C({n},{n1}) splits is too large")
    ranks = rankdata(np.concatenate([x, y]))
    mu = n1 * (n + 1) / 2.0
    observed = abs(ranks[:n1].sum() - mu)
    splits = np.array(list(itertools.combinations(range(n), n1)))
    sums = ranks[splits].sum(axis=1)
    return float(np.mean(np.abs(sums - mu) >= observed - _EPS))


def rank_sum_null_counts(n1: int, n2: int) -> np.ndarray:
    """Counts of size-n1 subsets of {1..n1+n2} by rank sum (index = sum)."""
    n = n1 + n2
    top = n1 * (2 * n - n1 + 1) // 2
    # dp[k, s] = number of k-subsets of the ranks seen so far with sum s
    dp = np.zeros((n1 + 1, top + 1))
    dp[0, 0] = 1.0
    for r in range(1, n + 1):
        dp[1:, r:] += dp[:-1, : top + 1 - r].copy()
    return dp[n1]


def dp_pvalue(xs, ys) -> float:
    """Exact two-sided p for tie-free samples via the rank-sum null distribution."""
    x, y = _validate(xs, ys)
    pooled = np.concatenate([x, y])
    if np.unique(pooled).size != pooled.size:
        raise ValueError("the dynamic-programming exact test requires tie-free samples")
    n1, n2 = x.size, y.size
    ranks = rankdata(pooled)
    mu = n1 * (n1 + n2 + 1) / 2.0
    observed = abs(ranks[:n1].sum() - mu)
    counts = rank_sum_null_counts(n1, n2)
    sums = np.arange(counts.size)
    extreme = np.abs(sums - mu) >= observed - _EPS
    return float(min(1.0, counts[extreme].sum() / counts.sum()))


def rank_sum(xs, ys, method: str = "auto") -> RankSumResult:
    """Two-sided Wilcoxon rank-sum test; ``method`` is auto, exact or normal."""
    x, y = _validate(xs, ys)
    n = x.size + y.size
    tie_free = np.unique(np.concatenate([x, y])).size == n
    if method == "auto":
        if n <= ENUMERATION_LIMIT:
            method = "exact"
        elif tie_free and n <= DP_LIMIT:
            method = "exact-dp"
        else:
            method = "normal"
    elif method == "exact":
        if tie_free and n > ENUMERATION_LIMIT:
            method = "exact-dp"
        elif n > ENUMERATION_MAX:
            raise ValueError(f"exact test with ties is only available for up to {ENUMERATION_MAX} values")
    elif method != "normal":
        raise ValueError(f"unknown method {method!r}")
    p = {"exact": exact_pvalue, "exact-dp": dp_pvalue, "normal": normal_pvalue}[method](x, y)
    stat = float(rankdata(np.concatenate([x, y]))[: x.size].sum())
    return RankSumResult(stat, float(p), method)


def wilcoxon_rank_sum(xs, ys, method: str = "auto") -> float:
    return rank_sum(xs, ys, method).pvalue


def signed_rank(xs, ys) -> float:
    """Paired two-sided Wilcoxon signed-rank p; 1.0 when every pair is equal."""
    x, y = _validate(xs, ys)
    if x.size != y.size:
        raise ValueError("paired test needs samples of equal length")
    if np.all(x == y):
        return 1.0
    return float(wilcoxon(x, y, zero_method="wilcox", alternative="two-sided").pvalue)
