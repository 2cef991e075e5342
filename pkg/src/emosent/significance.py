"""Paired two-tailed t-test for comparing models across seeded runs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats


@dataclass(frozen=True)
class SignificanceResult:
    metric: str
    n_pairs: int
    t_statistic: float
    p_value: float
    pairs: tuple[tuple[float, float], ...]
    degenerate_variance: bool = False


def significance_test(
    pairs: Sequence[tuple[float, float]], metric: str = "score"
) -> SignificanceResult:
    """Paired t-test over (run_a, run_b) scores matched by seed.

    Differences are taken b - a. With zero variance in the differences the
    t statistic is undefined: identical pairs give t=0, p=1, while a
    constant nonzero difference is reported as p=0 with the degenerate
    flag set, since no finite t describes it.
    """
    pairs = tuple((float(a), float(b)) for a, b in pairs)
    if len(pairs) < 2:
        raise ValueError(f"need at least 2 paired scores, got {len(pairs)}")
    n = len(pairs)
    diffs = [b - a for a, b in pairs]
    mean = sum(diffs) / n
    var = sum((d - mean) ** 2 for d in diffs) / (n - 1)
    if var == 0.0:
        if mean == 0.0:
            return SignificanceResult(metric, n, 0.0, 1.0, pairs, True)
        return SignificanceResult(metric, n, math.copysign(math.inf, mean), 0.0, pairs, True)
    t = mean / math.sqrt(var / n)
    p = 2.0 * float(stats.t.sf(abs(t), df=n - 1))
    return SignificanceResult(metric, n, t, p, pairs)
