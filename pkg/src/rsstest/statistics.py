"""Test statistics for perfect ranking, in exact integer arithmetic.

Eleven statistics are supported, identified by their tag:

  N_sum, A_sum, S_sum  -- per-cycle discrepancies summed over cycles
  N_max, A_max, S_max  -- per-cycle discrepancies maximised over cycles
  PN, PA, PS           -- the same discrepancies summed over every one of
                          the n^k cross-cycle recombinations of the sample
  J                    -- count of cross-cycle order violations
  Wstar                -- overall-rank weighted sum (small values are the
                          suspicious ones; every other tag rejects high)

Per cycle, with R_i the rank of the slot-i value inside its cycle:
N counts slot pairs i < j whose values are out of order, A = sum |R_i - i|,
S = sum (R_i - i)^2.  All statistics are integers on tie-free data, and
all are invariant under strictly increasing transforms of the values.

Two identities tie the recombination statistics to cheaper ones and are
exercised exactly (integer equality) by the test suite:

  PN = n^(k-2) * J
  PS = ps_offset(k, n) - 2 * n^(k-2) * Wstar

PA has no such affine shortcut; `fast_pa` computes it by convolving, for
each cell, the Bernoulli indicators of the other slots lying below it
(the cell's rank in a random recombination is 1 plus that sum).
"""

from __future__ import annotations

import itertools
from enum import Enum

from .errors import EnumerationBudgetError
from .sample import RankInfo, RssSample, column_proportions, compute_ranks


class StatisticKind(str, Enum):
    """Closed enumeration of statistic tags; the value is the wire name."""

    N_SUM = "N_sum"
    A_SUM = "A_sum"
    S_SUM = "S_sum"
    N_MAX = "N_max"
    A_MAX = "A_max"
    S_MAX = "S_max"
    PN = "PN"
    PA = "PA"
    PS = "PS"
    J = "J"
    WSTAR = "Wstar"

    @classmethod
    def from_tag(cls, tag: str) -> "StatisticKind":
        try:
            return cls(tag)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown statistic tag {tag!r}; expected one of {valid}") from None


SUM_KINDS = (StatisticKind.N_SUM, StatisticKind.A_SUM, StatisticKind.S_SUM)
MAX_KINDS = (StatisticKind.N_MAX, StatisticKind.A_MAX, StatisticKind.S_MAX)
PERM_KINDS = (StatisticKind.PN, StatisticKind.PA, StatisticKind.PS)

ALL_KINDS = tuple(StatisticKind)

DEFAULT_ENUMERATION_BUDGET = 10_000_000


def is_lower_tail(kind: StatisticKind) -> bool:
    """True for the one statistic whose small values indicate bad ranking."""
    return kind is StatisticKind.WSTAR


def tuple_discrepancies(values: tuple[float, ...]) -> tuple[int, int, int]:
    """(N, A, S) for one sample whose slot order should match value order."""
    k = len(values)
    ranks = [1 + sum(1 for w in values if w < v) for v in values]
    n_stat = sum(
        1 for i in range(k - 1) for j in range(i + 1, k) if values[i] > values[j]
    )
    a_stat = sum(abs(r - (i + 1)) for i, r in enumerate(ranks))
    s_stat = sum((r - (i + 1)) ** 2 for i, r in enumerate(ranks))
    return n_stat, a_stat, s_stat


def per_cycle_stats(ranks: RankInfo, l: int) -> tuple[int, int, int]:
    """(N, A, S) for cycle l (1-based)."""
    if not 1 <= l <= ranks.n:
        raise ValueError(f"cycle index {l} out of range 1..{ranks.n}")
    col = [ranks.within_cycle[i][l - 1] for i in range(ranks.k)]
    k = ranks.k
    n_stat = sum(1 for i in range(k - 1) for j in range(i + 1, k) if col[i] > col[j])
    a_stat = sum(abs(r - (i + 1)) for i, r in enumerate(col))
    s_stat = sum((r - (i + 1)) ** 2 for i, r in enumerate(col))
    return n_stat, a_stat, s_stat


def aggregate(ranks: RankInfo, kind: StatisticKind) -> int:
    """Sum or maximum of a per-cycle discrepancy across all cycles."""
    if kind not in SUM_KINDS and kind not in MAX_KINDS:
        raise ValueError(f"{kind.value} is not a per-cycle sum or max tag")
    per_cycle = [per_cycle_stats(ranks, l) for l in range(1, ranks.n + 1)]
    idx = {"N": 0, "A": 1, "S": 2}[kind.value[0]]
    series = [t[idx] for t in per_cycle]
    return sum(series) if kind in SUM_KINDS else max(series)


def brute_force_perm_all(
    sample: RssSample, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> tuple[int, int, int]:
    """(PN, PA, PS) by full enumeration of all n^k recombinations.

    This is the defining computation and the oracle for the fast paths;
    it refuses grids whose n^k exceeds `budget`.
    """
    k, n = sample.k, sample.n
    total = n**k
    if total > budget:
        raise EnumerationBudgetError(
            f"enumerating {total} recombined samples exceeds the budget of {budget}; "
            "use fast_pa for PA or the J / Wstar equivalents for PN / PS"
        )
    rows = sample.values
    pn = pa = ps = 0
    for combo in itertools.product(range(n), repeat=k):
        values = tuple(rows[i][combo[i]] for i in range(k))
        dn, da, ds = tuple_discrepancies(values)
        pn += dn
        pa += da
        ps += ds
    return pn, pa, ps


def brute_force_perm_stat(
    sample: RssSample,
    kind: StatisticKind,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> int:
    """One of PN, PA, PS by full enumeration (see brute_force_perm_all)."""
    if kind not in PERM_KINDS:
        raise ValueError(f"{kind.value} is not a recombination statistic")
    pn, pa, ps = brute_force_perm_all(sample, budget)
    return {StatisticKind.PN: pn, StatisticKind.PA: pa, StatisticKind.PS: ps}[kind]


def fast_pa(sample: RssSample) -> int:
    """PA without enumeration, via Bernoulli convolutions per cell.

    For cell (j, l), its rank in a uniformly chosen recombination that
    contains it is 1 + sum of independent Bernoulli(below[i]/n) over the
    other slots i.  Summing n^(k-1) * E|rank - j| over cells gives PA.
    The convolution is carried in integer numerators over the common
    denominator n^(k-1), so the result is exact.
    """
    k, n = sample.k, sample.n
    props = column_proportions(sample)
    total = 0
    for j in range(k):
        for l in range(n):
            # pmf numerators of the Bernoulli-sum over denominator n^(k-1)
            pmf = [1] + [0] * (k - 1)
            for i in range(k):
                if i == j:
                    continue
                m = props.below[i][j][l]
                prev = pmf
                pmf = [0] * k
                for s, w in enumerate(prev):
                    if not w:
                        continue
                    pmf[s] += w * (n - m)
                    pmf[s + 1] += w * m
            total += sum(w * abs(s - j) for s, w in enumerate(pmf))
    return total


def j_statistic(sample: RssSample) -> int:
    """Count of cross-cycle pairs (slot i below slot j) in the wrong order."""
    k, n = sample.k, sample.n
    rows = sample.values
    total = 0
    for i in range(k - 1):
        for j in range(i + 1, k):
            total += sum(
                1 for a in range(n) for b in range(n) if rows[i][a] > rows[j][b]
            )
    return total


def w_star(ranks: RankInfo) -> int:
    """Sum over cells of (slot index) * (overall rank); rejects LOW."""
    return sum(
        (j + 1) * ranks.overall[j][l] for j in range(ranks.k) for l in range(ranks.n)
    )


def ps_offset(k: int, n: int) -> int:
    """The constant in the exact affine relation PS = ps_offset - 2*n^(k-2)*Wstar.

    Valid for k >= 2.  Derived from the fact that the ranks inside each
    recombined sample are a permutation of 1..k, plus the decomposition of
    a cell's recombination-rank sum into overall and within-slot counts;
    the test suite validates it against brute-force enumeration.
    """
    if k < 2:
        raise ValueError("ps_offset requires k >= 2")
    nk = n**k
    return (
        2 * nk * k * (k + 1) * (2 * k + 1) // 6
        - nk * k * (k + 1)
        + n ** (k - 2) * (n + n * (n - 1) // 2) * k * (k + 1)
    )


def evaluate(
    sample: RssSample,
    kind: StatisticKind,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> int:
    """Evaluate any statistic on a sample, using the cheap route for each.

    PN and PS go through their exact identities with J and Wstar, PA
    through the convolution path, so no tag needs the n^k enumeration
    (which remains available as `brute_force_perm_stat`).
    """
    k, n = sample.k, sample.n
    if kind in SUM_KINDS or kind in MAX_KINDS:
        return aggregate(compute_ranks(sample), kind)
    if kind is StatisticKind.J:
        return j_statistic(sample)
    if kind is StatisticKind.WSTAR:
        return w_star(compute_ranks(sample))
    if kind is StatisticKind.PA:
        return fast_pa(sample)
    if k == 1:
        return 0  # single slot: every recombined sample is trivially sorted
    if kind is StatisticKind.PN:
        return n ** (k - 2) * j_statistic(sample)
    if kind is StatisticKind.PS:
        return ps_offset(k, n) - 2 * n ** (k - 2) * w_star(compute_ranks(sample))
    raise ValueError(f"unhandled statistic {kind!r}")  # pragma: no cover


def _cycle_maxima(k: int) -> tuple[int, int, int]:
    return k * (k - 1) // 2, k * k // 2, k * (k * k - 1) // 3


def statistic_range(kind: StatisticKind, k: int, n: int) -> tuple[int, int]:
    """Inclusive integer bounds of a statistic's support on a k x n grid."""
    nmax, amax, smax = _cycle_maxima(k)
    if kind in MAX_KINDS or n == 1 and kind in SUM_KINDS:
        hi = {"N": nmax, "A": amax, "S": smax}[kind.value[0]]
        return 0, hi
    if kind in SUM_KINDS:
        hi = {"N": nmax, "A": amax, "S": smax}[kind.value[0]]
        return 0, n * hi
    if kind is StatisticKind.J:
        return 0, k * (k - 1) // 2 * n * n
    if kind in PERM_KINDS:
        hi = {
            StatisticKind.PN: nmax,
            StatisticKind.PA: amax,
            StatisticKind.PS: smax,
        }[kind]
        return 0, n**k * hi
    if kind is StatisticKind.WSTAR:
        weights = [j for j in range(1, k + 1) for _ in range(n)]
        ranks = list(range(1, k * n + 1))
        lo = sum(w * r for w, r in zip(weights, reversed(ranks)))
        hi = sum(w * r for w, r in zip(weights, ranks))
        return lo, hi
    raise ValueError(f"unhandled statistic {kind!r}")  # pragma: no cover
