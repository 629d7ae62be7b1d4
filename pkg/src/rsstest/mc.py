"""Monte Carlo null distributions under perfect ranking.

Replicates are drawn in fixed-size chunks; chunk c always comes from
stream (seed, NULL_STREAM_BASE + c), so the result for a given (seed,
reps) is bit-identical however the chunks are spread across workers.
Evaluating several statistics in one run shares the simulated samples,
which is both cheaper and harmless: each statistic's marginal null
distribution is what the tables need.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable, Mapping

import numpy as np

from .batch import evaluate_batch
from .models import ImperfectModel, draw_cells
from .nulldist import NullDistribution, Provenance
from .sample import RssSample
from .statistics import StatisticKind
from .streams import NULL_STREAM_BASE, substream

CHUNK_SIZE = 8192

_PERFECT = ImperfectModel("perfect")


def simulate_null_sample(k: int, n: int, rng: np.random.Generator) -> RssSample:
    """One perfect-ranking sample: each cell the i-th smallest of its own
    k uniform draws."""
    cells = draw_cells(_PERFECT, "uniform", k, n, 1, rng)[0]
    return RssSample(tuple(tuple(float(v) for v in row) for row in cells))


def mc_null_distributions(
    kinds: Iterable[StatisticKind],
    k: int,
    n: int,
    reps: int,
    seed: int,
    threads: int = 1,
    transform: Callable[[np.ndarray], np.ndarray] | None = None,
) -> dict[StatisticKind, NullDistribution]:
    """Empirical null distributions of several statistics in one pass.

    `transform` (testing hook) is applied to each chunk's (B, k, n) cell
    array before evaluation; any strictly increasing cellwise map must
    leave every distribution unchanged, bit for bit.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    kinds = tuple(dict.fromkeys(kinds))
    n_chunks = -(-reps // CHUNK_SIZE)

    def one_chunk(c: int) -> dict[StatisticKind, tuple[np.ndarray, np.ndarray]]:
        rng = substream(seed, NULL_STREAM_BASE + c)
        take = min(CHUNK_SIZE, reps - c * CHUNK_SIZE)
        cells = draw_cells(_PERFECT, "uniform", k, n, CHUNK_SIZE, rng)[:take]
        if transform is not None:
            cells = transform(cells)
        stats = evaluate_batch(cells, kinds)
        return {kind: np.unique(arr, return_counts=True) for kind, arr in stats.items()}

    counts: dict[StatisticKind, dict[int, int]] = {kind: {} for kind in kinds}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunk_results = list(pool.map(one_chunk, range(n_chunks)))
    else:
        chunk_results = [one_chunk(c) for c in range(n_chunks)]
    for result in chunk_results:
        for kind, (values, freq) in result.items():
            bucket = counts[kind]
            for v, f in zip(values.tolist(), freq.tolist()):
                bucket[v] = bucket.get(v, 0) + f

    provenance = Provenance("monte-carlo", seed=seed, reps=reps)
    out = {}
    for kind in kinds:
        support = tuple(sorted(counts[kind]))
        out[kind] = NullDistribution(
            kind=kind,
            k=k,
            n=n,
            support=support,
            probs=tuple(Fraction(counts[kind][v], reps) for v in support),
            provenance=provenance,
        )
    return out


def mc_null_distribution(
    kind: StatisticKind,
    k: int,
    n: int,
    reps: int,
    seed: int,
    threads: int = 1,
) -> NullDistribution:
    """Empirical null distribution of a single statistic."""
    return mc_null_distributions([kind], k, n, reps, seed, threads=threads)[kind]


def null_distributions_for(
    kinds: Iterable[StatisticKind],
    k: int,
    n: int,
    exact_cap: int = 8,
    mc_reps: int = 1_000_000,
    mc_seed: int | None = None,
    threads: int = 1,
) -> Mapping[StatisticKind, NullDistribution]:
    """Exact distributions when the grid fits the cap, Monte Carlo otherwise."""
    from .nulldist import exact_null_distribution

    kinds = tuple(dict.fromkeys(kinds))
    if k * n <= exact_cap:
        return {
            kind: exact_null_distribution(kind, k, n, max_cells=exact_cap)
            for kind in kinds
        }
    if mc_seed is None:
        raise ValueError(
            f"grid {k}x{n} exceeds the exact cap of {exact_cap} cells; "
            "a Monte Carlo seed is required"
        )
    return mc_null_distributions(kinds, k, n, mc_reps, mc_seed, threads=threads)
