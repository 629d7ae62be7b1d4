"""Power estimation across a parameter grid, and test-vs-test comparison.

One study simulates samples from an imperfect-ranking model along a grid
of its parameter and applies the randomized test for every requested
statistic to the *same* samples (common random numbers), sharing a single
boundary-randomisation uniform per replicate.  That keeps comparisons
between statistics low-variance and makes provably equivalent tests agree
replicate by replicate.

Chunks map to fixed streams (seed, POWER_STREAM_BASE + grid offset + c),
so estimates are reproducible and independent of the worker count.  Null
critical values come from the exact engine when the grid is small enough
and from a high-replication Monte Carlo run otherwise; the null stream
indices are disjoint from the power stream indices by construction.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .batch import evaluate_batch
from .errors import DataValidationError
from .mc import mc_null_distributions
from .models import ImperfectModel, Population, draw_cells
from .nulldist import (
    NullDistribution,
    Provenance,
    as_exact_probability,
    critical_value,
    exact_null_distribution,
)
from .statistics import StatisticKind, is_lower_tail
from .streams import POWER_STREAM_BASE, substream

POWER_TABLE_FORMAT = "rsstest-power-table/1"
CHUNK_SIZE = 8192
_LAMBDA_STRIDE = 1 << 20  # max chunks per grid point


@dataclass(frozen=True)
class NullSource:
    """Where a power study's null distributions come from.

    method "auto" uses the exact engine for grids of at most
    `exact_cells_cap` cells and Monte Carlo with `reps` replicates
    otherwise; "exact" and "monte-carlo" force one route.
    """

    method: str = "auto"
    reps: int = 1_000_000
    seed: int | None = None
    exact_cells_cap: int = 8

    def __post_init__(self) -> None:
        if self.method not in ("auto", "exact", "monte-carlo"):
            raise DataValidationError(f"unknown null source {self.method!r}")


@dataclass(frozen=True)
class PowerStudy:
    """Configuration of one power estimation run."""

    k: int
    n: int
    kinds: tuple[StatisticKind, ...]
    model_tag: str
    lambda_grid: tuple[float, ...]
    alpha: Fraction
    reps: int
    seed: int
    population: Population | None = None
    null: NullSource = NullSource()

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < 1:
            raise DataValidationError("k and n must be positive")
        kinds = tuple(StatisticKind(kd) for kd in self.kinds)
        if not kinds:
            raise DataValidationError("at least one statistic is required")
        if not self.lambda_grid:
            raise DataValidationError("the parameter grid must not be empty")
        for lam in self.lambda_grid:
            ImperfectModel(self.model_tag, lam)  # validates tag and domain
        alpha = as_exact_probability(self.alpha)
        if not 0 < alpha < 1:
            raise DataValidationError("alpha must lie strictly between 0 and 1")
        if self.reps < 1:
            raise DataValidationError("reps must be at least 1")
        pop = self.population
        if self.model_tag == "concomitant":
            if pop == "uniform":
                raise DataValidationError("the concomitant model requires population 'normal'")
            pop = "normal"
        elif pop is None:
            pop = "uniform"
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "population", pop)

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "kinds": [kd.value for kd in self.kinds],
            "model": self.model_tag,
            "lambda_grid": list(self.lambda_grid),
            "alpha": f"{self.alpha.numerator}/{self.alpha.denominator}",
            "reps": self.reps,
            "seed": self.seed,
            "population": self.population,
            "null": {
                "method": self.null.method,
                "reps": self.null.reps,
                "seed": self.null.seed,
                "exact_cells_cap": self.null.exact_cells_cap,
            },
        }

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "PowerStudy":
        nd = doc["null"]
        return cls(
            k=int(doc["k"]),
            n=int(doc["n"]),
            kinds=tuple(StatisticKind.from_tag(t) for t in doc["kinds"]),
            model_tag=doc["model"],
            lambda_grid=tuple(float(v) for v in doc["lambda_grid"]),
            alpha=Fraction(doc["alpha"]),
            reps=int(doc["reps"]),
            seed=int(doc["seed"]),
            population=doc["population"],
            null=NullSource(
                method=nd["method"],
                reps=int(nd["reps"]),
                seed=None if nd["seed"] is None else int(nd["seed"]),
                exact_cells_cap=int(nd["exact_cells_cap"]),
            ),
        )


@dataclass(frozen=True)
class PowerCell:
    """Estimated rejection probability for one (statistic, parameter) pair."""

    kind: StatisticKind
    lam: float
    rejections: int
    reps: int

    @property
    def power(self) -> float:
        return self.rejections / self.reps

    @property
    def se(self) -> float:
        p = self.power
        return math.sqrt(p * (1.0 - p) / self.reps)


@dataclass(frozen=True)
class PowerTable:
    """All cells of a study plus the provenance needed to reproduce them."""

    study: PowerStudy
    cells: tuple[PowerCell, ...]
    null_provenance: tuple[tuple[StatisticKind, Provenance], ...]

    def cell(self, kind: StatisticKind, lam: float) -> PowerCell:
        for c in self.cells:
            if c.kind is kind and c.lam == lam:
                return c
        raise KeyError(f"no cell for {kind.value} at {lam}")

    def to_csv(self) -> str:
        """Rows are statistics, columns the parameter grid."""
        header = "kind," + ",".join(f"{lam:g}" for lam in self.study.lambda_grid)
        lines = [header]
        for kind in self.study.kinds:
            row = [kind.value]
            for lam in self.study.lambda_grid:
                row.append(f"{self.cell(kind, lam).power:.6f}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "format": POWER_TABLE_FORMAT,
            "study": self.study.to_json_dict(),
            "cells": [
                {
                    "kind": c.kind.value,
                    "lambda": c.lam,
                    "rejections": c.rejections,
                    "reps": c.reps,
                    "power": c.power,
                    "se": c.se,
                }
                for c in self.cells
            ],
            "null_provenance": [
                {
                    "kind": kind.value,
                    "method": prov.method,
                    "seed": prov.seed,
                    "reps": prov.reps,
                }
                for kind, prov in self.null_provenance
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "PowerTable":
        if doc.get("format") != POWER_TABLE_FORMAT:
            raise DataValidationError(
                f"not a {POWER_TABLE_FORMAT} document: {doc.get('format')!r}"
            )
        return cls(
            study=PowerStudy.from_json_dict(doc["study"]),
            cells=tuple(
                PowerCell(
                    kind=StatisticKind.from_tag(c["kind"]),
                    lam=float(c["lambda"]),
                    rejections=int(c["rejections"]),
                    reps=int(c["reps"]),
                )
                for c in doc["cells"]
            ),
            null_provenance=tuple(
                (
                    StatisticKind.from_tag(p["kind"]),
                    Provenance(method=p["method"], seed=p.get("seed"), reps=p.get("reps")),
                )
                for p in doc["null_provenance"]
            ),
        )

    @classmethod
    def from_json(cls, text: str) -> "PowerTable":
        return cls.from_json_dict(json.loads(text))


def resolve_null_distributions(
    study: PowerStudy, threads: int = 1
) -> Mapping[StatisticKind, NullDistribution]:
    """Build the study's null distributions per its null-source policy."""
    src = study.null
    use_exact = src.method == "exact" or (
        src.method == "auto" and study.k * study.n <= src.exact_cells_cap
    )
    if use_exact:
        # a forced exact source still honours the cell cap (raise
        # exact_cells_cap explicitly to opt in to larger grids)
        return {
            kind: exact_null_distribution(
                kind, study.k, study.n, max_cells=src.exact_cells_cap
            )
            for kind in study.kinds
        }
    null_seed = src.seed if src.seed is not None else study.seed
    return mc_null_distributions(
        study.kinds, study.k, study.n, src.reps, null_seed, threads=threads
    )


def estimate_power(
    study: PowerStudy,
    null_dists: Mapping[StatisticKind, NullDistribution] | None = None,
    threads: int = 1,
) -> PowerTable:
    """Estimate rejection probabilities for every (kind, parameter) cell.

    Precomputed `null_dists` (e.g. reloaded from disk) are used as-is
    after a compatibility check; otherwise they are built per the
    study's null-source policy.
    """
    if null_dists is None:
        null_dists = resolve_null_distributions(study, threads=threads)
    for kind in study.kinds:
        dist = null_dists.get(kind)
        if dist is None or dist.k != study.k or dist.n != study.n or dist.kind is not kind:
            raise DataValidationError(
                f"missing or mismatched null distribution for {kind.value} "
                f"on a {study.k}x{study.n} grid"
            )

    crits = {kind: critical_value(null_dists[kind], study.alpha) for kind in study.kinds}
    lower = {kind: is_lower_tail(kind) for kind in study.kinds}
    n_chunks = -(-study.reps // CHUNK_SIZE)
    if n_chunks > _LAMBDA_STRIDE:
        raise DataValidationError("reps beyond the supported stream layout")

    def run_point(lam_idx: int) -> dict[StatisticKind, int]:
        model = ImperfectModel(study.model_tag, study.lambda_grid[lam_idx])

        def one_chunk(c: int) -> dict[StatisticKind, int]:
            rng = substream(
                study.seed, POWER_STREAM_BASE + lam_idx * _LAMBDA_STRIDE + c
            )
            take = min(CHUNK_SIZE, study.reps - c * CHUNK_SIZE)
            cells = draw_cells(
                model, study.population, study.k, study.n, CHUNK_SIZE, rng
            )
            u = rng.random(CHUNK_SIZE)
            cells, u = cells[:take], u[:take]
            stats = evaluate_batch(cells, study.kinds)
            counts = {}
            for kind in study.kinds:
                crit = crits[kind]
                t = stats[kind]
                beyond = t <= crit.cv if lower[kind] else t >= crit.cv
                reject = beyond
                if crit.boundary is not None and crit.gamma > 0:
                    reject = beyond | ((t == crit.boundary) & (u < float(crit.gamma)))
                counts[kind] = int(reject.sum())
            return counts

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                chunk_counts = list(pool.map(one_chunk, range(n_chunks)))
        else:
            chunk_counts = [one_chunk(c) for c in range(n_chunks)]
        return {
            kind: sum(cc[kind] for cc in chunk_counts) for kind in study.kinds
        }

    cells = []
    for lam_idx, lam in enumerate(study.lambda_grid):
        counts = run_point(lam_idx)
        for kind in study.kinds:
            cells.append(
                PowerCell(kind=kind, lam=lam, rejections=counts[kind], reps=study.reps)
            )
    return PowerTable(
        study=study,
        cells=tuple(cells),
        null_provenance=tuple((kind, null_dists[kind].provenance) for kind in study.kinds),
    )


@dataclass(frozen=True)
class PairVerdict:
    """How statistic `a` compares to `b` across the grid (2-sigma joint SE)."""

    a: StatisticKind
    b: StatisticKind
    above: int  # grid points where a is significantly above b
    below: int
    indistinct: int

    @property
    def summary(self) -> str:
        def points(c: int) -> str:
            return f"{c} point{'' if c == 1 else 's'} significant"

        if self.below == 0 and self.above > 0:
            return f"{self.a.value} >= {self.b.value} everywhere ({points(self.above)})"
        if self.above == 0 and self.below > 0:
            return f"{self.a.value} <= {self.b.value} everywhere ({points(self.below)})"
        if self.above == self.below == 0:
            return f"{self.a.value} and {self.b.value} indistinguishable at this precision"
        return f"{self.a.value} vs {self.b.value} mixed ({self.above} above, {self.below} below)"


@dataclass(frozen=True)
class ComparisonReport:
    """Per-point rankings and pairwise dominance across merged tables."""

    lambda_grid: tuple[float, ...]
    kinds: tuple[StatisticKind, ...]
    cells: Mapping[tuple[StatisticKind, float], PowerCell]
    verdicts: tuple[PairVerdict, ...]

    def ranking(self, lam: float) -> list[PowerCell]:
        at = [self.cells[(kind, lam)] for kind in self.kinds]
        return sorted(at, key=lambda c: c.power, reverse=True)

    def verdict(self, a: StatisticKind, b: StatisticKind) -> PairVerdict:
        for v in self.verdicts:
            if v.a is a and v.b is b:
                return v
        raise KeyError(f"no verdict for {a.value} vs {b.value}")

    def render_text(self) -> str:
        lines = []
        for lam in self.lambda_grid:
            ranked = ", ".join(
                f"{c.kind.value}={c.power:.4f}" for c in self.ranking(lam)
            )
            lines.append(f"lambda={lam:g}: {ranked}")
        lines.append("")
        for v in self.verdicts:
            lines.append(v.summary)
        return "\n".join(lines) + "\n"


def compare_tests(tables: Sequence[PowerTable]) -> ComparisonReport:
    """Merge tables sharing a configuration and rank their statistics.

    Differences beyond twice the joint standard error count as
    significant; the verdicts summarise each ordered pair across the
    whole grid.
    """
    if not tables:
        raise ValueError("nothing to compare")
    first = tables[0].study
    key = (first.k, first.n, first.model_tag, first.lambda_grid, first.alpha, first.population)
    cells: dict[tuple[StatisticKind, float], PowerCell] = {}
    kinds: list[StatisticKind] = []
    for table in tables:
        s = table.study
        if (s.k, s.n, s.model_tag, s.lambda_grid, s.alpha, s.population) != key:
            raise DataValidationError(
                "tables disagree on grid, model, alpha or population; cannot compare"
            )
        for c in table.cells:
            cells[(c.kind, c.lam)] = c
            if c.kind not in kinds:
                kinds.append(c.kind)

    verdicts = []
    for a in kinds:
        for b in kinds:
            if a is b:
                continue
            above = below = indistinct = 0
            for lam in first.lambda_grid:
                ca, cb = cells[(a, lam)], cells[(b, lam)]
                joint = 2.0 * math.hypot(ca.se, cb.se)
                if ca.power - cb.power > joint:
                    above += 1
                elif cb.power - ca.power > joint:
                    below += 1
                else:
                    indistinct += 1
            verdicts.append(PairVerdict(a=a, b=b, above=above, below=below, indistinct=indistinct))

    return ComparisonReport(
        lambda_grid=first.lambda_grid,
        kinds=tuple(kinds),
        cells=cells,
        verdicts=tuple(verdicts),
    )


def power_tables_equal(a: PowerTable, b: PowerTable) -> bool:
    """Bit-equality of two tables (study, cells and provenance)."""
    return a.to_json_dict() == b.to_json_dict()


__all__ = [
    "ComparisonReport",
    "NullSource",
    "PairVerdict",
    "PowerCell",
    "PowerStudy",
    "PowerTable",
    "compare_tests",
    "estimate_power",
    "power_tables_equal",
    "resolve_null_distributions",
]
