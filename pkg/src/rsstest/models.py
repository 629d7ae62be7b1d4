"""Sample generators: perfect ranking and four imperfect-ranking models.

Every cell of a generated k x n sample comes from its own independent
comparison set of k draws, so all k*n cells are mutually independent.
The models differ in which member of the set (or which fresh draw) ends
up being measured for rank slot i:

  perfect       -- the i-th smallest of the set, always.
  concomitant   -- sets are bivariate normal pairs with correlation
                   `lam`; the cell is the primary value whose companion
                   ranks i-th.  Forces a standard normal population.
  random        -- with probability `lam` a fresh population draw
                   replaces the i-th smallest.
  inverse       -- with probability `lam` the (k-i+1)-th smallest of the
                   same set replaces the i-th.
  neighbor      -- with probability lam/2 each, the (i-1)-th or (i+1)-th
                   smallest of the same set (clamped at the ends)
                   replaces the i-th.

Draw order per batch is fixed and documented on `draw_cells`, so any
seeded stream reproduces the same cells regardless of callers.  The
all-cells-distinct requirement is enforced by regenerating offending
replicates (a probability-zero event under continuous populations);
regenerations are counted in `tie_regeneration_count`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DataValidationError
from .sample import RssSample
from .streams import MODEL_STREAM_BASE, fresh_seed, substream

ModelTag = Literal["perfect", "concomitant", "random", "inverse", "neighbor"]
Population = Literal["uniform", "normal"]

MODEL_TAGS = ("perfect", "concomitant", "random", "inverse", "neighbor")
FRACTION_TAGS = ("random", "inverse", "neighbor")

tie_regeneration_count = 0


@dataclass(frozen=True)
class ImperfectModel:
    """A ranking-error mechanism tag plus its mixing/correlation parameter."""

    tag: str
    lam: float = 0.0

    def __post_init__(self) -> None:
        if self.tag not in MODEL_TAGS:
            raise DataValidationError(
                f"unknown model tag {self.tag!r}; expected one of {', '.join(MODEL_TAGS)}"
            )
        lam = float(self.lam)
        if self.tag == "perfect":
            lam = 0.0  # parameter is ignored
        elif self.tag == "concomitant":
            if not -1.0 <= lam <= 1.0:
                raise DataValidationError("concomitant correlation must lie in [-1, 1]")
        elif not 0.0 <= lam <= 1.0:
            raise DataValidationError(f"{self.tag} mixing fraction must lie in [0, 1]")
        object.__setattr__(self, "lam", lam)

    def describe(self) -> str:
        """The CLI/wire form, e.g. 'neighbor:0.5'."""
        if self.tag == "perfect":
            return "perfect"
        return f"{self.tag}:{self.lam:g}"

    @classmethod
    def parse(cls, text: str) -> "ImperfectModel":
        """Parse a descriptor of the form 'perfect' or 'tag:LAMBDA'."""
        tag, _, lam = text.partition(":")
        tag = tag.strip()
        if tag == "perfect":
            return cls("perfect")
        if not lam:
            raise DataValidationError(
                f"model {tag!r} needs a parameter, e.g. '{tag}:0.5'"
            )
        try:
            return cls(tag, float(lam))
        except ValueError:
            raise DataValidationError(f"bad model parameter {lam!r}") from None


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything needed to generate one sample reproducibly."""

    k: int
    n: int
    model: ImperfectModel
    population: Population | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < 1:
            raise DataValidationError("k and n must be positive")
        pop = self.population
        if self.model.tag == "concomitant":
            if pop == "uniform":
                raise DataValidationError(
                    "the concomitant model draws bivariate normal pairs; "
                    "population must be 'normal'"
                )
            pop = "normal"
        elif pop is None:
            pop = "uniform"
        if pop not in ("uniform", "normal"):
            raise DataValidationError(f"unknown population {pop!r}")
        object.__setattr__(self, "population", pop)


def draw_cells(
    model: ImperfectModel,
    population: Population,
    k: int,
    n: int,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw `size` independent samples as a (size, k, n) float array.

    Stream layout, in order, all of fixed shape so a chunk's draws depend
    only on the stream: comparison sets (size, k, n, k) [pairs of normal
    blocks for concomitant], then for fraction models the mixing uniforms
    (size, k, n), then for the random model the fresh draws (size, k, n).
    Replicates containing tied cells are redrawn from the same stream.
    """
    cells = _draw_once(model, population, k, n, size, rng)
    bad = _tied_rows(cells)
    global tie_regeneration_count
    while bad.any():
        tie_regeneration_count += int(bad.sum())
        fresh = _draw_once(model, population, k, n, int(bad.sum()), rng)
        cells[bad] = fresh
        still = np.zeros(len(cells), dtype=bool)
        still[bad] = _tied_rows(fresh)
        bad = still
    return cells


def _draw_once(
    model: ImperfectModel,
    population: Population,
    k: int,
    n: int,
    size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    slots = np.arange(k)

    if model.tag == "concomitant":
        companion = rng.standard_normal((size, k, n, k))
        noise = rng.standard_normal((size, k, n, k))
        lam = model.lam
        primary = lam * companion + math.sqrt(1.0 - lam * lam) * noise
        # pick, per set, the primary value whose companion has rank i
        order = np.argsort(companion, axis=-1)
        pick = np.take_along_axis(
            order, np.broadcast_to(slots[None, :, None, None], (size, k, n, 1)), axis=3
        )
        return np.take_along_axis(primary, pick, axis=3)[..., 0]

    if population == "normal":
        sets = rng.standard_normal((size, k, n, k))
    else:
        sets = rng.random((size, k, n, k))
    sets = np.sort(sets, axis=-1)
    base_idx = np.broadcast_to(slots[None, :, None, None], (size, k, n, 1))
    cells = np.take_along_axis(sets, base_idx, axis=3)[..., 0]
    if model.tag == "perfect" or model.lam == 0.0:
        if model.tag == "random":
            rng.random((size, k, n))  # keep the stream layout fixed
            rng.random((size, k, n))
        elif model.tag in FRACTION_TAGS:
            rng.random((size, k, n))
        return cells

    mix = rng.random((size, k, n))
    lam = model.lam
    if model.tag == "random":
        fresh = (
            rng.standard_normal((size, k, n))
            if population == "normal"
            else rng.random((size, k, n))
        )
        return np.where(mix < lam, fresh, cells)
    if model.tag == "inverse":
        alt_idx = np.broadcast_to((k - 1 - slots)[None, :, None, None], (size, k, n, 1))
        alt = np.take_along_axis(sets, alt_idx, axis=3)[..., 0]
        return np.where(mix < lam, alt, cells)
    if model.tag == "neighbor":
        lower_idx = np.broadcast_to(
            np.maximum(slots - 1, 0)[None, :, None, None], (size, k, n, 1)
        )
        upper_idx = np.broadcast_to(
            np.minimum(slots + 1, k - 1)[None, :, None, None], (size, k, n, 1)
        )
        lower = np.take_along_axis(sets, lower_idx, axis=3)[..., 0]
        upper = np.take_along_axis(sets, upper_idx, axis=3)[..., 0]
        return np.where(mix < lam / 2, lower, np.where(mix < lam, upper, cells))
    raise DataValidationError(f"unknown model tag {model.tag!r}")  # pragma: no cover


def _tied_rows(cells: np.ndarray) -> np.ndarray:
    flat = np.sort(cells.reshape(len(cells), -1), axis=1)
    if flat.shape[1] < 2:
        return np.zeros(len(cells), dtype=bool)
    return (np.diff(flat, axis=1) == 0).any(axis=1)


def generate(cfg: GeneratorConfig, rng: np.random.Generator | None = None) -> RssSample:
    """Generate one sample under the configured model.

    Without an explicit `rng`, a fresh stream is keyed from cfg.seed, so
    repeated calls with the same config return the identical sample.
    """
    if rng is None:
        seed = cfg.seed if cfg.seed is not None else fresh_seed()
        rng = substream(seed, MODEL_STREAM_BASE)
    cells = draw_cells(cfg.model, cfg.population, cfg.k, cfg.n, 1, rng)[0]
    return RssSample(tuple(tuple(float(v) for v in row) for row in cells))


def _population_cdf(population: Population, x: float) -> float:
    if population == "uniform":
        return min(max(x, 0.0), 1.0)
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _order_stat_cdf(k: int, i: int, p: float) -> float:
    # P(i-th smallest of k <= x) as a binomial tail in p = F(x)
    return sum(
        math.comb(k, m) * p**m * (1.0 - p) ** (k - m) for m in range(i, k + 1)
    )


def marginal_cdf(
    model: ImperfectModel,
    k: int,
    i: int,
    x: float,
    population: Population = "uniform",
) -> float:
    """CDF of the rank-slot-i cell under a fraction model (or perfect).

    The concomitant model has no closed-form marginal in this
    parameterisation and is rejected.
    """
    if model.tag == "concomitant":
        raise ValueError("no closed-form marginal for the concomitant model")
    if not 1 <= i <= k:
        raise ValueError(f"rank slot {i} out of range 1..{k}")
    p = _population_cdf(population, x)
    f_i = _order_stat_cdf(k, i, p)
    lam = model.lam
    if model.tag == "perfect" or lam == 0.0:
        return f_i
    if model.tag == "random":
        return (1.0 - lam) * f_i + lam * p
    if model.tag == "inverse":
        return (1.0 - lam) * f_i + lam * _order_stat_cdf(k, k - i + 1, p)
    if model.tag == "neighbor":
        below = _order_stat_cdf(k, max(i - 1, 1), p)
        above = _order_stat_cdf(k, min(i + 1, k), p)
        return (lam / 2.0) * below + (1.0 - lam) * f_i + (lam / 2.0) * above
    raise ValueError(f"unknown model tag {model.tag!r}")  # pragma: no cover
