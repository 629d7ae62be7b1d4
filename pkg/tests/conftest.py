"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from rsstest import RssSample


def make_sample(rows) -> RssSample:
    """Build a sample from a list of rank-slot rows."""
    return RssSample(tuple(tuple(float(v) for v in row) for row in rows))


def random_sample(rng: np.random.Generator, k: int, n: int) -> RssSample:
    """A tie-free random k x n sample."""
    while True:
        values = rng.random((k, n))
        flat = np.sort(values.reshape(-1))
        if flat.size < 2 or not (np.diff(flat) == 0).any():
            return make_sample(values)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260808)
