"""Sample ingestion, ranking and proportion counts."""

from __future__ import annotations

from fractions import Fraction

import pytest

from rsstest import (
    DataValidationError,
    RssSample,
    TieError,
    column_proportions,
    compute_ranks,
    monotone_transform,
    parse_csv,
)

from conftest import make_sample, random_sample


# ---------------------------------------------------------------------------
# parse_csv
# ---------------------------------------------------------------------------


def test_parse_minimal_cycles_as_rows():
    s = parse_csv("1,4\n2,3\n", "cycles-as-rows")
    assert (s.k, s.n) == (2, 2)
    # row i = rank slot, column l = cycle
    assert s.values == ((1.0, 2.0), (4.0, 3.0))


def test_parse_cycles_as_columns_dimensions():
    lines = "\n".join(",".join(str(10 * i + l) for l in range(4)) for i in range(5))
    s = parse_csv(lines, "cycles-as-columns")
    assert (s.k, s.n) == (5, 4)
    assert s.values[2][3] == 23.0


def test_parse_header_line_skipped():
    s = parse_csv("# slot1, slot2\n1,4\n2,3\n", "cycles-as-rows")
    assert (s.k, s.n) == (2, 2)


def test_parse_header_after_data_rejected():
    with pytest.raises(DataValidationError, match="after data"):
        parse_csv("1,4\n# oops\n2,3\n", "cycles-as-rows")


def test_parse_tie_error_names_cells():
    with pytest.raises(TieError) as err:
        parse_csv("1,4\n2,4\n", "cycles-as-rows")
    message = str(err.value)
    assert "rank slot 2, cycle 2" in message and "rank slot 2, cycle 1" in message


def test_parse_non_numeric_cell():
    with pytest.raises(DataValidationError, match="non-numeric.*'x'"):
        parse_csv("1,x\n2,3\n", "cycles-as-rows")


def test_parse_ragged_row():
    with pytest.raises(DataValidationError, match="ragged"):
        parse_csv("1,2\n3\n", "cycles-as-rows")


def test_parse_k_below_two():
    with pytest.raises(DataValidationError, match="k=1"):
        parse_csv("1\n2\n", "cycles-as-rows")


def test_parse_unknown_layout():
    with pytest.raises(DataValidationError, match="layout"):
        parse_csv("1,2\n", "sideways")


def test_sample_rejects_non_finite():
    with pytest.raises(DataValidationError, match="non-finite"):
        make_sample([[1.0, float("inf")], [2.0, 3.0]])


# ---------------------------------------------------------------------------
# compute_ranks
# ---------------------------------------------------------------------------


def test_ranks_sorted_cycle():
    info = compute_ranks(make_sample([[10], [20], [30]]))
    assert [info.within_cycle[i][0] for i in range(3)] == [1, 2, 3]


def test_ranks_reversed_cycle():
    info = compute_ranks(make_sample([[30], [20], [10]]))
    assert [info.within_cycle[i][0] for i in range(3)] == [3, 2, 1]


def test_ranks_overall_and_counts():
    # values [[1,2],[4,3]]: overall ranks [[1,2],[4,3]], c_{1,1}=0, c_{1,2}=1
    info = compute_ranks(make_sample([[1, 2], [4, 3]]))
    assert info.overall == ((1, 2), (4, 3))
    assert info.column_counts[0] == (0, 1)


@pytest.mark.parametrize("k,n", [(2, 2), (3, 4), (5, 3)])
def test_rank_invariants(rng, k, n):
    s = random_sample(rng, k, n)
    info = compute_ranks(s)
    for l in range(n):
        assert sorted(info.within_cycle[i][l] for i in range(k)) == list(range(1, k + 1))
    flat = sorted(info.overall[i][l] for i in range(k) for l in range(n))
    assert flat == list(range(1, k * n + 1))
    for i in range(k):
        assert sorted(info.column_counts[i]) == list(range(n))
        # sum identity used by the affine relation with Wstar
        assert sum(info.column_counts[i]) == n * (n - 1) // 2
    # rank order mirrors value order within each cycle and overall
    for l in range(n):
        for a in range(k):
            for b in range(k):
                assert (s.values[a][l] < s.values[b][l]) == (
                    info.within_cycle[a][l] < info.within_cycle[b][l]
                )


# ---------------------------------------------------------------------------
# column_proportions
# ---------------------------------------------------------------------------


def test_proportions_dominance():
    s = make_sample([[1, 2], [10, 20]])
    props = column_proportions(s)
    assert props.p(1, 2, 1) == 1  # slot 1 entirely below cell (2, 1)
    assert props.p(2, 1, 1) == 0  # slot 2 entirely above cell (1, 1)


def test_proportions_example():
    props = column_proportions(make_sample([[1, 2], [4, 3]]))
    assert props.p(2, 1, 1) == 0  # none of {4, 3} is below 1
    assert props.p(2, 1, 2) == 0
    assert props.p(1, 2, 1) == 1


@pytest.mark.parametrize("k,n", [(3, 3), (4, 2), (2, 5)])
def test_proportions_match_exhaustive_count(rng, k, n):
    s = random_sample(rng, k, n)
    props = column_proportions(s)
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            for l in range(1, n + 1):
                count = sum(
                    1 for l2 in range(1, n + 1) if s.row(i)[l2 - 1] < s.row(j)[l - 1]
                )
                assert props.p(i, j, l) == Fraction(count, n)
                assert 0 <= props.p(i, j, l) <= 1


# ---------------------------------------------------------------------------
# monotone_transform
# ---------------------------------------------------------------------------


def test_transform_identity():
    s = make_sample([[1, 2], [4, 3]])
    assert monotone_transform(s, lambda x: x) == s


@pytest.mark.parametrize("f", [lambda x: 2 * x + 1, lambda x: x**3])
def test_transform_preserves_ranks(rng, f):
    values = rng.random((3, 4)) - 0.5  # include negatives for the cube
    s = make_sample(values)
    assert compute_ranks(monotone_transform(s, f)) == compute_ranks(s)


def test_transform_producing_ties_rejected():
    s = make_sample([[1, 2], [4, 3]])
    with pytest.raises(DataValidationError, match="transform"):
        monotone_transform(s, lambda x: 0.0)


def test_transform_producing_non_finite_rejected():
    s = make_sample([[1, 2], [4, 3]])
    with pytest.raises(DataValidationError, match="transform"):
        monotone_transform(s, lambda x: float("nan"))


# ---------------------------------------------------------------------------
# accessors
# ---------------------------------------------------------------------------


def test_row_and_cycle_accessors():
    s = make_sample([[1, 2], [4, 3]])
    assert s.row(1) == (1.0, 2.0)
    assert s.cycle(2) == (2.0, 3.0)


def test_samples_are_immutable():
    s = make_sample([[1, 2], [4, 3]])
    with pytest.raises(AttributeError):
        s.values = ((0.0,),)
