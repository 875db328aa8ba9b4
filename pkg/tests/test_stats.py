import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from impostorkit.errors import (
    LengthMismatch,
    MissingBaseline,
    NonFiniteInput,
    TooFewValues,
    ZeroBaseline,
    ZeroVariance,
)
from impostorkit.stats import boxplot_stats, normalized_falloff, pearson

from oracles import boxplot as oracle_boxplot
from oracles import pearson as oracle_pearson

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_boxplot_one_to_nine():
    b = boxplot_stats(range(1, 10))
    assert (b.q1, b.median, b.q3, b.iqr) == (3, 5, 7, 4)
    assert (b.lower_whisker, b.upper_whisker) == (1, 9)
    assert b.outliers == ()


def test_boxplot_constant():
    b = boxplot_stats([0.25] * 7)
    assert b.q1 == b.median == b.q3 == 0.25
    assert b.iqr == 0
    assert b.lower_whisker == b.upper_whisker == 0.25
    assert b.outliers == ()


def test_boxplot_flags_far_value():
    values = [1, 2, 3, 4, 100]
    ref = oracle_boxplot(values)
    assert 100 > ref["q3"] + 1.5 * ref["iqr"]
    b = boxplot_stats(values)
    assert b.outliers == (100.0,)
    assert b.upper_whisker == 4


def test_boxplot_outliers_keep_input_order():
    b = boxplot_stats([50, 1, 2, 3, 4, -40, 5, 60])
    assert b.outliers == (50.0, -40.0, 60.0)


@pytest.mark.parametrize("bad", [[1.0], [], [1.0, float("nan")], [float("inf"), 1, 2]])
def test_boxplot_errors(bad):
    with pytest.raises((TooFewValues, NonFiniteInput)):
        boxplot_stats(bad)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=2, max_size=200))
def test_boxplot_matches_oracle(values):
    b = boxplot_stats(values)
    ref = oracle_boxplot(values)
    scale = max(1.0, max(abs(v) for v in values))
    for key in ("q1", "median", "q3", "iqr"):
        assert getattr(b, key) == pytest.approx(ref[key], abs=1e-9 * scale)
    assert b.q1 <= b.median <= b.q3


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=2, max_size=200))
def test_boxplot_partition(values):
    b = boxplot_stats(values)
    assert b.lower_whisker in values and b.upper_whisker in values
    assert b.lower_whisker >= b.q1 - 1.5 * b.iqr
    assert b.upper_whisker <= b.q3 + 1.5 * b.iqr
    inside = [v for v in values if b.lower_whisker <= v <= b.upper_whisker]
    assert len(inside) + len(b.outliers) == len(values)
    assert all(not (b.lower_whisker <= o <= b.upper_whisker) for o in b.outliers)


def test_quartiles_agree_with_numpy_linear(rng):
    x = rng.normal(size=333)
    b = boxplot_stats(x)
    q = np.quantile(x, [0.25, 0.5, 0.75])
    np.testing.assert_allclose([b.q1, b.median, b.q3], q, rtol=0, atol=1e-12)


def test_pearson_identity_and_flip():
    x = [0.3, 1.7, -2.0, 4.4, 0.0]
    assert pearson(x, x) == pytest.approx(1.0, abs=1e-12)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-12)


def test_pearson_small_case():
    # hand arithmetic: sxy = 3, sxx = 2, syy = 14/3
    expected = 3 / math.sqrt(2 * 14 / 3)
    assert expected == pytest.approx(0.98198, abs=1e-5)
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(expected, abs=1e-9)


def test_pearson_errors():
    with pytest.raises(LengthMismatch):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(ZeroVariance):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ZeroVariance):
        pearson([0.1] * 5, [1, 2, 3, 4, 5])
    with pytest.raises(TooFewValues):
        pearson([1, 2], [2, 1])
    with pytest.raises(NonFiniteInput):
        pearson([1, 2, float("nan")], [1, 2, 3])


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 60).flatmap(
    lambda n: st.tuples(st.lists(st.floats(-100, 100), min_size=n, max_size=n),
                        st.lists(st.floats(-100, 100), min_size=n, max_size=n))),
       st.floats(0.01, 100), st.floats(-100, 100))
def test_pearson_affine_invariance(xy, a, b):
    x, y = xy
    if max(x) - min(x) < 1e-3 or max(y) - min(y) < 1e-3:
        return
    r = pearson(x, y)
    assert -1.0 <= r <= 1.0
    assert pearson([a * v + b for v in x], y) == pytest.approx(r, abs=1e-10)
    assert pearson([-a * v + b for v in x], y) == pytest.approx(-r, abs=1e-10)
    assert r == pytest.approx(oracle_pearson(x, y), abs=1e-9)


def test_falloff_table_row():
    row = [("base", 0.68), ("b5", 0.65), ("b9", 0.59), ("b17", 0.27), ("b31", 0.13)]
    expected = [1.0] + [r / 0.68 for _, r in row[1:]]
    out = normalized_falloff(row, "base")
    assert [c for c, _ in out] == [c for c, _ in row]
    assert out[0][1] == 1.0
    np.testing.assert_allclose([v for _, v in out], expected, atol=1e-12)
    np.testing.assert_allclose([v for _, v in out], [1.0, 0.9559, 0.8676, 0.3971, 0.1912],
                               atol=1e-4)


def test_falloff_constant_and_errors():
    out = normalized_falloff([("a", 0.37), ("b", 0.37), ("c", 0.37)], "b")
    assert all(v == 1.0 for _, v in out)
    with pytest.raises(MissingBaseline):
        normalized_falloff([("a", 0.5)], "b")
    with pytest.raises(ZeroBaseline):
        normalized_falloff([("a", 0.0), ("b", 0.3)], "a")
