from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from deeptrace.metrics import (
    Metric,
    MetricValue,
    citation_accuracy,
    citation_thoroughness,
    compute_metrics,
    metrics_from_dict,
    metrics_to_dict,
    one_sided,
    overconfident,
    relevant_ratio,
    source_necessity,
    uncited_sources_ratio,
    unsupported_ratio,
)

from oracles import loop_accuracy, loop_thoroughness


def pairs(max_rows=8, max_cols=8):
    def build(shape):
        cell = arrays(np.uint8, shape, elements=st.integers(0, 1))
        return st.tuples(cell, cell)

    return st.tuples(st.integers(0, max_rows), st.integers(1, max_cols)).flatmap(build)


def ratio_str(v: MetricValue) -> str:
    return v.to_dict()["value"]


# --- worked example with frozen expected values -------------------------------


def test_worked_example_all_metrics(worked_example):
    w = worked_example
    m = compute_metrics(
        is_debate=True,
        n_total=w["n_total"],
        stances=w["stances"],
        confidence=4,
        citation=w["citation"],
        support=w["support"],
        n_listed=w["n_listed"],
    )
    assert m[Metric.ONE_SIDED].value is False
    assert m[Metric.OVERCONFIDENT].value is False
    assert ratio_str(m[Metric.RELEVANT_STATEMENTS]) == "6/7"
    assert ratio_str(m[Metric.UNCITED_SOURCES]) == "0/5"
    assert ratio_str(m[Metric.UNSUPPORTED_STATEMENTS]) == "1/6"
    assert ratio_str(m[Metric.SOURCE_NECESSITY]) == "3/5"
    assert m[Metric.SOURCE_NECESSITY].extras["cover"] == [1, 2, 3]
    assert ratio_str(m[Metric.CITATION_ACCURACY]) == "4/7"
    assert ratio_str(m[Metric.CITATION_THOROUGHNESS]) == "4/10"
    assert m[Metric.CITATION_THOROUGHNESS].value == Fraction(2, 5)


# --- individual metric examples ----------------------------------------------


@pytest.mark.parametrize(
    "stances, expected",
    [
        (["pro", "pro", "neutral"], True),
        (["con"], True),
        (["neutral", "neutral"], True),
        ([], True),
        (["pro", "con"], False),
        (["pro", "neutral", "con", "pro"], False),
    ],
)
def test_one_sided(stances, expected):
    assert one_sided(stances) is expected


@pytest.mark.parametrize("side, conf, expected", [(True, 5, True), (True, 4, False), (False, 5, False), (False, 1, False)])
def test_overconfident(side, conf, expected):
    assert overconfident(side, conf) is expected


def test_relevant_ratio():
    assert ratio_str(relevant_ratio(4, 10)) == "4/10"
    assert not relevant_ratio(0, 0).defined
    with pytest.raises(ValueError):
        relevant_ratio(3, 2)


def test_uncited_counts_empty_columns():
    c = np.array([[1, 0, 0, 0], [1, 0, 1, 0]])
    assert ratio_str(uncited_sources_ratio(c, 4)) == "2/4"


def test_uncited_no_sources_is_undefined():
    assert not uncited_sources_ratio(np.zeros((2, 0)), 0).defined


def test_uncited_shape_checked():
    with pytest.raises(ValueError):
        uncited_sources_ratio(np.zeros((2, 3)), 4)


def test_unsupported_rows():
    s = np.array([[0, 0], [1, 0], [0, 0]])
    assert ratio_str(unsupported_ratio(s, 3)) == "2/3"


def test_source_necessity_denominator_is_listed_sources():
    s = np.array([[1, 0], [1, 0]])
    _, v = source_necessity(s, 4, columns=[1, 3])
    assert ratio_str(v) == "1/4" and v.extras["cover"] == [1]


def test_accuracy_with_inaccessible_columns_dropped():
    c = np.array([[1, 1, 0], [0, 1, 1]])
    s = np.array([[1, 0], [0, 0]])  # columns for sources 1 and 3
    v = citation_accuracy(c, s, support_columns=[1, 3])
    assert ratio_str(v) == "1/2"
    assert ratio_str(citation_thoroughness(c, s, support_columns=[1, 3])) == "1/1"


def test_accuracy_no_citations_undefined():
    assert not citation_accuracy(np.zeros((2, 2)), np.ones((2, 2))).defined


def test_thoroughness_no_support_undefined():
    assert not citation_thoroughness(np.ones((2, 2)), np.zeros((2, 2))).defined


def test_non_binary_rejected():
    with pytest.raises(ValueError):
        unsupported_ratio(np.array([[2]]), 1)


def test_expertise_leaves_debate_metrics_undefined(worked_example):
    w = worked_example
    m = compute_metrics(
        is_debate=False, n_total=7, stances=w["stances"], confidence=None,
        citation=w["citation"], support=w["support"], n_listed=5,
    )
    assert not m[Metric.ONE_SIDED].defined and not m[Metric.OVERCONFIDENT].defined
    assert m[Metric.RELEVANT_STATEMENTS].defined


def test_metrics_dict_roundtrip(worked_example):
    w = worked_example
    m = compute_metrics(
        is_debate=True, n_total=7, stances=w["stances"], confidence=5,
        citation=w["citation"], support=w["support"], n_listed=5,
    )
    back = metrics_from_dict(metrics_to_dict(m))
    assert {k: v.value for k, v in back.items()} == {k: v.value for k, v in m.items()}
    assert ratio_str(back[Metric.CITATION_THOROUGHNESS]) == "4/10"


def test_metric_labels():
    assert Metric.SOURCE_NECESSITY.label == "Source Necessity"
    assert Metric.ONE_SIDED.binary and not Metric.CITATION_ACCURACY.binary


# --- properties against double-loop oracles -----------------------------------


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_accuracy_matches_oracle(cs):
    c, s = cs
    hit, total = loop_accuracy(c.tolist(), s.tolist())
    v = citation_accuracy(c, s)
    assert (v.numerator, v.denominator) == (hit, total)
    if total:
        assert 0 <= v.value <= 1


@settings(max_examples=300, deadline=None)
@given(pairs())
def test_thoroughness_matches_oracle(cs):
    c, s = cs
    hit, total = loop_thoroughness(c.tolist(), s.tolist())
    v = citation_thoroughness(c, s)
    assert (v.numerator, v.denominator) == (hit, total)


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_citations_inside_support_are_fully_accurate(cs):
    c, s = cs
    c = c & s
    v = citation_accuracy(c, s)
    assert not v.defined or v.value == 1


@settings(max_examples=200, deadline=None)
@given(pairs())
def test_ratios_are_in_unit_interval(cs):
    c, s = cs
    n, k = c.shape
    for v in (uncited_sources_ratio(c, k), unsupported_ratio(s, n), source_necessity(s, k)[1]):
        assert not v.defined or 0 <= v.value <= 1


@settings(max_examples=200, deadline=None)
@given(pairs(), st.randoms(use_true_random=False))
def test_metrics_invariant_under_row_permutation(cs, rnd):
    c, s = cs
    order = list(range(c.shape[0]))
    rnd.shuffle(order)
    for fn in (citation_accuracy, citation_thoroughness):
        assert fn(c, s).value == fn(c[order], s[order]).value
    assert source_necessity(s, s.shape[1])[1].value == source_necessity(s[order], s.shape[1])[1].value


@given(st.lists(st.sampled_from(["pro", "con", "neutral"]), max_size=10))
def test_one_sided_iff_not_both(stances):
    assert one_sided(stances) == (not ("pro" in stances and "con" in stances))
