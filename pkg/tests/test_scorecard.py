import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from deeptrace.errors import MixedEngines, ThresholdTableError, UnknownMetric
from deeptrace.metrics import Metric, MetricValue
from deeptrace.scorecard import (
    Classification,
    RecordSummary,
    ThresholdTable,
    aggregate,
    aggregate_by_engine,
    classify,
    format_one_decimal,
    render_report,
)

A, B, P = Classification.ACCEPTABLE, Classification.BORDERLINE, Classification.PROBLEMATIC


def summary(qid, engine="alpha", category="debate", one_sided=None, relevant=(1, 1), n_sources=2, n_statements=2, n_citations=1, confidence=None):
    metrics = {m: MetricValue.undefined(m) for m in Metric}
    if category == "debate":
        side = bool(one_sided)
        metrics[Metric.ONE_SIDED] = MetricValue.flag(Metric.ONE_SIDED, side)
        metrics[Metric.OVERCONFIDENT] = MetricValue.flag(Metric.OVERCONFIDENT, side and confidence == 5)
    metrics[Metric.RELEVANT_STATEMENTS] = MetricValue.ratio(Metric.RELEVANT_STATEMENTS, *relevant)
    return RecordSummary(qid, engine, category, metrics, n_sources, n_statements, n_citations, confidence)


@pytest.mark.parametrize(
    "value, metric, expected",
    [
        (36.2, "uncited_sources", P),
        (0.0, "one_sided", A),
        (20.0, "overconfident", B),
        (19.4, "overconfident", A),
        (83.4, "one_sided", P),
        (39.8, "citation_accuracy", P),
        (100, "citation_accuracy", A),
        (100, "one_sided", P),
        (0, "relevant_statements", P),
        (90, "relevant_statements", A),
        (89.99, "relevant_statements", B),
        (50, "citation_thoroughness", A),
        (Fraction(1, 3) * 100, "source_necessity", P),
    ],
)
def test_classify_examples(value, metric, expected):
    assert classify(value, metric) is expected


def test_classify_unknown_metric():
    with pytest.raises(UnknownMetric):
        classify(10, "vibes")


def test_classify_out_of_range():
    with pytest.raises(ValueError):
        classify(100.5, Metric.ONE_SIDED)


def test_every_boundary_in_exactly_one_class():
    table = ThresholdTable.default()
    for metric, intervals in table.intervals.items():
        for lo, hi in intervals.values():
            for edge in (lo, hi):
                hits = [c for c, (a, b) in intervals.items() if a <= edge < b or (edge == 100 and b == 100)]
                assert len(hits) == 1
                assert classify(edge, metric) is hits[0]


@given(st.fractions(min_value=0, max_value=100), st.sampled_from(list(Metric)))
def test_classify_total(v, metric):
    assert classify(v, metric) in Classification


def test_threshold_override(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"one_sided": {"acceptable": [0, 60], "borderline": [60, 80], "problematic": [80, 100]}}))
    table = ThresholdTable.load(path)
    assert classify(51.6, "one_sided", table) is A
    assert classify(36.2, "uncited_sources", table) is P  # untouched metrics keep defaults


@pytest.mark.parametrize(
    "bad",
    [
        {"acceptable": [0, 30], "borderline": [20, 40], "problematic": [40, 100]},
        {"acceptable": [0, 20], "borderline": [25, 40], "problematic": [40, 100]},
        {"acceptable": [0, 20], "borderline": [20, 40]},
    ],
)
def test_threshold_table_must_partition(bad):
    with pytest.raises(ThresholdTableError):
        ThresholdTable.from_mapping({"one_sided": bad})


def test_threshold_table_roundtrip():
    t = ThresholdTable.default()
    assert ThresholdTable.from_mapping(t.to_dict()) == t


def test_aggregate_one_sided_half():
    card = aggregate([summary("q1", one_sided=True), summary("q2", one_sided=False)])
    s = card.per_metric[Metric.ONE_SIDED]
    assert s.mean_percent == 50 and s.n_defined == 2
    assert format_one_decimal(s.mean_percent) == "50.0"
    assert s.classification is P


def test_aggregate_relevance_mean():
    card = aggregate([summary("q1", relevant=(6, 7)), summary("q2", relevant=(3, 3))])
    assert format_one_decimal(card.per_metric[Metric.RELEVANT_STATEMENTS].mean_percent) == "92.9"


def test_debate_only_metrics_skip_expertise():
    card = aggregate([summary("q1", one_sided=True), summary("q2", category="expertise")])
    assert card.per_metric[Metric.ONE_SIDED].n_defined == 1
    assert card.per_metric[Metric.ONE_SIDED].mean_percent == 100
    assert card.per_metric[Metric.RELEVANT_STATEMENTS].n_defined == 2
    assert card.n_debate == 1


def test_undefined_metric_has_no_class():
    card = aggregate([summary("q1", category="expertise")])
    s = card.per_metric[Metric.CITATION_ACCURACY]
    assert s.mean_percent is None and s.classification is None and s.n_defined == 0


def test_confidence_histogram_counts_debate_only():
    card = aggregate([summary("q1", confidence=5), summary("q2", confidence=5), summary("q3", category="expertise", confidence=2)])
    assert card.confidence_histogram == {1: 0, 2: 0, 3: 0, 4: 0, 5: 2}


def test_basic_stats():
    card = aggregate([summary("q1", n_sources=3, n_statements=4, n_citations=2), summary("q2", n_sources=1, n_statements=2, n_citations=2)])
    assert card.basic_stats["mean_sources"] == 2
    assert card.basic_stats["mean_statements"] == 3
    assert card.basic_stats["mean_citations_per_statement"] == Fraction(3, 4)


def test_mixed_engines_rejected():
    with pytest.raises(MixedEngines):
        aggregate([summary("q1", engine="a"), summary("q2", engine="b")])


def test_aggregate_permutation_invariant():
    recs = [summary(f"q{i}", one_sided=i % 3 == 0, relevant=(i % 4, 4)) for i in range(1, 12)]
    base = aggregate(recs).to_dict()
    rnd = random.Random(3)
    for _ in range(5):
        rnd.shuffle(recs)
        assert aggregate(recs).to_dict() == base


def test_one_decimal_rounds_half_up():
    assert format_one_decimal(Fraction(925, 1000) * 100) == "92.5"
    assert format_one_decimal(Fraction(1, 20)) == "0.1"
    assert format_one_decimal(Fraction(2, 3) * 100) == "66.7"
    assert format_one_decimal(None) == "n/a"


def test_markdown_structure_and_determinism():
    cards = [aggregate([summary("q1", one_sided=True)])]
    md = render_report(cards, "markdown")
    assert md == render_report(cards, "markdown")
    rows = [l for l in md.splitlines() if l.startswith("| ") and not l.startswith("| **") and not l.startswith("| Metric")]
    assert len(rows) == 11
    assert sum(1 for r in rows if r.startswith("| %")) == 8
    for section in ("Answer Text Metrics", "Sources Metrics", "Citation Metrics"):
        assert f"| **{section}** |" in md


def test_two_engines_ordered_by_name():
    recs = [summary("q1", engine="zeta"), summary("q1", engine="alpha")]
    md = render_report(aggregate_by_engine(recs))
    assert "| Metric | alpha | zeta |" in md
    doc = json.loads(render_report(aggregate_by_engine(list(reversed(recs))), "json"))
    assert [c["engine"] for c in doc["scorecards"]] == ["alpha", "zeta"]


def test_json_report_is_byte_stable():
    cards = aggregate_by_engine([summary("q1"), summary("q2", engine="b")])
    assert render_report(cards, "json") == render_report(list(reversed(cards)), "json")


def test_render_requires_a_scorecard():
    with pytest.raises(ValueError):
        render_report([])


def test_record_summary_roundtrip():
    s = summary("q1", one_sided=True, confidence=5)
    back = RecordSummary.from_dict(json.loads(json.dumps(s.to_dict())))
    assert back.to_dict() == s.to_dict()
