"""Per-engine scorecards: macro-aggregation, threshold classes and report rendering.

Thresholds are half-open percent intervals ``[lo, hi)`` that partition
``[0, 100)``; a value of exactly 100 falls in the interval ending at 100.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from numbers import Real
from os import PathLike
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import MixedEngines, ThresholdTableError, UnknownMetric
from .metrics import DEBATE_ONLY, Metric, MetricValue, metrics_from_dict, metrics_to_dict

SCORECARD_SCHEMA = "deeptrace.scorecards/1"
RECORD_METRICS_SCHEMA = "deeptrace.record_metrics/1"

SECTIONS = (
    ("Answer Text Metrics", (Metric.ONE_SIDED, Metric.OVERCONFIDENT, Metric.RELEVANT_STATEMENTS)),
    ("Sources Metrics", (Metric.UNCITED_SOURCES, Metric.UNSUPPORTED_STATEMENTS, Metric.SOURCE_NECESSITY)),
    ("Citation Metrics", (Metric.CITATION_ACCURACY, Metric.CITATION_THOROUGHNESS)),
)
BASIC_STATS = (
    ("mean_sources", "Number of Sources"),
    ("mean_statements", "Number of Statements"),
    ("mean_citations_per_statement", "# Citations / Statement"),
)


class Classification(str, enum.Enum):
    ACCEPTABLE = "acceptable"
    BORDERLINE = "borderline"
    PROBLEMATIC = "problematic"

    @property
    def label(self) -> str:
        return self.value.capitalize()


def _metric(name) -> Metric:
    try:
        return name if isinstance(name, Metric) else Metric(str(name))
    except ValueError:
        raise UnknownMetric(str(name)) from None


@dataclass(frozen=True)
class ThresholdTable:
    intervals: Mapping[Metric, Mapping[Classification, tuple[Fraction, Fraction]]]

    def __post_init__(self):
        for metric, bands in self.intervals.items():
            if set(bands) != set(Classification):
                raise ThresholdTableError(f"{metric.value}: need acceptable, borderline and problematic")
            ordered = sorted(bands.values())
            if ordered[0][0] != 0 or ordered[-1][1] != 100:
                raise ThresholdTableError(f"{metric.value}: intervals must span [0, 100)")
            for (lo, hi), (nlo, _) in zip(ordered, ordered[1:] + [(Fraction(100), None)]):
                if not lo < hi:
                    raise ThresholdTableError(f"{metric.value}: empty interval [{lo}, {hi})")
                if hi != nlo:
                    raise ThresholdTableError(f"{metric.value}: gap or overlap at {hi}")

    @classmethod
    def from_mapping(cls, data: Mapping, base: "ThresholdTable | None" = None) -> "ThresholdTable":
        intervals = {m: dict(b) for m, b in base.intervals.items()} if base is not None else {}
        for name, bands in data.items():
            metric = _metric(name)
            intervals[metric] = {
                Classification(k): (Fraction(str(v[0])), Fraction(str(v[1]))) for k, v in bands.items()
            }
        return cls(intervals)

    @classmethod
    def default(cls) -> "ThresholdTable":
        raw = resources.files("deeptrace").joinpath("data", "thresholds.json").read_text(encoding="utf-8")
        return cls.from_mapping(json.loads(raw))

    @classmethod
    def load(cls, path: str | PathLike) -> "ThresholdTable":
        """Defaults overridden metric-by-metric by the JSON file at ``path``."""
        return cls.from_mapping(json.loads(Path(path).read_text(encoding="utf-8")), base=cls.default())

    def to_dict(self) -> dict:
        return {
            m.value: {c.value: [_num(lo), _num(hi)] for c, (lo, hi) in sorted(b.items(), key=lambda kv: kv[1])}
            for m, b in sorted(self.intervals.items(), key=lambda kv: kv[0].value)
        }


def _num(x: Fraction):
    return int(x) if x.denominator == 1 else float(x)


def classify(value_percent: Real, metric: Metric | str, table: ThresholdTable | None = None) -> Classification:
    table = table or ThresholdTable.default()
    metric = _metric(metric)
    if metric not in table.intervals:
        raise UnknownMetric(metric.value)
    v = Fraction(value_percent) if not isinstance(value_percent, float) else Fraction(str(value_percent))
    if not 0 <= v <= 100:
        raise ValueError(f"percent value out of range: {value_percent}")
    for cls_, (lo, hi) in table.intervals[metric].items():
        if lo <= v < hi or (v == 100 and hi == 100):
            return cls_
    raise AssertionError("threshold table does not partition [0, 100]")  # pragma: no cover


@dataclass(frozen=True)
class RecordSummary:
    """Per-record metrics plus the counts that feed the basic-statistics rows."""

    query_id: str
    engine: str
    category: str
    metrics: dict[Metric, MetricValue]
    n_sources: int
    n_statements: int
    n_citations: int
    confidence: int | None = None

    def to_dict(self) -> dict:
        return {
            "schema": RECORD_METRICS_SCHEMA,
            "query_id": self.query_id,
            "engine": self.engine,
            "category": self.category,
            "confidence": self.confidence,
            "stats": {"n_sources": self.n_sources, "n_statements": self.n_statements, "n_citations": self.n_citations},
            "metrics": metrics_to_dict(self.metrics),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RecordSummary":
        return cls(
            query_id=d["query_id"],
            engine=d["engine"],
            category=d["category"],
            metrics=metrics_from_dict(d["metrics"]),
            n_sources=int(d["stats"]["n_sources"]),
            n_statements=int(d["stats"]["n_statements"]),
            n_citations=int(d["stats"]["n_citations"]),
            confidence=d.get("confidence"),
        )


@dataclass(frozen=True)
class MetricSummary:
    mean_percent: Fraction | None
    classification: Classification | None
    n_defined: int


@dataclass(frozen=True)
class Scorecard:
    engine: str
    n_queries: int
    n_debate: int
    per_metric: dict[Metric, MetricSummary]
    basic_stats: dict[str, Fraction | None]
    confidence_histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "engine": self.engine,
            "n_queries": self.n_queries,
            "n_debate": self.n_debate,
            "metrics": {
                m.value: {
                    "mean_percent": _round(s.mean_percent, 6),
                    "exact": _exact(s.mean_percent),
                    "classification": None if s.classification is None else s.classification.value,
                    "n_defined": s.n_defined,
                }
                for m, s in ((m, self.per_metric[m]) for m in Metric)
            },
            "basic_stats": {k: _round(self.basic_stats.get(k), 6) for k, _ in BASIC_STATS},
            "confidence_histogram": {str(k): self.confidence_histogram.get(k, 0) for k in range(1, 6)},
        }


def _exact(x: Fraction | None) -> str | None:
    return None if x is None else f"{x.numerator}/{x.denominator}"


def _round(x: Fraction | None, places: int) -> float | None:
    return None if x is None else round(float(x), places)


def _mean(values: Sequence[Fraction]) -> Fraction | None:
    return sum(values, Fraction(0)) / len(values) if values else None


def aggregate(records: Iterable[RecordSummary], engine: str | None = None, table: ThresholdTable | None = None) -> Scorecard:
    """Macro-average per-record metrics for one engine.

    Undefined per-record values are left out and counted in ``n_defined``.
    Debate-only metrics are naturally restricted to debate records because
    they are undefined elsewhere.
    """
    records = list(records)
    engines = {r.engine for r in records}
    if engine is not None:
        engines.add(engine)
    if len(engines) > 1:
        raise MixedEngines(engines)
    if not engines:
        raise ValueError("cannot aggregate zero records without an engine name")
    engine = engines.pop()
    table = table or ThresholdTable.default()
    per_metric = {}
    for m in Metric:
        vals = []
        for r in records:
            v = r.metrics.get(m)
            if v is None or not v.defined or (m in DEBATE_ONLY and r.category != "debate"):
                continue
            vals.append(v.as_fraction)
        mean = _mean(vals)
        pct = None if mean is None else mean * 100
        per_metric[m] = MetricSummary(pct, None if pct is None else classify(pct, m, table), len(vals))
    cps = [Fraction(r.n_citations, r.n_statements) for r in records if r.n_statements]
    basic = {
        "mean_sources": _mean([Fraction(r.n_sources) for r in records]),
        "mean_statements": _mean([Fraction(r.n_statements) for r in records]),
        "mean_citations_per_statement": _mean(cps),
    }
    hist = {k: 0 for k in range(1, 6)}
    for r in records:
        if r.category == "debate" and r.confidence in hist:
            hist[r.confidence] += 1
    return Scorecard(
        engine=engine,
        n_queries=len(records),
        n_debate=sum(r.category == "debate" for r in records),
        per_metric=per_metric,
        basic_stats=basic,
        confidence_histogram=hist,
    )


def aggregate_by_engine(records: Iterable[RecordSummary], table: ThresholdTable | None = None) -> list[Scorecard]:
    groups: dict[str, list[RecordSummary]] = {}
    for r in records:
        groups.setdefault(r.engine, []).append(r)
    return [aggregate(groups[e], e, table) for e in sorted(groups)]


def format_one_decimal(x: Fraction | None) -> str:
    """Round half up to one decimal, exactly."""
    if x is None:
        return "n/a"
    tenths = int((Fraction(x) * 10 + Fraction(1, 2)) // 1)
    sign = "-" if tenths < 0 else ""
    tenths = abs(tenths)
    return f"{sign}{tenths // 10}.{tenths % 10}"


def render_report(scorecards: Sequence[Scorecard], fmt: str = "markdown") -> str:
    """Render scorecards side by side, engines ordered by name."""
    if not scorecards:
        raise ValueError("need at least one scorecard")
    cards = sorted(scorecards, key=lambda s: s.engine)
    if fmt == "json":
        doc = {"schema": SCORECARD_SCHEMA, "aggregation": "macro", "scorecards": [c.to_dict() for c in cards]}
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}")
    n = len(cards)
    lines = [
        "# DeepTRACE scorecard",
        "",
        "| Metric | " + " | ".join(c.engine for c in cards) + " |",
        "|---|" + "---:|" * n,
        "| **Basic Statistics** |" + " |" * n,
    ]
    for key, label in BASIC_STATS:
        lines.append(f"| {label} | " + " | ".join(format_one_decimal(c.basic_stats.get(key)) for c in cards) + " |")
    for title, metrics in SECTIONS:
        lines.append(f"| **{title}** |" + " |" * n)
        for m in metrics:
            cells = []
            for c in cards:
                s = c.per_metric[m]
                cell = format_one_decimal(s.mean_percent)
                if s.classification is not None:
                    cell += f" ({s.classification.label})"
                cells.append(cell)
            lines.append(f"| %{m.label} | " + " | ".join(cells) + " |")
    lines.append("")
    lines.append("Queries per engine: " + ", ".join(f"{c.engine}={c.n_queries} ({c.n_debate} debate)" for c in cards) + ".")
    return "\n".join(lines) + "\n"
