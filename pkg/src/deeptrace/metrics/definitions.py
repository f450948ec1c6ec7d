"""The eight per-answer audit metrics, in exact rational arithmetic.

Ratios keep their unreduced numerator and denominator (``0/5`` stays
``0/5``); a zero denominator makes the metric undefined.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .necessity import DEFAULT_NODE_BUDGET, NecessityResult, necessity


class Metric(str, enum.Enum):
    ONE_SIDED = "one_sided"
    OVERCONFIDENT = "overconfident"
    RELEVANT_STATEMENTS = "relevant_statements"
    UNCITED_SOURCES = "uncited_sources"
    UNSUPPORTED_STATEMENTS = "unsupported_statements"
    SOURCE_NECESSITY = "source_necessity"
    CITATION_ACCURACY = "citation_accuracy"
    CITATION_THOROUGHNESS = "citation_thoroughness"

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def binary(self) -> bool:
        return self in (Metric.ONE_SIDED, Metric.OVERCONFIDENT)


_LABELS = {
    Metric.ONE_SIDED: "One-Sided Answer",
    Metric.OVERCONFIDENT: "Overconfident Answer",
    Metric.RELEVANT_STATEMENTS: "Relevant Statements",
    Metric.UNCITED_SOURCES: "Uncited Sources",
    Metric.UNSUPPORTED_STATEMENTS: "Unsupported Statements",
    Metric.SOURCE_NECESSITY: "Source Necessity",
    Metric.CITATION_ACCURACY: "Citation Accuracy",
    Metric.CITATION_THOROUGHNESS: "Citation Thoroughness",
}

DEBATE_ONLY = (Metric.ONE_SIDED, Metric.OVERCONFIDENT)


class Stance(str, enum.Enum):
    PRO = "pro"
    CON = "con"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class MetricValue:
    name: Metric
    value: Fraction | bool | None
    numerator: int | None = None
    denominator: int | None = None
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def defined(self) -> bool:
        return self.value is not None

    @classmethod
    def ratio(cls, name: Metric, numerator: int, denominator: int, **extras) -> "MetricValue":
        numerator, denominator = int(numerator), int(denominator)
        if denominator == 0:
            return cls(name, None, numerator, denominator, extras)
        return cls(name, Fraction(numerator, denominator), numerator, denominator, extras)

    @classmethod
    def flag(cls, name: Metric, value: bool | None) -> "MetricValue":
        return cls(name, None if value is None else bool(value))

    @classmethod
    def undefined(cls, name: Metric) -> "MetricValue":
        return cls(name, None)

    @property
    def as_fraction(self) -> Fraction | None:
        if self.value is None:
            return None
        if isinstance(self.value, bool):
            return Fraction(int(self.value))
        return self.value

    def to_dict(self) -> dict:
        if isinstance(self.value, bool):
            value = self.value
        elif self.value is None:
            value = None
        else:
            value = f"{self.numerator}/{self.denominator}"
        f = self.as_fraction
        return {
            "value": value,
            "float": None if f is None else float(f),
            "defined": self.defined,
            "extras": dict(self.extras),
        }

    @classmethod
    def from_dict(cls, name: Metric | str, d: dict) -> "MetricValue":
        name = Metric(name)
        value = d.get("value")
        extras = dict(d.get("extras") or {})
        if value is None or not d.get("defined", True):
            return cls(name, None, extras=extras)
        if isinstance(value, bool):
            return cls(name, value, extras=extras)
        num, _, den = str(value).partition("/")
        return cls(name, Fraction(int(num), int(den or 1)), int(num), int(den or 1), extras)


def _binary(matrix, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.int64)
    if m.size == 0:
        m = m.reshape(rows or 0, cols or 0)
    if m.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    if not np.isin(m, (0, 1)).all():
        raise ValueError("matrix cells must be 0 or 1")
    return m


def one_sided(stances: Iterable[Stance | str | None]) -> bool:
    s = {Stance(x) for x in stances if x is not None}
    return not (Stance.PRO in s and Stance.CON in s)


def overconfident(is_one_sided: bool, confidence: int) -> bool:
    return bool(is_one_sided) and confidence == 5


def relevant_ratio(n_relevant: int, n_total: int) -> MetricValue:
    if n_total < 0 or not 0 <= n_relevant <= n_total:
        raise ValueError("need 0 <= n_relevant <= n_total")
    return MetricValue.ratio(Metric.RELEVANT_STATEMENTS, n_relevant, n_total)


def uncited_sources_ratio(citation, n_listed: int) -> MetricValue:
    """All-zero columns of the citation matrix over the number of listed sources."""
    c = _binary(citation, cols=n_listed)
    if c.shape[1] != n_listed:
        raise ValueError(f"citation matrix has {c.shape[1]} columns, expected {n_listed}")
    empty = int((c.sum(axis=0) == 0).sum()) if n_listed else 0
    return MetricValue.ratio(Metric.UNCITED_SOURCES, empty, n_listed)


def unsupported_ratio(support, n_relevant: int) -> MetricValue:
    s = _binary(support, rows=n_relevant)
    if s.shape[0] != n_relevant:
        raise ValueError(f"support matrix has {s.shape[0]} rows, expected {n_relevant}")
    unsupported = int((s.sum(axis=1) == 0).sum())
    return MetricValue.ratio(Metric.UNSUPPORTED_STATEMENTS, unsupported, n_relevant)


def source_necessity(
    support,
    n_listed: int,
    columns: Sequence[int] | None = None,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    greedy_fallback: bool = True,
) -> tuple[NecessityResult, MetricValue]:
    """Minimum necessary sources over all listed sources.

    ``columns`` maps support-matrix columns to 1-based listing indices when
    inaccessible sources were dropped.
    """
    s = _binary(support)
    result = necessity(s, columns, node_budget=node_budget, greedy_fallback=greedy_fallback)
    value = MetricValue.ratio(
        Metric.SOURCE_NECESSITY,
        result.cover_size,
        n_listed,
        cover=sorted(result.necessary_sources),
        matching_size=result.matching_size,
        approximate=result.approximate,
    )
    return result, value


def _aligned(citation, support, support_columns: Sequence[int] | None) -> tuple[np.ndarray, np.ndarray]:
    c = _binary(citation)
    s = _binary(support, rows=c.shape[0])
    if s.shape[0] != c.shape[0]:
        raise ValueError("citation and support matrices must have the same rows")
    if support_columns is None:
        if s.shape != c.shape:
            raise ValueError("citation and support shapes differ; pass support_columns")
        return c, s
    cols = [int(j) - 1 for j in support_columns]
    if len(cols) != s.shape[1]:
        raise ValueError("support_columns length does not match support matrix width")
    return c[:, cols], s


def citation_overlap(citation, support, support_columns: Sequence[int] | None = None) -> int:
    c, s = _aligned(citation, support, support_columns)
    return int((c * s).sum())


def citation_accuracy(citation, support, support_columns: Sequence[int] | None = None) -> MetricValue:
    """Citations backed by support, over citations to accessible sources."""
    c, s = _aligned(citation, support, support_columns)
    return MetricValue.ratio(Metric.CITATION_ACCURACY, int((c * s).sum()), int(c.sum()))


def citation_thoroughness(citation, support, support_columns: Sequence[int] | None = None) -> MetricValue:
    """Citations backed by support, over all support relationships."""
    c, s = _aligned(citation, support, support_columns)
    return MetricValue.ratio(Metric.CITATION_THOROUGHNESS, int((c * s).sum()), int(s.sum()))


def compute_metrics(
    *,
    is_debate: bool,
    n_total: int,
    stances: Sequence[Stance | str | None],
    confidence: int | None,
    citation,
    support,
    n_listed: int,
    support_columns: Sequence[int] | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    greedy_fallback: bool = True,
) -> dict[Metric, MetricValue]:
    """All eight metrics for one answer; rows of both matrices are the relevant statements."""
    n_relevant = len(stances)
    c = _binary(citation, rows=n_relevant, cols=n_listed)
    cols = list(support_columns) if support_columns is not None else list(range(1, n_listed + 1))
    s = _binary(support, rows=n_relevant, cols=len(cols))
    out: dict[Metric, MetricValue] = {}
    if is_debate:
        side = one_sided(stances)
        out[Metric.ONE_SIDED] = MetricValue.flag(Metric.ONE_SIDED, side)
        over = None if confidence is None else overconfident(side, confidence)
        out[Metric.OVERCONFIDENT] = MetricValue(Metric.OVERCONFIDENT, over, extras={"confidence": confidence})
    else:
        out[Metric.ONE_SIDED] = MetricValue.undefined(Metric.ONE_SIDED)
        out[Metric.OVERCONFIDENT] = MetricValue.undefined(Metric.OVERCONFIDENT)
    out[Metric.RELEVANT_STATEMENTS] = relevant_ratio(n_relevant, n_total)
    out[Metric.UNCITED_SOURCES] = uncited_sources_ratio(c, n_listed)
    out[Metric.UNSUPPORTED_STATEMENTS] = unsupported_ratio(s, n_relevant)
    _, out[Metric.SOURCE_NECESSITY] = source_necessity(
        s, n_listed, cols, node_budget=node_budget, greedy_fallback=greedy_fallback
    )
    out[Metric.CITATION_ACCURACY] = citation_accuracy(c, s, cols)
    out[Metric.CITATION_THOROUGHNESS] = citation_thoroughness(c, s, cols)
    return out


def metrics_to_dict(metrics: dict[Metric, MetricValue]) -> dict:
    return {m.value: metrics[m].to_dict() for m in Metric if m in metrics}


def metrics_from_dict(d: dict) -> dict[Metric, MetricValue]:
    return {Metric(k): MetricValue.from_dict(k, v) for k, v in d.items()}
