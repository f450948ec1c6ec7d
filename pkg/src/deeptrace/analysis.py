"""Per-record analysis: relevant statements, citation matrix and factual-support matrix.

Both matrices have one row per *relevant* statement. The citation matrix has
one column per listed source; the support matrix keeps only accessible
sources and records their listing indices in ``support_columns``.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import JudgeProtocolError, StanceSizeMismatch
from .fetcher import FetchOutcome
from .judge import DecompositionResult, Judge, StanceResult, SupportVerdict
from .metrics import Stance, compute_metrics
from .transcript import CitationMark

logger = logging.getLogger(__name__)

RECORD_SCHEMA = "deeptrace.audit_record/1"

PARTIAL_COUNT = "count"
PARTIAL_IGNORE = "ignore"


@dataclass(frozen=True)
class Statement:
    index: int  # 1-based among relevant statements; 0 for filler
    position: int  # 0-based sentence position in the answer
    text: str
    relevant: bool
    span: tuple[int, int] = (0, 0)
    stance: Stance | None = None

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "position": self.position,
            "text": self.text,
            "relevant": self.relevant,
            "span": list(self.span),
            "stance": None if self.stance is None else self.stance.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Statement":
        return cls(
            index=int(d["index"]),
            position=int(d["position"]),
            text=d["text"],
            relevant=bool(d["relevant"]),
            span=tuple(d.get("span", (0, 0))),
            stance=None if d.get("stance") is None else Stance(d["stance"]),
        )


@dataclass(frozen=True)
class SourceEntry:
    index: int
    url: str
    accessible: bool
    status: str = "ok"
    title: str | None = None

    def to_dict(self) -> dict:
        return {"index": self.index, "url": self.url, "title": self.title, "accessible": self.accessible, "status": self.status}

    @classmethod
    def from_dict(cls, d: dict) -> "SourceEntry":
        return cls(int(d["index"]), d["url"], bool(d["accessible"]), d.get("status", "ok"), d.get("title"))


@dataclass(frozen=True)
class SupportAnalysis:
    statements: tuple[Statement, ...]
    sources: tuple[SourceEntry, ...]
    citation: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        n, k = len(self.statements), len(self.sources)
        if self.citation.shape != (n, k):
            raise ValueError(f"citation matrix is {self.citation.shape}, expected {(n, k)}")
        if self.support.shape != (n, len(self.support_columns)):
            raise ValueError(f"support matrix is {self.support.shape}, expected {(n, len(self.support_columns))}")
        for m in (self.citation, self.support):
            if m.size and not np.isin(m, (0, 1)).all():
                raise ValueError("matrix cells must be 0 or 1")

    @property
    def support_columns(self) -> list[int]:
        return [s.index for s in self.sources if s.accessible]


def build_statements(
    decomp: DecompositionResult, stance: StanceResult | None = None
) -> tuple[list[Statement], list[Statement]]:
    """Split decomposed sentences into (relevant, filler).

    Relevant statements are numbered 1..N in answer order; ``stance`` indices
    refer to that numbering.
    """
    n_relevant = sum(1 for s in decomp.sentences if s.core)
    labels: dict[int, Stance] = {}
    if stance is not None:
        if stance.size != n_relevant or set(stance.agree | stance.disagree | stance.neutral) != set(range(1, n_relevant + 1)):
            raise StanceSizeMismatch(n_relevant, stance.size)
        labels.update({i: Stance.PRO for i in stance.agree})
        labels.update({i: Stance.CON for i in stance.disagree})
        labels.update({i: Stance.NEUTRAL for i in stance.neutral})
    relevant: list[Statement] = []
    filler: list[Statement] = []
    for pos, s in enumerate(decomp.sentences):
        if s.core:
            i = len(relevant) + 1
            relevant.append(Statement(i, pos, s.text, True, s.span, labels.get(i)))
        else:
            filler.append(Statement(0, pos, s.text, False, s.span))
    return relevant, filler


def build_citation_matrix(statements: Sequence[Statement], marks: Sequence[CitationMark], n_sources: int) -> np.ndarray:
    """Cell (i, j) is 1 iff relevant statement i carries a mark citing source j.

    Marks must already be attached to sentence positions. Dangling indices
    and marks on filler sentences contribute nothing.
    """
    row_of = {s.position: r for r, s in enumerate(statements)}
    m = np.zeros((len(statements), n_sources), dtype=np.uint8)
    for mark in marks:
        r = row_of.get(mark.sentence)
        if r is None:
            continue
        for j in mark.valid_indices:
            m[r, j - 1] = 1
    return m


def count_discarded_marks(statements: Sequence[Statement], marks: Sequence[CitationMark]) -> int:
    positions = {s.position for s in statements}
    return sum(1 for m in marks if m.sentence not in positions)


def build_support_matrix(
    statements: Sequence[Statement],
    outcomes: Sequence[FetchOutcome],
    judge: Judge,
    partial: str = PARTIAL_IGNORE,
) -> tuple[np.ndarray, list[int]]:
    """Judge every (relevant statement, accessible source) pair.

    ``outcomes`` are aligned with listed sources (1-based listing index =
    position + 1). Returns the matrix and the listing index of each column.
    ``partial`` is ``"ignore"`` (Partial counts as unsupported) or ``"count"``.
    """
    if partial not in (PARTIAL_COUNT, PARTIAL_IGNORE):
        raise ValueError(f"partial policy must be 'count' or 'ignore', got {partial!r}")
    columns = [j + 1 for j, o in enumerate(outcomes) if o.accessible]
    m = np.zeros((len(statements), len(columns)), dtype=np.uint8)
    cells = [(r, c) for r in range(len(statements)) for c in range(len(columns))]
    if not cells:
        return m, columns

    def job(cell):
        r, c = cell
        src = outcomes[columns[c] - 1]
        try:
            return judge.judge_support(src.text or "", statements[r].text, context=f"row {r + 1}, source {columns[c]}")
        except JudgeProtocolError as exc:
            raise JudgeProtocolError(exc.task, exc.attempts, exc.last_reply, f"row {r + 1}, source {columns[c]}") from exc

    with ThreadPoolExecutor(max_workers=min(judge.cfg.max_in_flight, len(cells))) as pool:
        verdicts = list(pool.map(job, cells))
    for (r, c), v in zip(cells, verdicts):
        if v is SupportVerdict.FULL or (v is SupportVerdict.PARTIAL and partial == PARTIAL_COUNT):
            m[r, c] = 1
    return m, columns


def _matrix_to_list(m: np.ndarray) -> list[list[int]]:
    return [[int(x) for x in row] for row in m]


def _matrix_from_list(rows, n_rows: int, n_cols: int) -> np.ndarray:
    m = np.asarray(rows, dtype=np.uint8)
    if m.size == 0:
        m = m.reshape(n_rows, n_cols)
    return m


@dataclass
class AuditRecord:
    """Everything derived from one (query, engine) transcript.

    Serialized with :meth:`to_dict`; the metric engine needs nothing else.
    """

    query_id: str
    query_text: str
    category: str
    engine: str
    answer_text: str
    statements: list[Statement]
    filler: list[Statement]
    sources: list[SourceEntry]
    marks: list[CitationMark]
    citation: np.ndarray
    support: np.ndarray
    confidence: int | None = None
    captured_at: str | None = None
    partial_policy: str = PARTIAL_IGNORE
    diagnostics: dict = field(default_factory=dict)

    @property
    def is_debate(self) -> bool:
        return self.category == "debate"

    @property
    def n_total(self) -> int:
        return len(self.statements) + len(self.filler)

    @property
    def support_columns(self) -> list[int]:
        return [s.index for s in self.sources if s.accessible]

    @property
    def analysis(self) -> SupportAnalysis:
        return SupportAnalysis(tuple(self.statements), tuple(self.sources), self.citation, self.support)

    @property
    def n_citations(self) -> int:
        """Distinct (sentence, source) citation pairs across all sentences, dangling excluded."""
        pairs = {(m.sentence, j) for m in self.marks for j in m.valid_indices}
        return len(pairs)

    def to_dict(self) -> dict:
        return {
            "schema": RECORD_SCHEMA,
            "query": {"id": self.query_id, "text": self.query_text, "category": self.category},
            "engine": self.engine,
            "captured_at": self.captured_at,
            "answer_text": self.answer_text,
            "statements": [s.to_dict() for s in self.statements],
            "filler": [s.to_dict() for s in self.filler],
            "confidence": self.confidence,
            "sources": [s.to_dict() for s in self.sources],
            "marks": [m.to_dict() for m in self.marks],
            "citation_matrix": _matrix_to_list(self.citation),
            "support_matrix": _matrix_to_list(self.support),
            "support_columns": self.support_columns,
            "policy": {"partial_support": self.partial_policy},
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditRecord":
        if d.get("schema") != RECORD_SCHEMA:
            raise ValueError(f"unsupported record schema {d.get('schema')!r}")
        statements = [Statement.from_dict(s) for s in d["statements"]]
        sources = [SourceEntry.from_dict(s) for s in d["sources"]]
        n_acc = sum(s.accessible for s in sources)
        rec = cls(
            query_id=d["query"]["id"],
            query_text=d["query"]["text"],
            category=d["query"]["category"],
            engine=d["engine"],
            answer_text=d.get("answer_text", ""),
            statements=statements,
            filler=[Statement.from_dict(s) for s in d.get("filler", [])],
            sources=sources,
            marks=[CitationMark.from_dict(m) for m in d.get("marks", [])],
            citation=_matrix_from_list(d["citation_matrix"], len(statements), len(sources)),
            support=_matrix_from_list(d["support_matrix"], len(statements), n_acc),
            confidence=d.get("confidence"),
            captured_at=d.get("captured_at"),
            partial_policy=d.get("policy", {}).get("partial_support", PARTIAL_IGNORE),
            diagnostics=d.get("diagnostics", {}),
        )
        if d.get("support_columns") is not None and list(d["support_columns"]) != rec.support_columns:
            raise ValueError("support_columns disagree with the accessibility map")
        rec.analysis  # validates matrix shapes
        return rec

    def save(self, path: str | PathLike) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | PathLike) -> "AuditRecord":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def record_metrics(record: AuditRecord, **kwargs):
    """Compute the eight metrics from a record alone (no judge, no network)."""
    return compute_metrics(
        is_debate=record.is_debate,
        n_total=record.n_total,
        stances=[s.stance for s in record.statements],
        confidence=record.confidence,
        citation=record.citation,
        support=record.support,
        n_listed=len(record.sources),
        support_columns=record.support_columns,
        **kwargs,
    )
