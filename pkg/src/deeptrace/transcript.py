"""Captured engine transcripts and the inline citation-marker grammar.

A transcript file holds one (query, engine) capture::

    {
      "query_id": "q1",
      "engine": "perplexity",
      "answer_text": "Solar is growing [1][4]. Costs fell [2, 3].",
      "listed_sources": [{"index": 1, "url": "https://...", "title": "..."}, ...],
      "captured_at": "2025-08-27T12:00:00Z"
    }

Recognized markers are bracketed integers: ``[n]``, ``[n, m, ...]``, ranges
``[n-m]`` and adjacent runs such as ``[1][4]``, which form a single mark.
"""

from __future__ import annotations

import bisect
import json
import re
from dataclasses import dataclass, field, replace
from datetime import datetime
from os import PathLike
from pathlib import Path
from typing import Sequence

from .errors import MalformedTranscript, NonContiguousSourceIndices

__all__ = [
    "ListedSource",
    "Transcript",
    "CitationMark",
    "MAX_RANGE_EXPANSION",
    "load_transcript",
    "parse_transcript",
    "transcript_filename",
    "parse_citation_marks",
    "strip_citation_marks",
    "attach_marks",
]

MAX_RANGE_EXPANSION = 50

_ITEM = r"\d{1,6}(?:\s*[-–]\s*\d{1,6})?"
_BRACKET = rf"\[\s*{_ITEM}(?:\s*,\s*{_ITEM})*\s*\]"
_MARK_RE = re.compile(rf"(?:{_BRACKET})+")
_BRACKET_RE = re.compile(_BRACKET)
_ITEM_RE = re.compile(r"(\d+)(?:\s*[-–]\s*(\d+))?")


@dataclass(frozen=True)
class ListedSource:
    index: int
    url: str
    title: str | None = None

    def to_dict(self) -> dict:
        return {"index": self.index, "url": self.url, "title": self.title}


@dataclass(frozen=True)
class Transcript:
    query_id: str
    engine: str
    answer_text: str
    listed_sources: tuple[ListedSource, ...]
    captured_at: str | None = None

    @property
    def n_sources(self) -> int:
        return len(self.listed_sources)

    def to_dict(self) -> dict:
        return {
            "query_id": self.query_id,
            "engine": self.engine,
            "answer_text": self.answer_text,
            "listed_sources": [s.to_dict() for s in self.listed_sources],
            "captured_at": self.captured_at,
        }


@dataclass(frozen=True)
class CitationMark:
    """One recognized marker run.

    ``span`` is the half-open character range of the marker in the answer.
    ``sentence`` is the 0-based sentence position once :func:`attach_marks`
    has run.
    """

    span: tuple[int, int]
    source_indices: frozenset[int]
    dangling_indices: frozenset[int] = field(default_factory=frozenset)
    sentence: int | None = None

    @property
    def dangling(self) -> bool:
        return bool(self.dangling_indices)

    @property
    def valid_indices(self) -> frozenset[int]:
        return self.source_indices - self.dangling_indices

    def to_dict(self) -> dict:
        return {
            "span": list(self.span),
            "source_indices": sorted(self.source_indices),
            "dangling_indices": sorted(self.dangling_indices),
            "sentence": self.sentence,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CitationMark":
        return cls(
            span=(int(d["span"][0]), int(d["span"][1])),
            source_indices=frozenset(d["source_indices"]),
            dangling_indices=frozenset(d.get("dangling_indices", ())),
            sentence=d.get("sentence"),
        )


def transcript_filename(query_id: str, engine: str) -> str:
    return f"{query_id}__{engine}.json"


def _parse_sources(raw) -> tuple[ListedSource, ...]:
    if not isinstance(raw, list):
        raise MalformedTranscript("listed_sources must be a list")
    parsed = []
    for pos, item in enumerate(raw, start=1):
        if isinstance(item, str):
            item = {"url": item}
        if not isinstance(item, dict) or not isinstance(item.get("url"), str):
            raise MalformedTranscript(f"listed source #{pos} has no url")
        index = item.get("index", pos)
        if isinstance(index, bool) or not isinstance(index, int):
            raise MalformedTranscript(f"listed source #{pos} has a non-integer index")
        title = item.get("title")
        parsed.append(ListedSource(index=index, url=item["url"].strip(), title=title))
    indices = [s.index for s in parsed]
    if sorted(indices) != list(range(1, len(parsed) + 1)):
        raise NonContiguousSourceIndices(indices)
    # Files may list sources out of order; listing order follows the declared index.
    return tuple(sorted(parsed, key=lambda s: s.index))


def parse_transcript(obj) -> Transcript:
    if not isinstance(obj, dict):
        raise MalformedTranscript("transcript must be a JSON object")
    for key in ("query_id", "engine", "answer_text", "listed_sources"):
        if key not in obj:
            raise MalformedTranscript(f"missing field {key!r}")
    answer = obj["answer_text"]
    if not isinstance(answer, str) or not answer.strip():
        raise MalformedTranscript("answer_text is empty")
    if not isinstance(obj["query_id"], str) or not isinstance(obj["engine"], str):
        raise MalformedTranscript("query_id and engine must be strings")
    captured = obj.get("captured_at")
    if captured is not None:
        try:
            datetime.fromisoformat(str(captured).replace("Z", "+00:00"))
        except ValueError:
            raise MalformedTranscript(f"captured_at is not an ISO timestamp: {captured!r}") from None
    return Transcript(
        query_id=obj["query_id"],
        engine=obj["engine"],
        answer_text=answer,
        listed_sources=_parse_sources(obj["listed_sources"]),
        captured_at=captured,
    )


def load_transcript(path: str | PathLike) -> Transcript:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedTranscript(f"{path}: invalid JSON ({exc.msg})") from None
    return parse_transcript(obj)


def _expand(bracket: str) -> list[int] | None:
    out: list[int] = []
    for m in _ITEM_RE.finditer(bracket):
        lo = int(m.group(1))
        if m.group(2) is None:
            out.append(lo)
            continue
        hi = int(m.group(2))
        if hi < lo or hi - lo + 1 > MAX_RANGE_EXPANSION:
            return None
        out.extend(range(lo, hi + 1))
    return out


def parse_citation_marks(answer_text: str, n_sources: int) -> list[CitationMark]:
    """Find citation markers in ``answer_text``.

    Indices outside ``1..n_sources`` are kept and reported in
    ``dangling_indices``. A run containing a reversed range or a range wider
    than :data:`MAX_RANGE_EXPANSION` is treated as prose.
    """
    if n_sources < 0:
        raise ValueError("n_sources must be non-negative")
    marks = []
    for run in _MARK_RE.finditer(answer_text):
        indices: list[int] = []
        for bracket in _BRACKET_RE.finditer(run.group(0)):
            expanded = _expand(bracket.group(0))
            if expanded is None:
                indices = []
                break
            indices.extend(expanded)
        if not indices:
            continue
        idx = frozenset(indices)
        dangling = frozenset(i for i in idx if i < 1 or i > n_sources)
        marks.append(CitationMark(span=run.span(), source_indices=idx, dangling_indices=dangling))
    return marks


def strip_citation_marks(text: str) -> str:
    """Remove recognized markers and the spaces just before them, repeating until none remain."""
    while True:
        marks = parse_citation_marks(text, 0)
        if not marks:
            return text
        pieces, cursor = [], 0
        for m in marks:
            pieces.append(text[cursor : m.span[0]].rstrip(" \t"))
            cursor = m.span[1]
        pieces.append(text[cursor:])
        text = "".join(pieces)


def attach_marks(marks: Sequence[CitationMark], sentence_spans: Sequence[tuple[int, int]]) -> list[CitationMark]:
    """Assign each mark to a sentence.

    A mark inside a sentence span belongs to that sentence. A mark falling
    between sentences (typically after the terminator) belongs to the
    preceding sentence; one before the first sentence belongs to the first.
    """
    if not sentence_spans:
        return [replace(m, sentence=None) for m in marks]
    starts = [s for s, _ in sentence_spans]
    out = []
    for m in marks:
        pos = m.span[0]
        k = bisect.bisect_right(starts, pos) - 1
        out.append(replace(m, sentence=max(k, 0)))
    return out
