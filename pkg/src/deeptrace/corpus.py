"""Query corpus: debate and expertise questions stored as JSON lines.

Each line is an object ``{"id": ..., "text": ..., "category": "debate"|"expertise"}``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Iterable

from .errors import DuplicateId, EmptyCorpus, MalformedRecord

__all__ = [
    "Category",
    "Query",
    "Corpus",
    "load_corpus",
    "dump_corpus",
    "filter_by_category",
]


class Category(str, enum.Enum):
    DEBATE = "debate"
    EXPERTISE = "expertise"

    @classmethod
    def parse(cls, value: str) -> "Category":
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"unknown category {value!r}") from None


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    category: Category

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"query {self.id!r} has empty text")

    @property
    def is_debate(self) -> bool:
        return self.category is Category.DEBATE

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "category": self.category.value}


@dataclass(frozen=True)
class Corpus:
    queries: tuple[Query, ...]
    name: str = "corpus"

    def __post_init__(self):
        seen = set()
        for q in self.queries:
            if q.id in seen:
                raise DuplicateId(q.id)
            seen.add(q.id)

    def __len__(self) -> int:
        return len(self.queries)

    def __iter__(self):
        return iter(self.queries)

    def get(self, query_id: str) -> Query | None:
        for q in self.queries:
            if q.id == query_id:
                return q
        return None


def _parse_line(lineno: int, line: str) -> Query:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(lineno, f"invalid JSON ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise MalformedRecord(lineno, "expected a JSON object")
    for field in ("id", "text", "category"):
        if field not in obj:
            raise MalformedRecord(lineno, f"missing field {field!r}")
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise MalformedRecord(lineno, "id must be a non-empty string")
    if not isinstance(obj["text"], str) or not obj["text"].strip():
        raise MalformedRecord(lineno, "text must be a non-empty string")
    try:
        category = Category.parse(obj["category"])
    except ValueError as exc:
        raise MalformedRecord(lineno, str(exc)) from None
    return Query(id=obj["id"], text=obj["text"], category=category)


def parse_corpus(lines: Iterable[str], name: str = "corpus") -> Corpus:
    queries: list[Query] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        q = _parse_line(lineno, line)
        if q.id in seen:
            raise DuplicateId(q.id)
        seen.add(q.id)
        queries.append(q)
    if not queries:
        raise EmptyCorpus(name)
    return Corpus(tuple(queries), name=name)


def load_corpus(path: str | PathLike) -> Corpus:
    """Load and validate a JSON-lines corpus file.

    Blank lines are skipped. Categories are matched case-insensitively.
    Raises :class:`MalformedRecord`, :class:`DuplicateId` or :class:`EmptyCorpus`.
    """
    p = Path(path)
    with p.open(encoding="utf-8") as fh:
        return parse_corpus(fh, name=p.stem)


def dump_corpus(corpus: Corpus, path: str | PathLike) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for q in corpus.queries:
            fh.write(json.dumps(q.to_dict(), ensure_ascii=False) + "\n")


def filter_by_category(corpus: Corpus, category: Category | str) -> Corpus:
    """Subset of ``corpus`` with the given category, order preserved. May be empty."""
    cat = category if isinstance(category, Category) else Category.parse(category)
    return Corpus(tuple(q for q in corpus.queries if q.category is cat), name=corpus.name)
