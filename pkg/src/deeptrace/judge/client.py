"""Provider-agnostic LLM judge for the four auditing tasks."""

from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass
from os import PathLike
from typing import Sequence

from ..cache import JsonDiskCache, content_key
from ..errors import AlignmentError, JudgeProtocolError, PartitionViolation
from . import parsing
from .prompts import PROMPT_VERSION, load_template, render

logger = logging.getLogger(__name__)

DEFAULT_SOURCE_CHAR_BUDGET = 60_000


@dataclass(frozen=True)
class JudgeConfig:
    endpoint: str = "https://api.openai.com/v1"
    model_name: str = "gpt-5"
    temperature: float = 0.0
    max_retries: int = 2
    cache_dir: str | PathLike | None = None
    max_in_flight: int = 8
    source_char_budget: int = DEFAULT_SOURCE_CHAR_BUDGET
    prompt_version: str = PROMPT_VERSION

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


@dataclass(frozen=True)
class DecomposedSentence:
    text: str
    core: bool
    span: tuple[int, int]


@dataclass(frozen=True)
class DecompositionResult:
    sentences: tuple[DecomposedSentence, ...]

    @property
    def n_core(self) -> int:
        return sum(s.core for s in self.sentences)


@dataclass(frozen=True)
class ConfidenceScore:
    level: int

    def __post_init__(self):
        if self.level not in (1, 2, 3, 4, 5):
            raise ValueError(f"confidence level must be 1..5, got {self.level}")


@dataclass(frozen=True)
class StanceResult:
    agree: frozenset[int]
    disagree: frozenset[int]
    neutral: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.agree) + len(self.disagree) + len(self.neutral)


class SupportVerdict(str, enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    NONE = "none"


def format_statements(statements: Sequence[str]) -> str:
    return "\n".join(f"{i}. {' '.join(s.split())}" for i, s in enumerate(statements, start=1))


class Judge:
    """Runs judge prompts through ``backend`` with parsing, retries and caching.

    ``backend`` is an :class:`~deeptrace.judge.backends.HttpChatBackend`, a
    :class:`~deeptrace.judge.backends.MockJudge`, or anything with the same
    ``complete`` method. At most ``cfg.max_in_flight`` backend calls run at once.
    """

    def __init__(self, backend, cfg: JudgeConfig | None = None, cache: JsonDiskCache | None = None):
        self.backend = backend
        self.cfg = cfg or JudgeConfig()
        self.cache = cache if cache is not None else JsonDiskCache(self.cfg.cache_dir)
        self._slots = threading.BoundedSemaphore(self.cfg.max_in_flight)

    def _key(self, task: str, fields: dict) -> str:
        return content_key(task, self.cfg.model_name, self.cfg.prompt_version, fields)

    def _call(self, task: str, fields: dict) -> str:
        prompt = render(load_template(task, self.cfg.prompt_version), **fields)
        with self._slots:
            return self.backend.complete(prompt, task=task, fields=fields)

    def _run(self, task: str, fields: dict, parse, *, context: str = ""):
        """Call-parse loop.

        ``parse`` raises MalformedReply or AlignmentError to spend one of the
        ``max_retries`` retries. A PartitionViolation earns exactly one reprompt.
        """
        key = self._key(task, fields)
        cached = self.cache.get(key)
        if cached is not None:
            return cached
        budget = self.cfg.max_retries + 1
        attempts = violations = 0
        reply = None
        last_exc: Exception | None = None
        while attempts < budget or (violations == 1 and isinstance(last_exc, PartitionViolation)):
            attempts += 1
            reply = self._call(task, fields)
            try:
                value = parse(reply)
            except PartitionViolation as exc:
                violations += 1
                last_exc = exc
                if violations >= 2:
                    raise
                continue
            except (parsing.MalformedReply, AlignmentError) as exc:
                logger.debug("%s: malformed reply (%s)", task, exc)
                last_exc = exc
                continue
            self.cache.put(key, value)
            return value
        if isinstance(last_exc, (AlignmentError, PartitionViolation)):
            raise last_exc
        raise JudgeProtocolError(task, attempts, reply, context) from last_exc

    def decompose_answer(self, query: str, answer: str) -> DecompositionResult:
        """Split ``answer`` into verbatim sentences flagged core or filler."""
        if not answer.strip():
            raise ValueError("answer is empty")

        def parse(reply):
            items = parsing.parse_decomposition(reply)
            parsing.align_sentences(answer, [t for t, _ in items])
            return [[t, c] for t, c in items]

        items = self._run("decompose", {"QUESTION": query, "ANSWER": answer}, parse)
        spans = parsing.align_sentences(answer, [t for t, _ in items])
        return DecompositionResult(
            tuple(DecomposedSentence(text=t, core=bool(c), span=sp) for (t, c), sp in zip(items, spans))
        )

    def score_confidence(self, query: str, answer: str) -> ConfidenceScore:
        # UnknownLabel is not a formatting slip; it propagates without retry.
        level = self._run("confidence", {"QUERY": query, "ANSWER": answer}, parsing.parse_confidence)
        return ConfidenceScore(int(level))

    def classify_stance(self, query: str, statements: Sequence[str]) -> StanceResult:
        """Sort numbered statements into agree / disagree / neutral.

        A reply that fails the partition check is re-asked once; a second
        failure raises :class:`PartitionViolation`.
        """
        if not statements:
            raise ValueError("no statements to classify")
        n = len(statements)

        def parse(reply):
            return [sorted(s) for s in parsing.parse_stance(reply, n)]

        fields = {"QUERY": query, "STATEMENTS": format_statements(statements)}
        agree, disagree, neutral = self._run("stance", fields, parse)
        return StanceResult(frozenset(agree), frozenset(disagree), frozenset(neutral))

    def judge_support(self, source_text: str, statement: str, *, context: str = "") -> SupportVerdict:
        if not source_text.strip():
            raise ValueError("source text is empty")
        document = source_text[: self.cfg.source_char_budget]
        level = self._run(
            "support", {"DOCUMENT": document, "STATEMENT": statement}, parsing.parse_support, context=context
        )
        return SupportVerdict(level)
