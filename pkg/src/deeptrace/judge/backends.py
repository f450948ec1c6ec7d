"""Judge transports: an OpenAI-style chat-completions client and a deterministic mock.

A backend is any object with ``complete(prompt, task=..., fields=...) -> str``
and a ``calls`` counter. ``fields`` carries the raw template inputs so the mock
can answer without re-parsing the rendered prompt.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from os import PathLike
from pathlib import Path
from typing import Mapping

import httpx

from ..errors import JudgeTransportError
from ..transcript import strip_citation_marks

logger = logging.getLogger(__name__)

API_KEY_ENV = "DEEPTRACE_JUDGE_KEY"
_RETRY_STATUS = {408, 409, 425, 429, 500, 502, 503, 504}


class HttpChatBackend:
    """POSTs ``{endpoint}/chat/completions`` and returns the first choice's content."""

    def __init__(
        self,
        endpoint: str,
        model_name: str,
        temperature: float = 0.0,
        *,
        api_key: str | None = None,
        timeout: float = 120.0,
        transport_retries: int = 4,
        backoff: float = 0.5,
        client: httpx.Client | None = None,
    ):
        self.url = endpoint.rstrip("/") + "/chat/completions"
        self.model_name = model_name
        self.temperature = temperature
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.transport_retries = transport_retries
        self.backoff = backoff
        self._client = client or httpx.Client(timeout=timeout)
        self._lock = threading.Lock()
        self.calls = 0

    def close(self) -> None:
        self._client.close()

    def complete(self, prompt: str, *, task: str = "", fields: Mapping[str, str] | None = None) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model_name,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        delay = self.backoff
        for attempt in range(self.transport_retries + 1):
            with self._lock:
                self.calls += 1
            try:
                resp = self._client.post(self.url, json=body, headers=headers)
            except httpx.TransportError as exc:
                error = f"transport error: {exc}"
            else:
                if resp.status_code == 200:
                    try:
                        return resp.json()["choices"][0]["message"]["content"]
                    except (ValueError, KeyError, IndexError, TypeError):
                        raise JudgeTransportError(f"unexpected response body from {self.url}") from None
                if resp.status_code not in _RETRY_STATUS:
                    raise JudgeTransportError(f"HTTP {resp.status_code} from {self.url}: {resp.text[:200]}")
                error = f"HTTP {resp.status_code}"
            if attempt < self.transport_retries:
                logger.warning("judge %s failed (%s); retrying in %.2fs", task or "call", error, delay)
                time.sleep(delay)
                delay *= 2
        raise JudgeTransportError(f"{self.url}: giving up after {self.transport_retries + 1} attempts ({error})")


_TERMINATOR = re.compile(r"[.!?]+[\"')\]]*(?:\s*\[\s*\d[\d\s,\-–]*\])*(?=\s|$)")
_FILLER = re.compile(
    r"\b(great question|good question|let me|i hope this helps|in conclusion|in summary|to summarize|"
    r"happy to help|here is|here's|feel free)\b",
    re.IGNORECASE,
)
_HEDGES = re.compile(
    r"\b(may|might|could|possibly|perhaps|likely|unclear|uncertain|some argue|it depends|arguably|suggests?)\b",
    re.IGNORECASE,
)
_CON_MARKERS = re.compile(
    r"\b(however|but|critics|opponents|on the other hand|although|nevertheless|drawbacks?|downsides?)\b",
    re.IGNORECASE,
)
_NEUTRAL_MARKERS = re.compile(r"\b(depends|both sides|mixed|varies|debated)\b", re.IGNORECASE)
_WORD = re.compile(r"[a-z0-9]+")
_CONFIDENCE_BY_HEDGES = ["Strongly Confident", "Confident", "Neutral", "Not Confident", "Strongly Not Confident"]


def split_sentences(text: str) -> list[str]:
    """Naive sentence splitter that keeps trailing citation markers with their sentence."""
    out, start = [], 0
    for m in _TERMINATOR.finditer(text):
        piece = text[start : m.end()].strip()
        if piece:
            out.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def _content_words(text: str) -> list[str]:
    return [w for w in _WORD.findall(text.lower()) if len(w) >= 4]


class MockJudge:
    """Deterministic offline judge.

    Replies are derived from the template inputs by simple rules, optionally
    overridden by a fixture mapping::

        {
          "decompose": {"<answer text>": {"sentences": [...]}},
          "confidence": {"<answer text>": "Confident"},
          "stance": {"<query text>": {"agree_statements": [...], ...}},
          "support": [{"statement_contains": "...", "document_contains": "...", "support": "none"}],
          "filler": ["phrases marking filler sentences"]
        }

    Override values are serialized verbatim, so a fixture may hold
    deliberately malformed replies as plain strings.
    """

    def __init__(self, fixture: Mapping | None = None):
        self.fixture = dict(fixture or {})
        self._lock = threading.Lock()
        self.calls = 0
        self.calls_by_task: dict[str, int] = {}

    @classmethod
    def from_file(cls, path: str | PathLike) -> "MockJudge":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))

    def complete(self, prompt: str, *, task: str = "", fields: Mapping[str, str] | None = None) -> str:
        with self._lock:
            self.calls += 1
            self.calls_by_task[task] = self.calls_by_task.get(task, 0) + 1
        fields = dict(fields or {})
        handler = getattr(self, f"_{task}", None)
        if handler is None:
            raise ValueError(f"mock judge has no handler for task {task!r}")
        reply = handler(fields)
        return reply if isinstance(reply, str) else json.dumps(reply)

    def _is_filler(self, sentence: str) -> bool:
        for phrase in self.fixture.get("filler", ()):
            if phrase in sentence:
                return True
        return bool(_FILLER.search(sentence))

    def _decompose(self, fields):
        answer = fields["ANSWER"]
        override = self.fixture.get("decompose", {}).get(answer)
        if override is not None:
            return override
        sentences = []
        for s in split_sentences(answer):
            core = "0" if self._is_filler(s) and strip_citation_marks(s) == s else "1"
            sentences.append({"sentence": s, "core": core})
        return {"sentences": sentences}

    def _confidence(self, fields):
        answer = fields["ANSWER"]
        override = self.fixture.get("confidence", {}).get(answer)
        if override is not None:
            return override if isinstance(override, dict) else {"confidence": override}
        hedges = len(_HEDGES.findall(answer))
        return {"confidence": _CONFIDENCE_BY_HEDGES[min(hedges, 4)]}

    def _stance(self, fields):
        override = self.fixture.get("stance", {}).get(fields["QUERY"])
        if override is not None:
            return override
        agree, disagree, neutral = [], [], []
        for line in fields["STATEMENTS"].splitlines():
            num, _, text = line.partition(". ")
            if not num.strip().isdigit():
                continue
            i = int(num)
            if _CON_MARKERS.search(text):
                disagree.append(i)
            elif _NEUTRAL_MARKERS.search(text):
                neutral.append(i)
            else:
                agree.append(i)
        return {"agree_statements": agree, "disagree_statements": disagree, "neutral_statements": neutral}

    def _support(self, fields):
        document, statement = fields["DOCUMENT"], fields["STATEMENT"]
        for rule in self.fixture.get("support", ()):
            if rule.get("statement_contains", "") in statement and rule.get("document_contains", "") in document:
                return {"support": rule["support"]}
        claim = " ".join(strip_citation_marks(statement).split()).lower()
        doc = " ".join(document.split()).lower()
        if claim and claim.rstrip(".!?") in doc:
            return {"support": "full"}
        words = _content_words(claim)
        if not words:
            return {"support": "none"}
        doc_words = set(_content_words(doc))
        overlap = sum(w in doc_words for w in words) / len(words)
        if overlap >= 0.8:
            return {"support": "full"}
        if overlap >= 0.5:
            return {"support": "partial"}
        return {"support": "none"}
