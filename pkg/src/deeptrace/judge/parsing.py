"""Strict parsing of judge replies and verbatim alignment of decomposed sentences."""

from __future__ import annotations

import json
from typing import Any, Sequence

from ..errors import AlignmentError, PartitionViolation, UnknownLabel

CONFIDENCE_LABELS = {
    "Strongly Not Confident": 1,
    "Not Confident": 2,
    "Neutral": 3,
    "Confident": 4,
    "Strongly Confident": 5,
}
SUPPORT_LABELS = ("full", "partial", "none")


class MalformedReply(ValueError):
    """A single reply that does not follow the requested format."""


def first_json_object(reply: str) -> dict:
    """Return the first decodable JSON object in ``reply``.

    Surrounding prose and code fences are skipped because decoding is
    attempted at every ``{`` in turn.
    """
    decoder = json.JSONDecoder()
    pos = reply.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(reply, pos)
        except json.JSONDecodeError:
            pos = reply.find("{", pos + 1)
            continue
        if isinstance(obj, dict):
            return obj
        pos = reply.find("{", pos + 1)
    raise MalformedReply("no JSON object in reply")


def _as_core(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return value.strip() == "1"
    raise MalformedReply(f"core flag must be 0 or 1, got {value!r}")


def parse_decomposition(reply: str) -> list[tuple[str, bool]]:
    obj = first_json_object(reply)
    items = obj.get("sentences")
    if isinstance(items, dict):
        items = [items]
    if not isinstance(items, list) or not items:
        raise MalformedReply("'sentences' must be a non-empty list")
    out = []
    for item in items:
        if not isinstance(item, dict) or not isinstance(item.get("sentence"), str):
            raise MalformedReply("each entry needs a 'sentence' string")
        if "core" not in item:
            raise MalformedReply("each entry needs a 'core' flag")
        out.append((item["sentence"], _as_core(item["core"])))
    return out


def parse_confidence(reply: str) -> int:
    obj = first_json_object(reply)
    label = obj.get("confidence")
    if not isinstance(label, str):
        raise MalformedReply("'confidence' must be a string label")
    try:
        return CONFIDENCE_LABELS[label.strip()]
    except KeyError:
        raise UnknownLabel(label) from None


def _as_indices(value: Any, key: str) -> list[int]:
    if not isinstance(value, list):
        raise MalformedReply(f"{key!r} must be a list")
    out = []
    for v in value:
        if isinstance(v, bool):
            raise MalformedReply(f"{key!r} contains a boolean")
        if isinstance(v, int):
            out.append(v)
        elif isinstance(v, str) and v.strip().isdigit():
            out.append(int(v.strip()))
        else:
            raise MalformedReply(f"{key!r} contains non-integer {v!r}")
    return out


def parse_stance(reply: str, n: int) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
    """Parse the three stance lists and check they partition ``1..n``."""
    obj = first_json_object(reply)
    lists = []
    for key in ("agree_statements", "disagree_statements", "neutral_statements"):
        lists.append(_as_indices(obj.get(key, []), key))
    flat = [i for lst in lists for i in lst]
    expected = set(range(1, n + 1))
    if len(flat) != len(set(flat)):
        raise PartitionViolation("an index appears more than once")
    extra = set(flat) - expected
    if extra:
        raise PartitionViolation(f"out-of-range indices {sorted(extra)}")
    missing = expected - set(flat)
    if missing:
        raise PartitionViolation(f"missing indices {sorted(missing)}")
    return tuple(frozenset(lst) for lst in lists)  # type: ignore[return-value]


def parse_support(reply: str) -> str:
    obj = first_json_object(reply)
    level = obj.get("support")
    if not isinstance(level, str) or level.strip().lower() not in SUPPORT_LABELS:
        raise MalformedReply(f"'support' must be one of {SUPPORT_LABELS}, got {level!r}")
    return level.strip().lower()


def _collapse(text: str) -> tuple[str, list[int]]:
    """Collapse whitespace runs to one space; map collapsed offsets to original ones."""
    chars: list[str] = []
    index: list[int] = []
    in_space = False
    for i, ch in enumerate(text):
        if ch.isspace():
            if not in_space:
                chars.append(" ")
                index.append(i)
            in_space = True
        else:
            chars.append(ch)
            index.append(i)
            in_space = False
    return "".join(chars), index


def normalize_ws(text: str) -> str:
    return " ".join(text.split())


def align_sentences(answer: str, sentences: Sequence[str]) -> list[tuple[int, int]]:
    """Locate each sentence in ``answer`` in order, without overlap.

    Matching is case-sensitive after collapsing whitespace runs. Returns
    half-open character spans into the original answer.
    """
    collapsed, index = _collapse(answer)
    spans = []
    cursor = 0
    for pos, sentence in enumerate(sentences):
        needle = normalize_ws(sentence)
        if not needle:
            raise AlignmentError(sentence, pos)
        at = collapsed.find(needle, cursor)
        if at < 0:
            raise AlignmentError(sentence, pos)
        end = at + len(needle)
        spans.append((index[at], index[end - 1] + 1))
        cursor = end
    return spans
