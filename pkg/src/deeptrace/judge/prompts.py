"""Versioned prompt templates rendered by ``[[PLACEHOLDER]]`` substitution."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

PROMPT_VERSION = "v1"
TASKS = ("decompose", "confidence", "stance", "support")
_PLACEHOLDER = re.compile(r"\[\[([A-Z]+)\]\]")


@lru_cache(maxsize=None)
def load_template(task: str, version: str = PROMPT_VERSION) -> str:
    if task not in TASKS:
        raise KeyError(f"no prompt template for task {task!r}")
    return resources.files("deeptrace.judge").joinpath("prompts", version, f"{task}.txt").read_text(encoding="utf-8")


def placeholders(template: str) -> set[str]:
    return set(_PLACEHOLDER.findall(template))


def render(template: str, **values: str) -> str:
    """Substitute every ``[[NAME]]`` in one pass so inserted text is never re-expanded."""
    missing = placeholders(template) - values.keys()
    if missing:
        raise KeyError(f"missing template values: {sorted(missing)}")
    return _PLACEHOLDER.sub(lambda m: values[m.group(1)], template)
