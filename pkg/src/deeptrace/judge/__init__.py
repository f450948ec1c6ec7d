from .backends import API_KEY_ENV, HttpChatBackend, MockJudge, split_sentences
from .client import (
    ConfidenceScore,
    DecomposedSentence,
    DecompositionResult,
    Judge,
    JudgeConfig,
    StanceResult,
    SupportVerdict,
)
from .prompts import PROMPT_VERSION

__all__ = [
    "API_KEY_ENV",
    "ConfidenceScore",
    "DecomposedSentence",
    "DecompositionResult",
    "HttpChatBackend",
    "Judge",
    "JudgeConfig",
    "MockJudge",
    "PROMPT_VERSION",
    "StanceResult",
    "SupportVerdict",
    "split_sentences",
]
