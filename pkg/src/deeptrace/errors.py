"""Exception hierarchy shared across the auditing pipeline."""

from __future__ import annotations


class DeepTraceError(Exception):
    """Base class for every error raised by this package."""


# corpus


class CorpusError(DeepTraceError):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateId(CorpusError):
    def __init__(self, query_id: str):
        super().__init__(f"duplicate query id {query_id!r}")
        self.query_id = query_id


class EmptyCorpus(CorpusError):
    def __init__(self, path: str = ""):
        super().__init__(f"corpus contains no queries{': ' + path if path else ''}")


# transcript


class TranscriptError(DeepTraceError):
    pass


class MalformedTranscript(TranscriptError):
    pass


class NonContiguousSourceIndices(TranscriptError):
    def __init__(self, indices):
        super().__init__(f"listed source indices must be 1..K contiguous, got {sorted(indices)}")
        self.indices = sorted(indices)


# judge


class JudgeError(DeepTraceError):
    pass


class JudgeProtocolError(JudgeError):
    """The judge kept returning replies that could not be parsed."""

    def __init__(self, task: str, attempts: int, last_reply: str | None = None, context: str = ""):
        msg = f"{task}: no valid reply after {attempts} attempt(s)"
        if context:
            msg += f" [{context}]"
        super().__init__(msg)
        self.task = task
        self.attempts = attempts
        self.last_reply = last_reply
        self.context = context


class JudgeTransportError(JudgeError):
    pass


class AlignmentError(JudgeError):
    def __init__(self, sentence: str, position: int):
        super().__init__(f"sentence {position} not found verbatim in answer: {sentence[:80]!r}")
        self.sentence = sentence
        self.position = position


class UnknownLabel(JudgeError):
    def __init__(self, text: str):
        super().__init__(f"unknown confidence label {text!r}")
        self.text = text


class PartitionViolation(JudgeError):
    def __init__(self, reason: str):
        super().__init__(f"stance lists do not partition the statements: {reason}")
        self.reason = reason


# analysis / metrics / scorecard


class StanceSizeMismatch(DeepTraceError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"stance covers {got} statements, expected {expected}")
        self.expected = expected
        self.got = got


class InstanceTooLarge(DeepTraceError):
    def __init__(self, budget: int):
        super().__init__(f"exact cover search exceeded node budget of {budget}")
        self.budget = budget


class MixedEngines(DeepTraceError):
    def __init__(self, engines):
        super().__init__(f"records span several engines: {sorted(engines)}")
        self.engines = sorted(engines)


class UnknownMetric(DeepTraceError):
    def __init__(self, name: str):
        super().__init__(f"unknown metric {name!r}")
        self.name = name


class ThresholdTableError(DeepTraceError):
    pass
