"""
Exception hierarchy for the retrieval and reasoning pipeline.

The CLI maps UsageError, ParseError and SchemaError (with its subclasses) to
exit status 2 and everything else to exit status 1.
"""

from typing import Any


class PipelineError(Exception):
    """Base class for all pipeline errors."""


class UsageError(PipelineError):
    """Invalid command-line usage or run configuration."""


class ParseError(PipelineError):
    """A file could not be decoded as JSON / JSON lines."""

    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class SchemaError(PipelineError):
    """A decoded document violates the schema; names the offending entity."""

    def __init__(self, entity_id: str, detail: str = ""):
        self.entity_id = entity_id
        self.detail = detail
        message = f"{entity_id}: {detail}" if detail else entity_id
        super().__init__(message)


class IncompleteScoresError(SchemaError):
    def __init__(self, question_id: str, evidence_id: Any):
        self.question_id = question_id
        self.evidence_id = evidence_id
        super().__init__(question_id, f"missing score for {evidence_id}")


class UnknownQuestionError(SchemaError):
    def __init__(self, question_id: str):
        self.question_id = question_id
        super().__init__(question_id, "unknown question id")


class MissingPredictionError(SchemaError):
    def __init__(self, question_id: str):
        self.question_id = question_id
        super().__init__(question_id, "no prediction for question")


class DimensionMismatchError(PipelineError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"expected dimension {expected}, got {actual}")


class EmptyRowError(PipelineError):
    def __init__(self):
        super().__init__("cannot score a row without cells")


class DomainError(PipelineError):
    """An argument lies outside the domain of a loss or score function."""


class GroupTooSmallError(PipelineError):
    def __init__(self, size: int):
        self.size = size
        super().__init__(f"contrastive group needs at least 2 instances, got {size}")


class NoPositivesError(PipelineError):
    def __init__(self, granularity: str):
        self.granularity = granularity
        super().__init__(f"no positive {granularity} instance in the training data")


class GenerationFailedError(PipelineError):
    def __init__(self, question_index: int, attempts: int):
        self.question_index = question_index
        self.attempts = attempts
        super().__init__(
            f"question {question_index}: no unambiguous instance after {attempts} attempts"
        )
