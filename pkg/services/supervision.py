"""
Text normalization and distant supervision.

A candidate is positive when its text contains a gold answer as a contiguous
run of normalized tokens. Cells are judged by their value only; links by
their passage; rows and columns aggregate both over their cells.
"""

import re
from collections.abc import Mapping, Sequence

from models import (
    AnswerType,
    EvidenceId,
    Granularity,
    HybridTable,
    LabelSet,
    Passage,
    Question,
)

_PUNCTUATION = re.compile(r"[.,!?;:'\"()\[\]{}]")
_ARTICLES = frozenset({"a", "an", "the"})


def normalize_text(s: str) -> str:
    """Lowercase, drop punctuation and articles, collapse whitespace."""
    stripped = _PUNCTUATION.sub("", s.lower())
    return " ".join(token for token in stripped.split() if token not in _ARTICLES)


def tokenize(s: str) -> list[str]:
    return normalize_text(s).split()


def _contains_tokens(haystack: list[str], needle: list[str]) -> bool:
    width = len(needle)
    if width == 0 or width > len(haystack):
        return False
    first = needle[0]
    for start in range(len(haystack) - width + 1):
        if haystack[start] == first and haystack[start:start + width] == needle:
            return True
    return False


def contains_answer(haystack: str, answers: Sequence[str]) -> bool:
    """True iff some answer occurs in haystack as a contiguous normalized token run."""
    tokens = tokenize(haystack)
    return any(_contains_tokens(tokens, tokenize(answer)) for answer in answers)


def label_candidates(
    question: Question, table: HybridTable, passages: Mapping[str, Passage]
) -> LabelSet:
    """
    Label every candidate of the question's table by answer containment.

    Args:
        question: Supplies the gold answers
        table: The question's table
        passages: Passage store resolving the table's link ids

    Returns:
        LabelSet with a 0/1 label for every column, row, cell and link. A row or
        column is positive when any of its cell values or linked passages is
    """
    answers = [tokenize(a) for a in question.gold_answers]

    def hit(text: str) -> int:
        tokens = tokenize(text)
        return int(any(_contains_tokens(tokens, a) for a in answers))

    labels: dict[EvidenceId, int] = {}
    row_hits = [0] * table.n_rows
    col_hits = [0] * table.n_cols

    for i, row in enumerate(table.cells):
        for j, cell in enumerate(row):
            value_hit = hit(cell.value)
            labels[EvidenceId.cell(i, j)] = value_hit
            any_hit = value_hit
            for x, pid in enumerate(cell.link_ids):
                link_hit = hit(passages[pid].text)
                labels[EvidenceId.link(i, j, x)] = link_hit
                any_hit |= link_hit
            row_hits[i] |= any_hit
            col_hits[j] |= any_hit

    for i, y in enumerate(row_hits):
        labels[EvidenceId.row(i)] = y
    for j, y in enumerate(col_hits):
        labels[EvidenceId.col(j)] = y

    return LabelSet(question_id=question.id, labels=labels)


def derive_gold_type(labels: LabelSet) -> AnswerType:
    """In-Table wins over In-Passage when both a cell and a link contain the answer."""
    if any(y for e, y in labels.labels.items() if e.granularity is Granularity.CELL):
        return AnswerType.IN_TABLE
    if any(y for e, y in labels.labels.items() if e.granularity is Granularity.LINK):
        return AnswerType.IN_PASSAGE
    return AnswerType.UNANSWERABLE
