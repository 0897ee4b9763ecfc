"""
Lexical featurizer standing in for the encoder output h_t.

Any encoder can replace it: scores computed elsewhere are ingested through
the score file instead (see storage.repository.import_scores).
"""

import math
from collections import Counter

import numpy as np

from models import (
    Dataset,
    EvidenceCandidate,
    FeaturizerConfig,
    GRANULARITIES,
    Granularity,
    Question,
)
from models.scorer import FEATURE_NAMES

from .evidence import JOIN, SEP, candidate_content
from .supervision import normalize_text, tokenize

_ONE_HOT_OFFSET = FEATURE_NAMES.index("is_col")


def fit_featurizer(dataset: Dataset, shared_projection: bool = True) -> FeaturizerConfig:
    """
    Fit BM25 inverse document frequencies over the dataset's text.

    Documents are every passage, every non-empty cell value and every header,
    visited in sorted id order so the result is deterministic.
    """
    document_frequency: Counter[str] = Counter()
    n_documents = 0

    def add(text: str) -> None:
        nonlocal n_documents
        tokens = set(tokenize(text))
        if tokens:
            document_frequency.update(tokens)
            n_documents += 1

    for pid in sorted(dataset.passages):
        add(dataset.passages[pid].text)
    for tid in sorted(dataset.tables):
        table = dataset.tables[tid]
        for header in table.headers:
            add(header)
        for row in table.cells:
            for cell in row:
                add(cell.value)

    idf = {
        token: math.log(1.0 + (n_documents - df + 0.5) / (df + 0.5))
        for token, df in sorted(document_frequency.items())
    }
    return FeaturizerConfig(
        idf=idf, n_documents=n_documents, shared_projection=shared_projection
    )


def _char_ngrams(text: str, n: int = 3) -> set[str]:
    if len(text) < n:
        return {text} if text else set()
    return {text[k:k + n] for k in range(len(text) - n + 1)}


def _jaccard(a: set[str], b: set[str]) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def table_part(content: str, granularity: Granularity) -> str:
    """
    The part of a candidate's content that the lexical features look at.

    Cell and row sequences end with the texts of the cell's linked passages,
    which are scored as link candidates; their features stop before them.
    """
    if granularity in (Granularity.CELL, Granularity.ROW):
        header, rest = (content.split(JOIN, 1) + [""])[:2]
        neighbors = rest.split(JOIN, 1)[0]
        return f"{header}{JOIN}{neighbors}"
    return content


def featurize(
    candidate: EvidenceCandidate, question: Question, config: FeaturizerConfig
) -> np.ndarray:
    """
    Lexical features of (question, candidate content).

    Args:
        candidate: One serialized sequence; a row contributes one per member.
        question: The question the candidate was serialized for.
        config: Fitted IDF table and projection layout.

    Returns:
        A float64 vector of length config.dimension.
    """
    granularity = candidate.id.granularity
    content = table_part(candidate_content(candidate, question), granularity)

    plain = content.replace(SEP, " ")
    content_tokens = [t for t in tokenize(plain) if t != "|"]
    content_set = set(content_tokens)
    question_set = set(tokenize(question.text))
    overlap = question_set & content_set

    question_idf = sum(config.idf_of(t) for t in question_set)
    idf_overlap = (
        sum(config.idf_of(t) for t in overlap) / question_idf if question_idf > 0 else 0.0
    )

    char_jaccard = _jaccard(
        _char_ngrams(normalize_text(question.text)),
        _char_ngrams(" ".join(content_tokens)),
    )

    if granularity is Granularity.LINK:
        header_match = 0.0
    else:
        header = content.split(JOIN, 1)[0]
        header_match = float(bool(question_set & set(tokenize(header))))

    block = np.zeros(config.block_size, dtype=np.float64)
    block[0] = len(overlap)
    block[1] = idf_overlap
    block[2] = char_jaccard
    block[3] = math.log1p(len(content_tokens))
    block[_ONE_HOT_OFFSET + GRANULARITIES.index(granularity)] = 1.0
    block[8] = header_match

    if config.shared_projection:
        return block
    vector = np.zeros(config.dimension, dtype=np.float64)
    start = GRANULARITIES.index(granularity) * config.block_size
    vector[start:start + config.block_size] = block
    return vector
