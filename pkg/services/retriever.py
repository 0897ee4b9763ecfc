"""
Unified multi-granularity retriever: s_t = sigmoid(h_t . W).

One projection scores columns, rows, cells and links alike; the granularity
reaches the scorer only through the one-hot features. Rows are scored by
their best row-tagged cell sequence.
"""

import math
from collections.abc import Mapping, Sequence

import numpy as np

from core.errors import DimensionMismatchError, EmptyRowError, IncompleteScoresError
from core.logging import logger
from models import (
    EvidenceId,
    Granularity,
    HybridTable,
    LabelSet,
    LinearScorer,
    Passage,
    Question,
    ScoreSet,
)

from .evidence import enumerate_candidates, serialize_candidate
from .featurizer import featurize

# sigmoid(+-36) is the last value float64 keeps strictly inside (0, 1)
LOGIT_BOUND = 36.0


def sigmoid(z: float) -> float:
    z = min(max(z, -LOGIT_BOUND), LOGIT_BOUND)
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def score_candidate(scorer: LinearScorer, h: np.ndarray) -> float:
    """Retrieval score of one feature vector."""
    if h.shape != (scorer.dimension,):
        raise DimensionMismatchError(scorer.dimension, h.shape[-1] if h.ndim else 0)
    return sigmoid(float(h @ scorer.w))


def score_row(cell_scores: Sequence[float]) -> float:
    """A row scores as its best cell."""
    if not cell_scores:
        raise EmptyRowError()
    return max(cell_scores)


def candidate_features(
    scorer: LinearScorer,
    question: Question,
    table: HybridTable,
    passages: Mapping[str, Passage],
) -> dict[EvidenceId, np.ndarray]:
    """
    Feature matrix per candidate: one row for col/cell/link ids, N rows
    (the row-tagged cell sequences) for a row id.
    """
    features: dict[EvidenceId, np.ndarray] = {}
    for evidence_id in enumerate_candidates(table):
        candidates = serialize_candidate(question, table, passages, evidence_id)
        features[evidence_id] = np.stack(
            [featurize(c, question, scorer.featurizer) for c in candidates]
        )
    return features


def score_all(
    scorer: LinearScorer,
    question: Question,
    table: HybridTable,
    passages: Mapping[str, Passage],
) -> ScoreSet:
    """Score every candidate of the question's table."""
    scores: dict[EvidenceId, float] = {}
    for evidence_id, members in candidate_features(scorer, question, table, passages).items():
        if evidence_id.granularity is Granularity.ROW:
            scores[evidence_id] = score_row([score_candidate(scorer, h) for h in members])
        else:
            scores[evidence_id] = score_candidate(scorer, members[0])

    logger.debug("Scored candidates", question_id=question.id, n_candidates=len(scores))
    return ScoreSet(question_id=question.id, scores=scores)


def scores_from_labels(
    labels: LabelSet, positive: float = 0.99, negative: float = 0.01
) -> ScoreSet:
    """Oracle scores: positive for labeled-1 candidates, negative otherwise."""
    return ScoreSet(
        question_id=labels.question_id,
        scores={e: positive if y else negative for e, y in labels.labels.items()},
    )


def top_candidate(scores: ScoreSet, granularity: Granularity) -> EvidenceId | None:
    """Highest-scoring candidate of a granularity; ties go to the lowest coordinates."""
    best, best_score = None, None
    for evidence_id in scores.of(granularity):
        s = scores[evidence_id]
        if best_score is None or s > best_score:
            best, best_score = evidence_id, s
    return best


def require_complete(scores: ScoreSet, table: HybridTable) -> None:
    """Raise IncompleteScoresError naming the first candidate without a score."""
    for evidence_id in enumerate_candidates(table):
        if evidence_id not in scores:
            raise IncompleteScoresError(scores.question_id, evidence_id)
