from .table import AnswerType, Passage, Cell, HybridTable, Question, Dataset
from .evidence import (
    Granularity,
    GRANULARITIES,
    EvidenceId,
    EvidenceCandidate,
    LabelSet,
    ScoreSet,
)
from .scorer import FEATURE_NAMES, FeaturizerConfig, LinearScorer
from .selection import SelectedType, FusedScores, Navigation
from .prediction import Prediction, SplitMetrics, MetricsReport

__all__ = [
    "AnswerType",
    "Passage",
    "Cell",
    "HybridTable",
    "Question",
    "Dataset",
    "Granularity",
    "GRANULARITIES",
    "EvidenceId",
    "EvidenceCandidate",
    "LabelSet",
    "ScoreSet",
    "FEATURE_NAMES",
    "FeaturizerConfig",
    "LinearScorer",
    "SelectedType",
    "FusedScores",
    "Navigation",
    "Prediction",
    "SplitMetrics",
    "MetricsReport",
]
