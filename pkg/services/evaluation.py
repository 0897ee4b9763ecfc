"""
Answer metrics, retrieval recall and the granularity ablation harness.

EM and F1 follow the usual extractive-QA definitions (max over gold answers,
token multiset F1 after normalize_text). Splits follow the annotated answer
type, falling back to the distant-supervision type; questions no candidate
answers are counted apart and left out of every rate.
"""

from collections import Counter
from collections.abc import Mapping, Sequence

from config import AblationMode, ReaderConfig
from core.errors import MissingPredictionError, SchemaError, UnknownQuestionError
from core.logging import logger
from models import (
    AnswerType,
    Dataset,
    EvidenceId,
    GRANULARITIES,
    Granularity,
    LabelSet,
    LinearScorer,
    MetricsReport,
    Navigation,
    Prediction,
    ScoreSet,
    SelectedType,
    SplitMetrics,
)
from readers import BaseReader

from .evidence import enumerate_candidates
from .orchestrator import Orchestrator
from .retriever import top_candidate
from .supervision import derive_gold_type, normalize_text, tokenize


def exact_match(pred: str, golds: Sequence[str]) -> int:
    normalized = normalize_text(pred)
    return int(any(normalized == normalize_text(g) for g in golds))


def _f1(pred_tokens: list[str], gold_tokens: list[str]) -> float:
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = Counter(pred_tokens) & Counter(gold_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def token_f1(pred: str, golds: Sequence[str]) -> float:
    pred_tokens = tokenize(pred)
    return max(_f1(pred_tokens, tokenize(g)) for g in golds)


def recall_at_1(scores: ScoreSet, labels: LabelSet, granularity: Granularity) -> int:
    """Whether the top-1 candidate of a granularity contains the answer."""
    top = top_candidate(scores, granularity)
    return 0 if top is None else labels[top]


def multi_r_at_1(navigation: Navigation, labels: LabelSet) -> int:
    """Whether the navigated cell (In-Table) or link (In-Passage) contains the answer."""
    i, j = navigation.cell
    if navigation.answer_type is SelectedType.IN_PASSAGE:
        return labels[EvidenceId.link(i, j, navigation.link_index)]
    return labels[EvidenceId.cell(i, j)]


def _split(em: list[int], f1: list[float]) -> SplitMetrics:
    n = len(em)
    if n == 0:
        return SplitMetrics(em=0.0, f1=0.0, n=0)
    return SplitMetrics(em=sum(em) / n, f1=sum(f1) / n, n=n)


def _rate(hits: list[int]) -> float:
    return sum(hits) / len(hits) if hits else 0.0


def evaluate(
    predictions: Sequence[Prediction],
    dataset: Dataset,
    labels: Mapping[str, LabelSet],
    scores: Mapping[str, ScoreSet] | None = None,
) -> MetricsReport:
    """
    Aggregate EM / F1 per answer type and R@1 per granularity.

    R@1 of a granularity averages over answerable questions with at least one
    positive of that granularity; "multi" averages the navigation hits of
    predictions made through the selector.

    Args:
        predictions: Exactly one prediction per dataset question
        dataset: Questions with their gold answers
        labels: Distant-supervision labels, which also decide the answer type
            of questions without a stated one
        scores: Candidate scores per question. Without them the report has no
            per-granularity R@1 and a warning is logged

    Returns:
        MetricsReport with In-Table, In-Passage and total splits
    """
    by_id = {p.question_id: p for p in predictions}
    em: dict[AnswerType, list[int]] = {AnswerType.IN_TABLE: [], AnswerType.IN_PASSAGE: []}
    f1: dict[AnswerType, list[float]] = {AnswerType.IN_TABLE: [], AnswerType.IN_PASSAGE: []}
    recall: dict[str, list[int]] = {g.value: [] for g in GRANULARITIES}
    recall["multi"] = []
    selected: list[int] = []
    n_unanswerable = 0
    n_abstained = 0

    for question in dataset.questions:
        prediction = by_id.get(question.id)
        if prediction is None:
            raise MissingPredictionError(question.id)
        label_set = labels.get(question.id)
        if label_set is None:
            raise SchemaError(question.id, "no labels for evaluated question")

        kind = question.gold_type or derive_gold_type(label_set)
        if kind is AnswerType.UNANSWERABLE:
            n_unanswerable += 1
            continue

        em[kind].append(exact_match(prediction.answer, question.gold_answers))
        f1[kind].append(token_f1(prediction.answer, question.gold_answers))
        n_abstained += prediction.abstained

        if not any(label_set.labels.values()):
            continue
        selected.append(int(any(label_set[e] for e in prediction.evidence)))
        if prediction.navigation is not None:
            recall["multi"].append(multi_r_at_1(prediction.navigation, label_set))
        if scores is not None:
            question_scores = scores[question.id]
            for g in GRANULARITIES:
                if label_set.positives(g):
                    recall[g.value].append(recall_at_1(question_scores, label_set, g))

    r_at_1 = {}
    if scores is not None:
        r_at_1.update({g.value: _rate(recall[g.value]) for g in GRANULARITIES})
    else:
        logger.warning(
            "No scores given; per-granularity R@1 left out of the report",
            n_questions=len(dataset.questions),
        )
    if recall["multi"]:
        r_at_1["multi"] = _rate(recall["multi"])

    in_table = _split(em[AnswerType.IN_TABLE], f1[AnswerType.IN_TABLE])
    in_passage = _split(em[AnswerType.IN_PASSAGE], f1[AnswerType.IN_PASSAGE])
    total = _split(
        em[AnswerType.IN_TABLE] + em[AnswerType.IN_PASSAGE],
        f1[AnswerType.IN_TABLE] + f1[AnswerType.IN_PASSAGE],
    )
    report = MetricsReport(
        in_table=in_table,
        in_passage=in_passage,
        total=total,
        n_unanswerable=n_unanswerable,
        n_abstained=n_abstained,
        r_at_1=r_at_1,
        selected_r_at_1=_rate(selected),
    )
    logger.info(
        "Evaluation finished",
        n=total.n,
        em=round(total.em, 6),
        f1=round(total.f1, 6),
        n_unanswerable=n_unanswerable,
    )
    return report


def ablate(
    dataset: Dataset,
    labels: Mapping[str, LabelSet],
    scorer: LinearScorer | None,
    reader: BaseReader | None,
    modes: Sequence[AblationMode],
    scores: Mapping[str, ScoreSet] | None = None,
    reader_config: ReaderConfig | None = None,
) -> dict[str, MetricsReport]:
    """
    Compare the selector pipeline ("multi") against baselines that read the
    top-1 evidence of a single granularity, or of all four flattened ("flat").
    """
    orchestrator = Orchestrator(
        dataset, scorer=scorer, scores=scores, reader=reader, reader_config=reader_config
    )
    all_scores = orchestrator.all_scores()
    reports = {}
    for mode in modes:
        predictions = orchestrator.predict(mode)
        reports[mode] = evaluate(predictions, dataset, labels, all_scores)
        logger.info("Ablation mode evaluated", mode=mode, em=round(reports[mode].total.em, 6))
    return reports


def check_predictions(predictions: Sequence[Prediction], dataset: Dataset) -> None:
    """Predictions must reference dataset questions and evidence inside their tables."""
    questions = {q.id: q for q in dataset.questions}
    for prediction in predictions:
        question = questions.get(prediction.question_id)
        if question is None:
            raise UnknownQuestionError(prediction.question_id)
        valid = set(enumerate_candidates(dataset.table_for(question)))
        for evidence_id in prediction.evidence:
            if evidence_id not in valid:
                raise SchemaError(prediction.question_id, f"evidence {evidence_id} outside table")
