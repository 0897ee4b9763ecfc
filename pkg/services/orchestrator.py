from collections.abc import Mapping

from config import AblationMode, ReaderConfig
from core.errors import UsageError
from core.logging import logger
from models import (
    Dataset,
    EvidenceId,
    GRANULARITIES,
    Granularity,
    HybridTable,
    LinearScorer,
    Passage,
    Prediction,
    Question,
    ScoreSet,
    SelectedType,
)
from readers import BaseReader, ProximityReader

from .evidence import JOIN, flatten_evidence, link_passage
from .retriever import require_complete, score_all, top_candidate
from .selector import navigate


def answer_question(
    question: Question,
    table: HybridTable,
    passages: Mapping[str, Passage],
    scores: ScoreSet,
    reader: BaseReader,
) -> Prediction:
    """
    Answer reasoning: navigate with the evidence selector, then return the cell value
    (In-Table) or read the navigated link's passage (In-Passage).

    Args:
        question: The question being answered
        table: The question's table
        passages: Passage store resolving the table's link ids
        scores: A complete score set for every candidate of the table
        reader: Span reader used for In-Passage answers

    Returns:
        Prediction carrying the answer, the navigation and the selected evidence id
    """
    navigation = navigate(scores, table)
    i, j = navigation.cell

    if navigation.answer_type is SelectedType.IN_TABLE:
        answer = table.cells[i][j].value
        evidence = EvidenceId.cell(i, j)
    else:
        evidence = EvidenceId.link(i, j, navigation.link_index)
        answer = reader.run(question, link_passage(table, passages, evidence).text)

    return Prediction(
        question_id=question.id,
        answer=answer,
        answer_type=navigation.answer_type,
        navigation=navigation,
        evidence=(evidence,),
        reader_name=reader.name,
    )


class Orchestrator:
    """
    Runs the retrieval and reasoning pipeline over a dataset.
    Scores come from a trained scorer or from an external score map.
    """

    def __init__(
        self,
        dataset: Dataset,
        scorer: LinearScorer | None = None,
        scores: Mapping[str, ScoreSet] | None = None,
        reader: BaseReader | None = None,
        reader_config: ReaderConfig | None = None,
    ):
        if scorer is None and scores is None:
            raise UsageError("either a trained model or a score file is required")
        self.dataset = dataset
        self.scorer = scorer
        self.external_scores = scores
        self.reader_config = reader_config or ReaderConfig()
        self.reader = reader or ProximityReader(self.reader_config.max_span_tokens)
        self._cache: dict[str, ScoreSet] = {}
        logger.debug(
            "Orchestrator initialized",
            n_questions=len(dataset.questions),
            external_scores=scores is not None,
            reader=self.reader.name,
        )

    def scores_for(self, question: Question) -> ScoreSet:
        """
        Scores of every candidate of the question's table, computed once.

        Raises:
            UsageError: The external score map has no entry for the question
            IncompleteScoresError: The external entry misses a candidate
        """
        cached = self._cache.get(question.id)
        if cached is not None:
            return cached

        table = self.dataset.table_for(question)
        if self.external_scores is not None:
            if question.id not in self.external_scores:
                raise UsageError(f"score file has no scores for question {question.id}")
            scores = self.external_scores[question.id]
            require_complete(scores, table)
        else:
            scores = score_all(self.scorer, question, table, self.dataset.passages)
        self._cache[question.id] = scores
        return scores

    def all_scores(self) -> dict[str, ScoreSet]:
        return {q.id: self.scores_for(q) for q in self.dataset.questions}

    def answer(self, question: Question, mode: AblationMode = "multi") -> Prediction:
        scores = self.scores_for(question)
        table = self.dataset.table_for(question)
        if mode == "multi":
            return answer_question(question, table, self.dataset.passages, scores, self.reader)
        if mode == "flat":
            return self._answer_flat(question, table, scores)
        return self._answer_mono(question, table, scores, Granularity(mode))

    def _answer_mono(
        self,
        question: Question,
        table: HybridTable,
        scores: ScoreSet,
        granularity: Granularity,
    ) -> Prediction:
        """Read the top-1 evidence of one granularity, bypassing the selector."""
        top = top_candidate(scores, granularity)
        if top is None:
            # Table without links: nothing to read
            return Prediction(
                question_id=question.id,
                answer="",
                answer_type=SelectedType.IN_PASSAGE,
                reader_name=self.reader.name,
            )

        if granularity is Granularity.CELL:
            i, j = top.coords
            return Prediction(
                question_id=question.id,
                answer=table.cells[i][j].value,
                answer_type=SelectedType.IN_TABLE,
                evidence=(top,),
                reader_name=self.reader.name,
            )

        text = flatten_evidence(
            table, self.dataset.passages, top, self.reader_config.flatten_char_limit
        )
        return Prediction(
            question_id=question.id,
            answer=self.reader.run(question, text),
            answer_type=SelectedType.IN_PASSAGE,
            evidence=(top,),
            reader_name=self.reader.name,
        )

    def _answer_flat(self, question: Question, table: HybridTable, scores: ScoreSet) -> Prediction:
        """Read the concatenated top-1 evidence of every granularity."""
        tops = tuple(
            top for top in (top_candidate(scores, g) for g in GRANULARITIES) if top is not None
        )
        limit = self.reader_config.flatten_char_limit
        text = JOIN.join(flatten_evidence(table, self.dataset.passages, t, limit) for t in tops)
        return Prediction(
            question_id=question.id,
            answer=self.reader.run(question, text[:limit]),
            answer_type=SelectedType.IN_PASSAGE,
            evidence=tops,
            reader_name=self.reader.name,
        )

    def predict(self, mode: AblationMode = "multi") -> list[Prediction]:
        """
        Answer every dataset question.

        Args:
            mode: "multi" for the evidence selector, a granularity for its top-1
                baseline, or "flat" for all four top-1 evidences read together

        Returns:
            One prediction per question, in dataset order
        """
        predictions = [self.answer(q, mode) for q in self.dataset.questions]
        logger.info(
            "Predictions generated",
            mode=mode,
            n_predictions=len(predictions),
            n_abstained=sum(p.abstained for p in predictions),
        )
        return predictions
