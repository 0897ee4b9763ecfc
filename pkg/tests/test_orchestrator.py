import pytest

from core.errors import UsageError
from models import Cell, Dataset, EvidenceId, HybridTable, Question, SelectedType
from readers import BaseReader
from services.evidence import flatten_evidence
from services.orchestrator import Orchestrator, answer_question
from services.retriever import scores_from_labels
from services.supervision import label_candidates


class RecordingReader(BaseReader):
    name = "recording"

    def __init__(self, answer="READ"):
        self.answer = answer
        self.texts = []

    def run(self, question, passage_text):
        self.texts.append(passage_text)
        return self.answer


@pytest.fixture
def oracle_scores(players_labels):
    return {qid: scores_from_labels(labels) for qid, labels in players_labels.items()}


class TestAnswerQuestion:
    def test_in_table_returns_cell_value(self, players_dataset, oracle_scores):
        ds = players_dataset
        q = ds.questions[0]
        reader = RecordingReader()
        prediction = answer_question(q, ds.table_for(q), ds.passages, oracle_scores[q.id], reader)
        assert prediction.answer == "striker"
        assert prediction.answer_type is SelectedType.IN_TABLE
        assert prediction.evidence == (EvidenceId.cell(1, 2),)
        assert reader.texts == []

    def test_in_passage_reads_navigated_link(self, players_dataset, oracle_scores):
        ds = players_dataset
        q = ds.questions[1]
        reader = RecordingReader()
        prediction = answer_question(q, ds.table_for(q), ds.passages, oracle_scores[q.id], reader)
        assert prediction.answer == "READ"
        assert prediction.answer_type is SelectedType.IN_PASSAGE
        assert prediction.evidence == (EvidenceId.link(1, 0, 0),)
        assert reader.texts == [ds.passages["p3"].text]
        assert prediction.reader_name == "recording"


class TestOrchestrator:
    def test_requires_model_or_scores(self, players_dataset):
        with pytest.raises(UsageError):
            Orchestrator(players_dataset)

    def test_missing_external_scores(self, players_dataset, oracle_scores):
        partial = {"q1": oracle_scores["q1"]}
        orchestrator = Orchestrator(players_dataset, scores=partial, reader=RecordingReader())
        with pytest.raises(UsageError):
            orchestrator.predict()

    def test_cell_mode_returns_top_cell_value(self, players_dataset, oracle_scores):
        orchestrator = Orchestrator(
            players_dataset, scores=oracle_scores, reader=RecordingReader()
        )
        prediction = orchestrator.answer(players_dataset.questions[1], "cell")
        # no cell holds "York": every cell ties and the first one wins
        assert prediction.answer == "Ada Stone"
        assert prediction.answer_type is SelectedType.IN_TABLE
        assert prediction.navigation is None

    def test_link_mode_reads_top_link(self, players_dataset, oracle_scores):
        reader = RecordingReader()
        orchestrator = Orchestrator(players_dataset, scores=oracle_scores, reader=reader)
        prediction = orchestrator.answer(players_dataset.questions[2], "link")
        assert prediction.evidence == (EvidenceId.link(0, 1, 0),)
        assert reader.texts == [players_dataset.passages["p2"].text]

    def test_row_mode_reads_flattened_row(self, players_dataset, oracle_scores):
        reader = RecordingReader()
        orchestrator = Orchestrator(players_dataset, scores=oracle_scores, reader=reader)
        prediction = orchestrator.answer(players_dataset.questions[1], "row")
        table = players_dataset.tables["t1"]
        assert prediction.evidence == (EvidenceId.row(1),)
        assert reader.texts == [
            flatten_evidence(table, players_dataset.passages, EvidenceId.row(1), 4096)
        ]

    def test_flat_mode_uses_every_granularity(self, players_dataset, oracle_scores):
        reader = RecordingReader()
        orchestrator = Orchestrator(players_dataset, scores=oracle_scores, reader=reader)
        prediction = orchestrator.answer(players_dataset.questions[1], "flat")
        assert prediction.evidence == (
            EvidenceId.col(0),
            EvidenceId.row(1),
            EvidenceId.cell(0, 0),
            EvidenceId.link(1, 0, 0),
        )
        assert len(reader.texts) == 1

    def test_link_mode_without_links_abstains(self):
        table = HybridTable(id="t", headers=("a",), cells=((Cell(value="x"),),))
        question = Question(id="q", table_id="t", text="what is a", gold_answers=("x",))
        dataset = Dataset(tables={"t": table}, passages={}, questions=(question,))
        labels = label_candidates(question, table, {})
        orchestrator = Orchestrator(
            dataset, scores={"q": scores_from_labels(labels)}, reader=RecordingReader()
        )
        prediction = orchestrator.answer(question, "link")
        assert prediction.abstained
        assert prediction.evidence == ()

    def test_predict_answers_every_question(self, players_dataset, oracle_scores):
        orchestrator = Orchestrator(
            players_dataset, scores=oracle_scores, reader=RecordingReader()
        )
        predictions = orchestrator.predict()
        assert [p.question_id for p in predictions] == ["q1", "q2", "q3"]
        assert all(p.navigation is not None for p in predictions)
