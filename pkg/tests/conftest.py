import pytest

from config import SynthSpec
from models import Cell, Dataset, HybridTable, Passage, Question
from services.retriever import scores_from_labels
from services.supervision import label_candidates
from services.synthetic import generate_synthetic


def _cell(value, *links):
    return Cell(value=value, link_ids=tuple(links))


@pytest.fixture
def players_table():
    """Two players, three columns; the first two columns link to passages."""
    return HybridTable(
        id="t1",
        headers=("Player", "Club", "Position"),
        cells=(
            (_cell("Ada Stone", "p1"), _cell("Rovers", "p2"), _cell("keeper")),
            (_cell("Ben Hale", "p3"), _cell("Wanderers", "p4"), _cell("striker")),
        ),
    )


@pytest.fixture
def players_passages():
    texts = {
        "p1": "Ada Stone was born in Leeds in 1988 .",
        "p2": "Rovers is a football club founded in 1901 .",
        "p3": "Ben Hale was born in York in 1990 .",
        "p4": "Wanderers is a club based in Bolton .",
    }
    return {pid: Passage(id=pid, text=text) for pid, text in texts.items()}


@pytest.fixture
def players_dataset(players_table, players_passages):
    questions = (
        Question(
            id="q1",
            table_id="t1",
            text="What position does Ben Hale play ?",
            gold_answers=("striker",),
        ),
        Question(
            id="q2",
            table_id="t1",
            text="Where was Ben Hale born ?",
            gold_answers=("York",),
        ),
        Question(
            id="q3",
            table_id="t1",
            text="In which year was the club of Ada Stone founded ?",
            gold_answers=("1901",),
        ),
    )
    return Dataset(tables={"t1": players_table}, passages=players_passages, questions=questions)


@pytest.fixture
def players_labels(players_dataset):
    ds = players_dataset
    return {q.id: label_candidates(q, ds.table_for(q), ds.passages) for q in ds.questions}


@pytest.fixture(scope="session")
def synthetic_dataset():
    return generate_synthetic(SynthSpec(n_questions=40, seed=42))


@pytest.fixture(scope="session")
def synthetic_labels(synthetic_dataset):
    ds = synthetic_dataset
    return {q.id: label_candidates(q, ds.table_for(q), ds.passages) for q in ds.questions}


@pytest.fixture(scope="session")
def synthetic_oracle_scores(synthetic_labels):
    return {qid: scores_from_labels(labels) for qid, labels in synthetic_labels.items()}


def dataset_document():
    """A small valid dataset file body."""
    return {
        "tables": [
            {
                "id": "t1",
                "headers": ["Player", "Club"],
                "rows": [
                    [{"value": "Ada Stone", "links": ["p1"]}, {"value": "Rovers", "links": []}],
                    [{"value": "Ben Hale", "links": []}, {"value": "Wanderers", "links": ["p2"]}],
                ],
            }
        ],
        "passages": {
            "p1": "Ada Stone was born in Leeds .",
            "p2": "Wanderers is a club based in Bolton .",
        },
        "questions": [
            {
                "id": "q1",
                "table_id": "t1",
                "question": "Which club does Ben Hale play for ?",
                "answers": ["Wanderers"],
                "answer_type": "in_table",
            },
            {
                "id": "q2",
                "table_id": "t1",
                "question": "Where was Ada Stone born ?",
                "answers": ["Leeds"],
                "answer_type": "in_passage",
            },
            {
                "id": "q3",
                "table_id": "t1",
                "question": "Where are the Wanderers based ?",
                "answers": ["Bolton"],
                "answer_type": None,
            },
        ],
    }


@pytest.fixture
def dataset_doc():
    return dataset_document()
