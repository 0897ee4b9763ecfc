"""
Read and write datasets, labels, scores, models, predictions and metrics.

Every loader validates what it reads and reports the offending entity id;
every writer goes through an atomic rename.
"""

from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from core.errors import IncompleteScoresError, SchemaError, UnknownQuestionError
from core.logging import logger
from models import (
    AnswerType,
    Cell,
    Dataset,
    EvidenceId,
    HybridTable,
    LabelSet,
    LinearScorer,
    MetricsReport,
    Navigation,
    Passage,
    Prediction,
    Question,
    ScoreSet,
    SelectedType,
)
from services.evidence import enumerate_candidates
from services.supervision import normalize_text

from .files import dumps_fixed, atomic_write_text, read_json, read_jsonl, write_json, write_jsonl


def _first_error(error: ValidationError) -> str:
    detail = error.errors()[0]
    where = ".".join(str(part) for part in detail["loc"])
    return f"{where}: {detail['msg']}" if where else detail["msg"]


def _require(record: Any, key: str, kind: type | tuple[type, ...], entity: str) -> Any:
    if not isinstance(record, dict) or key not in record:
        raise SchemaError(entity, f"missing field '{key}'")
    value = record[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(entity, f"field '{key}' has the wrong type")
    return value


# ---------------------------------------------------------------------------
# Dataset
# ---------------------------------------------------------------------------


def _parse_passages(raw: Any) -> dict[str, Passage]:
    if not isinstance(raw, dict):
        raise SchemaError("passages", "expected an object mapping id to text")
    passages = {}
    for passage_id, text in raw.items():
        if not isinstance(text, str):
            raise SchemaError(passage_id, "passage text must be a string")
        try:
            passages[passage_id] = Passage(id=passage_id, text=text)
        except ValidationError as e:
            raise SchemaError(passage_id, _first_error(e)) from e
    return passages


def _parse_cell(raw: Any, table_id: str, i: int, j: int, passages: Mapping[str, Passage]) -> Cell:
    where = f"{table_id}[{i}][{j}]"
    if not isinstance(raw, dict):
        raise SchemaError(table_id, f"cell {where} must be an object")
    value = raw.get("value", "")
    links = raw.get("links", [])
    if not isinstance(value, str):
        raise SchemaError(table_id, f"cell {where} value must be a string")
    if not isinstance(links, list) or not all(isinstance(x, str) for x in links):
        raise SchemaError(table_id, f"cell {where} links must be a list of passage ids")
    for link_id in links:
        if link_id not in passages:
            raise SchemaError(link_id, f"passage linked from {where} does not exist")
    return Cell(value=value, link_ids=tuple(links))


def _parse_table(raw: Any, index: int, passages: Mapping[str, Passage]) -> HybridTable:
    table_id = _require(raw, "id", str, f"tables[{index}]")
    headers = _require(raw, "headers", list, table_id)
    rows = _require(raw, "rows", list, table_id)
    if not all(isinstance(h, str) for h in headers):
        raise SchemaError(table_id, "headers must be strings")
    if not headers or not rows:
        raise SchemaError(table_id, "table needs at least one row and one column")
    cells = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise SchemaError(table_id, f"row {i} must be a list of cells")
        if len(row) != len(headers):
            raise SchemaError(table_id, f"row {i} has {len(row)} cells, expected {len(headers)}")
        cells.append(tuple(_parse_cell(c, table_id, i, j, passages) for j, c in enumerate(row)))
    try:
        return HybridTable(id=table_id, headers=tuple(headers), cells=tuple(cells))
    except ValidationError as e:
        raise SchemaError(table_id, _first_error(e)) from e


def _parse_question(raw: Any, index: int, tables: Mapping[str, HybridTable]) -> Question:
    question_id = _require(raw, "id", str, f"questions[{index}]")
    table_id = _require(raw, "table_id", str, question_id)
    text = _require(raw, "question", str, question_id)
    answers = _require(raw, "answers", list, question_id)
    if table_id not in tables:
        raise SchemaError(question_id, f"unknown table '{table_id}'")
    if not answers or not all(isinstance(a, str) for a in answers):
        raise SchemaError(question_id, "answers must be a non-empty list of strings")
    if any(not normalize_text(a) for a in answers):
        raise SchemaError(question_id, "gold answer is empty after normalization")

    answer_type = raw.get("answer_type")
    if answer_type not in (None, AnswerType.IN_TABLE.value, AnswerType.IN_PASSAGE.value):
        raise SchemaError(question_id, "answer_type must be in_table, in_passage or null")
    return Question(
        id=question_id,
        table_id=table_id,
        text=text,
        gold_answers=tuple(answers),
        gold_type=AnswerType(answer_type) if answer_type else None,
    )


def _unique(items: Iterable[Any], kind: str) -> dict[str, Any]:
    by_id: dict[str, Any] = {}
    for item in items:
        if item.id in by_id:
            raise SchemaError(item.id, f"duplicate {kind} id")
        by_id[item.id] = item
    return by_id


def parse_dataset(document: Any) -> Dataset:
    if not isinstance(document, dict):
        raise SchemaError("dataset", "top level must be an object")
    passages = _parse_passages(document.get("passages", {}))
    raw_tables = _require(document, "tables", list, "dataset")
    raw_questions = _require(document, "questions", list, "dataset")

    tables = _unique(
        (_parse_table(raw, k, passages) for k, raw in enumerate(raw_tables)), "table"
    )
    questions = _unique(
        (_parse_question(raw, k, tables) for k, raw in enumerate(raw_questions)), "question"
    )
    return Dataset(tables=tables, passages=passages, questions=tuple(questions.values()))


def load_dataset(path: str | Path) -> Dataset:
    """Load and validate a dataset file; all references are resolved."""
    dataset = parse_dataset(read_json(path))
    logger.info(
        "Dataset loaded",
        path=str(path),
        n_tables=len(dataset.tables),
        n_passages=len(dataset.passages),
        n_questions=len(dataset.questions),
    )
    return dataset


def dataset_to_json(dataset: Dataset) -> dict[str, Any]:
    return {
        "tables": [
            {
                "id": table.id,
                "headers": list(table.headers),
                "rows": [
                    [{"value": c.value, "links": list(c.link_ids)} for c in row]
                    for row in table.cells
                ],
            }
            for table in dataset.tables.values()
        ],
        "passages": {p.id: p.text for p in dataset.passages.values()},
        "questions": [
            {
                "id": q.id,
                "table_id": q.table_id,
                "question": q.text,
                "answers": list(q.gold_answers),
                "answer_type": q.gold_type.value if q.gold_type else None,
            }
            for q in dataset.questions
        ],
    }


def save_dataset(dataset: Dataset, path: str | Path) -> None:
    write_json(path, dataset_to_json(dataset))


# ---------------------------------------------------------------------------
# Labels and scores
# ---------------------------------------------------------------------------


def _evidence_id(record: Any, entity: str) -> EvidenceId:
    granularity = _require(record, "granularity", str, entity)
    coords = _require(record, "coords", list, entity)
    try:
        return EvidenceId.from_json(granularity, coords)
    except ValueError as e:
        raise SchemaError(entity, f"bad evidence id: {e}") from e


def _known_question(question_id: Any, dataset: Dataset | None, entity: str) -> str:
    if not isinstance(question_id, str):
        raise SchemaError(entity, "question_id must be a string")
    if dataset is not None and question_id not in dataset.question_ids():
        raise UnknownQuestionError(question_id)
    return question_id


def export_labels(labels: Mapping[str, LabelSet], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {
                "question_id": question_id,
                "labels": [{**e.to_json(), "y": label_set[e]} for e in label_set],
            }
            for question_id, label_set in labels.items()
        ),
    )


def import_labels(path: str | Path, dataset: Dataset | None = None) -> dict[str, LabelSet]:
    result: dict[str, LabelSet] = {}
    for k, record in enumerate(read_jsonl(path)):
        question_id = _known_question(
            record.get("question_id") if isinstance(record, dict) else None, dataset, f"labels[{k}]"
        )
        if question_id in result:
            raise SchemaError(question_id, "duplicate label record")
        entries = _require(record, "labels", list, question_id)
        labels: dict[EvidenceId, int] = {}
        for entry in entries:
            evidence_id = _evidence_id(entry, question_id)
            y = _require(entry, "y", int, question_id)
            if y not in (0, 1):
                raise SchemaError(question_id, f"label of {evidence_id} must be 0 or 1")
            labels[evidence_id] = y
        result[question_id] = LabelSet(question_id, labels)
    return result


def export_scores(scores: Mapping[str, ScoreSet], path: str | Path) -> None:
    write_jsonl(
        path,
        (
            {"question_id": question_id, **e.to_json(), "score": score_set[e]}
            for question_id, score_set in scores.items()
            for e in score_set
        ),
    )


def import_scores(path: str | Path, dataset: Dataset) -> dict[str, ScoreSet]:
    """
    Read an external score file, one candidate per line. Every question that
    appears must be scored on every candidate of its table.
    """
    raw: dict[str, dict[EvidenceId, float]] = {}
    for k, record in enumerate(read_jsonl(path)):
        question_id = _known_question(
            record.get("question_id") if isinstance(record, dict) else None, dataset, f"scores[{k}]"
        )
        evidence_id = _evidence_id(record, question_id)
        score = _require(record, "score", (int, float), question_id)
        if not 0.0 < score < 1.0:
            raise SchemaError(question_id, f"score of {evidence_id} must lie in (0, 1)")
        entries = raw.setdefault(question_id, {})
        if evidence_id in entries:
            raise SchemaError(question_id, f"duplicate score for {evidence_id}")
        entries[evidence_id] = float(score)

    questions = {q.id: q for q in dataset.questions}
    result = {}
    for question_id, entries in raw.items():
        candidates = enumerate_candidates(dataset.table_for(questions[question_id]))
        expected = set(candidates)
        for evidence_id in entries:
            if evidence_id not in expected:
                raise SchemaError(question_id, f"{evidence_id} is outside the table")
        for evidence_id in candidates:
            if evidence_id not in entries:
                raise IncompleteScoresError(question_id, evidence_id)
        result[question_id] = ScoreSet(question_id, entries)
    logger.info("Scores imported", path=str(path), n_questions=len(result))
    return result


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


def save_model(scorer: LinearScorer, path: str | Path) -> None:
    write_json(path, {"dimension": scorer.dimension, **scorer.model_dump(mode="json")})


def load_model(path: str | Path) -> LinearScorer:
    document = read_json(path)
    if not isinstance(document, dict):
        raise SchemaError("model", "top level must be an object")
    dimension = document.pop("dimension", None)
    try:
        scorer = LinearScorer.model_validate(document)
    except ValidationError as e:
        raise SchemaError("model", _first_error(e)) from e
    if dimension is not None and dimension != scorer.dimension:
        raise SchemaError("model", f"dimension {dimension} but {scorer.dimension} weights")
    return scorer


# ---------------------------------------------------------------------------
# Predictions and metrics
# ---------------------------------------------------------------------------


def prediction_to_json(prediction: Prediction) -> dict[str, Any]:
    navigation = prediction.navigation
    return {
        "question_id": prediction.question_id,
        "answer": prediction.answer,
        "answer_type": prediction.answer_type.value,
        "cell": list(navigation.cell) if navigation else None,
        "link_index": navigation.link_index if navigation else None,
        "reader_name": prediction.reader_name,
        "s_tab": navigation.s_tab if navigation else None,
        "s_pass": navigation.s_pass if navigation else None,
        "evidence": [e.to_json() for e in prediction.evidence],
    }


def export_predictions(predictions: Iterable[Prediction], path: str | Path) -> None:
    write_jsonl(path, (prediction_to_json(p) for p in predictions))


def _parse_prediction(record: Any, entity: str, dataset: Dataset) -> Prediction:
    question_id = _known_question(
        record.get("question_id") if isinstance(record, dict) else None, dataset, entity
    )
    answer = _require(record, "answer", str, question_id)
    answer_type = _require(record, "answer_type", str, question_id)
    reader_name = record.get("reader_name", "external")
    try:
        selected = SelectedType(answer_type)
        navigation = None
        if record.get("cell") is not None:
            navigation = Navigation(
                answer_type=selected,
                cell=tuple(record["cell"]),
                link_index=record.get("link_index"),
                s_tab=record.get("s_tab"),
                s_pass=record.get("s_pass"),
            )
        evidence = tuple(_evidence_id(e, question_id) for e in record.get("evidence") or ())
        return Prediction(
            question_id=question_id,
            answer=answer,
            answer_type=selected,
            navigation=navigation,
            evidence=evidence,
            reader_name=reader_name,
        )
    except (ValueError, TypeError) as e:
        # ValidationError is a ValueError
        raise SchemaError(question_id, str(e).splitlines()[0]) from e


def import_predictions(path: str | Path, dataset: Dataset) -> list[Prediction]:
    predictions: list[Prediction] = []
    seen: set[str] = set()
    for k, record in enumerate(read_jsonl(path)):
        prediction = _parse_prediction(record, f"predictions[{k}]", dataset)
        if prediction.question_id in seen:
            raise SchemaError(prediction.question_id, "duplicate prediction")
        seen.add(prediction.question_id)
        predictions.append(prediction)
    return predictions


def metrics_to_json(report: MetricsReport) -> dict[str, Any]:
    return report.model_dump(mode="json")


def write_metrics(report: MetricsReport, path: str | Path) -> None:
    atomic_write_text(path, dumps_fixed(metrics_to_json(report)) + "\n")


def write_ablation(reports: Mapping[str, MetricsReport], path: str | Path) -> None:
    """One metrics file per mode in a directory, plus a combined summary."""
    directory = Path(path)
    for mode, report in reports.items():
        write_metrics(report, directory / f"metrics_{mode}.json")
    summary = {mode: metrics_to_json(report) for mode, report in reports.items()}
    atomic_write_text(directory / "summary.json", dumps_fixed(summary) + "\n")
