#!/usr/bin/env python3
"""
Convert a HybridQA release into the dataset file format.

Usage:
    python scripts/convert_hybridqa.py \
        --questions released_data/dev.json \
        --tables WikiTables-WithLinks/tables_tok \
        --passages WikiTables-WithLinks/request_tok \
        --out data/hybridqa_dev.json

See scripts/README.md for the field mapping.
"""

import argparse
import sys
from pathlib import Path
from typing import Any

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from core.errors import PipelineError  # noqa: E402
from core.logging import logger, setup_logging  # noqa: E402
from storage.files import read_json, write_json  # noqa: E402
from services.supervision import normalize_text  # noqa: E402
from storage.repository import parse_dataset  # noqa: E402


def _header_name(header: Any) -> str:
    # tables_tok headers are [name, links]; older dumps use plain strings
    return header[0] if isinstance(header, list) else str(header)


def _convert_cell(cell: Any, passages: dict[str, str]) -> dict[str, Any]:
    if isinstance(cell, list):
        value, links = cell[0], cell[1] if len(cell) > 1 else []
    else:
        value, links = str(cell), []
    kept = [link for link in links if passages.get(link, "").strip()]
    return {"value": value, "links": kept}


def convert_table(table_id: str, tables_dir: Path, passages_dir: Path, passages: dict) -> dict:
    raw = read_json(tables_dir / f"{table_id}.json")
    linked = read_json(passages_dir / f"{table_id}.json")
    passages.update({k: v for k, v in linked.items() if isinstance(v, str) and v.strip()})
    return {
        "id": table_id,
        "headers": [_header_name(h) for h in raw["header"]],
        "rows": [[_convert_cell(c, passages) for c in row] for row in raw["data"]],
    }


def answer_type(nodes: list) -> str | None:
    """in_table when any answer node is a table cell, in_passage when all are passages."""
    kinds = {node[-1] for node in nodes if isinstance(node, list) and node}
    if "table" in kinds:
        return "in_table"
    if "passage" in kinds:
        return "in_passage"
    return None


def convert(questions_path: Path, tables_dir: Path, passages_dir: Path) -> dict[str, Any]:
    records = read_json(questions_path)
    tables: dict[str, dict] = {}
    passages: dict[str, str] = {}
    questions = []
    n_skipped = 0

    for record in records:
        table_id = record["table_id"]
        answer = (record.get("answer-text") or "").strip()
        if not normalize_text(answer):
            n_skipped += 1
            continue
        if table_id not in tables:
            tables[table_id] = convert_table(table_id, tables_dir, passages_dir, passages)
        questions.append(
            {
                "id": record["question_id"],
                "table_id": table_id,
                "question": record["question"],
                "answers": [answer],
                "answer_type": answer_type(record.get("answer-node", [])),
            }
        )

    logger.info(
        "HybridQA converted",
        n_tables=len(tables),
        n_passages=len(passages),
        n_questions=len(questions),
        n_skipped=n_skipped,
    )
    return {"tables": list(tables.values()), "passages": passages, "questions": questions}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--questions", type=Path, required=True)
    parser.add_argument("--tables", type=Path, required=True)
    parser.add_argument("--passages", type=Path, required=True)
    parser.add_argument("--out", type=Path, required=True)
    args = parser.parse_args(argv)
    setup_logging(level="info")

    try:
        document = convert(args.questions, args.tables, args.passages)
        parse_dataset(document)
        write_json(args.out, document)
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
