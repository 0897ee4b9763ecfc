"""
Evidence candidate enumeration and serialization.

Every candidate t is fed to the retriever as the sequence

    [CLS] {tag} [SEP] {question} [SEP] {content}

where content is the header (col), the passage text (link), or for a cell
``{h_j} [SEP] {h_0}: {c_i0} | ... | {h_N-1}: {c_iN-1} [SEP] {link texts}``
with link texts joined by `` [SEP] ``. Neighbor values are listed without
their passages. A row is never serialized as one string: it expands to the
cell-style sequences of its N cells, tagged ``row``.

Markers are literal substrings with single surrounding spaces. A question
that itself contains ``[SEP]`` serializes fine but cannot be parsed back.
"""

from collections.abc import Mapping

from models import EvidenceCandidate, EvidenceId, Granularity, HybridTable, Passage, Question

CLS = "[CLS]"
SEP = "[SEP]"
MARKERS = frozenset({CLS, SEP})
JOIN = f" {SEP} "


def enumerate_candidates(table: HybridTable) -> list[EvidenceId]:
    """All evidence ids of a table: cols by j, rows by i, cells then links row-major."""
    ids = [EvidenceId.col(j) for j in range(table.n_cols)]
    ids.extend(EvidenceId.row(i) for i in range(table.n_rows))
    ids.extend(
        EvidenceId.cell(i, j) for i in range(table.n_rows) for j in range(table.n_cols)
    )
    ids.extend(
        EvidenceId.link(i, j, x)
        for i in range(table.n_rows)
        for j in range(table.n_cols)
        for x in range(len(table.cells[i][j].link_ids))
    )
    return ids


def cell_content(table: HybridTable, passages: Mapping[str, Passage], i: int, j: int) -> str:
    """Header, row neighbors and linked passages of cell (i, j)."""
    neighbors = " | ".join(
        f"{header}: {cell.value}" for header, cell in zip(table.headers, table.cells[i])
    )
    links = JOIN.join(passages[pid].text for pid in table.cells[i][j].link_ids)
    return f"{table.headers[j]}{JOIN}{neighbors}{JOIN}{links}"


def link_passage(
    table: HybridTable, passages: Mapping[str, Passage], evidence_id: EvidenceId
) -> Passage:
    i, j, x = evidence_id.coords
    return passages[table.cells[i][j].link_ids[x]]


def _sequence(tag: Granularity, question: Question, content: str) -> str:
    return f"{CLS} {tag.value}{JOIN}{question.text}{JOIN}{content}"


def serialize_candidate(
    question: Question,
    table: HybridTable,
    passages: Mapping[str, Passage],
    evidence_id: EvidenceId,
) -> list[EvidenceCandidate]:
    """
    Serialize one candidate into its retriever input sequence(s).

    Returns a single candidate for col, cell and link ids, and N candidates
    (one per cell of the row, in column order) for a row id.
    """
    tag = evidence_id.granularity
    if tag is Granularity.COL:
        (j,) = evidence_id.coords
        content = table.headers[j]
    elif tag is Granularity.LINK:
        content = link_passage(table, passages, evidence_id).text
    elif tag is Granularity.CELL:
        i, j = evidence_id.coords
        content = cell_content(table, passages, i, j)
    else:
        (i,) = evidence_id.coords
        return [
            EvidenceCandidate(evidence_id, _sequence(tag, question, cell_content(table, passages, i, j)))
            for j in range(table.n_cols)
        ]
    return [EvidenceCandidate(evidence_id, _sequence(tag, question, content))]


def parse_serialized(serialized: str) -> tuple[str, str, str]:
    """
    Split a sequence back into (tag, question text, content).

    Lossless only when the question text contains no ``[SEP]`` marker.
    """
    prefix = f"{CLS} "
    if not serialized.startswith(prefix):
        raise ValueError("sequence must start with [CLS]")
    tag, rest = serialized[len(prefix):].split(JOIN, 1)
    question_text, content = rest.split(JOIN, 1)
    return tag, question_text, content


def candidate_content(candidate: EvidenceCandidate, question: Question) -> str:
    """The evidence part of a candidate's sequence, robust to [SEP] inside the question."""
    prefix = _sequence(candidate.id.granularity, question, "")
    if not candidate.serialized.startswith(prefix):
        raise ValueError(f"{candidate.id} was not serialized for question {question.id}")
    return candidate.serialized[len(prefix):]


def flatten_evidence(
    table: HybridTable,
    passages: Mapping[str, Passage],
    evidence_id: EvidenceId,
    char_limit: int,
) -> str:
    """
    Flatten one coarse or fine candidate into a single readable text.

    A column joins the cell-style contents of its M cells, a row those of its
    N cells; a cell uses its cell-style content and a link its passage.
    """
    tag = evidence_id.granularity
    if tag is Granularity.COL:
        (j,) = evidence_id.coords
        text = JOIN.join(cell_content(table, passages, i, j) for i in range(table.n_rows))
    elif tag is Granularity.ROW:
        (i,) = evidence_id.coords
        text = JOIN.join(cell_content(table, passages, i, j) for j in range(table.n_cols))
    elif tag is Granularity.CELL:
        text = cell_content(table, passages, *evidence_id.coords)
    else:
        text = link_passage(table, passages, evidence_id).text
    return text[:char_limit]
