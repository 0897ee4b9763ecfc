"""
Evidence selector.

    s_tab[i][j]  = s_col[j] + s_row[i] + s_cell[i][j]
    s_pass[i][j] = s_col[j] + s_row[i] + max_x s_link[i][j][x]

Sums are evaluated left to right in exactly this order. Cells without links
take no part in the passage maximum. All argmax ties go to the lowest index,
rows before columns.
"""

from models import (
    EvidenceId,
    FusedScores,
    HybridTable,
    Navigation,
    ScoreSet,
    SelectedType,
)

from .retriever import require_complete

Best = tuple[float | None, tuple[int, int] | None]


def fuse_scores(scores: ScoreSet, table: HybridTable) -> FusedScores:
    require_complete(scores, table)
    s_col = [scores[EvidenceId.col(j)] for j in range(table.n_cols)]
    s_row = [scores[EvidenceId.row(i)] for i in range(table.n_rows)]

    s_tab, s_pass, best_link = [], [], []
    for i, row in enumerate(table.cells):
        tab_row, pass_row, link_row = [], [], []
        for j, cell in enumerate(row):
            tab_row.append(s_col[j] + s_row[i] + scores[EvidenceId.cell(i, j)])

            best_x, best = None, None
            for x in range(len(cell.link_ids)):
                s = scores[EvidenceId.link(i, j, x)]
                if best is None or s > best:
                    best_x, best = x, s
            pass_row.append(None if best is None else s_col[j] + s_row[i] + best)
            link_row.append(best_x)
        s_tab.append(tuple(tab_row))
        s_pass.append(tuple(pass_row))
        best_link.append(tuple(link_row))

    return FusedScores(s_tab=tuple(s_tab), s_pass=tuple(s_pass), best_link=tuple(best_link))


def _argmax(grid: tuple[tuple[float | None, ...], ...]) -> Best:
    best, where = None, None
    for i, row in enumerate(grid):
        for j, value in enumerate(row):
            if value is not None and (best is None or value > best):
                best, where = value, (i, j)
    return best, where


def global_best(fused: FusedScores) -> tuple[tuple[float, tuple[int, int]], Best]:
    """Global table maximum and passage maximum (None when no cell has links)."""
    s_tab, tab_cell = _argmax(fused.s_tab)
    return (s_tab, tab_cell), _argmax(fused.s_pass)


def decide_answer_type(s_tab: float, s_pass: float | None) -> SelectedType:
    """In-Passage when a passage candidate exists and scores at least the table maximum."""
    if s_pass is not None and s_tab <= s_pass:
        return SelectedType.IN_PASSAGE
    return SelectedType.IN_TABLE


def navigate(scores: ScoreSet, table: HybridTable) -> Navigation:
    """
    Select the fine-grained evidence for one question.

    Args:
        scores: Scores of every column, row, cell and link of the table
        table: The table the scores belong to

    Returns:
        Navigation naming the cell, and the link index when the answer type is
        In-Passage, together with both global maxima
    """
    fused = fuse_scores(scores, table)
    (s_tab, tab_cell), (s_pass, pass_cell) = global_best(fused)
    answer_type = decide_answer_type(s_tab, s_pass)

    if answer_type is SelectedType.IN_PASSAGE:
        i, j = pass_cell
        return Navigation(
            answer_type=answer_type,
            cell=pass_cell,
            link_index=fused.best_link[i][j],
            s_tab=s_tab,
            s_pass=s_pass,
        )
    return Navigation(answer_type=answer_type, cell=tab_cell, s_tab=s_tab, s_pass=s_pass)
