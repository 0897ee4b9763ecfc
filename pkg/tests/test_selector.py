import itertools

import numpy as np
import pytest

from core.errors import IncompleteScoresError
from models import Cell, EvidenceId, HybridTable, ScoreSet, SelectedType
from services.evidence import enumerate_candidates
from services.retriever import scores_from_labels
from services.selector import decide_answer_type, fuse_scores, global_best, navigate


def _uniform(table, value):
    return ScoreSet("q", {e: value for e in enumerate_candidates(table)})


def _random_table(rng, max_rows=20, max_cols=20, max_links=4):
    n_rows, n_cols = int(rng.integers(1, max_rows + 1)), int(rng.integers(1, max_cols + 1))
    cells = tuple(
        tuple(
            Cell(
                value=f"v{i}_{j}",
                link_ids=tuple(f"p{i}_{j}_{x}" for x in range(rng.integers(0, max_links + 1))),
            )
            for j in range(n_cols)
        )
        for i in range(n_rows)
    )
    return HybridTable(id="t", headers=tuple(f"h{j}" for j in range(n_cols)), cells=cells)


def _random_scores(rng, table, ties=True, low=0.05, high=0.85):
    """Continuous scores, or with ties=True a coarse grid of twentieths half of the time."""
    coarse = ties and rng.random() < 0.5
    return ScoreSet(
        "q",
        {
            e: float(rng.integers(1, 20) / 20) if coarse else float(rng.uniform(low, high))
            for e in enumerate_candidates(table)
        },
    )


def _brute_force_grids(scores, table):
    """Fused grids recomputed cell by cell, summing col + row + evidence left to right."""
    s_tab, s_pass, best_link = [], [], []
    for i in range(table.n_rows):
        tab_row, pass_row, link_row = [], [], []
        for j in range(table.n_cols):
            col, row = scores[EvidenceId.col(j)], scores[EvidenceId.row(i)]
            tab_row.append(col + row + scores[EvidenceId.cell(i, j)])
            links = [scores[EvidenceId.link(i, j, x)] for x in range(len(table.cells[i][j].link_ids))]
            if links:
                x = links.index(max(links))
                pass_row.append(col + row + links[x])
                link_row.append(x)
            else:
                pass_row.append(None)
                link_row.append(None)
        s_tab.append(tuple(tab_row))
        s_pass.append(tuple(pass_row))
        best_link.append(tuple(link_row))
    return tuple(s_tab), tuple(s_pass), tuple(best_link)


def _brute_force(scores, table):
    """Exhaustive selection over every (cell, link) pair."""
    best_tab, tab_cell = None, None
    best_pass, pass_target = None, None
    for i, j in itertools.product(range(table.n_rows), range(table.n_cols)):
        base = scores[EvidenceId.col(j)] + scores[EvidenceId.row(i)]
        s = base + scores[EvidenceId.cell(i, j)]
        if best_tab is None or s > best_tab:
            best_tab, tab_cell = s, (i, j)
        for x in range(len(table.cells[i][j].link_ids)):
            s = base + scores[EvidenceId.link(i, j, x)]
            if best_pass is None or s > best_pass:
                best_pass, pass_target = s, (i, j, x)
    if best_pass is not None and best_tab <= best_pass:
        return SelectedType.IN_PASSAGE, pass_target[:2], pass_target[2]
    return SelectedType.IN_TABLE, tab_cell, None


class TestFuseScores:
    def test_sums_in_fixed_order(self, players_table):
        scores = ScoreSet(
            "q",
            {
                e: 0.1 + 0.01 * k
                for k, e in enumerate(enumerate_candidates(players_table))
            },
        )
        fused = fuse_scores(scores, players_table)
        s = scores.scores
        assert fused.s_tab[1][2] == (
            s[EvidenceId.col(2)] + s[EvidenceId.row(1)] + s[EvidenceId.cell(1, 2)]
        )
        assert fused.s_pass[0][1] == (
            s[EvidenceId.col(1)] + s[EvidenceId.row(0)] + s[EvidenceId.link(0, 1, 0)]
        )

    def test_cells_without_links_have_no_passage_score(self, players_table):
        fused = fuse_scores(_uniform(players_table, 0.5), players_table)
        assert fused.s_pass[0][2] is None
        assert fused.best_link[1][2] is None
        assert fused.best_link[1][0] == 0

    def test_incomplete_scores(self, players_table):
        scores = ScoreSet("q", {EvidenceId.col(0): 0.5})
        with pytest.raises(IncompleteScoresError):
            fuse_scores(scores, players_table)


class TestDecideAnswerType:
    def test_tie_goes_to_passage(self):
        assert decide_answer_type(1.5, 1.5) is SelectedType.IN_PASSAGE

    def test_table_wins_when_higher(self):
        assert decide_answer_type(1.6, 1.5) is SelectedType.IN_TABLE

    def test_no_links_is_in_table(self):
        assert decide_answer_type(0.3, None) is SelectedType.IN_TABLE


class TestNavigate:
    def test_oracle_in_table(self, players_labels, players_table):
        navigation = navigate(scores_from_labels(players_labels["q1"]), players_table)
        assert navigation.answer_type is SelectedType.IN_TABLE
        assert navigation.cell == (1, 2)
        assert navigation.link_index is None

    def test_oracle_in_passage(self, players_labels, players_table):
        navigation = navigate(scores_from_labels(players_labels["q2"]), players_table)
        assert navigation.answer_type is SelectedType.IN_PASSAGE
        assert navigation.cell == (1, 0)
        assert navigation.link_index == 0
        assert navigation.s_pass == pytest.approx(0.99 * 3)

    def test_uniform_scores_tie_to_first_linked_cell(self, players_table):
        navigation = navigate(_uniform(players_table, 0.5), players_table)
        assert navigation.answer_type is SelectedType.IN_PASSAGE
        assert navigation.cell == (0, 0)
        assert navigation.link_index == 0

    def test_table_without_links(self):
        table = HybridTable(
            id="t",
            headers=("a", "b"),
            cells=((Cell(value="x"), Cell(value="y")),),
        )
        navigation = navigate(_uniform(table, 0.5), table)
        assert navigation.answer_type is SelectedType.IN_TABLE
        assert navigation.cell == (0, 0)
        assert navigation.s_pass is None

    def test_matches_brute_force(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            table = _random_table(rng)
            scores = _random_scores(rng, table)
            fused = fuse_scores(scores, table)
            assert (fused.s_tab, fused.s_pass, fused.best_link) == _brute_force_grids(scores, table)
            navigation = navigate(scores, table)
            expected = _brute_force(scores, table)
            assert (navigation.answer_type, navigation.cell, navigation.link_index) == expected

    def test_invariant_to_shifting_all_columns(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            table = _random_table(rng)
            scores = _random_scores(rng, table, ties=False)
            delta = float(rng.uniform(-0.04, 0.04))
            shifted = ScoreSet(
                "q",
                {
                    e: s + delta if e.granularity.value == "col" else s
                    for e, s in scores.scores.items()
                },
            )
            a, b = navigate(scores, table), navigate(shifted, table)
            assert (a.answer_type, a.cell, a.link_index) == (b.answer_type, b.cell, b.link_index)

    def test_global_best_reports_both_maxima(self, players_labels, players_table):
        fused = fuse_scores(scores_from_labels(players_labels["q1"]), players_table)
        (s_tab, tab_cell), (s_pass, pass_cell) = global_best(fused)
        assert tab_cell == (1, 2)
        assert s_tab == pytest.approx(2.97)
        assert s_pass == pytest.approx(1.01)
