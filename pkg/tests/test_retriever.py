import math

import numpy as np
import pytest

from core.errors import DimensionMismatchError, EmptyRowError, IncompleteScoresError
from models import EvidenceId, FeaturizerConfig, Granularity, LinearScorer, Passage, ScoreSet
from services.evidence import enumerate_candidates, serialize_candidate
from services.featurizer import featurize, fit_featurizer, table_part
from services.retriever import (
    candidate_features,
    require_complete,
    score_all,
    score_candidate,
    score_row,
    scores_from_labels,
    sigmoid,
    top_candidate,
)


class TestFitFeaturizer:
    def test_bm25_idf(self, players_dataset):
        config = fit_featurizer(players_dataset)
        # 4 passages + 3 headers + 6 cell values
        assert config.n_documents == 13
        assert config.idf["york"] == pytest.approx(math.log(1 + 12.5 / 1.5))
        assert config.idf["ben"] == pytest.approx(math.log(1 + 11.5 / 2.5))

    def test_unseen_token_gets_zero_frequency_idf(self, players_dataset):
        config = fit_featurizer(players_dataset)
        assert config.idf_of("zzz") == pytest.approx(math.log(1 + 13.5 / 0.5))

    def test_deterministic(self, players_dataset):
        assert fit_featurizer(players_dataset) == fit_featurizer(players_dataset)


class TestFeaturize:
    def _features(self, dataset, config, question_index, evidence_id):
        q = dataset.questions[question_index]
        (candidate,) = serialize_candidate(q, dataset.table_for(q), dataset.passages, evidence_id)
        return featurize(candidate, q, config)

    def test_column_block(self, players_dataset):
        config = fit_featurizer(players_dataset)
        h = self._features(players_dataset, config, 0, EvidenceId.col(2))
        assert h.shape == (9,)
        assert h[0] == 1.0
        assert h[3] == pytest.approx(math.log(2))
        np.testing.assert_array_equal(h[4:8], [1.0, 0.0, 0.0, 0.0])
        assert h[8] == 1.0

    def test_link_has_no_header_match(self, players_dataset):
        config = fit_featurizer(players_dataset)
        h = self._features(players_dataset, config, 1, EvidenceId.link(1, 0, 0))
        np.testing.assert_array_equal(h[4:8], [0.0, 0.0, 0.0, 1.0])
        assert h[8] == 0.0
        assert h[0] > 0

    def test_cell_features_ignore_linked_passages(self, players_dataset):
        config = fit_featurizer(players_dataset)
        cell = self._features(players_dataset, config, 1, EvidenceId.cell(1, 0))
        link = self._features(players_dataset, config, 1, EvidenceId.link(1, 0, 0))
        # "ben hale" from the row versus "ben hale was born" from the passage
        assert cell[0] == 2.0
        assert link[0] == 4.0
        assert cell[3] == pytest.approx(math.log(9))
        assert cell[1] < link[1]

    def test_rewriting_a_passage_leaves_cell_and_row_features(self, players_dataset):
        ds = players_dataset
        config = fit_featurizer(ds)
        q = ds.questions[1]
        table = ds.table_for(q)
        rewritten = {**ds.passages, "p3": Passage(id="p3", text="Where was Ben Hale born ? York")}
        for eid in (EvidenceId.cell(1, 0), EvidenceId.row(1)):
            before = serialize_candidate(q, table, ds.passages, eid)
            after = serialize_candidate(q, table, rewritten, eid)
            assert before[0].serialized != after[0].serialized
            for a, b in zip(before, after):
                np.testing.assert_array_equal(featurize(a, q, config), featurize(b, q, config))

    def test_table_part_drops_link_texts(self):
        content = "Club [SEP] Player: Ada | Club: Rovers [SEP] founded in 1901 [SEP] based in Leeds"
        assert table_part(content, Granularity.CELL) == "Club [SEP] Player: Ada | Club: Rovers"
        assert table_part(content, Granularity.LINK) == content
        assert table_part("Club [SEP] Player: Ada [SEP] ", Granularity.ROW) == "Club [SEP] Player: Ada"

    def test_idf_overlap_is_normalized(self, players_dataset):
        config = fit_featurizer(players_dataset)
        for eid in enumerate_candidates(players_dataset.tables["t1"]):
            if eid.granularity is Granularity.ROW:
                continue
            h = self._features(players_dataset, config, 1, eid)
            assert 0.0 <= h[1] <= 1.0
            assert 0.0 <= h[2] <= 1.0

    def test_separate_projection_places_blocks(self, players_dataset):
        shared = fit_featurizer(players_dataset)
        separate = fit_featurizer(players_dataset, shared_projection=False)
        assert separate.dimension == 36
        col = self._features(players_dataset, separate, 0, EvidenceId.col(2))
        np.testing.assert_array_equal(col[:9], self._features(players_dataset, shared, 0, EvidenceId.col(2)))
        np.testing.assert_array_equal(col[9:], 0.0)
        link = self._features(players_dataset, separate, 1, EvidenceId.link(1, 0, 0))
        np.testing.assert_array_equal(link[:27], 0.0)


class TestScoring:
    def test_sigmoid_stays_inside_unit_interval(self):
        assert sigmoid(0.0) == 0.5
        assert 0.0 < sigmoid(-1e6) < sigmoid(1e6) < 1.0

    def test_sigmoid_symmetry(self):
        rng = np.random.default_rng(42)
        for z in rng.uniform(-30, 30, size=200):
            assert sigmoid(z) + sigmoid(-z) == pytest.approx(1.0, abs=1e-12)

    def test_zero_weights_score_one_half(self):
        scorer = LinearScorer.zeros(FeaturizerConfig())
        assert score_candidate(scorer, np.ones(9)) == 0.5

    def test_dimension_mismatch(self):
        scorer = LinearScorer.zeros(FeaturizerConfig())
        with pytest.raises(DimensionMismatchError):
            score_candidate(scorer, np.ones(5))

    def test_row_is_best_cell(self):
        assert score_row([0.2, 0.7, 0.4]) == 0.7

    def test_empty_row(self):
        with pytest.raises(EmptyRowError):
            score_row([])

    def test_score_all_covers_every_candidate(self, players_dataset):
        ds = players_dataset
        q = ds.questions[0]
        table = ds.table_for(q)
        scorer = LinearScorer.zeros(fit_featurizer(ds))
        scores = score_all(scorer, q, table, ds.passages)
        assert set(scores.scores) == set(enumerate_candidates(table))
        assert all(scores[e] == 0.5 for e in scores)

    def test_row_score_uses_best_member(self, players_dataset):
        ds = players_dataset
        q = ds.questions[1]
        table = ds.table_for(q)
        featurizer = fit_featurizer(ds)
        rng = np.random.default_rng(42)
        scorer = LinearScorer.from_vector(rng.normal(size=featurizer.dimension), featurizer)
        features = candidate_features(scorer, q, table, ds.passages)
        scores = score_all(scorer, q, table, ds.passages)
        members = features[EvidenceId.row(1)]
        assert members.shape == (3, 9)
        expected = max(score_candidate(scorer, h) for h in members)
        assert scores[EvidenceId.row(1)] == expected


class TestOracleAndTopCandidate:
    def test_scores_from_labels(self, players_labels):
        scores = scores_from_labels(players_labels["q2"])
        assert scores[EvidenceId.link(1, 0, 0)] == 0.99
        assert scores[EvidenceId.cell(1, 0)] == 0.01

    def test_top_candidate_prefers_lowest_on_ties(self):
        scores = ScoreSet(
            "q",
            {EvidenceId.cell(0, 1): 0.4, EvidenceId.cell(1, 0): 0.4, EvidenceId.cell(0, 0): 0.1},
        )
        assert top_candidate(scores, Granularity.CELL) == EvidenceId.cell(0, 1)

    def test_top_candidate_without_links(self):
        scores = ScoreSet("q", {EvidenceId.cell(0, 0): 0.4})
        assert top_candidate(scores, Granularity.LINK) is None

    def test_require_complete_names_missing_candidate(self, players_labels, players_table):
        scores = scores_from_labels(players_labels["q1"])
        partial = ScoreSet(
            "q1", {e: s for e, s in scores.scores.items() if e != EvidenceId.link(0, 1, 0)}
        )
        with pytest.raises(IncompleteScoresError) as info:
            require_complete(partial, players_table)
        assert info.value.evidence_id == EvidenceId.link(0, 1, 0)
