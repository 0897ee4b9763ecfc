import numpy as np
import pytest

from config import SynthSpec
from core.errors import GenerationFailedError
from models import AnswerType, Granularity
from services.supervision import derive_gold_type, label_candidates
from services.synthetic import build_vocabulary, generate_synthetic


def _labels(dataset):
    return [label_candidates(q, dataset.table_for(q), dataset.passages) for q in dataset.questions]


class TestVocabulary:
    def test_words_are_distinct(self):
        words = build_vocabulary(300, np.random.default_rng(42))
        assert len(words) == len(set(words)) == 300
        assert all(4 <= len(w) <= 6 for w in words)


class TestGenerateSynthetic:
    def test_deterministic_per_seed(self):
        spec = SynthSpec(n_questions=20, seed=42)
        assert generate_synthetic(spec) == generate_synthetic(spec)

    def test_seed_changes_the_corpus(self):
        a = generate_synthetic(SynthSpec(n_questions=20, seed=1))
        b = generate_synthetic(SynthSpec(n_questions=20, seed=2))
        assert a != b

    def test_empty_corpus(self):
        dataset = generate_synthetic(SynthSpec(n_questions=0))
        assert dataset.questions == ()
        assert dataset.tables == {}

    def test_single_in_table_question(self):
        dataset = generate_synthetic(SynthSpec(n_questions=1, in_table_fraction=1.0, seed=5))
        assert [q.id for q in dataset.questions] == ["q0000"]
        (labels,) = _labels(dataset)
        assert derive_gold_type(labels) is AnswerType.IN_TABLE

    def test_all_in_passage(self):
        dataset = generate_synthetic(SynthSpec(n_questions=10, in_table_fraction=0.0, seed=5))
        assert {derive_gold_type(s) for s in _labels(dataset)} == {AnswerType.IN_PASSAGE}

    def test_exactly_one_fine_grained_positive(self, synthetic_dataset):
        for labels in _labels(synthetic_dataset):
            fine = labels.positives(Granularity.CELL) + labels.positives(Granularity.LINK)
            assert len(fine) == 1
            assert len(labels.positives(Granularity.ROW)) == 1
            assert len(labels.positives(Granularity.COL)) == 1

    def test_question_owns_its_table(self, synthetic_dataset):
        for question in synthetic_dataset.questions:
            table = synthetic_dataset.table_for(question)
            assert table.id == "t" + question.id[1:]
            for row in table.cells:
                for cell in row:
                    assert all(link.startswith(f"{table.id}-p") for link in cell.link_ids)

    def test_table_shape_respects_ranges(self):
        spec = SynthSpec(n_questions=15, rows=(2, 3), cols=(2, 4), links_per_cell=(0, 1), seed=9)
        for table in generate_synthetic(spec).tables.values():
            assert 2 <= table.n_rows <= 3
            assert 2 <= table.n_cols <= 4
            assert all(len(c.link_ids) <= 1 for row in table.cells for c in row)

    def test_unavoidable_ambiguity_fails(self):
        # the only column holds the row keys and the distractor always copies one into a passage
        spec = SynthSpec(
            n_questions=1,
            cols=(1, 1),
            links_per_cell=(1, 1),
            in_table_fraction=1.0,
            distractor_rate=1.0,
        )
        with pytest.raises(GenerationFailedError) as info:
            generate_synthetic(spec)
        assert info.value.question_index == 0

    def test_inverted_range_is_rejected(self):
        with pytest.raises(ValueError):
            SynthSpec(rows=(4, 2))
