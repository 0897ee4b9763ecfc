import numpy as np
import pytest

from config import SynthSpec, TrainConfig
from core.errors import NoPositivesError, SchemaError
from models import Dataset, GRANULARITIES
from services.featurizer import fit_featurizer
from services.supervision import label_candidates
from services.synthetic import generate_synthetic
from services.trainer import Trainer, train


def _labels(dataset):
    return {
        q.id: label_candidates(q, dataset.table_for(q), dataset.passages)
        for q in dataset.questions
    }


@pytest.fixture(scope="module")
def single_column():
    """One column per table, so every row has a single member and the loss is smooth."""
    dataset = generate_synthetic(
        SynthSpec(n_questions=16, rows=(3, 4), cols=(1, 1), links_per_cell=(1, 2), seed=42)
    )
    return dataset, _labels(dataset)


class TestTrain:
    def test_deterministic_per_seed(self, synthetic_dataset, synthetic_labels):
        cfg = TrainConfig(epochs=2, seed=7)
        first = train(synthetic_dataset, synthetic_labels, cfg)
        second = train(synthetic_dataset, synthetic_labels, cfg)
        assert first.weights == second.weights
        assert first.seed == 7

    def test_zero_epochs_gives_zero_weights(self, synthetic_dataset, synthetic_labels):
        scorer = train(synthetic_dataset, synthetic_labels, TrainConfig(epochs=0))
        assert scorer.weights == (0.0,) * scorer.dimension

    def test_zero_learning_rate_keeps_zero_weights(self, synthetic_dataset, synthetic_labels):
        cfg = TrainConfig(epochs=2, learning_rate=0.0)
        scorer = train(synthetic_dataset, synthetic_labels, cfg)
        assert scorer.weights == (0.0,) * scorer.dimension

    def test_weights_are_finite(self, synthetic_dataset, synthetic_labels):
        scorer = train(synthetic_dataset, synthetic_labels, TrainConfig(epochs=3))
        assert np.all(np.isfinite(scorer.w))
        assert np.any(scorer.w != 0.0)

    def test_separate_projection_dimension(self, synthetic_dataset, synthetic_labels):
        featurizer = fit_featurizer(synthetic_dataset, shared_projection=False)
        cfg = TrainConfig(epochs=1, use_contrastive=False)
        scorer = train(synthetic_dataset, synthetic_labels, cfg, featurizer)
        assert scorer.dimension == 36


class TestTrainer:
    def test_history_has_one_loss_per_epoch(self, synthetic_dataset, synthetic_labels):
        trainer = Trainer(TrainConfig(epochs=3), fit_featurizer(synthetic_dataset))
        trainer.fit(synthetic_dataset, synthetic_labels)
        assert len(trainer.history) == 3
        assert all(np.isfinite(trainer.history))

    @pytest.mark.parametrize(
        "use_contrastive, learning_rate", [(False, 1e-5), (True, 1e-7)]
    )
    def test_full_batch_loss_decreases(self, single_column, use_contrastive, learning_rate):
        dataset, labels = single_column
        cfg = TrainConfig(
            epochs=10,
            batching="full",
            learning_rate=learning_rate,
            use_contrastive=use_contrastive,
        )
        trainer = Trainer(cfg, fit_featurizer(dataset))
        trainer.fit(dataset, labels)
        history = trainer.history
        assert all(later < earlier for earlier, later in zip(history, history[1:]))

    def test_default_mini_batch_loss_falls(self, synthetic_dataset, synthetic_labels):
        trainer = Trainer(TrainConfig(), fit_featurizer(synthetic_dataset))
        trainer.fit(synthetic_dataset, synthetic_labels)
        assert trainer.history[-1] < trainer.history[0]

    def test_batches_hold_one_group_per_granularity(self, synthetic_dataset, synthetic_labels):
        cfg = TrainConfig(group_size=6)
        trainer = Trainer(cfg, fit_featurizer(synthetic_dataset))
        pools = trainer.prepare(synthetic_dataset, synthetic_labels)
        batches = trainer.build_batches(pools)
        assert len(batches) == len(synthetic_dataset.questions)
        for batch in batches:
            assert tuple(g.granularity for g in batch.groups) == GRANULARITIES
            for group in batch.groups:
                assert group.instances[0].label == 1
                assert all(inst.label == 0 for inst in group.instances[1:])
                assert len(group.instances) <= cfg.group_size

    def test_missing_labels(self, synthetic_dataset, synthetic_labels):
        labels = dict(synthetic_labels)
        labels.pop(synthetic_dataset.questions[0].id)
        trainer = Trainer(TrainConfig(), fit_featurizer(synthetic_dataset))
        with pytest.raises(SchemaError):
            trainer.fit(synthetic_dataset, labels)

    def test_no_link_positives(self):
        dataset = generate_synthetic(SynthSpec(n_questions=5, in_table_fraction=1.0, seed=3))
        with pytest.raises(NoPositivesError) as info:
            train(dataset, _labels(dataset), TrainConfig(epochs=1))
        assert info.value.granularity == "link"

    def test_empty_dataset_has_no_positives(self):
        empty = Dataset(tables={}, passages={}, questions=())
        with pytest.raises(NoPositivesError):
            train(empty, {}, TrainConfig(epochs=1))
