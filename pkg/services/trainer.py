"""
Joint training of the unified retriever.

Each batch holds four groups, one per granularity. A group is built around
one positive candidate of a training question: the positive, up to
negatives_per_positive negatives of the same granularity from that question,
and same-granularity negatives of other questions filling the group up to
group_size. The positive's noisy duplicate zeroes each feature independently
with probability feature_noise_rate.
"""

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from config import TrainConfig
from core.errors import NoPositivesError, SchemaError
from core.logging import logger
from models import (
    Dataset,
    EvidenceId,
    FeaturizerConfig,
    GRANULARITIES,
    Granularity,
    LabelSet,
    LinearScorer,
)

from .featurizer import fit_featurizer
from .losses import TrainingBatch, TrainingGroup, TrainingInstance, total_loss_and_gradient
from .retriever import candidate_features


@dataclass(frozen=True, slots=True)
class _QuestionPool:
    features: Mapping[EvidenceId, np.ndarray]
    positives: Mapping[Granularity, tuple[EvidenceId, ...]]
    negatives: Mapping[Granularity, tuple[EvidenceId, ...]]


class Trainer:
    """Seeded gradient descent over grouped batches."""

    def __init__(self, cfg: TrainConfig, featurizer: FeaturizerConfig):
        self.cfg = cfg
        self.featurizer = featurizer
        self.rng = np.random.default_rng(cfg.seed)
        self.history: list[float] = []
        self._short_groups = 0

    def prepare(self, dataset: Dataset, labels: Mapping[str, LabelSet]) -> list[_QuestionPool]:
        """Featurize every training candidate once; features do not depend on W."""
        zero_scorer = LinearScorer.zeros(self.featurizer)
        pools = []
        for question in dataset.questions:
            if question.id not in labels:
                raise SchemaError(question.id, "no labels for training question")
            label_set = labels[question.id]
            table = dataset.table_for(question)
            features = candidate_features(zero_scorer, question, table, dataset.passages)
            pools.append(
                _QuestionPool(
                    features=features,
                    positives={g: tuple(label_set.positives(g)) for g in GRANULARITIES},
                    negatives={
                        g: tuple(e for e in label_set.of(g) if label_set[e] == 0)
                        for g in GRANULARITIES
                    },
                )
            )

        for granularity in GRANULARITIES:
            if not any(pool.positives[granularity] for pool in pools):
                raise NoPositivesError(granularity.value)
        return pools

    def _group(
        self,
        granularity: Granularity,
        owner: int,
        pools: list[_QuestionPool],
        foreign: list[tuple[int, EvidenceId]],
    ) -> TrainingGroup:
        cfg = self.cfg
        pool = pools[owner]
        positives = pool.positives[granularity]
        positive = positives[int(self.rng.integers(len(positives)))]
        anchor = pool.features[positive]

        wanted = cfg.group_size - 1
        own = pool.negatives[granularity]
        n_own = min(cfg.negatives_per_positive, wanted, len(own))
        picked = [pool.features[own[k]] for k in self.rng.choice(len(own), n_own, replace=False)]

        # at most len(own) draws belong to the owner and get skipped
        n_draw = min(len(foreign), wanted - n_own + len(own))
        for k in self.rng.choice(len(foreign), n_draw, replace=False):
            if len(picked) == wanted:
                break
            qi, evidence_id = foreign[k]
            if qi != owner:
                picked.append(pools[qi].features[evidence_id])
        if len(picked) < wanted:
            self._short_groups += 1

        mask = self.rng.random(anchor.shape) >= cfg.feature_noise_rate
        return TrainingGroup(
            granularity=granularity,
            instances=(
                TrainingInstance(anchor, 1),
                *(TrainingInstance(m, 0) for m in picked),
            ),
            noisy_positive=anchor * mask,
        )

    def build_batches(self, pools: list[_QuestionPool]) -> list[TrainingBatch]:
        """One epoch of batches, one group per granularity in each."""
        owners = {
            g: [qi for qi, pool in enumerate(pools) if pool.positives[g]] for g in GRANULARITIES
        }
        foreign = {
            g: [(qi, e) for qi, pool in enumerate(pools) for e in pool.negatives[g]]
            for g in GRANULARITIES
        }
        order = {g: self.rng.permutation(owners[g]) for g in GRANULARITIES}
        n_steps = sum(1 for pool in pools if any(pool.positives[g] for g in GRANULARITIES))

        batches = []
        for step in range(n_steps):
            groups = tuple(
                self._group(g, int(order[g][step % len(order[g])]), pools, foreign[g])
                for g in GRANULARITIES
            )
            batches.append(TrainingBatch(groups))
        return batches

    def fit(self, dataset: Dataset, labels: Mapping[str, LabelSet]) -> LinearScorer:
        """
        Train W from zero weights.

        Args:
            dataset: Training questions with their tables and passages
            labels: Label set of every training question

        Returns:
            The trained scorer, stamped with cfg.seed

        Raises:
            SchemaError: A training question has no labels
            NoPositivesError: Some granularity has no positive in the whole set
        """
        cfg = self.cfg
        pools = self.prepare(dataset, labels)
        w = np.zeros(self.featurizer.dimension, dtype=np.float64)
        fixed = self.build_batches(pools) if cfg.batching == "full" else None

        for epoch in range(cfg.epochs):
            batches = fixed if fixed is not None else self.build_batches(pools)
            if fixed is not None:
                scorer = LinearScorer.from_vector(w, self.featurizer)
                loss, grad = 0.0, np.zeros_like(w)
                for batch in batches:
                    batch_loss, batch_grad = total_loss_and_gradient(batch, scorer, cfg)
                    loss += batch_loss
                    grad += batch_grad
                w = w - cfg.learning_rate * grad
                epoch_loss = loss
            else:
                losses = []
                for batch in batches:
                    scorer = LinearScorer.from_vector(w, self.featurizer)
                    batch_loss, grad = total_loss_and_gradient(batch, scorer, cfg)
                    losses.append(batch_loss)
                    w = w - cfg.learning_rate * grad
                epoch_loss = float(np.mean(losses)) if losses else 0.0

            self.history.append(epoch_loss)
            logger.info(
                "Epoch finished",
                epoch=epoch + 1,
                loss=round(epoch_loss, 6),
                n_batches=len(batches),
                weight_norm=round(float(np.linalg.norm(w)), 6),
            )

        if self._short_groups:
            logger.warning(
                "Some groups had fewer than group_size instances",
                n_short_groups=self._short_groups,
                group_size=cfg.group_size,
            )
        return LinearScorer.from_vector(w, self.featurizer, seed=cfg.seed)


def train(
    dataset: Dataset,
    labels: Mapping[str, LabelSet],
    cfg: TrainConfig,
    featurizer: FeaturizerConfig | None = None,
) -> LinearScorer:
    """Train a scorer; the featurizer is fit on the dataset unless given."""
    if featurizer is None:
        featurizer = fit_featurizer(dataset)
    logger.info(
        "Training retriever",
        n_questions=len(dataset.questions),
        dimension=featurizer.dimension,
        epochs=cfg.epochs,
        contrastive=cfg.use_contrastive,
    )
    return Trainer(cfg, featurizer).fit(dataset, labels)
