"""
Training objective of the unified retriever.

    Loss = sum_t BCE(s_t, y_t) + sum_groups CL_group

CL_group = -log( exp(sim(h, h+)/tau) / sum_{h' in D} exp(sim(h, h')/tau) ) with
sim(h, h') = h.W + h'.W, h+ the noisy duplicate of the group's positive h and
D the duplicate plus the group's negatives. With cl_include_positive=False the
duplicate is left out of D.

Gradients are analytic with respect to W. A row instance is represented by
its member (row-tagged cell sequence) with the highest h.W, so its gradient
flows through that member only.
"""

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from config import TrainConfig
from core.errors import DimensionMismatchError, DomainError, GroupTooSmallError
from models import Granularity, LinearScorer


@dataclass(frozen=True, slots=True)
class TrainingInstance:
    """One labeled candidate: a (n_members, K) feature matrix and y_t."""

    members: np.ndarray
    label: int

    def represent(self, w: np.ndarray) -> np.ndarray:
        if len(self.members) == 1:
            return self.members[0]
        return self.members[int(np.argmax(self.members @ w))]


@dataclass(frozen=True, slots=True)
class TrainingGroup:
    """Same-granularity instances; instances[0] is the positive anchor."""

    granularity: Granularity
    instances: tuple[TrainingInstance, ...]
    noisy_positive: np.ndarray


@dataclass(frozen=True, slots=True)
class TrainingBatch:
    groups: tuple[TrainingGroup, ...]

    @property
    def n_instances(self) -> int:
        return sum(len(g.instances) for g in self.groups)


def bce_loss(s: float, y: int) -> float:
    """Binary cross entropy of a score s in (0, 1) against label y."""
    if not (0.0 < s < 1.0):
        raise DomainError(f"score must lie in (0, 1), got {s}")
    return -(y * math.log(s) + (1 - y) * math.log(1.0 - s))


def similarity(h: np.ndarray, h2: np.ndarray, scorer: LinearScorer) -> float:
    if h.shape != (scorer.dimension,):
        raise DimensionMismatchError(scorer.dimension, h.shape[-1] if h.ndim else 0)
    if h2.shape != (scorer.dimension,):
        raise DimensionMismatchError(scorer.dimension, h2.shape[-1] if h2.ndim else 0)
    return float(h @ scorer.w) + float(h2 @ scorer.w)


def _softplus(z: float) -> float:
    return max(z, 0.0) + math.log1p(math.exp(-abs(z)))


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _bce_from_logit(h: np.ndarray, y: int, w: np.ndarray) -> tuple[float, np.ndarray]:
    z = float(h @ w)
    return _softplus(z) - y * z, (_logistic(z) - y) * h


def _contrastive(
    group: Sequence[np.ndarray], w: np.ndarray, tau: float, include_positive: bool
) -> tuple[float, np.ndarray]:
    if tau <= 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if len(group) < 2:
        raise GroupTooSmallError(len(group))
    anchor, positive = group[0], group[1]
    negatives = list(group[2:])
    denominator = [positive, *negatives] if include_positive else negatives
    if not denominator:
        raise GroupTooSmallError(len(group))

    anchor_dot = float(anchor @ w)
    positive_logit = (anchor_dot + float(positive @ w)) / tau
    logits = np.array([(anchor_dot + float(h @ w)) / tau for h in denominator])
    shift = logits.max()
    weights = np.exp(logits - shift)
    log_partition = shift + math.log(weights.sum())
    p = weights / weights.sum()

    loss = log_partition - positive_logit
    expected = sum(p_d * (anchor + h) for p_d, h in zip(p, denominator))
    grad = (expected - (anchor + positive)) / tau
    return loss, grad


def cl_loss(
    group: Sequence[np.ndarray],
    scorer: LinearScorer,
    tau: float,
    include_positive: bool = True,
) -> float:
    """
    Grouped contrastive loss.

    group[0] is the anchor h, group[1] its noisy duplicate h+, the rest are
    in-group negatives.
    """
    for h in group:
        if h.shape != (scorer.dimension,):
            raise DimensionMismatchError(scorer.dimension, h.shape[-1] if h.ndim else 0)
    loss, _ = _contrastive(group, scorer.w, tau, include_positive)
    return loss


def total_loss_and_gradient(
    batch: TrainingBatch, scorer: LinearScorer, cfg: TrainConfig
) -> tuple[float, np.ndarray]:
    """Joint BCE over every instance plus one contrastive term per group."""
    w = scorer.w
    loss = 0.0
    grad = np.zeros_like(w)

    for group in batch.groups:
        represented = [inst.represent(w) for inst in group.instances]
        for inst, h in zip(group.instances, represented):
            if h.shape != w.shape:
                raise DimensionMismatchError(len(w), h.shape[-1])
            term, term_grad = _bce_from_logit(h, inst.label, w)
            loss += term
            grad += term_grad

        if cfg.use_contrastive:
            noisy = TrainingInstance(group.noisy_positive, 1).represent(w)
            term, term_grad = _contrastive(
                [represented[0], noisy, *represented[1:]],
                w,
                cfg.tau,
                cfg.cl_include_positive,
            )
            loss += term
            grad += term_grad

    return loss, grad
