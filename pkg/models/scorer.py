import math
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Per-granularity feature block, in vector order
FEATURE_NAMES: tuple[str, ...] = (
    "overlap_count",
    "idf_overlap",
    "char3_jaccard",
    "log_length",
    "is_col",
    "is_row",
    "is_cell",
    "is_link",
    "header_match",
)


class FeaturizerConfig(BaseModel):
    """Vocabulary statistics and layout of the lexical featurizer."""

    model_config = ConfigDict(frozen=True)

    idf: dict[str, float] = Field(
        default_factory=dict, description="BM25 inverse document frequency per token"
    )
    n_documents: int = Field(default=0, ge=0, description="Documents the IDF was fit on")
    shared_projection: bool = Field(
        default=True,
        description="One projection for all granularities; False gives each its own block",
    )

    @property
    def block_size(self) -> int:
        return len(FEATURE_NAMES)

    @property
    def dimension(self) -> int:
        return self.block_size if self.shared_projection else 4 * self.block_size

    def idf_of(self, token: str) -> float:
        """IDF of a token; unseen tokens get the document-frequency-zero value."""
        value = self.idf.get(token)
        if value is not None:
            return value
        return math.log(1.0 + (self.n_documents + 0.5) / 0.5)


class LinearScorer(BaseModel):
    """Projection W of the retriever; s_t = sigmoid(h_t . W), no bias term."""

    model_config = ConfigDict(frozen=True)

    weights: tuple[float, ...]
    featurizer: FeaturizerConfig = Field(default_factory=FeaturizerConfig)
    seed: int | None = Field(default=None, description="Training seed, for provenance")

    @model_validator(mode="after")
    def _check_weights(self) -> "LinearScorer":
        if len(self.weights) != self.featurizer.dimension:
            raise ValueError(
                f"{len(self.weights)} weights for a {self.featurizer.dimension}-dim featurizer"
            )
        if not all(math.isfinite(w) for w in self.weights):
            raise ValueError("weights must be finite")
        return self

    @classmethod
    def zeros(cls, featurizer: FeaturizerConfig, seed: int | None = None) -> "LinearScorer":
        return cls(weights=(0.0,) * featurizer.dimension, featurizer=featurizer, seed=seed)

    @classmethod
    def from_vector(
        cls, w: np.ndarray, featurizer: FeaturizerConfig, seed: int | None = None
    ) -> "LinearScorer":
        return cls(weights=tuple(float(x) for x in w), featurizer=featurizer, seed=seed)

    @property
    def dimension(self) -> int:
        return len(self.weights)

    @cached_property
    def w(self) -> np.ndarray:
        vector = np.asarray(self.weights, dtype=np.float64)
        vector.setflags(write=False)
        return vector
