"""
Centralized configuration management.

Environment settings come from MUGER_* variables (or a .env file); experiment
settings come from a JSON run configuration overridden by command-line flags.

Usage:
    from config import get_settings, load_run_config

    settings = get_settings()
    run = load_run_config("experiment.json", {"seed": 7})
"""

import json
from functools import lru_cache
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from core.errors import UsageError

AblationMode = Literal["col", "row", "cell", "link", "multi", "flat"]


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="MUGER_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging Configuration
    log: Literal["error", "warn", "info", "debug"] = Field(
        default="warn", description="Log level"
    )
    log_to_file: bool = Field(default=False, description="Enable file logging")
    log_dir: str = Field(default="logs", description="Directory for log files")


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


class TrainConfig(BaseModel):
    """Hyperparameters of the joint BCE + contrastive training loop."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tau: float = Field(default=0.5, gt=0.0, description="Contrastive temperature")
    learning_rate: float = Field(default=0.01, ge=0.0, description="Gradient step size")
    epochs: int = Field(default=10, ge=0, description="Passes over the training questions")
    group_size: int = Field(
        default=6, ge=2, description="Instances per granularity group (1 positive + negatives)"
    )
    negatives_per_positive: int = Field(
        default=5, ge=1, description="Negatives drawn from the positive's own question"
    )
    seed: int = Field(default=42, description="Seed for shuffling, sampling and noise")
    feature_noise_rate: float = Field(
        default=0.1, ge=0.0, lt=1.0, description="Feature zeroing rate for noisy duplicates"
    )
    use_contrastive: bool = Field(default=True, description="Add the grouped contrastive loss")
    cl_include_positive: bool = Field(
        default=True, description="Include the positive in the contrastive denominator"
    )
    batching: Literal["mini", "full"] = Field(
        default="mini", description="One step per batch, or one step per epoch over all batches"
    )


class ReaderConfig(BaseModel):
    """Settings of the baseline span reader."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_span_tokens: int = Field(default=4, ge=1, description="Longest extractable span")
    flatten_char_limit: int = Field(
        default=4096, ge=1, description="Truncation of flattened evidence before reading"
    )


class SynthSpec(BaseModel):
    """Shape of a seeded synthetic corpus."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_questions: int = Field(default=200, ge=0)
    rows: tuple[int, int] = Field(default=(3, 6), description="Inclusive M range")
    cols: tuple[int, int] = Field(default=(3, 5), description="Inclusive N range")
    links_per_cell: tuple[int, int] = Field(default=(0, 2), description="Inclusive range")
    in_table_fraction: float = Field(default=0.5, ge=0.0, le=1.0)
    distractor_rate: float = Field(default=0.3, ge=0.0, le=1.0)
    vocab_size: int = Field(default=400, ge=50)
    seed: int = 42

    @model_validator(mode="after")
    def _check_ranges(self) -> "SynthSpec":
        for name in ("rows", "cols", "links_per_cell"):
            low, high = getattr(self, name)
            if low > high or low < 0:
                raise ValueError(f"{name} range is empty: {low}..{high}")
        if self.rows[0] < 1 or self.cols[0] < 1:
            raise ValueError("tables need at least one row and one column")
        if self.in_table_fraction < 1.0 and self.links_per_cell[1] < 1:
            raise ValueError("in-passage questions need links_per_cell to allow a link")
        return self


class RunPaths(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset: str | None = None
    labels: str | None = None
    scores: str | None = None
    predictions: str | None = None
    metrics: str | None = None
    model: str | None = None


class RunConfig(BaseModel):
    """Everything one CLI invocation needs."""

    model_config = ConfigDict(extra="forbid")

    paths: RunPaths = Field(default_factory=RunPaths)
    train: TrainConfig = Field(default_factory=TrainConfig)
    reader: ReaderConfig = Field(default_factory=ReaderConfig)
    synth: SynthSpec = Field(default_factory=SynthSpec)
    modes: list[AblationMode] = Field(
        default_factory=lambda: ["col", "row", "cell", "link", "multi"]
    )
    seed: int | None = None
    shared_projection: bool = True


def _merge(base: dict[str, Any], overrides: dict[str, Any]) -> dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(path: str | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """
    Load a JSON run configuration and apply flag overrides (flags win).

    A top-level ``seed`` is propagated into the training and synthetic
    sections unless those sections set their own seed explicitly via flags.
    """
    document: dict[str, Any] = {}
    if path:
        try:
            document = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {path}: {e}") from e
        if not isinstance(document, dict):
            raise UsageError(f"config {path} must hold a JSON object")

    merged = _merge(document, overrides or {})
    seed = merged.get("seed")
    if seed is not None:
        merged["train"] = {**merged.get("train", {}), "seed": seed}
        merged["synth"] = {**merged.get("synth", {}), "seed": seed}

    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise UsageError(f"invalid run configuration: {e}") from e
