from pydantic import BaseModel, ConfigDict, Field

from .evidence import EvidenceId
from .selection import Navigation, SelectedType


class Prediction(BaseModel):
    """Answer produced for one question, with the evidence it came from."""

    model_config = ConfigDict(frozen=True)

    question_id: str
    answer: str = Field(description="Answer text; empty when the reader abstains")
    answer_type: SelectedType
    navigation: Navigation | None = Field(
        default=None, description="Selector output; absent for baselines that bypass it"
    )
    evidence: tuple[EvidenceId, ...] = Field(
        default=(), description="Evidence handed to the answer step (cell, link or top-1s)"
    )
    reader_name: str

    @property
    def abstained(self) -> bool:
        return self.answer == ""


class SplitMetrics(BaseModel):
    em: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)
    n: int = Field(ge=0)


class MetricsReport(BaseModel):
    """EM / F1 by answer type and R@1 by granularity."""

    in_table: SplitMetrics
    in_passage: SplitMetrics
    total: SplitMetrics
    n_unanswerable: int = Field(ge=0, description="Excluded from splits and R@1")
    n_abstained: int = Field(ge=0, description="Answerable questions with an empty answer")
    r_at_1: dict[str, float] = Field(
        description="col / row / cell / link / multi -> R@1 over answerable questions"
    )
    selected_r_at_1: float = Field(
        ge=0.0, le=1.0, description="Hit rate of the evidence actually handed to the answer step"
    )
