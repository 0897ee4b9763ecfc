from dataclasses import dataclass
from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator


class SelectedType(str, Enum):
    """Answer type decided by the evidence selector."""

    IN_TABLE = "in_table"
    IN_PASSAGE = "in_passage"


@dataclass(frozen=True, slots=True)
class FusedScores:
    """Per-cell fused table and passage scores.

    s_pass[i][j] and best_link[i][j] are None for cells without links.
    """

    s_tab: tuple[tuple[float, ...], ...]
    s_pass: tuple[tuple[float | None, ...], ...]
    best_link: tuple[tuple[int | None, ...], ...]


class Navigation(BaseModel):
    """The fine-grained evidence handed to the answer step."""

    model_config = ConfigDict(frozen=True)

    answer_type: SelectedType
    cell: tuple[int, int]
    link_index: int | None = None
    s_tab: float | None = None
    s_pass: float | None = None

    @model_validator(mode="after")
    def _link_iff_passage(self) -> "Navigation":
        if (self.link_index is not None) != (self.answer_type is SelectedType.IN_PASSAGE):
            raise ValueError("link_index is present exactly for in_passage navigation")
        return self
