from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class AnswerType(str, Enum):
    """Where a question's answer lives."""

    IN_TABLE = "in_table"
    IN_PASSAGE = "in_passage"
    UNANSWERABLE = "unanswerable"


class Passage(BaseModel):
    """A passage that a table cell links to."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(description="Passage identifier, unique within a dataset")
    text: str = Field(min_length=1, description="Passage text")


class Cell(BaseModel):
    """A table cell: its value and the ids of the passages it links to."""

    model_config = ConfigDict(frozen=True)

    value: str = Field(default="", description="Cell value, may be empty")
    link_ids: tuple[str, ...] = Field(
        default=(), description="Linked passage ids in dataset order"
    )


class HybridTable(BaseModel):
    """A table with M rows and N columns whose cells may link to passages."""

    model_config = ConfigDict(frozen=True)

    id: str
    headers: tuple[str, ...] = Field(description="Column headers h_0..h_{N-1}")
    cells: tuple[tuple[Cell, ...], ...] = Field(description="M x N grid, row-major")

    @model_validator(mode="after")
    def _check_grid(self) -> "HybridTable":
        if not self.headers:
            raise ValueError("table needs at least one column")
        if not self.cells:
            raise ValueError("table needs at least one row")
        width = len(self.headers)
        for i, row in enumerate(self.cells):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")
        return self

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    @property
    def n_cols(self) -> int:
        return len(self.headers)

    def cell(self, i: int, j: int) -> Cell:
        return self.cells[i][j]


class Question(BaseModel):
    """A question over one table, with its gold answer texts."""

    model_config = ConfigDict(frozen=True)

    id: str
    table_id: str
    text: str
    gold_answers: tuple[str, ...] = Field(min_length=1)
    gold_type: AnswerType | None = Field(
        default=None, description="Annotated answer type; derived by distant supervision if absent"
    )

    @field_validator("gold_type")
    @classmethod
    def _no_unanswerable_annotation(cls, value: AnswerType | None) -> AnswerType | None:
        if value is AnswerType.UNANSWERABLE:
            raise ValueError("gold_type must be in_table, in_passage or absent")
        return value


class Dataset(BaseModel):
    """Tables, passages and questions with all references resolved."""

    model_config = ConfigDict(frozen=True)

    tables: dict[str, HybridTable]
    passages: dict[str, Passage]
    questions: tuple[Question, ...]

    def table_for(self, question: Question) -> HybridTable:
        return self.tables[question.table_id]

    def question_ids(self) -> set[str]:
        return {q.id for q in self.questions}
