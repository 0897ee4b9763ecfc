"""
Evidence identities, candidates, labels and retrieval scores.

These types sit on the hot path of scoring and fusion (tens of thousands of
lookups per table), so identities are plain named tuples and the per-question
containers are slotted frozen dataclasses rather than validated models.
"""

import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Any, NamedTuple


class Granularity(str, Enum):
    COL = "col"
    ROW = "row"
    CELL = "cell"
    LINK = "link"


GRANULARITIES: tuple[Granularity, ...] = (
    Granularity.COL,
    Granularity.ROW,
    Granularity.CELL,
    Granularity.LINK,
)

# Number of coordinates per granularity: j / i / (i, j) / (i, j, x)
COORD_ARITY = {
    Granularity.COL: 1,
    Granularity.ROW: 1,
    Granularity.CELL: 2,
    Granularity.LINK: 3,
}


class EvidenceId(NamedTuple):
    """A granularity tag plus coordinates inside one table."""

    granularity: Granularity
    coords: tuple[int, ...]

    @classmethod
    def col(cls, j: int) -> "EvidenceId":
        return cls(Granularity.COL, (j,))

    @classmethod
    def row(cls, i: int) -> "EvidenceId":
        return cls(Granularity.ROW, (i,))

    @classmethod
    def cell(cls, i: int, j: int) -> "EvidenceId":
        return cls(Granularity.CELL, (i, j))

    @classmethod
    def link(cls, i: int, j: int, x: int) -> "EvidenceId":
        return cls(Granularity.LINK, (i, j, x))

    def order_key(self) -> tuple[int, tuple[int, ...]]:
        """Enumeration order: granularity first, then coordinates."""
        return GRANULARITIES.index(self.granularity), self.coords

    def to_json(self) -> dict[str, Any]:
        return {"granularity": self.granularity.value, "coords": list(self.coords)}

    @classmethod
    def from_json(cls, granularity: str, coords: list[int]) -> "EvidenceId":
        """Build an id from its file form; raises ValueError on bad shape."""
        tag = Granularity(granularity)
        if not isinstance(coords, list) or len(coords) != COORD_ARITY[tag]:
            raise ValueError(f"{tag.value} needs {COORD_ARITY[tag]} coordinates")
        if not all(isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in coords):
            raise ValueError(f"coordinates must be non-negative integers: {coords}")
        return cls(tag, tuple(coords))

    def __str__(self) -> str:
        return f"{self.granularity.value}({','.join(map(str, self.coords))})"


@dataclass(frozen=True, slots=True)
class EvidenceCandidate:
    """An evidence id and its serialized input sequence."""

    id: EvidenceId
    serialized: str


@dataclass(frozen=True, slots=True)
class LabelSet:
    """Distant-supervision labels y_t for every candidate of one question."""

    question_id: str
    labels: Mapping[EvidenceId, int]

    def __post_init__(self):
        for evidence_id, y in self.labels.items():
            if y not in (0, 1):
                raise ValueError(f"label of {evidence_id} must be 0 or 1, got {y}")

    def of(self, granularity: Granularity) -> list[EvidenceId]:
        """Ids of one granularity in enumeration order."""
        return sorted(
            (e for e in self.labels if e.granularity is granularity),
            key=EvidenceId.order_key,
        )

    def positives(self, granularity: Granularity) -> list[EvidenceId]:
        return [e for e in self.of(granularity) if self.labels[e] == 1]

    def __getitem__(self, evidence_id: EvidenceId) -> int:
        return self.labels[evidence_id]

    def __iter__(self) -> Iterator[EvidenceId]:
        return iter(sorted(self.labels, key=EvidenceId.order_key))


@dataclass(frozen=True, slots=True)
class ScoreSet:
    """Retrieval scores s_t in (0, 1) for every candidate of one question."""

    question_id: str
    scores: Mapping[EvidenceId, float]

    def __post_init__(self):
        for evidence_id, s in self.scores.items():
            if not (math.isfinite(s) and 0.0 < s < 1.0):
                raise ValueError(f"score of {evidence_id} must lie in (0, 1), got {s}")

    def of(self, granularity: Granularity) -> list[EvidenceId]:
        return sorted(
            (e for e in self.scores if e.granularity is granularity),
            key=EvidenceId.order_key,
        )

    def __getitem__(self, evidence_id: EvidenceId) -> float:
        return self.scores[evidence_id]

    def __contains__(self, evidence_id: object) -> bool:
        return evidence_id in self.scores

    def __iter__(self) -> Iterator[EvidenceId]:
        return iter(sorted(self.scores, key=EvidenceId.order_key))
