"""
Seeded synthetic corpus of hybrid tables.

Every question gets its own table. Words come from a closed vocabulary of
consonant-vowel syllables, split into disjoint pools by role (headers, row
keys, cell values, passage answers, cue words, filler) so that a planted
answer can only be found where it was planted.

In-table questions ask for a cell value by header and row key. In-passage
questions ask for a word planted in a linked passage between four cue words
that the question repeats.
"""

from dataclasses import dataclass

import numpy as np

from config import SynthSpec
from core.errors import GenerationFailedError
from core.logging import logger
from models import AnswerType, Cell, Dataset, Granularity, HybridTable, Passage, Question

from .supervision import derive_gold_type, label_candidates

CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"
MAX_ATTEMPTS = 100
N_CUES = 4
FILLER_BEFORE = 5
FILLER_AFTER = 3
# Share of the vocabulary given to each role
POOL_SHARES = (
    ("headers", 0.10),
    ("keys", 0.15),
    ("values", 0.30),
    ("answers", 0.10),
    ("cues", 0.10),
    ("filler", 0.25),
)


@dataclass(frozen=True)
class _Pools:
    headers: tuple[str, ...]
    keys: tuple[str, ...]
    values: tuple[str, ...]
    answers: tuple[str, ...]
    cues: tuple[str, ...]
    filler: tuple[str, ...]


def build_vocabulary(size: int, rng: np.random.Generator) -> list[str]:
    """Distinct words of two or three syllables."""
    words: set[str] = set()
    vocabulary = []
    while len(vocabulary) < size:
        n_syllables = int(rng.integers(2, 4))
        word = "".join(
            CONSONANTS[rng.integers(len(CONSONANTS))] + VOWELS[rng.integers(len(VOWELS))]
            for _ in range(n_syllables)
        )
        if word not in words:
            words.add(word)
            vocabulary.append(word)
    return vocabulary


def _split_pools(vocabulary: list[str]) -> _Pools:
    parts = {}
    start = 0
    for k, (role, share) in enumerate(POOL_SHARES):
        end = len(vocabulary) if k == len(POOL_SHARES) - 1 else start + int(share * len(vocabulary))
        parts[role] = tuple(vocabulary[start:end])
        start = end
    return _Pools(**parts)


def _sample(rng: np.random.Generator, pool: tuple[str, ...], n: int) -> list[str]:
    """n words, distinct whenever the pool is large enough."""
    picks = rng.choice(len(pool), n, replace=n > len(pool))
    return [pool[k] for k in picks]


def _between(rng: np.random.Generator, bounds: tuple[int, int]) -> int:
    low, high = bounds
    return int(rng.integers(low, high + 1))


def _filler(rng: np.random.Generator, pools: _Pools, n: int) -> list[str]:
    return [pools.filler[k] for k in rng.integers(len(pools.filler), size=n)]


def _candidate(
    index: int, spec: SynthSpec, pools: _Pools, rng: np.random.Generator
) -> tuple[HybridTable, dict[str, Passage], Question, AnswerType]:
    table_id = f"t{index:04d}"
    n_rows = _between(rng, spec.rows)
    n_cols = _between(rng, spec.cols)
    headers = _sample(rng, pools.headers, n_cols)
    keys = _sample(rng, pools.keys, n_rows)
    values = _sample(rng, pools.values, n_rows * max(n_cols - 1, 0))

    kind = AnswerType.IN_TABLE if rng.random() < spec.in_table_fraction else AnswerType.IN_PASSAGE
    i = int(rng.integers(n_rows))
    j = int(rng.integers(1, n_cols)) if n_cols > 1 else 0
    n_links = [[_between(rng, spec.links_per_cell) for _ in range(n_cols)] for _ in range(n_rows)]
    if kind is AnswerType.IN_PASSAGE and n_links[i][j] == 0:
        n_links[i][j] = 1

    passages: dict[str, Passage] = {}
    grid = []
    for r in range(n_rows):
        row = []
        for c in range(n_cols):
            value = keys[r] if c == 0 else values[r * (n_cols - 1) + c - 1]
            link_ids = []
            for _ in range(n_links[r][c]):
                passage_id = f"{table_id}-p{len(passages)}"
                text = " ".join(_filler(rng, pools, FILLER_BEFORE + N_CUES + 1 + FILLER_AFTER))
                passages[passage_id] = Passage(id=passage_id, text=text)
                link_ids.append(passage_id)
            row.append(Cell(value=value, link_ids=tuple(link_ids)))
        grid.append(row)

    if kind is AnswerType.IN_TABLE:
        answer = grid[i][j].value
        text = f"what is the {headers[j]} of {keys[i]}"
        shared = [headers[j], keys[i]]
        gold_passage = None
    else:
        answer = _sample(rng, pools.answers, 1)[0]
        cues = _sample(rng, pools.cues, N_CUES)
        half = N_CUES // 2
        gold_passage = grid[i][j].link_ids[int(rng.integers(len(grid[i][j].link_ids)))]
        planted = [
            *_filler(rng, pools, FILLER_BEFORE),
            *cues[:half],
            answer,
            *cues[half:],
            *_filler(rng, pools, FILLER_AFTER),
        ]
        passages[gold_passage] = Passage(id=gold_passage, text=" ".join(planted))
        text = f"what {' '.join(cues)} for the {headers[j]} of {keys[i]}"
        shared = cues[:half]

    others = [p for p in passages if p != gold_passage]
    if others and rng.random() < spec.distractor_rate:
        target = others[int(rng.integers(len(others)))]
        words = passages[target].text.split()
        at = int(rng.integers(len(words) + 1))
        words[at:at] = shared
        passages[target] = Passage(id=target, text=" ".join(words))

    table = HybridTable(
        id=table_id, headers=tuple(headers), cells=tuple(tuple(row) for row in grid)
    )
    question = Question(
        id=f"q{index:04d}", table_id=table_id, text=text, gold_answers=(answer,)
    )
    return table, passages, question, kind


def _unambiguous(
    table: HybridTable, passages: dict[str, Passage], question: Question, kind: AnswerType
) -> bool:
    """Exactly one cell or link holds the answer, and it is of the planted kind."""
    labels = label_candidates(question, table, passages)
    fine = sum(
        y
        for e, y in labels.labels.items()
        if e.granularity in (Granularity.CELL, Granularity.LINK)
    )
    return fine == 1 and derive_gold_type(labels) is kind


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Build a corpus of spec.n_questions questions, deterministic per spec.seed."""
    rng = np.random.default_rng(spec.seed)
    pools = _split_pools(build_vocabulary(spec.vocab_size, rng))

    tables: dict[str, HybridTable] = {}
    passages: dict[str, Passage] = {}
    questions: list[Question] = []
    n_rerolls = 0

    for index in range(spec.n_questions):
        for attempt in range(MAX_ATTEMPTS):
            table, table_passages, question, kind = _candidate(index, spec, pools, rng)
            if _unambiguous(table, table_passages, question, kind):
                break
            n_rerolls += 1
        else:
            raise GenerationFailedError(index, MAX_ATTEMPTS)
        tables[table.id] = table
        passages.update(table_passages)
        questions.append(question)

    logger.info(
        "Synthetic corpus generated",
        n_questions=len(questions),
        n_passages=len(passages),
        n_rerolls=n_rerolls,
        seed=spec.seed,
    )
    return Dataset(tables=tables, passages=passages, questions=tuple(questions))
