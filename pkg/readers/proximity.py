import math
import re

from models import Question
from services.evidence import MARKERS
from services.supervision import normalize_text, tokenize

from .base import BaseReader

_TOKEN = re.compile(r"\S+")
# Neighbor separator of flattened cell content
_UNSELECTABLE = MARKERS | {"|"}
LENGTH_PENALTY = 0.01


def extract_span(question: Question, passage_text: str, max_span_tokens: int) -> str:
    """
    Pick the span whose surroundings hold the most question tokens.

    A span [s, e) of at most max_span_tokens whitespace tokens scores the
    number of question tokens outside it within max_span_tokens positions of
    its centre, minus LENGTH_PENALTY per token. The earliest best span wins.
    Spans never cross a [SEP]/[CLS] marker or a "|" separator, and never start
    or end on a token that normalizes to nothing (an article, bare punctuation).

    Args:
        question: Supplies the tokens to look for around each span.
        passage_text: Text to read; the returned span keeps its surface form.
        max_span_tokens: Longest span and radius of the window around it.

    Returns:
        The span, or "" when no token can be selected.
    """
    matches = list(_TOKEN.finditer(passage_text))
    if not matches:
        return ""

    question_tokens = set(tokenize(question.text))
    normalized = [normalize_text(m.group()) for m in matches]
    hits = [0]
    for token in normalized:
        hits.append(hits[-1] + int(token in question_tokens))
    crossable = [m.group() not in _UNSELECTABLE for m in matches]
    n = len(matches)

    best_score, best_span = None, None
    for s in range(n):
        if not (crossable[s] and normalized[s]):
            continue
        for e in range(s + 1, min(s + max_span_tokens, n) + 1):
            if not crossable[e - 1]:
                break
            if not normalized[e - 1]:
                continue
            centre = (s + e - 1) / 2
            lo = max(0, math.ceil(centre - max_span_tokens))
            hi = min(n - 1, math.floor(centre + max_span_tokens))
            near = (hits[hi + 1] - hits[lo]) - (hits[e] - hits[s])
            score = near - LENGTH_PENALTY * (e - s)
            if best_score is None or score > best_score:
                best_score, best_span = score, (s, e)

    if best_span is None:
        return ""
    s, e = best_span
    return passage_text[matches[s].start():matches[e - 1].end()]


class ProximityReader(BaseReader):
    """Deterministic lexical baseline reader."""

    name = "proximity"

    def __init__(self, max_span_tokens: int = 4):
        self.max_span_tokens = max_span_tokens

    def run(self, question: Question, passage_text: str) -> str:
        return extract_span(question, passage_text, self.max_span_tokens)
