"""Lexical similarity scorers for ranking candidate relation labels.

The default scorer compares character trigrams: each label token is scored by
its best cosine match against any question token, and the token scores are
averaged over the label.  An alternative scorer reads a word-vector text file
and applies the same max-then-average scheme over embeddings.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import IO, Iterable, Protocol

_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")
_WORD_RE = re.compile(r"[A-Za-z0-9]+")


class Similarity(Protocol):
    def score(self, question: str, label: str) -> float: ...


def split_label(label: str) -> list[str]:
    """Lowercased word tokens of a relation label; camelCase is split."""
    spaced = _CAMEL_RE.sub(" ", label)
    return [w.lower() for w in _WORD_RE.findall(spaced)]


def question_tokens(question: str) -> list[str]:
    return [w.lower() for w in _WORD_RE.findall(question)]


def _trigrams(token: str) -> Counter[str]:
    # Tokens shorter than 3 chars count as a single gram, so "of" can
    # still match "of" exactly instead of vanishing.
    if len(token) < 3:
        return Counter([token])
    return Counter(token[i : i + 3] for i in range(len(token) - 2))


def _cosine(a: Counter[str], b: Counter[str]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(count * b[gram] for gram, count in a.items())
    if dot == 0:
        return 0.0
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    return dot / (norm_a * norm_b)


class TrigramSimilarity:
    """Character-trigram cosine; max over question tokens, mean over label."""

    def score(self, question: str, label: str) -> float:
        label_tokens = split_label(label)
        if not label_tokens:
            return 0.0
        q_vectors = [_trigrams(t) for t in question_tokens(question)]
        if not q_vectors:
            return 0.0
        total = 0.0
        for token in label_tokens:
            vec = _trigrams(token)
            total += max(_cosine(vec, qv) for qv in q_vectors)
        return total / len(label_tokens)


class WordVectorSimilarity:
    """Same scoring scheme over vectors from a word2vec-style text file.

    Each line is ``word v1 v2 ...``; a numeric header line is skipped.
    Out-of-vocabulary tokens contribute zero.
    """

    def __init__(self, vectors: dict[str, list[float]]):
        self.vectors = vectors

    @classmethod
    def load(cls, source: str | IO[str] | Iterable[str]) -> "WordVectorSimilarity":
        lines = source.splitlines() if isinstance(source, str) else source
        vectors: dict[str, list[float]] = {}
        for line in lines:
            parts = line.split()
            if len(parts) < 2:
                continue
            if len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
                continue  # word2vec header: vocab size, dimension
            vectors[parts[0].lower()] = [float(x) for x in parts[1:]]
        return cls(vectors)

    def _vector_cosine(self, a: list[float], b: list[float]) -> float:
        if len(a) != len(b):
            return 0.0
        dot = sum(x * y for x, y in zip(a, b))
        norm_a = math.sqrt(sum(x * x for x in a))
        norm_b = math.sqrt(sum(x * x for x in b))
        if norm_a == 0 or norm_b == 0:
            return 0.0
        return dot / (norm_a * norm_b)

    def score(self, question: str, label: str) -> float:
        label_tokens = split_label(label)
        if not label_tokens:
            return 0.0
        q_vecs = [self.vectors.get(t) for t in question_tokens(question)]
        q_vecs = [v for v in q_vecs if v is not None]
        if not q_vecs:
            return 0.0
        total = 0.0
        for token in label_tokens:
            vec = self.vectors.get(token)
            if vec is None:
                continue
            total += max(self._vector_cosine(vec, qv) for qv in q_vecs)
        return total / len(label_tokens)


DEFAULT_SIMILARITY = TrigramSimilarity()
