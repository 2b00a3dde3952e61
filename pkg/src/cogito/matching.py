"""Embedding vectors and cosine-similarity ranking of context sentences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyContext, UnknownSentenceId, ZeroNorm
from .model import Sentence


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("embedding must be 1-D")
        if arr.shape[0] < 2:
            raise ValueError("embedding dim must be >= 2")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding values must be finite")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class Ranking:
    """(sentence_id, score) pairs sorted by score descending."""

    entries: tuple[tuple[str, float], ...]

    def top(self) -> tuple[str, float]:
        return self.entries[0]


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a,b) / (|a||b|), clamped to [-1,1] against rounding."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dims differ: {a.dim} vs {b.dim}")
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        # A zero embedding means the backend failed; never silently score it.
        raise ZeroNorm("cosine similarity undefined for zero-norm embedding")
    score = float(np.dot(a.values, b.values)) / (na * nb)
    return max(-1.0, min(1.0, score))


def rank_contexts(
    need_vec: EmbeddingVector,
    context_vecs: Sequence[tuple[str, EmbeddingVector]],
    texts: Mapping[str, str] | None = None,
) -> Ranking:
    """Score every context against the need and sort descending.

    Ties break by ascending sentence text (when `texts` maps ids to them, as
    best_match arranges), then by input position, so the order is total and
    replayable.
    """
    if not context_vecs:
        raise EmptyContext("no context sentences to rank")
    scored = []
    for index, (sid, vec) in enumerate(context_vecs):
        score = cosine_similarity(need_vec, vec)
        tie_text = texts[sid] if texts is not None and sid in texts else sid
        scored.append((-score, tie_text, index, sid, score))
    scored.sort(key=lambda item: item[:3])
    return Ranking(entries=tuple((sid, score) for *_rest, sid, score in scored))


def best_match(
    need: Sentence,
    contexts: Sequence[Sentence],
    embedder,
) -> tuple[Sentence, float]:
    """Embed everything via the backend and return the top-ranked context.

    Equals the exhaustive max over pairwise cosine similarities by
    construction (rank_contexts sorts all of them).
    """
    if not contexts:
        raise EmptyContext("best_match requires at least one context sentence")
    vectors = embedder.embed([need.text] + [c.text for c in contexts])
    need_vec = vectors[0]
    pairs = [(c.id, v) for c, v in zip(contexts, vectors[1:])]
    ranking = rank_contexts(need_vec, pairs, texts={c.id: c.text for c in contexts})
    top_id, top_score = ranking.top()
    winner = next(c for c in contexts if c.id == top_id)
    return winner, top_score


def ranked_contexts_for_need(
    need: Sentence,
    contexts: Sequence[Sentence],
    embedder,
) -> Ranking:
    """Full ranking variant of best_match, used by the thinking loop."""
    if not contexts:
        raise EmptyContext("cannot rank an empty context")
    vectors = embedder.embed([need.text] + [c.text for c in contexts])
    pairs = [(c.id, v) for c, v in zip(contexts, vectors[1:])]
    return rank_contexts(vectors[0], pairs, texts={c.id: c.text for c in contexts})


def format_score(score: float) -> str:
    return f"{score:.4f}"


def lookup_text(sentences: Sequence[Sentence], sid: str) -> str:
    for s in sentences:
        if s.id == sid:
            return s.text
    raise UnknownSentenceId(f"sentence id {sid!r} not in lookup")
