"""Converts perception output or fixture files into the context snapshot the
thinking unit reasons over."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .backends import PerceptionResponse
from .errors import MalformedResponse, ParseError
from .model import ContextObservation, IdAllocator, Sentence, Source

DEFAULT_MIN_CONFIDENCE = 0.8
DEFAULT_CAPACITY = 64


@dataclass(frozen=True)
class ContextSnapshot:
    """Bounded, arrival-ordered window of observations (oldest first)."""

    observations: tuple[ContextObservation, ...] = ()
    cycle: int = 0
    capacity: int = DEFAULT_CAPACITY
    seen_responses: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError("capacity must be >= 1")
        if len(self.observations) > self.capacity:
            raise ValueError("snapshot exceeds capacity")

    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(o.sentence for o in self.observations)


def ingest_observations(
    snapshot: ContextSnapshot,
    raw: PerceptionResponse,
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
    ids: IdAllocator | None = None,
    timestamp: int = 0,
) -> ContextSnapshot:
    """Append detections at or above the confidence threshold, evicting the
    oldest observations once capacity is exceeded.

    Idempotent per response id: re-ingesting a seen response is a no-op.
    """
    if not 0.0 <= min_confidence <= 1.0:
        raise ValueError("min_confidence must be in [0,1]")
    if raw.response_id in snapshot.seen_responses:
        return snapshot
    ids = ids or IdAllocator()
    fresh = []
    for det in raw.detections:
        if not det.caption or not det.caption.strip():
            raise MalformedResponse("detection lacks a caption")
        if not 0.0 <= det.confidence <= 1.0:
            raise MalformedResponse(f"confidence {det.confidence} outside [0,1]")
        if det.bbox is not None and (det.bbox[2] <= 0 or det.bbox[3] <= 0):
            raise MalformedResponse(f"bbox {det.bbox} has non-positive dimensions")
        if det.confidence < min_confidence:
            continue
        sentence = Sentence(
            id=ids.next(),
            text=det.caption.strip(),
            source=Source.PERCEPTION,
            timestamp=timestamp,
        )
        fresh.append(
            ContextObservation(sentence=sentence, confidence=det.confidence, bbox=det.bbox)
        )
    merged = (snapshot.observations + tuple(fresh))[-snapshot.capacity :]
    return replace(
        snapshot,
        observations=merged,
        seen_responses=snapshot.seen_responses | {raw.response_id},
    )


def extend_snapshot(
    snapshot: ContextSnapshot, observations: Sequence[ContextObservation]
) -> ContextSnapshot:
    """Append pre-built observations (fixture loads) with the same eviction rule."""
    merged = (snapshot.observations + tuple(observations))[-snapshot.capacity :]
    return replace(snapshot, observations=merged)


def load_fixture(
    path: str | Path,
    ids: IdAllocator | None = None,
    timestamp: int = 0,
) -> list[ContextObservation]:
    """One observation per line, source=fixture, confidence 1.0.

    A blank line is a ParseError (captions must be non-empty); an empty file
    yields an empty list.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"context fixture not found: {path}")
    ids = ids or IdAllocator()
    out: list[ContextObservation] = []
    text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        caption = line.strip()
        if not caption:
            raise ParseError(f"{path}: line {lineno} is blank", line=lineno)
        sentence = Sentence(
            id=ids.next(), text=caption, source=Source.FIXTURE, timestamp=timestamp
        )
        out.append(ContextObservation(sentence=sentence, confidence=1.0, bbox=None))
    return out
