"""Core domain types, identifiers, and scenario validation.

Everything here is an immutable value type; stores and the orchestrator swap
instances instead of mutating. Identifiers are run-scoped monotonically
increasing integers rendered as decimal strings, and timestamps are cycle
counters, so replays are reproducible without any wall clock or randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, Optional

import numpy as np


class Source(str, Enum):
    PERCEPTION = "perception"
    AUDIO = "audio"
    TACTILE = "tactile"
    FIXTURE = "fixture"
    GENERATED = "generated"


class NeedStatus(str, Enum):
    PENDING = "pending"
    ACTIVE = "active"
    SATISFIED = "satisfied"


class ActionStatus(str, Enum):
    PLANNED = "planned"
    EXECUTED = "executed"
    ABANDONED = "abandoned"


class StimulusKind(str, Enum):
    DESCRIPTION = "description"
    HYPOTHETICAL = "hypothetical"
    GOAL = "goal"


class QueryTemplate(str, Enum):
    FEASIBILITY = "feasibility"
    PRECONDITIONS = "preconditions"
    CUSTOM = "custom"


class BackendMode(str, Enum):
    OFFLINE = "offline"
    REMOTE = "remote"
    FIXTURE = "fixture"


class ContextSource(str, Enum):
    FIXTURE_FILE = "fixture_file"
    PERCEPTION_BACKEND = "perception_backend"


class IdAllocator:
    """Run-scoped counter handing out decimal-string ids."""

    def __init__(self, start: int = 1):
        self._next = start

    def next(self) -> str:
        value = str(self._next)
        self._next += 1
        return value

    def bump_past(self, ids: Iterable[str]) -> None:
        """Advance the counter beyond any numeric ids already in use."""
        for i in ids:
            try:
                n = int(i)
            except ValueError:
                continue
            if n >= self._next:
                self._next = n + 1


@dataclass(frozen=True)
class Sentence:
    """A natural-language caption with provenance; the lingua franca between units."""

    id: str
    text: str
    source: Source
    timestamp: int

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("Sentence.text must be non-empty after trim")
        if self.timestamp < 0:
            raise ValueError("Sentence.timestamp must be >= 0")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "source": self.source.value,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Sentence":
        return cls(
            id=d["id"],
            text=d["text"],
            source=Source(d["source"]),
            timestamp=d["timestamp"],
        )


@dataclass(frozen=True)
class ContextObservation:
    sentence: Sentence
    confidence: float
    bbox: Optional[tuple[float, float, float, float]] = None

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("ContextObservation.confidence must be in [0,1]")
        if self.bbox is not None:
            _, _, w, h = self.bbox
            if w <= 0 or h <= 0:
                raise ValueError("ContextObservation.bbox dimensions must be positive")

    def to_dict(self) -> dict:
        return {
            "sentence": self.sentence.to_dict(),
            "confidence": self.confidence,
            "bbox": list(self.bbox) if self.bbox is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContextObservation":
        bbox = d.get("bbox")
        return cls(
            sentence=Sentence.from_dict(d["sentence"]),
            confidence=d["confidence"],
            bbox=tuple(bbox) if bbox is not None else None,
        )


@dataclass(frozen=True)
class Need:
    """An internal goal. Permissive on construction so validation can report
    violations as data instead of raising."""

    id: str
    text: str
    priority: int
    status: NeedStatus = NeedStatus.PENDING

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "priority": self.priority,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Need":
        return cls(
            id=d["id"],
            text=d["text"],
            priority=d["priority"],
            status=NeedStatus(d.get("status", "pending")),
        )


@dataclass(frozen=True)
class ScheduledAction:
    id: str
    text: str
    origin_need: str
    sequence_index: int
    status: ActionStatus = ActionStatus.PLANNED

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "origin_need": self.origin_need,
            "sequence_index": self.sequence_index,
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScheduledAction":
        return cls(
            id=d["id"],
            text=d["text"],
            origin_need=d["origin_need"],
            sequence_index=d["sequence_index"],
            status=ActionStatus(d.get("status", "planned")),
        )


@dataclass(frozen=True)
class Stimulus:
    """An instruction from the thinking unit to the imagery unit."""

    kind: StimulusKind
    text: str
    origin_cycle: int

    def __post_init__(self):
        # The question check is purely syntactic, by design.
        if self.kind is StimulusKind.HYPOTHETICAL and not self.text.rstrip().endswith("?"):
            raise ValueError("hypothetical stimulus text must be phrased as a question")
        if self.origin_cycle < 0:
            raise ValueError("Stimulus.origin_cycle must be >= 0")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "text": self.text,
            "origin_cycle": self.origin_cycle,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Stimulus":
        return cls(
            kind=StimulusKind(d["kind"]),
            text=d["text"],
            origin_cycle=d["origin_cycle"],
        )


@dataclass(frozen=True, eq=False)
class MentalImage:
    """A generated raster plus the descriptor sentence the thinking unit perceives.

    Pixel arrays never enter traces; images are referenced by id and written to
    separate files.
    """

    id: str
    prompt: str
    pixels: np.ndarray  # H x W x 3 uint8
    seed: int
    descriptor: Sentence

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("MentalImage.pixels must be H x W x 3")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise ValueError("MentalImage dimensions must be >= 1")
        if self.pixels.dtype != np.uint8:
            raise ValueError("MentalImage.pixels must be uint8")


@dataclass(frozen=True, eq=False)
class SketchImage:
    source_id: str
    pixels: np.ndarray  # H x W uint8
    sigma: float

    def __post_init__(self):
        if self.pixels.ndim != 2:
            raise ValueError("SketchImage.pixels must be 2-D")
        if self.sigma <= 0:
            raise ValueError("SketchImage.sigma must be > 0")
        if self.pixels.dtype != np.uint8:
            raise ValueError("SketchImage.pixels must be uint8")


@dataclass(frozen=True)
class ReasoningQuery:
    template_id: QueryTemplate
    text: str
    target_image: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("ReasoningQuery.text must be non-empty")

    def to_dict(self) -> dict:
        return {
            "template_id": self.template_id.value,
            "text": self.text,
            "target_image": self.target_image,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReasoningQuery":
        return cls(
            template_id=QueryTemplate(d["template_id"]),
            text=d["text"],
            target_image=d["target_image"],
        )


@dataclass(frozen=True)
class ThoughtCycle:
    """One full pass of the thinking loop, replayable from the trace alone."""

    index: int
    need: str
    context_snapshot: tuple[ContextObservation, ...]
    ranking: tuple[tuple[str, float], ...]
    chosen: str
    prompt: str
    actions: tuple[ScheduledAction, ...]
    stimuli: tuple[Stimulus, ...]
    images: tuple[str, ...]
    queries: tuple[ReasoningQuery, ...]
    revisions: tuple[ScheduledAction, ...]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "need": self.need,
            "context_snapshot": [o.to_dict() for o in self.context_snapshot],
            "ranking": [[sid, score] for sid, score in self.ranking],
            "chosen": self.chosen,
            "prompt": self.prompt,
            "actions": [a.to_dict() for a in self.actions],
            "stimuli": [s.to_dict() for s in self.stimuli],
            "images": list(self.images),
            "queries": [q.to_dict() for q in self.queries],
            "revisions": [a.to_dict() for a in self.revisions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThoughtCycle":
        return cls(
            index=d["index"],
            need=d["need"],
            context_snapshot=tuple(
                ContextObservation.from_dict(o) for o in d["context_snapshot"]
            ),
            ranking=tuple((sid, score) for sid, score in d["ranking"]),
            chosen=d["chosen"],
            prompt=d["prompt"],
            actions=tuple(ScheduledAction.from_dict(a) for a in d["actions"]),
            stimuli=tuple(Stimulus.from_dict(s) for s in d["stimuli"]),
            images=tuple(d["images"]),
            queries=tuple(ReasoningQuery.from_dict(q) for q in d["queries"]),
            revisions=tuple(ScheduledAction.from_dict(a) for a in d["revisions"]),
        )


@dataclass(frozen=True)
class ThoughtTrace:
    run_seed: int
    backend_mode: BackendMode
    cycles: tuple[ThoughtCycle, ...]
    # Terminal error marker for partial traces; absent from the file when None.
    error: Optional[str] = None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "run_seed": self.run_seed,
            "backend_mode": self.backend_mode.value,
            "cycles": [c.to_dict() for c in self.cycles],
        }
        if self.error is not None:
            d["error"] = self.error
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ThoughtTrace":
        return cls(
            run_seed=d["run_seed"],
            backend_mode=BackendMode(d["backend_mode"]),
            cycles=tuple(ThoughtCycle.from_dict(c) for c in d["cycles"]),
            error=d.get("error"),
        )


@dataclass(frozen=True)
class ScenarioConfig:
    needs: tuple[Need, ...]
    context_source: ContextSource
    fixture_path: Optional[str]
    max_cycles: int
    image_size: tuple[int, int]
    sigma: float
    seed: int
    whatif_injections: tuple[tuple[int, Stimulus], ...] = ()
    # Only meaningful for context_source=perception_backend: the image sent to
    # the caption endpoint.
    image_path: Optional[str] = None

    def to_dict(self) -> dict:
        d: dict[str, Any] = {
            "needs": [n.to_dict() for n in self.needs],
            "context_source": self.context_source.value,
            "fixture_path": self.fixture_path,
            "max_cycles": self.max_cycles,
            "image_size": list(self.image_size),
            "sigma": self.sigma,
            "seed": self.seed,
            "whatif_injections": [
                [cycle, stim.to_dict()] for cycle, stim in self.whatif_injections
            ],
        }
        if self.image_path is not None:
            d["image_path"] = self.image_path
        return d

    @classmethod
    def from_dict(cls, d: dict, ids: IdAllocator | None = None) -> "ScenarioConfig":
        """Build a config from parsed JSON.

        Scenario files may omit need ids/statuses and stimulus origin cycles;
        ids are assigned in order from `ids` (fresh allocator by default).
        """
        ids = ids or IdAllocator()
        needs = []
        for nd in d.get("needs", []):
            needs.append(
                Need(
                    id=nd.get("id") or ids.next(),
                    text=nd.get("text", ""),
                    priority=nd.get("priority", 0),
                    status=NeedStatus(nd.get("status", "pending")),
                )
            )
        injections = []
        for cycle, sd in d.get("whatif_injections", []):
            sd = dict(sd)
            sd.setdefault("origin_cycle", cycle)
            injections.append((cycle, Stimulus.from_dict(sd)))
        size = d["image_size"]
        return cls(
            needs=tuple(needs),
            context_source=ContextSource(d["context_source"]),
            fixture_path=d.get("fixture_path"),
            max_cycles=d["max_cycles"],
            image_size=(size[0], size[1]),
            sigma=d["sigma"],
            seed=d["seed"],
            whatif_injections=tuple(injections),
            image_path=d.get("image_path"),
        )


MAX_CYCLES_LIMIT = 1000
MIN_IMAGE_SIDE = 8  # generate_mental_image precondition
U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


def validate_scenario(config: ScenarioConfig) -> list[Violation]:
    """Check every scenario invariant; an empty report means valid.

    Violations are data, not errors: all of them are reported, not just the
    first one found.
    """
    out: list[Violation] = []

    seen_ids: set[str] = set()
    for i, need in enumerate(config.needs):
        path = f"needs[{i}]"
        if not need.text.strip():
            out.append(Violation(f"{path}.text", "must be non-empty"))
        if need.priority < 0:
            out.append(Violation(f"{path}.priority", "must be >= 0"))
        if need.id in seen_ids:
            out.append(Violation(f"{path}.id", f"duplicate id {need.id!r}"))
        seen_ids.add(need.id)
        # Runs start fresh: active/satisfied states only arise while running.
        if need.status is not NeedStatus.PENDING:
            out.append(Violation(f"{path}.status", "must be pending at scenario load"))

    if config.context_source is ContextSource.FIXTURE_FILE:
        if not config.fixture_path:
            out.append(
                Violation("fixture_path", "required when context_source=fixture_file")
            )
    else:
        if config.fixture_path:
            out.append(
                Violation(
                    "fixture_path", "must be absent unless context_source=fixture_file"
                )
            )
        if not config.image_path:
            out.append(
                Violation(
                    "image_path", "required when context_source=perception_backend"
                )
            )

    if config.max_cycles < 0:
        out.append(Violation("max_cycles", "must be >= 0"))
    if config.max_cycles > MAX_CYCLES_LIMIT:
        out.append(Violation("max_cycles", f"must be <= {MAX_CYCLES_LIMIT}"))

    h, w = config.image_size
    if h < MIN_IMAGE_SIDE or w < MIN_IMAGE_SIDE:
        out.append(Violation("image_size", f"sides must be >= {MIN_IMAGE_SIDE}"))

    if not config.sigma > 0:
        out.append(Violation("sigma", "must be > 0"))

    if not 0 <= config.seed <= U64_MAX:
        out.append(Violation("seed", "must fit in 64 unsigned bits"))

    for k, (cycle, stim) in enumerate(config.whatif_injections):
        path = f"whatif_injections[{k}]"
        if cycle < 0:
            out.append(Violation(f"{path}.cycle_index", "must be >= 0"))
        if stim.kind is not StimulusKind.HYPOTHETICAL:
            out.append(Violation(f"{path}.stimulus.kind", "must be hypothetical"))

    return out


def preloaded_needs(config: ScenarioConfig) -> tuple[Need, ...]:
    """Needs exactly as the scenario declares them (ids preserved)."""
    return config.needs


def replace_scenario(config: ScenarioConfig, **changes) -> ScenarioConfig:
    return replace(config, **changes)
