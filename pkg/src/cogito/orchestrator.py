"""The cognitive thinking unit: prompt building, action inference, imagery
triggering, reasoning queries, what-if plan revision, and the cycle loop."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import base64

from . import matching
from .backends import fnv1a_u64
from .context import (
    DEFAULT_MIN_CONFIDENCE,
    ContextSnapshot,
    extend_snapshot,
    ingest_observations,
    load_fixture,
)
from .errors import (
    CogitoError,
    EmptyContext,
    InvalidScenario,
    NoActions,
    WrongStimulusKind,
)
from .imagery import SketchParams, generate_mental_image, sketchify
from .model import (
    ContextSource,
    IdAllocator,
    MentalImage,
    Need,
    QueryTemplate,
    ReasoningQuery,
    ScenarioConfig,
    Sentence,
    SketchImage,
    Stimulus,
    StimulusKind,
    ThoughtCycle,
    ThoughtTrace,
    validate_scenario,
)
from .needs import NeedStore

ACTION_DELIMITER = " - "
DEFAULT_MAX_LENGTH = 128
DEFAULT_TEMPERATURE = 0.0

PROMPT_HEADER = "Given the observed context, propose the next action."

# Reasoning templates instantiated against the image descriptor, in this order.
QUERY_TEMPLATES: tuple[tuple[QueryTemplate, str], ...] = (
    (
        QueryTemplate.FEASIBILITY,
        'Is the depicted scenario physically or logically feasible? (scenario: "{descriptor}")',
    ),
    (
        QueryTemplate.PRECONDITIONS,
        'What preconditions or resources are required to realize this configuration? (scenario: "{descriptor}")',
    ),
)

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class PromptText:
    text: str
    context_count: int
    need_text: str


def build_prompt(contexts: Sequence[Sentence], need: Need) -> PromptText:
    """Fixed template: header, numbered Context block, Need line, Action line.

    The rendered text contains every context sentence and the need verbatim.
    """
    if not contexts:
        raise EmptyContext("cannot build a prompt without context")
    lines = [PROMPT_HEADER, "Context:"]
    for i, sentence in enumerate(contexts, start=1):
        lines.append(f"{i}. {sentence.text}")
    lines.append(f"Need: {need.text}")
    lines.append("Action:")
    return PromptText(
        text="\n".join(lines), context_count=len(contexts), need_text=need.text
    )


def build_revision_prompt(
    contexts: Sequence[Sentence],
    need: Need,
    plan: Sequence[str],
    hypothesis: str,
) -> PromptText:
    """build_prompt plus the current plan and a Hypothesis line."""
    base = build_prompt(contexts, need)
    lines = base.text.splitlines()[:-1]  # re-append Action: after the extras
    lines.append("Plan:")
    for i, action_text in enumerate(plan, start=1):
        lines.append(f"{i}. {action_text}")
    lines.append(f"Hypothesis: {hypothesis}")
    lines.append("Action:")
    return PromptText(
        text="\n".join(lines), context_count=base.context_count, need_text=need.text
    )


def infer_actions(
    prompt: PromptText,
    generator,
    max_length: int = DEFAULT_MAX_LENGTH,
    temperature: float = DEFAULT_TEMPERATURE,
) -> str:
    if max_length < 1:
        raise ValueError("max_length must be >= 1")
    return generator.generate(prompt.text, max_length, temperature)


def parse_actions(raw: str, delimiter: str = ACTION_DELIMITER) -> list[str]:
    """Split a completion into action texts on the delimiter, dropping empties."""
    parts = [p.strip() for p in raw.split(delimiter)]
    actions = [p for p in parts if p]
    if not actions:
        raise NoActions(f"completion {raw!r} contains no actions")
    return actions


def generate_reasoning_queries(
    image: MentalImage,
    extra_templates: Sequence[str] = (),
) -> list[ReasoningQuery]:
    """Instantiate the configured templates against the image descriptor;
    feasibility first, preconditions second, custom templates last."""
    queries = [
        ReasoningQuery(
            template_id=template_id,
            text=template.format(descriptor=image.descriptor.text),
            target_image=image.id,
        )
        for template_id, template in QUERY_TEMPLATES
    ]
    for template in extra_templates:
        queries.append(
            ReasoningQuery(
                template_id=QueryTemplate.CUSTOM,
                text=template.format(descriptor=image.descriptor.text),
                target_image=image.id,
            )
        )
    return queries


def handle_whatif(
    stimulus: Stimulus,
    contexts: Sequence[Sentence],
    need: Need,
    plan: Sequence[str],
    generator,
    max_length: int = DEFAULT_MAX_LENGTH,
    temperature: float = DEFAULT_TEMPERATURE,
) -> list[str]:
    """Run a hypothetical against the current plan and return revised action
    texts. Prior actions stay planned; contradiction detection is out of scope.
    """
    if stimulus.kind is not StimulusKind.HYPOTHETICAL:
        raise WrongStimulusKind(f"expected hypothetical, got {stimulus.kind.value}")
    prompt = build_revision_prompt(contexts, need, plan, stimulus.text)
    raw = infer_actions(prompt, generator, max_length, temperature)
    return parse_actions(raw)


@dataclass
class RunResult:
    trace: ThoughtTrace
    images: list[MentalImage]
    sketches: list[tuple[str, SketchImage]]  # (filename, sketch)


def image_seed(run_seed: int, cycle: int, action_index: int) -> int:
    """Deterministic per-image seed derivation."""
    return (run_seed ^ fnv1a_u64(f"cycle{cycle}/action{action_index}".encode())) & _U64


def sketch_filename(cycle: int, action_index: int) -> str:
    return f"cycle{cycle}_action{action_index}.pgm"


def _load_context(scenario: ScenarioConfig, gateway, ids: IdAllocator) -> ContextSnapshot:
    snapshot = ContextSnapshot()
    if scenario.context_source is ContextSource.FIXTURE_FILE:
        observations = load_fixture(scenario.fixture_path, ids=ids, timestamp=0)
        return extend_snapshot(snapshot, observations)
    image_b64 = base64.b64encode(Path(scenario.image_path).read_bytes()).decode("ascii")
    response = gateway.caption(image_b64, DEFAULT_MIN_CONFIDENCE)
    return ingest_observations(
        snapshot, response, DEFAULT_MIN_CONFIDENCE, ids=ids, timestamp=0
    )


def run_loop(
    scenario: ScenarioConfig,
    gateway,
    store: NeedStore | None = None,
    ids: IdAllocator | None = None,
) -> RunResult:
    """Run thinking cycles until needs are exhausted or max_cycles is reached.

    Per cycle: pop need, rank contexts, build prompt, infer and schedule
    actions, render one image + sketch per action, raise reasoning queries,
    then apply any what-if injections for this cycle. Backend failures end the
    run with a terminal error marker on the partial trace.
    """
    violations = validate_scenario(scenario)
    if violations:
        raise InvalidScenario(violations)

    ids = ids or IdAllocator()
    store = store or NeedStore(ids=ids)
    store.preload(scenario.needs)

    cycles: list[ThoughtCycle] = []
    images: list[MentalImage] = []
    sketches: list[tuple[str, SketchImage]] = []
    params = SketchParams(sigma=scenario.sigma)
    error: str | None = None

    try:
        snapshot = _load_context(scenario, gateway, ids)
        for index in range(scenario.max_cycles):
            need = store.pop_next()
            if need is None:
                break
            cycle = _run_cycle(
                index, need, snapshot, scenario, gateway, store, ids, params,
                images, sketches,
            )
            cycles.append(cycle)
            store.complete(need.id)
    except (CogitoError, OSError) as exc:
        error = f"cycle {len(cycles)}: {type(exc).__name__}: {exc}"

    trace = ThoughtTrace(
        run_seed=scenario.seed,
        backend_mode=gateway.mode,
        cycles=tuple(cycles),
        error=error,
    )
    return RunResult(trace=trace, images=images, sketches=sketches)


def _run_cycle(
    index: int,
    need: Need,
    snapshot: ContextSnapshot,
    scenario: ScenarioConfig,
    gateway,
    store: NeedStore,
    ids: IdAllocator,
    params: SketchParams,
    images: list[MentalImage],
    sketches: list[tuple[str, SketchImage]],
) -> ThoughtCycle:
    contexts = snapshot.sentences()
    ranking = matching.ranked_contexts_for_need(need, contexts, gateway)
    chosen_id, _ = ranking.top()

    prompt = build_prompt(contexts, need)
    raw = infer_actions(prompt, gateway)
    action_texts = parse_actions(raw)
    actions = store.schedule_actions(need.id, action_texts)

    stimuli: list[Stimulus] = []
    cycle_images: list[MentalImage] = []
    queries: list[ReasoningQuery] = []
    for j, action in enumerate(actions):
        stimulus = Stimulus(
            kind=StimulusKind.DESCRIPTION, text=action.text, origin_cycle=index
        )
        stimuli.append(stimulus)
        image = generate_mental_image(
            stimulus,
            gateway,
            scenario.image_size,
            image_seed(scenario.seed, index, j),
            ids=ids,
        )
        cycle_images.append(image)
        sketches.append((sketch_filename(index, j), sketchify(image, params)))
        queries.extend(generate_reasoning_queries(image))
    images.extend(cycle_images)

    revisions = []
    for cycle_index, stimulus in scenario.whatif_injections:
        if cycle_index != index:
            continue
        stimuli.append(stimulus)
        plan = [a.text for a in store.actions_for(need.id)]
        revised_texts = handle_whatif(stimulus, contexts, need, plan, gateway)
        revisions.extend(store.schedule_actions(need.id, revised_texts))

    return ThoughtCycle(
        index=index,
        need=need.id,
        context_snapshot=snapshot.observations,
        ranking=ranking.entries,
        chosen=chosen_id,
        prompt=prompt.text,
        actions=tuple(actions),
        stimuli=tuple(stimuli),
        images=tuple(img.id for img in cycle_images),
        queries=tuple(queries),
        revisions=tuple(revisions),
    )
