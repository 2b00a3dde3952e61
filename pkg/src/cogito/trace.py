"""Trace file IO and self-consistency verification."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping

from .model import Need, ThoughtTrace


def dumps_trace(trace: ThoughtTrace) -> str:
    """Canonical UTF-8 JSON rendering; identical traces yield identical bytes."""
    return json.dumps(trace.to_dict(), indent=2, ensure_ascii=False) + "\n"


def save_trace(trace: ThoughtTrace, path: str | Path) -> None:
    Path(path).write_text(dumps_trace(trace), encoding="utf-8")


def load_trace(path: str | Path) -> ThoughtTrace:
    with open(path, "r", encoding="utf-8") as fh:
        return ThoughtTrace.from_dict(json.load(fh))


def verify_trace(
    trace: ThoughtTrace,
    needs: Mapping[str, Need] | None = None,
) -> list[str]:
    """Re-check the loop invariants recorded in a trace.

    Returns violation strings (empty means consistent): contiguous cycle
    indices, non-increasing ranking scores, chosen = top of ranking, prompt
    containment, and single ownership of every scheduled action. Need-text
    containment is only checkable when `needs` supplies the texts.
    """
    problems: list[str] = []
    seen_action_ids: set[str] = set()

    for pos, cycle in enumerate(trace.cycles):
        where = f"cycles[{pos}]"
        if cycle.index != pos:
            problems.append(f"{where}: index {cycle.index} != position {pos}")

        scores = [score for _, score in cycle.ranking]
        if any(a < b for a, b in zip(scores, scores[1:])):
            problems.append(f"{where}: ranking scores increase")
        if cycle.ranking and cycle.chosen != cycle.ranking[0][0]:
            problems.append(
                f"{where}: chosen {cycle.chosen!r} is not the top-ranked sentence"
            )

        ranked_ids = sorted(sid for sid, _ in cycle.ranking)
        context_ids = sorted(o.sentence.id for o in cycle.context_snapshot)
        if ranked_ids != context_ids:
            problems.append(f"{where}: ranking ids are not the context ids")

        for obs in cycle.context_snapshot:
            if obs.sentence.text not in cycle.prompt:
                problems.append(
                    f"{where}: prompt omits context {obs.sentence.text!r}"
                )
        if needs is not None:
            need = needs.get(cycle.need)
            if need is None:
                problems.append(f"{where}: unknown need id {cycle.need!r}")
            elif need.text not in cycle.prompt:
                problems.append(f"{where}: prompt omits need text {need.text!r}")

        for action in list(cycle.actions) + list(cycle.revisions):
            if action.id in seen_action_ids:
                problems.append(f"{where}: action {action.id} appears twice")
            seen_action_ids.add(action.id)
            if action.origin_need != cycle.need:
                problems.append(
                    f"{where}: action {action.id} belongs to need "
                    f"{action.origin_need!r}, cycle ran {cycle.need!r}"
                )

    return problems
