"""Command-line runner: load a scenario, run the thinking loop, emit artifacts.

Exit codes: 0 complete trace, 2 scenario/config validation failure, 3 backend
failure (a partial trace is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .backends import config_from_env, make_gateway
from .errors import CogitoError, UnknownSentenceId
from .matching import Ranking
from .model import BackendMode, ScenarioConfig, Sentence, validate_scenario
from .orchestrator import RunResult, run_loop
from .pgm import write_pgm
from .trace import dumps_trace


@dataclass(frozen=True)
class CliOptions:
    scenario_path: str
    backend: Optional[BackendMode] = None
    out_dir: str = "out"
    max_cycles: Optional[int] = None
    seed: Optional[int] = None
    sigma: Optional[float] = None


def format_ranking(ranking: Ranking, sentences: Sequence[Sentence]) -> str:
    """One line per entry, in the input sentence order (not rank order), the
    top-ranked line marked with a trailing star. Scores render to 4 decimals."""
    scores = dict(ranking.entries)
    top_id = ranking.top()[0]
    lines = []
    for sentence in sentences:
        if sentence.id not in scores:
            raise UnknownSentenceId(f"no ranking entry for sentence {sentence.id!r}")
        star = " *" if sentence.id == top_id else ""
        lines.append(f"{sentence.text} - Similarity: {scores[sentence.id]:.4f}{star}")
    return "\n".join(lines)


def load_scenario(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    config = ScenarioConfig.from_dict(raw)
    # Relative data paths resolve against the scenario file's directory.
    if config.fixture_path and not Path(config.fixture_path).is_absolute():
        config = replace(config, fixture_path=str(path.parent / config.fixture_path))
    if config.image_path and not Path(config.image_path).is_absolute():
        config = replace(config, image_path=str(path.parent / config.image_path))
    return config


def apply_overrides(config: ScenarioConfig, options: CliOptions) -> ScenarioConfig:
    changes = {}
    if options.max_cycles is not None:
        changes["max_cycles"] = options.max_cycles
    if options.seed is not None:
        changes["seed"] = options.seed
    if options.sigma is not None:
        changes["sigma"] = options.sigma
    return replace(config, **changes) if changes else config


def write_artifacts(result: RunResult, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trace.json").write_text(dumps_trace(result.trace), encoding="utf-8")

    blocks = []
    for cycle in result.trace.cycles:
        sentences = [obs.sentence for obs in cycle.context_snapshot]
        block = f"cycle {cycle.index}\n"
        block += format_ranking(Ranking(entries=cycle.ranking), sentences)
        blocks.append(block)
    (out_dir / "ranking.txt").write_text(
        "\n\n".join(blocks) + ("\n" if blocks else ""), encoding="utf-8"
    )

    for filename, sketch in result.sketches:
        write_pgm(sketch.pixels, out_dir / filename)


def run(options: CliOptions) -> int:
    scenario_path = Path(options.scenario_path)
    if not scenario_path.exists():
        print(f"scenario file not found: {scenario_path}", file=sys.stderr)
        return 2
    try:
        scenario = load_scenario(scenario_path)
    except (ValueError, KeyError) as exc:
        print(f"cannot parse scenario: {exc}", file=sys.stderr)
        return 2
    scenario = apply_overrides(scenario, options)

    violations = validate_scenario(scenario)
    if violations:
        for violation in violations:
            print(str(violation), file=sys.stderr)
        return 2

    try:
        config = config_from_env(mode=options.backend)
        gateway = make_gateway(config)
    except (ValueError, CogitoError) as exc:
        print(f"backend configuration error: {exc}", file=sys.stderr)
        return 2

    result = run_loop(scenario, gateway)
    try:
        write_artifacts(result, Path(options.out_dir))
    except OSError as exc:
        print(f"cannot write artifacts: {exc}", file=sys.stderr)
        return 3

    needs = {n.id: n for n in scenario.needs}
    for cycle in result.trace.cycles:
        need_text = needs[cycle.need].text if cycle.need in needs else cycle.need
        chosen_text = next(
            (o.sentence.text for o in cycle.context_snapshot
             if o.sentence.id == cycle.chosen),
            cycle.chosen,
        )
        score = cycle.ranking[0][1] if cycle.ranking else float("nan")
        print(
            f"cycle {cycle.index}: need={need_text!r} chosen={chosen_text!r} "
            f"score={score:.4f} actions={len(cycle.actions)} "
            f"images={len(cycle.images)} revisions={len(cycle.revisions)}"
        )

    if result.trace.error is not None:
        print(f"run aborted: {result.trace.error}", file=sys.stderr)
        return 3
    return 0


def parse_args(argv: Sequence[str] | None = None) -> CliOptions:
    parser = argparse.ArgumentParser(
        prog="cogito", description="Run a deterministic thinking-loop scenario."
    )
    parser.add_argument("--scenario", required=True, help="scenario JSON file")
    parser.add_argument(
        "--backend", choices=[m.value for m in BackendMode], default=None,
        help="backend mode (default: COGITO_BACKEND_MODE or offline)",
    )
    parser.add_argument("--out-dir", default="out", help="artifact directory")
    parser.add_argument("--max-cycles", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--sigma", type=float, default=None)
    args = parser.parse_args(argv)
    return CliOptions(
        scenario_path=args.scenario,
        backend=BackendMode(args.backend) if args.backend else None,
        out_dir=args.out_dir,
        max_cycles=args.max_cycles,
        seed=args.seed,
        sigma=args.sigma,
    )


def main(argv: Sequence[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
