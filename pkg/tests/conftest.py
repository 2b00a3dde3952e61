from __future__ import annotations

from pathlib import Path

import pytest

from cogito import kernels
from cogito.model import Sentence, Source

ROOT = Path(__file__).resolve().parent.parent
BUNDLE_DIR = ROOT / "fixtures" / "bundles" / "keys"
SCENARIO_DIR = ROOT / "scenarios"
DATA_DIR = Path(__file__).resolve().parent / "data"
PROTOCOL_DIR = ROOT / "protocol"

KEYS_NEED_TEXT = "need the keys to open the door and go out"
HYDRATION_NEED_TEXT = "I need to drink water to stay hydrated"
KEYS_TOP_SENTENCE = "a laptop computer with a bunch of keys on it"

# Context captions used by the committed scenarios.
DESK_CONTEXTS = [
    "a laptop computer with a bunch of keys on it",
    "a bottle of water sitting on a table",
    "a desk with a chair and a laptop on it",
    "a pile of papers on a table",
]

# The ten-sentence caption corpus behind the reference similarity table.
TABLE_SENTENCES = [
    "a bottle of water sitting on a table",
    "a desk with a chair and a laptop on it",
    "a table with a laptop and a bottle of water",
    "a white table with a red line on it",
    "a computer mouse and a mouse pad",
    "a box with a pair of gloves in it",
    "a laptop with a red arrow pointing up",
    "a pile of papers on a table",
    "a black leather seat with a metal handle",
    "a laptop computer with a bunch of keys on it",
]

TABLE_SCORES = [
    0.0395,
    0.1353,
    0.1645,
    0.0807,
    0.1755,
    0.1869,
    0.1376,
    0.0662,
    0.1675,
    0.4531,
]


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Pay JIT compilation once, outside any timed assertion.
    kernels.warmup()


def make_sentence(text: str, sid: str = "1", source: Source = Source.FIXTURE,
                  timestamp: int = 0) -> Sentence:
    return Sentence(id=sid, text=text, source=source, timestamp=timestamp)


@pytest.fixture
def fixture_gateway():
    from cogito.backends import FixtureGateway

    return FixtureGateway(BUNDLE_DIR)
