import pytest

from cogito.backends import Detection, PerceptionResponse
from cogito.context import (
    ContextSnapshot,
    extend_snapshot,
    ingest_observations,
    load_fixture,
)
from cogito.errors import MalformedResponse, ParseError
from cogito.model import IdAllocator, Source

STREET_RESPONSE = PerceptionResponse(
    response_id="r1",
    detections=(
        Detection(caption="a red car is parked in a parking", confidence=0.92, bbox=(0, 0, 50, 30)),
        Detection(caption="a bus is driving down the street", confidence=0.88, bbox=(60, 0, 80, 40)),
    ),
)

DESK7 = [
    "a laptop computer sitting on top of a wooden desk",
    "a computer mouse and a mouse pad",
    "a box with a pair of gloves in it",
    "a laptop with a red arrow pointing up",
    "a pile of papers on a table",
    "a black leather seat with a metal handle",
    "a laptop computer with a bunch of keys on it",
]


class TestIngest:
    def test_keeps_detections_above_threshold(self):
        snap = ingest_observations(ContextSnapshot(), STREET_RESPONSE, 0.8)
        assert [o.sentence.text for o in snap.observations] == [
            "a red car is parked in a parking",
            "a bus is driving down the street",
        ]
        assert all(o.sentence.source is Source.PERCEPTION for o in snap.observations)

    def test_drops_below_threshold(self):
        weak = PerceptionResponse(
            response_id="r2",
            detections=(Detection(caption="something vague", confidence=0.5),),
        )
        snap = ingest_observations(ContextSnapshot(), weak, 0.8)
        assert snap.observations == ()

    def test_capacity_evicts_oldest(self):
        snap = ContextSnapshot(capacity=2)
        snap = ingest_observations(snap, STREET_RESPONSE, 0.8)
        extra = PerceptionResponse(
            response_id="r3",
            detections=(Detection(caption="a man in a white shirt", confidence=0.95),),
        )
        snap = ingest_observations(snap, extra, 0.8)
        assert len(snap.observations) == 2
        assert [o.sentence.text for o in snap.observations] == [
            "a bus is driving down the street",
            "a man in a white shirt",
        ]

    def test_idempotent_per_response_id(self):
        ids = IdAllocator()
        snap = ingest_observations(ContextSnapshot(), STREET_RESPONSE, 0.8, ids=ids)
        again = ingest_observations(snap, STREET_RESPONSE, 0.8, ids=ids)
        assert again is snap

    def test_missing_caption_is_malformed(self):
        bad = PerceptionResponse(
            response_id="r4", detections=(Detection(caption="  ", confidence=0.9),)
        )
        with pytest.raises(MalformedResponse):
            ingest_observations(ContextSnapshot(), bad, 0.8)

    def test_all_observations_meet_threshold_in_force(self):
        # random confidences; whatever survives must have cleared the bar
        import random

        rng = random.Random(5)
        snap = ContextSnapshot()
        for i in range(20):
            threshold = rng.choice([0.5, 0.8, 0.95])
            response = PerceptionResponse(
                response_id=f"resp{i}",
                detections=tuple(
                    Detection(caption=f"object {i}-{j}", confidence=round(rng.random(), 3))
                    for j in range(3)
                ),
            )
            before = len(snap.observations)
            snap = ingest_observations(snap, response, threshold)
            for obs in snap.observations[before:]:
                assert obs.confidence >= threshold


class TestLoadFixture:
    def test_seven_sentence_list(self, tmp_path):
        path = tmp_path / "desk.txt"
        path.write_text("\n".join(DESK7) + "\n", encoding="utf-8")
        observations = load_fixture(path)
        assert len(observations) == 7
        assert [o.sentence.text for o in observations] == DESK7
        assert all(o.confidence == 1.0 for o in observations)
        assert all(o.sentence.source is Source.FIXTURE for o in observations)

    def test_empty_file_is_empty_list(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("", encoding="utf-8")
        assert load_fixture(path) == []

    def test_blank_line_is_parse_error_with_line_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("a cup\n\na table\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_fixture(path)
        assert err.value.line == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_fixture(tmp_path / "nope.txt")


class TestSnapshot:
    def test_capacity_floor(self):
        with pytest.raises(ValueError):
            ContextSnapshot(capacity=0)

    def test_extend_applies_eviction(self, tmp_path):
        path = tmp_path / "desk.txt"
        path.write_text("\n".join(DESK7) + "\n", encoding="utf-8")
        observations = load_fixture(path)
        snap = extend_snapshot(ContextSnapshot(capacity=3), observations)
        assert [o.sentence.text for o in snap.observations] == DESK7[-3:]
