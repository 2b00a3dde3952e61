"""Fixture recording: bundle layout, digest keying, and the fail-before-write
rule for missing capabilities."""

import json

import pytest

from cogito_sidecar.adapters import ModelUnavailable
from cogito_sidecar.record import load_manifest, record_fixtures, request_digest

from conftest import STREET_IMAGE, stub_registry


def manifest(**overrides):
    base = {
        "embed_texts": [
            "need the keys to open the door and go out",
            "a laptop computer with a bunch of keys on it",
        ],
        "completions": [
            {"prompt": "Need: x\nAction:", "max_length": 128, "temperature": 0.0}
        ],
        "images": [{"prompt": "a red car", "height": 32, "width": 32, "seed": 1}],
        "captions": [{"image_path": str(STREET_IMAGE), "min_confidence": 0.8}],
    }
    base.update(overrides)
    return base


class TestRecordFixtures:
    def test_bundle_layout(self, tmp_path):
        counts = record_fixtures(stub_registry(), manifest(), tmp_path)
        assert counts == {
            "embeddings": 2, "completions": 1, "images": 1, "captions": 1,
        }
        table = json.loads((tmp_path / "embeddings.json").read_text())
        assert len(table) == 2
        completions = json.loads((tmp_path / "completions.json").read_text())
        (digest, entry), = completions.items()
        assert digest == request_digest("/v1/generate", entry["request"])
        images = list((tmp_path / "images").glob("*.png"))
        assert len(images) == 1
        expected = request_digest(
            "/v1/image", {"prompt": "a red car", "height": 32, "width": 32, "seed": 1}
        )
        assert images[0].name == f"{expected}.png"
        meta = json.loads((tmp_path / "meta.json").read_text())
        assert set(meta["models"]) == {"caption", "embed", "generate", "image"}

    def test_rerecording_is_identical(self, tmp_path):
        record_fixtures(stub_registry(), manifest(), tmp_path / "a")
        record_fixtures(stub_registry(), manifest(), tmp_path / "b")
        for name in ("embeddings.json", "completions.json", "captions.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_missing_capability_fails_before_any_write(self, tmp_path):
        registry = stub_registry()

        class Unavailable:
            def available(self):
                return False

        registry.image = Unavailable()
        out = tmp_path / "bundle"
        with pytest.raises(ModelUnavailable):
            record_fixtures(registry, manifest(), out)
        assert not out.exists()

    def test_manifest_defaults(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"embed_texts": ["x"]}))
        loaded = load_manifest(path)
        assert loaded["completions"] == []
        assert loaded["images"] == []
