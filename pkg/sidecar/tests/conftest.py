from __future__ import annotations

import base64
import io
import json
import math
from pathlib import Path

import pytest
from fastapi.testclient import TestClient
from PIL import Image

from cogito_sidecar.adapters import (
    AdapterRegistry,
    DetectionResult,
    EmptyInput,
    decode_image,
)
from cogito_sidecar.app import create_app
from cogito_sidecar.config import SidecarConfig

ROOT = Path(__file__).resolve().parent.parent
REPO = ROOT.parent
PROTOCOL_DIR = REPO / "protocol"
DATA_DIR = Path(__file__).resolve().parent / "data"
STREET_IMAGE = DATA_DIR / "street.png"


def load_schema(name: str) -> dict:
    return json.loads((PROTOCOL_DIR / f"{name}.schema.json").read_text())


# ---------------------------------------------------------------------------
# deterministic stub adapters: exercise the HTTP/schema layer without weights
# ---------------------------------------------------------------------------

class StubCaption:
    def detect_and_caption(self, image_bytes: bytes, min_confidence: float):
        decode_image(image_bytes)  # enforces UndecodableImage on garbage
        detections = [
            DetectionResult("a red car is parked in a parking", 0.92, (40, 95, 130, 85)),
            DetectionResult("a building with windows", 0.85, (220, 40, 95, 110)),
            DetectionResult("something faint", 0.30, (0, 0, 10, 10)),
        ]
        return [d for d in detections if d.confidence >= min_confidence]

    def available(self) -> bool:
        return True


class StubEmbed:
    """Deterministic toy embedder: character histogram, L2-normalized."""

    DIM = 8

    def embed(self, texts):
        if not texts or any(not t for t in texts):
            raise EmptyInput("texts must be a non-empty list of non-empty strings")
        vectors = []
        for text in texts:
            v = [0.0] * self.DIM
            for i, ch in enumerate(text.encode("utf-8")):
                v[(ch + i) % self.DIM] += 1.0
            norm = math.sqrt(sum(x * x for x in v)) or 1.0
            vectors.append([x / norm for x in v])
        return vectors, self.DIM

    def available(self) -> bool:
        return True


class StubGenerate:
    def generate(self, prompt, max_length, temperature):
        if not prompt:
            raise EmptyInput("prompt must be non-empty")
        return "observe the environment"

    def available(self) -> bool:
        return True


class StubImage:
    def image(self, prompt, height, width, seed):
        if not prompt:
            raise EmptyInput("prompt must be non-empty")
        shade = (seed * 37 + len(prompt)) % 256
        img = Image.new("RGB", (width, height), (shade, 255 - shade, 128))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        return buf.getvalue()

    def available(self) -> bool:
        return True


def stub_registry() -> AdapterRegistry:
    registry = AdapterRegistry.from_config(SidecarConfig())
    registry.caption = StubCaption()
    registry.embed = StubEmbed()
    registry.generate = StubGenerate()
    registry.image = StubImage()
    return registry


@pytest.fixture
def registry() -> AdapterRegistry:
    return stub_registry()


@pytest.fixture
def client(registry) -> TestClient:
    return TestClient(create_app(registry))


def street_b64() -> str:
    return base64.b64encode(STREET_IMAGE.read_bytes()).decode("ascii")


def live_registry() -> AdapterRegistry:
    return AdapterRegistry.from_config(SidecarConfig())


def embedder_available() -> bool:
    try:
        return live_registry().embed.available()
    except Exception:
        return False


def captioner_available() -> bool:
    try:
        return live_registry().caption.available()
    except Exception:
        return False
