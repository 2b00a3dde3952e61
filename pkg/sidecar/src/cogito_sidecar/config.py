"""Sidecar configuration: one model identifier per capability."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SidecarConfig:
    host: str = "127.0.0.1"
    port: int = 8321
    device: str = "cpu"
    min_confidence: float = 0.8
    # Model identifiers are plain configuration strings, recorded into fixture
    # metadata so replays can warn on mismatch.
    detector_id: str = "torchvision/fasterrcnn_resnet50_fpn"
    captioner_id: str = "Salesforce/blip-image-captioning-base"
    embedder_id: str = "sentence-transformers/all-MiniLM-L6-v2"
    generator_id: str = "tiiuae/falcon-7b-instruct"
    image_id: str = "runwayml/stable-diffusion-v1-5"

    def model_map(self) -> dict[str, str]:
        return {
            "caption": f"{self.detector_id}+{self.captioner_id}",
            "embed": self.embedder_id,
            "generate": self.generator_id,
            "image": self.image_id,
        }
