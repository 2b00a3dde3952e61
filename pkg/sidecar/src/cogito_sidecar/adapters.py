"""Model adapters behind the four wire capabilities.

Real adapters load their pretrained models lazily on first use; when weights
cannot be fetched (no network, no cache) they raise ModelUnavailable, which the
app maps to HTTP 503. Tests inject stub adapters instead.
"""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from PIL import Image

from .config import SidecarConfig


class ModelUnavailable(RuntimeError):
    """The capability's model could not be loaded."""


class UndecodableImage(ValueError):
    """The request payload is not a decodable image."""


class EmptyInput(ValueError):
    """The request carried no usable input."""


def decode_image(data: bytes) -> Image.Image:
    try:
        image = Image.open(io.BytesIO(data))
        image.load()
        return image.convert("RGB")
    except Exception as exc:
        raise UndecodableImage(f"cannot decode image payload: {exc}") from exc


@dataclass
class DetectionResult:
    caption: str
    confidence: float
    bbox: tuple[float, float, float, float]


class CaptionAdapter:
    """Detector + captioner pair: boxes above threshold are cropped and
    described in natural language."""

    def __init__(self, config: SidecarConfig):
        self.config = config
        self._lock = threading.Lock()
        self._detector = None
        self._captioner = None

    def _load(self):
        with self._lock:
            if self._detector is not None:
                return
            try:
                import torch
                import torchvision
                from transformers import BlipForConditionalGeneration, BlipProcessor

                weights = torchvision.models.detection.FasterRCNN_ResNet50_FPN_Weights.DEFAULT
                detector = torchvision.models.detection.fasterrcnn_resnet50_fpn(weights=weights)
                detector.eval()
                processor = BlipProcessor.from_pretrained(self.config.captioner_id)
                captioner = BlipForConditionalGeneration.from_pretrained(self.config.captioner_id)
                captioner.eval()
            except Exception as exc:
                raise ModelUnavailable(f"caption models unavailable: {exc}") from exc
            self._torch = torch
            self._detector = detector
            self._processor = processor
            self._captioner = captioner

    def detect_and_caption(self, image_bytes: bytes, min_confidence: float) -> list[DetectionResult]:
        image = decode_image(image_bytes)
        self._load()
        torch = self._torch
        tensor = torch.from_numpy(np.asarray(image, dtype=np.float32) / 255.0).permute(2, 0, 1)
        with torch.no_grad():
            output = self._detector([tensor])[0]
        results = []
        for box, score in zip(output["boxes"].tolist(), output["scores"].tolist()):
            if score < min_confidence:
                continue
            x0, y0, x1, y1 = box
            crop = image.crop((x0, y0, x1, y1))
            inputs = self._processor(images=crop, return_tensors="pt")
            with torch.no_grad():
                ids = self._captioner.generate(**inputs, max_new_tokens=30)
            caption = self._processor.decode(ids[0], skip_special_tokens=True).strip()
            if not caption:
                continue
            results.append(
                DetectionResult(
                    caption=caption,
                    confidence=float(score),
                    bbox=(float(x0), float(y0), float(x1 - x0), float(y1 - y0)),
                )
            )
        return results

    def available(self) -> bool:
        try:
            self._load()
            return True
        except ModelUnavailable:
            return False


class EmbedAdapter:
    """Sentence embedder; inference is serialized for determinism."""

    def __init__(self, config: SidecarConfig):
        self.config = config
        self._lock = threading.Lock()
        self._model = None

    def _load(self):
        with self._lock:
            if self._model is not None:
                return
            try:
                from sentence_transformers import SentenceTransformer

                self._model = SentenceTransformer(
                    self.config.embedder_id, device=self.config.device
                )
            except Exception as exc:
                raise ModelUnavailable(f"embedder unavailable: {exc}") from exc

    def embed(self, texts: Sequence[str]) -> tuple[list[list[float]], int]:
        if not texts or any(not t for t in texts):
            raise EmptyInput("texts must be a non-empty list of non-empty strings")
        self._load()
        with self._lock:
            vectors = self._model.encode(
                list(texts), convert_to_numpy=True, show_progress_bar=False
            )
        return [[float(x) for x in row] for row in vectors], int(vectors.shape[1])

    def available(self) -> bool:
        try:
            self._load()
            return True
        except ModelUnavailable:
            return False


class GenerateAdapter:
    """Instruction-following text generation. Raw model text is returned
    untouched; the client owns any normalization."""

    def __init__(self, config: SidecarConfig):
        self.config = config
        self._lock = threading.Lock()
        self._pipe = None

    def _load(self):
        with self._lock:
            if self._pipe is not None:
                return
            try:
                from transformers import pipeline

                self._pipe = pipeline(
                    "text-generation", model=self.config.generator_id,
                    device=-1 if self.config.device == "cpu" else 0,
                )
            except Exception as exc:
                raise ModelUnavailable(f"generator unavailable: {exc}") from exc

    def generate(self, prompt: str, max_length: int, temperature: float) -> str:
        if not prompt:
            raise EmptyInput("prompt must be non-empty")
        self._load()
        kwargs = {"max_new_tokens": max_length, "return_full_text": False}
        if temperature > 0:
            kwargs.update({"do_sample": True, "temperature": temperature})
        else:
            kwargs["do_sample"] = False
        out = self._pipe(prompt, **kwargs)
        return out[0]["generated_text"]

    def available(self) -> bool:
        try:
            self._load()
            return True
        except ModelUnavailable:
            return False


class ImageAdapter:
    """Text-to-image diffusion; returns PNG bytes."""

    def __init__(self, config: SidecarConfig):
        self.config = config
        self._lock = threading.Lock()
        self._pipe = None

    def _load(self):
        with self._lock:
            if self._pipe is not None:
                return
            try:
                import torch
                from diffusers import StableDiffusionPipeline

                self._pipe = StableDiffusionPipeline.from_pretrained(self.config.image_id)
                self._pipe = self._pipe.to(self.config.device)
                self._torch = torch
            except Exception as exc:
                raise ModelUnavailable(f"image model unavailable: {exc}") from exc

    def image(self, prompt: str, height: int, width: int, seed: int) -> bytes:
        if not prompt:
            raise EmptyInput("prompt must be non-empty")
        self._load()
        generator = self._torch.Generator(device=self.config.device).manual_seed(seed)
        result = self._pipe(
            prompt, height=height, width=width, generator=generator,
            num_inference_steps=25,
        )
        buf = io.BytesIO()
        result.images[0].save(buf, format="PNG")
        return buf.getvalue()

    def available(self) -> bool:
        try:
            self._load()
            return True
        except ModelUnavailable:
            return False


@dataclass
class AdapterRegistry:
    caption: CaptionAdapter
    embed: EmbedAdapter
    generate: GenerateAdapter
    image: ImageAdapter
    config: SidecarConfig

    @classmethod
    def from_config(cls, config: Optional[SidecarConfig] = None) -> "AdapterRegistry":
        config = config or SidecarConfig()
        return cls(
            caption=CaptionAdapter(config),
            embed=EmbedAdapter(config),
            generate=GenerateAdapter(config),
            image=ImageAdapter(config),
            config=config,
        )
