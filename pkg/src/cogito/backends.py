"""Uniform access to the four model capabilities: caption, embed, generate, image.

Three modes share one interface:

- offline: fully deterministic built-in generators (hash embeddings, a canned
  rule table, procedural value-noise images). No caption capability.
- fixture: replays recorded responses keyed by request digest from a bundle
  directory; used by tests and replay.
- remote: JSON over HTTP against a model server implementing the /v1 protocol.

Env vars: COGITO_BACKEND_MODE, COGITO_BACKEND_URL, COGITO_TIMEOUT_MS,
COGITO_FIXTURE_DIR.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np
import requests
from PIL import Image

from . import kernels
from .errors import (
    BackendError,
    BackendUnavailable,
    EmptyText,
    FixtureMiss,
    MalformedResponse,
    Timeout,
    ZeroNorm,
)
from .matching import EmbeddingVector
from .model import BackendMode

_U64 = (1 << 64) - 1

# FNV-1a 64-bit constants; make text hashing reproducible across platforms and
# languages (no dependence on any platform hash).
FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211

# 64-bit LCG constants.
LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407

FALLBACK_COMPLETION = "observe the environment"

DEFAULT_EMBED_DIM = 64
NOISE_CELL = 8  # value-noise lattice spacing, pixels


def fnv1a_u64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _U64
    return h


_JUMP_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _jump_tables(n: int) -> tuple[np.ndarray, np.ndarray]:
    # s_k = A_k * s0 + B_k (mod 2^64) closes the sequential LCG recurrence so a
    # whole stream vectorizes; tables depend only on the stream length.
    cached = _JUMP_CACHE.get(n)
    if cached is not None:
        return cached
    a_vals = []
    b_vals = []
    a, b = 1, 0
    for _ in range(n):
        a = (a * LCG_MULT) & _U64
        b = (b * LCG_MULT + LCG_INC) & _U64
        a_vals.append(a)
        b_vals.append(b)
    tables = (np.array(a_vals, dtype=np.uint64), np.array(b_vals, dtype=np.uint64))
    _JUMP_CACHE[n] = tables
    return tables


def lcg_stream(seed: int, n: int) -> np.ndarray:
    """n successive LCG outputs mapped to float64 in [0,1)."""
    a, b = _jump_tables(n)
    with np.errstate(over="ignore"):
        states = a * np.uint64(seed & _U64) + b
    # Top 53 bits give an exactly representable double in [0,1).
    return (states >> np.uint64(11)).astype(np.float64) * 2.0**-53


def hash_embed(text: str, dim: int) -> EmbeddingVector:
    """Deterministic unit-norm embedding: FNV-1a seed, LCG fill, normalize."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if not text:
        raise EmptyText("cannot embed empty text")
    seed = fnv1a_u64(text.encode("utf-8"))
    v = 2.0 * lcg_stream(seed, dim) - 1.0
    # fsum keeps the norm independent of summation strategy.
    norm = math.sqrt(math.fsum(x * x for x in v.tolist()))
    if norm == 0.0:
        raise ZeroNorm("hash embedding collapsed to zero")
    return EmbeddingVector(v / norm)


@dataclass(frozen=True)
class TemplateRule:
    """Substring-conjunction rule: fires when every trigger occurs in the prompt."""

    triggers: tuple[str, ...]
    completion: str


# Ordered rule table for the offline generator. Specific rules first: revision
# prompts carry a Hypothesis line, so they must not fall through to the plain
# need rules.
DEFAULT_RULES: tuple[TemplateRule, ...] = (
    TemplateRule(
        triggers=(
            "What if the key doesn't open the door?",
            "the person is nervous",
        ),
        completion=(
            "the person breaks down the door - "
            "the person call the firefighters for they open the door"
        ),
    ),
    TemplateRule(
        triggers=("What if the key doesn't open the door?",),
        completion="the person is nervous",
    ),
    TemplateRule(
        triggers=(
            "need the keys to open the door and go out",
            "a laptop computer with a bunch of keys on it",
        ),
        completion=(
            "Pick up the keys and open the door - "
            "Take the keys and unlock the door - "
            "Use the keys to open the door and go out"
        ),
    ),
    TemplateRule(
        triggers=("drink water",),
        completion="Take a sip of water from the bottle on the table",
    ),
)


def template_generate(prompt: str, rules: Sequence[TemplateRule] = DEFAULT_RULES) -> str:
    """First rule whose triggers all occur in the prompt wins; fixed fallback."""
    if not rules:
        raise ValueError("rule table must be non-empty")
    for rule in rules:
        if all(trigger in prompt for trigger in rule.triggers):
            return rule.completion
    return FALLBACK_COMPLETION


def procedural_image(prompt: str, size: tuple[int, int], seed: int) -> np.ndarray:
    """Smooth value-noise raster; a pure function of (prompt, size, seed)."""
    h, w = size
    if h < 8 or w < 8:
        raise ValueError("image sides must be >= 8")
    base = fnv1a_u64(prompt.encode("utf-8")) ^ (seed & _U64)
    gh = h // NOISE_CELL + 2
    gw = w // NOISE_CELL + 2
    lattice = lcg_stream(base, 3 * gh * gw).reshape(3, gh, gw)
    return kernels.value_noise_rgb(lattice, NOISE_CELL, h, w)


# ---------------------------------------------------------------------------
# wire types and config
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Detection:
    caption: str
    confidence: float
    bbox: Optional[tuple[float, float, float, float]] = None

    def to_dict(self) -> dict:
        return {
            "caption": self.caption,
            "confidence": self.confidence,
            "bbox": list(self.bbox) if self.bbox is not None else None,
        }


@dataclass(frozen=True)
class PerceptionResponse:
    response_id: str
    detections: tuple[Detection, ...]

    def to_dict(self) -> dict:
        return {
            "response_id": self.response_id,
            "detections": [d.to_dict() for d in self.detections],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PerceptionResponse":
        try:
            dets = []
            for det in d["detections"]:
                bbox = det.get("bbox")
                confidence = float(det["confidence"])
                if not 0.0 <= confidence <= 1.0:
                    raise MalformedResponse(
                        f"detection confidence {confidence} outside [0,1]"
                    )
                dets.append(
                    Detection(
                        caption=det.get("caption", ""),
                        confidence=confidence,
                        bbox=tuple(bbox) if bbox is not None else None,
                    )
                )
            return cls(response_id=str(d["response_id"]), detections=tuple(dets))
        except (KeyError, TypeError) as exc:
            raise MalformedResponse(f"bad perception response: {exc}") from exc


@dataclass(frozen=True)
class BackendConfig:
    mode: BackendMode = BackendMode.OFFLINE
    base_url: Optional[str] = None
    timeout_ms: int = 10_000
    retries: int = 0
    embed_dim: int = DEFAULT_EMBED_DIM
    fixture_dir: Optional[str] = None

    def __post_init__(self):
        if (self.mode is BackendMode.REMOTE) != (self.base_url is not None):
            raise ValueError("base_url must be present iff mode=remote")
        if self.mode is BackendMode.FIXTURE and not self.fixture_dir:
            raise ValueError("fixture mode requires fixture_dir")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.embed_dim < 2:
            raise ValueError("embed_dim must be >= 2")


def config_from_env(mode: BackendMode | None = None, **overrides) -> BackendConfig:
    mode = mode or BackendMode(os.environ.get("COGITO_BACKEND_MODE", "offline"))
    kwargs: dict = {"mode": mode}
    if mode is BackendMode.REMOTE:
        kwargs["base_url"] = os.environ.get("COGITO_BACKEND_URL")
    if mode is BackendMode.FIXTURE:
        kwargs["fixture_dir"] = os.environ.get("COGITO_FIXTURE_DIR")
    if "COGITO_TIMEOUT_MS" in os.environ:
        kwargs["timeout_ms"] = int(os.environ["COGITO_TIMEOUT_MS"])
    kwargs.update(overrides)
    return BackendConfig(**kwargs)


def request_digest(endpoint: str, request: Mapping) -> str:
    """Canonical digest keying recorded fixture responses."""
    canon = json.dumps(
        {"endpoint": endpoint, "request": request},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# gateways
# ---------------------------------------------------------------------------

class OfflineGateway:
    """Deterministic in-process backends; no captioner exists offline."""

    mode = BackendMode.OFFLINE

    def __init__(self, embed_dim: int = DEFAULT_EMBED_DIM,
                 rules: Sequence[TemplateRule] = DEFAULT_RULES):
        self.embed_dim = embed_dim
        self.rules = tuple(rules)

    def caption(self, image_b64: str, min_confidence: float) -> PerceptionResponse:
        raise BackendUnavailable("offline mode has no caption capability")

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return [hash_embed(t, self.embed_dim) for t in texts]

    def generate(self, prompt: str, max_length: int, temperature: float) -> str:
        return template_generate(prompt, self.rules)

    def image(self, prompt: str, height: int, width: int, seed: int) -> np.ndarray:
        return procedural_image(prompt, (height, width), seed)


class FixtureGateway:
    """Replays a recorded bundle: embeddings.json (text -> vector),
    completions.json and captions.json (request digest -> response), and
    images/<digest>.png."""

    mode = BackendMode.FIXTURE

    def __init__(self, fixture_dir: str | os.PathLike):
        self.root = Path(fixture_dir)
        if not self.root.is_dir():
            raise BackendUnavailable(f"fixture bundle not found: {self.root}")
        self._embeddings = self._load_json("embeddings.json", required=True)
        self._completions = self._load_json("completions.json", required=False)
        self._captions = self._load_json("captions.json", required=False)
        dims = {len(v) for v in self._embeddings.values()}
        if len(dims) > 1:
            raise MalformedResponse(f"inconsistent fixture embedding dims: {dims}")

    def _load_json(self, name: str, required: bool) -> dict:
        path = self.root / name
        if not path.exists():
            if required:
                raise BackendUnavailable(f"fixture bundle missing {name}")
            return {}
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def caption(self, image_b64: str, min_confidence: float) -> PerceptionResponse:
        digest = request_digest(
            "/v1/caption", {"image_b64": image_b64, "min_confidence": min_confidence}
        )
        try:
            return PerceptionResponse.from_dict(self._captions[digest])
        except KeyError:
            raise FixtureMiss(f"no recorded caption for digest {digest}") from None

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        out = []
        for t in texts:
            try:
                out.append(EmbeddingVector(np.asarray(self._embeddings[t], dtype=np.float64)))
            except KeyError:
                raise FixtureMiss(f"no recorded embedding for text {t!r}") from None
        return out

    def generate(self, prompt: str, max_length: int, temperature: float) -> str:
        digest = request_digest(
            "/v1/generate",
            {"prompt": prompt, "max_length": max_length, "temperature": temperature},
        )
        try:
            return self._completions[digest]["text"]
        except KeyError:
            raise FixtureMiss(f"no recorded completion for digest {digest}") from None

    def image(self, prompt: str, height: int, width: int, seed: int) -> np.ndarray:
        digest = request_digest(
            "/v1/image",
            {"prompt": prompt, "height": height, "width": width, "seed": seed},
        )
        path = self.root / "images" / f"{digest}.png"
        if not path.exists():
            raise FixtureMiss(f"no recorded image for digest {digest}")
        pixels = decode_png(path.read_bytes())
        if pixels.shape != (height, width, 3):
            raise MalformedResponse(
                f"recorded image has shape {pixels.shape}, wanted {(height, width, 3)}"
            )
        return pixels


def remote_call(
    config: BackendConfig,
    endpoint: str,
    request: Mapping,
    session: requests.Session | None = None,
) -> dict:
    """POST a JSON request; retry timeouts with exponential backoff (100 ms base,
    factor 2). Non-timeout failures are never retried."""
    if config.mode is not BackendMode.REMOTE:
        raise ValueError("remote_call requires mode=remote")
    http = session or requests
    url = config.base_url.rstrip("/") + endpoint
    timeout_s = config.timeout_ms / 1000.0
    attempt = 0
    while True:
        try:
            resp = http.post(url, json=dict(request), timeout=timeout_s)
        except requests.exceptions.Timeout as exc:
            if attempt >= config.retries:
                raise Timeout(
                    f"{endpoint} timed out after {attempt + 1} attempt(s)"
                ) from exc
            time.sleep(0.1 * (2**attempt))
            attempt += 1
            continue
        except requests.exceptions.ConnectionError as exc:
            raise BackendUnavailable(f"cannot reach {url}: {exc}") from exc
        if not 200 <= resp.status_code < 300:
            raise BackendError(resp.status_code, resp.text[:200])
        try:
            return resp.json()
        except ValueError as exc:
            raise MalformedResponse(f"{endpoint} returned non-JSON body") from exc


class RemoteGateway:
    mode = BackendMode.REMOTE

    def __init__(self, config: BackendConfig, session: requests.Session | None = None):
        if config.mode is not BackendMode.REMOTE:
            raise ValueError("RemoteGateway requires mode=remote")
        self.config = config
        self.session = session

    def _call(self, endpoint: str, request: Mapping) -> dict:
        return remote_call(self.config, endpoint, request, session=self.session)

    def caption(self, image_b64: str, min_confidence: float) -> PerceptionResponse:
        body = self._call(
            "/v1/caption", {"image_b64": image_b64, "min_confidence": min_confidence}
        )
        return PerceptionResponse.from_dict(body)

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        body = self._call("/v1/embed", {"texts": list(texts)})
        try:
            vectors = body["vectors"]
            dim = body["dim"]
        except (KeyError, TypeError) as exc:
            raise MalformedResponse(f"bad embed response: {exc}") from exc
        out = []
        for vec in vectors:
            if len(vec) != dim:
                raise MalformedResponse("embed vector length disagrees with dim")
            out.append(EmbeddingVector(np.asarray(vec, dtype=np.float64)))
        return out

    def generate(self, prompt: str, max_length: int, temperature: float) -> str:
        body = self._call(
            "/v1/generate",
            {"prompt": prompt, "max_length": max_length, "temperature": temperature},
        )
        try:
            return body["text"]
        except (KeyError, TypeError) as exc:
            raise MalformedResponse(f"bad generate response: {exc}") from exc

    def image(self, prompt: str, height: int, width: int, seed: int) -> np.ndarray:
        body = self._call(
            "/v1/image",
            {"prompt": prompt, "height": height, "width": width, "seed": seed},
        )
        try:
            raw = base64.b64decode(body["png_b64"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse(f"bad image response: {exc}") from exc
        pixels = decode_png(raw)
        if pixels.shape != (height, width, 3):
            raise MalformedResponse(
                f"remote image has shape {pixels.shape}, wanted {(height, width, 3)}"
            )
        return pixels


def decode_png(data: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise MalformedResponse(f"undecodable PNG payload: {exc}") from exc


def encode_png(pixels: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def make_gateway(config: BackendConfig):
    if config.mode is BackendMode.OFFLINE:
        return OfflineGateway(embed_dim=config.embed_dim)
    if config.mode is BackendMode.FIXTURE:
        return FixtureGateway(config.fixture_dir)
    return RemoteGateway(config)
