"""Record live model responses into a replayable fixture bundle.

The bundle layout mirrors what the client's fixture mode reads: a text-keyed
embeddings.json, digest-keyed completions.json and captions.json, PNG images
named by request digest, and model-version metadata in meta.json.
"""

from __future__ import annotations

import base64
import hashlib
import json
from pathlib import Path

from .adapters import AdapterRegistry, ModelUnavailable


def request_digest(endpoint: str, request: dict) -> str:
    """Must stay byte-compatible with the client's digest rule (see
    protocol/digest_cases.json for the shared contract corpus)."""
    canon = json.dumps(
        {"endpoint": endpoint, "request": request},
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def load_manifest(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    manifest.setdefault("embed_texts", [])
    manifest.setdefault("completions", [])
    manifest.setdefault("images", [])
    manifest.setdefault("captions", [])
    return manifest


def check_capabilities(registry: AdapterRegistry, manifest: dict) -> None:
    """Fail before any write when a needed capability cannot load."""
    needed = []
    if manifest["embed_texts"]:
        needed.append(("embed", registry.embed))
    if manifest["completions"]:
        needed.append(("generate", registry.generate))
    if manifest["images"]:
        needed.append(("image", registry.image))
    if manifest["captions"]:
        needed.append(("caption", registry.caption))
    missing = [name for name, adapter in needed if not adapter.available()]
    if missing:
        raise ModelUnavailable(f"capabilities unavailable: {', '.join(missing)}")


def record_fixtures(registry: AdapterRegistry, manifest: dict, out_dir: str | Path) -> dict:
    check_capabilities(registry, manifest)

    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    counts = {"embeddings": 0, "completions": 0, "images": 0, "captions": 0}

    if manifest["embed_texts"]:
        vectors, _dim = registry.embed.embed(manifest["embed_texts"])
        table = dict(zip(manifest["embed_texts"], vectors))
        (out / "embeddings.json").write_text(
            json.dumps(table, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
        counts["embeddings"] = len(table)

    completions = {}
    for request in manifest["completions"]:
        text = registry.generate.generate(
            request["prompt"], request["max_length"], request["temperature"]
        )
        completions[request_digest("/v1/generate", request)] = {
            "request": request,
            "text": text,
        }
    if completions:
        (out / "completions.json").write_text(
            json.dumps(completions, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        counts["completions"] = len(completions)

    for request in manifest["images"]:
        png = registry.image.image(
            request["prompt"], request["height"], request["width"], request["seed"]
        )
        digest = request_digest("/v1/image", request)
        (out / "images" / f"{digest}.png").write_bytes(png)
        counts["images"] += 1

    captions = {}
    for entry in manifest["captions"]:
        image_bytes = Path(entry["image_path"]).read_bytes()
        detections = registry.caption.detect_and_caption(
            image_bytes, entry["min_confidence"]
        )
        request = {
            "image_b64": base64.b64encode(image_bytes).decode("ascii"),
            "min_confidence": entry["min_confidence"],
        }
        captions[request_digest("/v1/caption", request)] = {
            "response_id": "resp-" + hashlib.sha256(image_bytes).hexdigest()[:16],
            "detections": [
                {"caption": d.caption, "confidence": d.confidence, "bbox": list(d.bbox)}
                for d in detections
            ],
        }
    if captions:
        (out / "captions.json").write_text(
            json.dumps(captions, indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        counts["captions"] = len(captions)

    (out / "meta.json").write_text(
        json.dumps({"models": registry.config.model_map(), "counts": counts}, indent=2)
        + "\n",
        encoding="utf-8",
    )
    return counts
