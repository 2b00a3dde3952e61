#!/usr/bin/env python3
"""Regenerate the committed fixture bundle under fixtures/bundles/keys/.

The embedding table is constructed, not recorded: each context vector is a
unit vector whose cosine against the need vector equals the reference
similarity score exactly (v = s*u + sqrt(1-s^2)*w with w orthonormal to u).
The second need solves the min-norm system V h = t padded back to unit norm,
so its designed scores are exact as well. Completions and images are recorded
from the offline generators by replaying the committed scenarios.

Run from the repository root:  python3 tools/gen_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from cogito.backends import (  # noqa: E402
    OfflineGateway,
    encode_png,
    hash_embed,
    request_digest,
)
from cogito.cli import load_scenario  # noqa: E402
from cogito.matching import EmbeddingVector  # noqa: E402
from cogito.orchestrator import run_loop  # noqa: E402

DIM = 384

KEYS_NEED = "need the keys to open the door and go out"
HYDRATION_NEED = "I need to drink water to stay hydrated"

# Reference similarity table for the keys need.
KEYS_SCORES = {
    "a bottle of water sitting on a table": 0.0395,
    "a desk with a chair and a laptop on it": 0.1353,
    "a table with a laptop and a bottle of water": 0.1645,
    "a white table with a red line on it": 0.0807,
    "a computer mouse and a mouse pad": 0.1755,
    "a box with a pair of gloves in it": 0.1869,
    "a laptop with a red arrow pointing up": 0.1376,
    "a pile of papers on a table": 0.0662,
    "a black leather seat with a metal handle": 0.1675,
    "a laptop computer with a bunch of keys on it": 0.4531,
}

# Designed scores for the hydration need (synthetic; water items on top).
HYDRATION_SCORES = {
    "a bottle of water sitting on a table": 0.52,
    "a desk with a chair and a laptop on it": 0.05,
    "a table with a laptop and a bottle of water": 0.34,
    "a white table with a red line on it": 0.06,
    "a computer mouse and a mouse pad": 0.03,
    "a box with a pair of gloves in it": 0.04,
    "a laptop with a red arrow pointing up": 0.02,
    "a pile of papers on a table": 0.045,
    "a black leather seat with a metal handle": 0.07,
    "a laptop computer with a bunch of keys on it": 0.08,
}


def _seed_vector(text: str) -> np.ndarray:
    return hash_embed(text, DIM).values


def build_embeddings() -> dict[str, list[float]]:
    u = _seed_vector(KEYS_NEED)
    u = u / np.linalg.norm(u)

    contexts = list(KEYS_SCORES)
    vectors = []
    for text in contexts:
        s = KEYS_SCORES[text]
        b = _seed_vector(text)
        w = b - (b @ u) * u
        w = w / np.linalg.norm(w)
        vectors.append(s * u + np.sqrt(1.0 - s * s) * w)
    v_matrix = np.stack(vectors)

    # Min-norm h with V h = t, padded orthogonally back to unit length so the
    # cosines stay exactly t.
    t = np.array([HYDRATION_SCORES[text] for text in contexts])
    gram = v_matrix @ v_matrix.T
    coeffs = np.linalg.solve(gram, t)
    h0 = v_matrix.T @ coeffs
    rho_sq = float(t @ coeffs)
    if rho_sq >= 1.0:
        raise SystemExit(f"hydration targets infeasible (rho^2={rho_sq:.4f})")
    r = _seed_vector(HYDRATION_NEED)
    q = r - v_matrix.T @ np.linalg.solve(gram, v_matrix @ r)
    q = q / np.linalg.norm(q)
    h = h0 + np.sqrt(1.0 - rho_sq) * q

    table = {KEYS_NEED: u, HYDRATION_NEED: h}
    for text, vec in zip(contexts, vectors):
        table[text] = vec

    # sanity: reproduce the designed scores to float precision
    for text, vec in zip(contexts, vectors):
        got = float(vec @ u / (np.linalg.norm(vec) * np.linalg.norm(u)))
        assert abs(got - KEYS_SCORES[text]) < 1e-9, (text, got)
        got_h = float(vec @ h / (np.linalg.norm(vec) * np.linalg.norm(h)))
        assert abs(got_h - HYDRATION_SCORES[text]) < 1e-9, (text, got_h)

    return {text: [float(x) for x in vec] for text, vec in table.items()}


class RecordingGateway:
    """Offline gateway that logs generate/image traffic and answers embeds from
    the constructed table, producing a replayable bundle."""

    def __init__(self, embeddings: dict[str, list[float]]):
        self.inner = OfflineGateway()
        self.embeddings = embeddings
        self.completions: dict[str, dict] = {}
        self.images: dict[str, bytes] = {}
        self.mode = self.inner.mode

    def caption(self, image_b64, min_confidence):
        return self.inner.caption(image_b64, min_confidence)

    def embed(self, texts):
        return [
            EmbeddingVector(np.asarray(self.embeddings[t], dtype=np.float64))
            for t in texts
        ]

    def generate(self, prompt, max_length, temperature):
        text = self.inner.generate(prompt, max_length, temperature)
        request = {
            "prompt": prompt,
            "max_length": max_length,
            "temperature": temperature,
        }
        self.completions[request_digest("/v1/generate", request)] = {
            "request": request,
            "text": text,
        }
        return text

    def image(self, prompt, height, width, seed):
        pixels = self.inner.image(prompt, height, width, seed)
        request = {"prompt": prompt, "height": height, "width": width, "seed": seed}
        self.images[request_digest("/v1/image", request)] = encode_png(pixels)
        return pixels


def main() -> None:
    bundle = ROOT / "fixtures" / "bundles" / "keys"
    (bundle / "images").mkdir(parents=True, exist_ok=True)

    embeddings = build_embeddings()
    gateway = RecordingGateway(embeddings)

    for name in ("keys.json", "whatif.json"):
        scenario = load_scenario(ROOT / "scenarios" / name)
        result = run_loop(scenario, gateway)
        assert result.trace.error is None, result.trace.error
        print(f"recorded {name}: {len(result.trace.cycles)} cycles, "
              f"{len(result.sketches)} sketches")

    (bundle / "embeddings.json").write_text(
        json.dumps(embeddings, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (bundle / "completions.json").write_text(
        json.dumps(gateway.completions, indent=2, ensure_ascii=False, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    for digest, png in sorted(gateway.images.items()):
        (bundle / "images" / f"{digest}.png").write_bytes(png)
    (bundle / "meta.json").write_text(
        json.dumps(
            {
                "embedder": "synthetic-table-v1",
                "generator": "offline-rule-table-v1",
                "image": "offline-value-noise-v1",
                "dim": DIM,
                "note": (
                    "embedding vectors are constructed so cosine scores equal "
                    "the reference similarity table exactly; completions and "
                    "images are recorded from the offline generators"
                ),
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"bundle written to {bundle}: {len(gateway.completions)} completions, "
          f"{len(gateway.images)} images, {len(embeddings)} embeddings")


if __name__ == "__main__":
    main()
