"""Turns stimuli into mental images and abstracts them into pencil sketches.

The sketch filter is fixed: luma grayscale, invert, truncated Gaussian blur
with reflect padding, then a per-pixel dodge division. Steps 1, 2 and 4 are
integer arithmetic; the blur accumulates in double precision and is rounded
half-up, so outputs are bit-identical across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import CogitoError
from .model import (
    IdAllocator,
    MentalImage,
    Sentence,
    SketchImage,
    Source,
    Stimulus,
    StimulusKind,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
MAX_SEQUENCE_STEPS = 16
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SketchParams:
    sigma: float
    kernel_radius: int = field(default=0)
    luma_weights: tuple[float, float, float] = LUMA_WEIGHTS

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.kernel_radius == 0:
            object.__setattr__(self, "kernel_radius", math.ceil(3 * self.sigma))
        if self.kernel_radius < 1:
            raise ValueError("kernel_radius must be >= 1")


def sketchify(image: MentalImage, params: SketchParams) -> SketchImage:
    """Grayscale -> invert -> Gaussian blur -> dodge division.

    out = min(255, round(gray*255 / max(1, 255 - blur))) per pixel, rounding
    half-up; constant inputs >= 1 map to all-255 and all-zero stays zero.
    """
    rgb = image.pixels.astype(np.float64)
    wr, wg, wb = params.luma_weights
    luma = rgb[..., 0] * wr + rgb[..., 1] * wg + rgb[..., 2] * wb
    gray = np.floor(luma + 0.5).astype(np.int64)

    inv = 255 - gray
    kern = kernels.gaussian_kernel(params.sigma, params.kernel_radius)
    blurf = kernels.conv2d_reflect(inv.astype(np.float64), kern)
    blur = np.floor(blurf + 0.5).astype(np.int64)
    np.clip(blur, 0, 255, out=blur)  # guards float dust at the extremes

    denom = np.maximum(1, 255 - blur)
    # round-half-up of gray*255/denom in exact integer arithmetic
    out = np.minimum(255, (2 * gray * 255 + denom) // (2 * denom))
    return SketchImage(
        source_id=image.id,
        pixels=out.astype(np.uint8),
        sigma=params.sigma,
    )


def generate_mental_image(
    stimulus: Stimulus,
    backend,
    size: tuple[int, int],
    seed: int,
    ids: IdAllocator | None = None,
) -> MentalImage:
    """Render a stimulus through the image backend; the descriptor the thinking
    unit perceives is the stimulus text."""
    h, w = size
    if h < 8 or w < 8:
        raise ValueError("image sides must be >= 8")
    ids = ids or IdAllocator()
    pixels = backend.image(stimulus.text, h, w, seed & _U64)
    descriptor = Sentence(
        id=ids.next(),
        text=stimulus.text,
        source=Source.GENERATED,
        timestamp=stimulus.origin_cycle,
    )
    return MentalImage(
        id=ids.next(),
        prompt=stimulus.text,
        pixels=pixels,
        seed=seed & _U64,
        descriptor=descriptor,
    )


def generate_sequence(
    event: Sentence,
    n_steps: int,
    backend,
    size: tuple[int, int],
    seed: int,
    ids: IdAllocator | None = None,
) -> list[MentalImage]:
    """Unfold an event into n_steps images, step i prompted with
    "<event>, step {i+1} of {n}" and seeded seed+i."""
    if not 1 <= n_steps <= MAX_SEQUENCE_STEPS:
        raise ValueError(f"n_steps must be in [1, {MAX_SEQUENCE_STEPS}]")
    ids = ids or IdAllocator()
    images = []
    for i in range(n_steps):
        prompt = f"{event.text}, step {i + 1} of {n_steps}"
        stimulus = Stimulus(
            kind=StimulusKind.DESCRIPTION, text=prompt, origin_cycle=event.timestamp
        )
        try:
            images.append(
                generate_mental_image(
                    stimulus, backend, size, (seed + i) & _U64, ids=ids
                )
            )
        except CogitoError as exc:
            raise type(exc)(f"sequence step {i} failed: {exc}") from exc
    return images


def revise_image(
    image: MentalImage,
    new_knowledge: Sentence,
    backend,
    seed: int,
    ids: IdAllocator | None = None,
) -> MentalImage:
    """Regenerate with the prompt augmented by the new knowledge; the original
    image is retained (revision is non-destructive)."""
    if not new_knowledge.text.strip():
        raise ValueError("revision knowledge must be non-empty")
    prompt = f"{image.prompt}, {new_knowledge.text}"
    ids = ids or IdAllocator()
    stimulus = Stimulus(
        kind=StimulusKind.DESCRIPTION, text=prompt, origin_cycle=new_knowledge.timestamp
    )
    h, w = image.pixels.shape[0], image.pixels.shape[1]
    return generate_mental_image(stimulus, backend, (h, w), seed, ids=ids)
