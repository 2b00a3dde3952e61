"""Hot numeric kernels: 2-D Gaussian convolution and value-noise rasterization.

Each kernel has a numba @njit implementation and a pure-numpy fallback that
performs the identical sequence of IEEE double operations per output element,
so both paths produce the same bytes. Selection: numba when importable, unless
COGITO_NUMBA=0 forces the numpy path. benchmarks/bench_kernels.py compares the
two.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("COGITO_NUMBA", "1") != "0"


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """Normalized 2-D Gaussian, truncated at `radius` taps each side."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


# ---------------------------------------------------------------------------
# direct 2-D convolution on a pre-padded input
# ---------------------------------------------------------------------------

def _conv2d_loop(padded, kernel, out):
    h, w = out.shape
    kh, kw = kernel.shape
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for ky in range(kh):
                for kx in range(kw):
                    acc += kernel[ky, kx] * padded[y + ky, x + kx]
            out[y, x] = acc


def _conv2d_numpy(padded: np.ndarray, kernel: np.ndarray, out: np.ndarray) -> None:
    # Same accumulation order as the scalar loop: zero start, ky-major.
    h, w = out.shape
    kh, kw = kernel.shape
    out[:] = 0.0
    for ky in range(kh):
        for kx in range(kw):
            out += kernel[ky, kx] * padded[ky : ky + h, kx : kx + w]


if _HAVE_NUMBA:
    _conv2d_numba = njit(cache=True)(_conv2d_loop)


def conv2d_reflect(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Convolve a 2-D float64 image with `kernel`, reflect-padded edges."""
    if image.ndim != 2 or kernel.ndim != 2:
        raise ValueError("image and kernel must be 2-D")
    radius = kernel.shape[0] // 2
    padded = np.pad(image.astype(np.float64, copy=False), radius, mode="reflect")
    out = np.empty(image.shape, dtype=np.float64)
    if USE_NUMBA:
        _conv2d_numba(padded, np.ascontiguousarray(kernel), out)
    else:
        _conv2d_numpy(padded, kernel, out)
    return out


# ---------------------------------------------------------------------------
# value noise: bilinear interpolation of a per-channel random lattice
# ---------------------------------------------------------------------------

def _noise_loop(lattice, cell, out):
    h, w, _ = out.shape
    for y in range(h):
        gy = y // cell
        ty = (y - gy * cell) / cell
        for x in range(w):
            gx = x // cell
            tx = (x - gx * cell) / cell
            for c in range(3):
                v00 = lattice[c, gy, gx]
                v01 = lattice[c, gy, gx + 1]
                v10 = lattice[c, gy + 1, gx]
                v11 = lattice[c, gy + 1, gx + 1]
                top = v00 + tx * (v01 - v00)
                bot = v10 + tx * (v11 - v10)
                val = top + ty * (bot - top)
                out[y, x, c] = int(val * 255.0 + 0.5)


def _noise_numpy(lattice: np.ndarray, cell: int, out: np.ndarray) -> None:
    h, w, _ = out.shape
    ys = np.arange(h)
    xs = np.arange(w)
    gy = ys // cell
    gx = xs // cell
    ty = ((ys - gy * cell) / cell)[:, None]
    tx = ((xs - gx * cell) / cell)[None, :]
    for c in range(3):
        plane = lattice[c]
        v00 = plane[gy[:, None], gx[None, :]]
        v01 = plane[gy[:, None], gx[None, :] + 1]
        v10 = plane[gy[:, None] + 1, gx[None, :]]
        v11 = plane[gy[:, None] + 1, gx[None, :] + 1]
        top = v00 + tx * (v01 - v00)
        bot = v10 + tx * (v11 - v10)
        val = top + ty * (bot - top)
        out[:, :, c] = (val * 255.0 + 0.5).astype(np.uint8)


if _HAVE_NUMBA:
    _noise_numba = njit(cache=True)(_noise_loop)


def value_noise_rgb(lattice: np.ndarray, cell: int, height: int, width: int) -> np.ndarray:
    """Rasterize a (3, GH, GW) lattice in [0,1) to a height x width x 3 uint8 image.

    Requires GH > height//cell + 1 and GW > width//cell + 1 so the bilinear
    lookups never leave the lattice.
    """
    if lattice.ndim != 3 or lattice.shape[0] != 3:
        raise ValueError("lattice must have shape (3, GH, GW)")
    if cell < 1:
        raise ValueError("cell must be >= 1")
    gh, gw = lattice.shape[1], lattice.shape[2]
    if gh <= (height - 1) // cell + 1 or gw <= (width - 1) // cell + 1:
        raise ValueError("lattice too small for requested size")
    out = np.empty((height, width, 3), dtype=np.uint8)
    if USE_NUMBA:
        _noise_numba(np.ascontiguousarray(lattice), cell, out)
    else:
        _noise_numpy(lattice, cell, out)
    return out


def warmup() -> None:
    """Trigger JIT compilation so timed code paths never pay it."""
    k = gaussian_kernel(1.0, 3)
    conv2d_reflect(np.zeros((8, 8)), k)
    value_noise_rgb(np.zeros((3, 3, 3)), 8, 8, 8)
