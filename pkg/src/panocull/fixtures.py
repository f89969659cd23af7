"""Seeded synthetic test material.

Everything here is a pure function of its seed, so a corpus regenerated with
the same seed is bit-identical.
"""

from __future__ import annotations

import json
import os
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .avi import write_fixture_avi
from .raster import Raster, decode_jpeg, encode_jpeg, gaussian_blur

LADDER_SIGMAS = (0.0, 1.0, 2.0, 4.0, 8.0)


def _smooth_noise(rng: np.random.Generator, h: int, w: int, cell: int) -> np.ndarray:
    """Bilinearly upsampled lattice noise in [0, 1] with feature size ``cell``."""
    gh, gw = h // cell + 2, w // cell + 2
    grid = rng.random((gh, gw))
    y = np.arange(h) / cell
    x = np.arange(w) / cell
    y0, x0 = y.astype(int), x.astype(int)
    fy, fx = (y - y0)[:, None], (x - x0)[None, :]
    g00 = grid[np.ix_(y0, x0)]
    g01 = grid[np.ix_(y0, x0 + 1)]
    g10 = grid[np.ix_(y0 + 1, x0)]
    g11 = grid[np.ix_(y0 + 1, x0 + 1)]
    return (g00 * (1 - fx) + g01 * fx) * (1 - fy) + (g10 * (1 - fx) + g11 * fx) * fy


def detailed_image(seed: int, width: int = 640, height: int = 480) -> Raster:
    """A busy RGB scene: multi-scale texture, hard-edged shapes, fine gratings."""
    rng = np.random.default_rng(seed)
    img = np.zeros((height, width, 3))
    for cell, amp in ((64, 0.35), (16, 0.25), (4, 0.2), (1, 0.1)):
        img += amp * np.stack([_smooth_noise(rng, height, width, cell) for _ in range(3)], -1)
    yy, xx = np.mgrid[0:height, 0:width]
    for _ in range(12):
        cy, cx = rng.integers(0, height), rng.integers(0, width)
        ry, rx = rng.integers(10, height // 4), rng.integers(10, width // 4)
        color = rng.random(3) - 0.5
        if rng.random() < 0.5:
            mask = (abs(yy - cy) < ry) & (abs(xx - cx) < rx)
        else:
            mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 < 1
        img[mask] += 0.5 * color
    period = rng.uniform(3, 7)
    angle = rng.uniform(0, np.pi)
    img += 0.08 * np.sin(2 * np.pi * (xx * np.cos(angle) + yy * np.sin(angle)) / period)[..., None]
    lo, hi = img.min(), img.max()
    return Raster.from_float(20 + 215 * (img - lo) / (hi - lo))


def blur_ladder(
    seed: int, sigmas: Sequence[float] = LADDER_SIGMAS, width: int = 640, height: int = 480
) -> list[Raster]:
    """One detailed image pre-blurred at each sigma, in the given order."""
    base = detailed_image(seed, width, height)
    return [gaussian_blur(base, s) for s in sigmas]


def gradient_texture(seed: int = 0, width: int = 256, height: int = 256) -> Raster:
    """Smooth colour gradient plus texture; blocks badly at low quality.

    The texture is strong enough that block interiors keep some detail even
    at quality 10, so interior discrepancies are not all zero.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    u, v = xx / (width - 1), yy / (height - 1)
    base = np.stack([40 + 170 * u, 60 + 140 * v, 200 - 120 * (u + v) / 2], -1)
    texture = np.stack([_smooth_noise(rng, height, width, 4) for _ in range(3)], -1)
    ripple = np.sin(2 * np.pi * (xx / 11.0 + yy / 17.0))[..., None]
    return Raster.from_float(base + 80 * (texture - 0.5) + 10 * ripple)


def roundtrip(r: Raster, quality: int) -> Raster:
    """Encode at ``quality`` and decode again."""
    return decode_jpeg(encode_jpeg(r, quality))


def tiny_jpeg(value: int, quality: int = 75) -> bytes:
    """A distinct 1x1 gray JPEG per ``value`` (0..255)."""
    return encode_jpeg(Raster(np.full((1, 1, 1), value, np.uint8)), quality)


def distinct_frames(seed: int, n: int, width: int = 32, height: int = 24) -> list[bytes]:
    """``n`` pairwise-distinct small JPEG payloads."""
    rng = np.random.default_rng(seed)
    frames: list[bytes] = []
    seen: set[bytes] = set()
    while len(frames) < n:
        px = rng.integers(0, 256, (height, width, 3), dtype=np.uint8)
        data = encode_jpeg(Raster(px), 75)
        if data not in seen:
            seen.add(data)
            frames.append(data)
    return frames


def inject_duplicates(
    seed: int, n: int, distinct: int | None = None, run_max: int = 5, scatter: float = 0.2
) -> list[bytes]:
    """``n`` payloads with consecutive runs (length 1..run_max) and scattered repeats."""
    rng = np.random.default_rng(seed)
    pool = distinct_frames(seed + 1, distinct or max(1, n // 2), 16, 16)
    out: list[bytes] = []
    k = 0
    while len(out) < n:
        if out and rng.random() < scatter:
            src = out[int(rng.integers(0, len(out)))]
        else:
            src = pool[k % len(pool)]
            k += 1
        out.extend([src] * int(rng.integers(1, run_max + 1)))
    return out[:n]


def write_corpus(out_dir: str | os.PathLike[str], seed: int = 0) -> list[Path]:
    """Write the synthetic corpus used by the tests and demos.

    * ``ladder/seed{k}_sigma{s}.jpg``: blur ladders for five seeds
    * ``gradient/q{010,050,090,100}.jpg``: the gradient+texture image at
      several qualities
    * ``avi/clean.avi``: 120 distinct frames at 30 fps
    * ``avi/duplicates.avi``: 200 frames with injected duplicates and one
      dropped frame
    """
    out = Path(out_dir)
    written: list[Path] = []

    def put(rel: str, data: bytes) -> None:
        p = out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(data)
        written.append(p)

    for k in range(5):
        for sigma, r in zip(LADDER_SIGMAS, blur_ladder(seed + k, width=320, height=240)):
            put(f"ladder/seed{seed + k}_sigma{sigma:g}.jpg", encode_jpeg(r, 95))
    grad = gradient_texture(seed)
    for q in (10, 50, 90, 100):
        put(f"gradient/q{q:03d}.jpg", encode_jpeg(grad, q))

    clean = [encode_jpeg(detailed_image(seed * 1000 + i, 64, 48), 75) for i in range(120)]
    put("avi/clean.avi", write_fixture_avi(clean, 30))
    dups = inject_duplicates(seed, 200)
    dups[17] = b""
    put("avi/duplicates.avi", write_fixture_avi(dups, 30))

    meta = {"seed": seed, "files": sorted(str(p.relative_to(out)) for p in written)}
    put("corpus.json", (json.dumps(meta, indent=1, sort_keys=True) + "\n").encode())
    return written
