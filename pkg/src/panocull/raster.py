"""Decoded images and the pixel kernels the other stages share.

A :class:`Raster` wraps a read-only ``uint8`` array of shape
``(height, width, channels)``, which is exactly row-major,
channel-interleaved storage.  All kernels are pure functions.

JPEG coding is delegated to Pillow (libjpeg).  Encoding pins every knob that
affects output bytes (quality, chroma subsampling, standard Huffman tables,
no optimisation passes) so that identical input gives identical bytes.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from . import jpegtables
from .errors import CorruptStream, UnsupportedMode

DEFAULT_T_LOW = 2
DEFAULT_T_HIGH = 253

# SOF markers for sequential Huffman coding; everything else is refused.
_SEQUENTIAL_SOF = {0xC0, 0xC1}
_OTHER_SOF = {0xC2, 0xC3, 0xC5, 0xC6, 0xC7, 0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF}


@dataclass(frozen=True)
class Raster:
    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w, 1|3) array, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("raster must be at least 1x1")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {px.dtype}")
        px = np.ascontiguousarray(px)
        if px.flags.writeable:
            px = px.copy()
            px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    def tobytes(self) -> bytes:
        return self.pixels.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_float(cls, values: np.ndarray) -> Raster:
        """Round half up and saturate a float array into a raster."""
        return cls(_to_uint8(values))


@dataclass(frozen=True)
class ClipStats:
    black_frac: float
    white_frac: float


def _to_uint8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def sof_info(data: bytes) -> tuple[int, int, int, int]:
    """Return ``(sof_marker, height, width, components)`` from the frame header."""
    try:
        for marker, start, _end in jpegtables.iter_segments(data):
            if marker in _SEQUENTIAL_SOF or marker in _OTHER_SOF:
                # segment layout: FF xx, length(2), precision(1), height(2), width(2), ncomp(1)
                h = int.from_bytes(data[start + 5 : start + 7], "big")
                w = int.from_bytes(data[start + 7 : start + 9], "big")
                return marker, h, w, data[start + 9]
    except ValueError as exc:
        raise CorruptStream(str(exc)) from exc
    raise CorruptStream("no SOF segment before SOS")


def decode_jpeg(data: bytes) -> Raster:
    """Decode a baseline (sequential Huffman) JPEG.

    Grayscale streams give a 1-channel raster, everything else RGB.  Raises
    :class:`CorruptStream` for broken marker structure or entropy data and
    :class:`UnsupportedMode` for progressive, lossless or arithmetic streams.
    """
    data = bytes(data)
    if data[:2] != jpegtables.SOI:
        raise CorruptStream("missing SOI marker")
    marker, _h, _w, ncomp = sof_info(data)
    if marker not in _SEQUENTIAL_SOF:
        raise UnsupportedMode(f"SOF marker 0x{marker:02X} is not baseline sequential")
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode == "L" or ncomp == 1:
                arr = np.asarray(im.convert("L"))
            else:
                arr = np.asarray(im.convert("RGB"))
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptStream(str(exc)) from exc
    return Raster(arr)


def encode_jpeg(r: Raster, quality: int = 75) -> bytes:
    """Encode deterministically as baseline JFIF at ``quality`` (1..100)."""
    if isinstance(quality, bool) or not isinstance(quality, (int, np.integer)):
        raise TypeError("quality must be an int")
    if not 1 <= quality <= 100:
        raise ValueError(f"quality {quality} outside 1..100")
    if r.channels == 1:
        im = Image.fromarray(r.pixels[:, :, 0])
        opts = {}
    else:
        im = Image.fromarray(r.pixels)
        opts = {"subsampling": 2}  # 4:2:0
    buf = io.BytesIO()
    im.save(buf, format="JPEG", quality=int(quality), optimize=False, progressive=False, **opts)
    return buf.getvalue()


def downsample(r: Raster, factor: int) -> Raster:
    """Box-filter shrink: each output pixel is the rounded mean of its block.

    Output dimensions are ``ceil(dim / factor)``; blocks clipped by the right
    or bottom edge average only the pixels they contain.
    """
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return r
    px = r.pixels.astype(np.int64)
    h, w = r.height, r.width
    rows = np.arange(0, h, factor)
    cols = np.arange(0, w, factor)
    sums = np.add.reduceat(np.add.reduceat(px, rows, axis=0), cols, axis=1)
    rh = np.minimum(rows + factor, h) - rows
    cw = np.minimum(cols + factor, w) - cols
    counts = (rh[:, None] * cw[None, :])[:, :, None]
    # integer round-half-up of sums / counts
    out = (2 * sums + counts) // (2 * counts)
    return Raster(out.astype(np.uint8))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps, truncated at radius ``ceil(3 * sigma)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return np.ones(1)
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def _convolve_axis(a: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    radius = len(kernel) // 2
    a = np.moveaxis(a, axis, 0)
    padded = np.concatenate([np.repeat(a[:1], radius, 0), a, np.repeat(a[-1:], radius, 0)])
    n = a.shape[0]
    out = kernel[0] * padded[0:n]
    for i in range(1, len(kernel)):
        out += kernel[i] * padded[i : i + n]
    return np.moveaxis(out, 0, axis)


def gaussian_blur(r: Raster, sigma: float) -> Raster:
    """Separable Gaussian blur with clamp-to-edge borders; ``sigma == 0`` is identity."""
    kernel = gaussian_kernel(sigma)
    if len(kernel) == 1:
        return r
    a = r.pixels.astype(np.float64)
    a = _convolve_axis(a, kernel, axis=1)
    a = _convolve_axis(a, kernel, axis=0)
    return Raster.from_float(a)


def clipped_fraction(
    r: Raster, t_low: int = DEFAULT_T_LOW, t_high: int = DEFAULT_T_HIGH
) -> ClipStats:
    """Fractions of pixels lost to pure-black shadows and pure-white highlights.

    A pixel is black when its brightest channel is ``<= t_low`` and white when
    its darkest channel is ``>= t_high``.
    """
    if not 0 <= t_low < t_high <= 255:
        raise ValueError(f"need 0 <= t_low < t_high <= 255, got {t_low}, {t_high}")
    px = r.pixels
    n = r.width * r.height
    black = int(np.count_nonzero(px.max(axis=2) <= t_low))
    white = int(np.count_nonzero(px.min(axis=2) >= t_high))
    return ClipStats(black / n, white / n)


def to_gray(r: Raster) -> Raster:
    """Rec. 601 luma; used by fixture generation and diagnostics."""
    if r.channels == 1:
        return r
    weights = np.array([0.299, 0.587, 0.114])
    return Raster.from_float(r.pixels.astype(np.float64) @ weights)
