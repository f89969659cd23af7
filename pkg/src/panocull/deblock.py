"""Suppress the 8x8 grid left by heavy JPEG quantization.

Discrepancy is the absolute difference between horizontally or vertically
adjacent pixels.  Pairs that straddle a block edge form the *boundary*
population, all other adjacent pairs the *interior* population.  A clean
image has about the same typical discrepancy in both; a blocky one has
visibly larger steps at the edges.

:func:`deblock` smooths each edge step over the two pixels on either side,
at the weakest strength that brings the boundary median down to the
interior median (within a tolerance).  If the image already meets that bar
it is returned unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooSmall
from .raster import Raster

BLOCK = 8
DEFAULT_TOLERANCE = 0.10
DEFAULT_MAX_STRENGTH = 1.0
_BISECT_STEPS = 12
# correction weights for offsets 6, 7 | 8, 9 around each edge
_W_OUTER = 1.0 / 6.0
_W_INNER = 2.0 / 6.0


@dataclass(frozen=True)
class BoundaryStats:
    boundary_median: tuple[float, ...]
    interior_median: tuple[float, ...]
    pair_counts: tuple[int, int]

    def satisfied(self, tolerance: float = DEFAULT_TOLERANCE) -> tuple[bool, ...]:
        return tuple(
            b <= i * (1 + tolerance) for b, i in zip(self.boundary_median, self.interior_median)
        )


@dataclass(frozen=True)
class DeblockResult:
    raster: Raster
    strength: tuple[float, ...]
    converged: bool
    before: BoundaryStats
    after: BoundaryStats

    @property
    def changed(self) -> bool:
        return any(s > 0 for s in self.strength)


def _check_size(r: Raster) -> None:
    if r.width < 2 * BLOCK or r.height < 2 * BLOCK:
        raise TooSmall(f"need at least {2 * BLOCK}x{2 * BLOCK} pixels, got {r.width}x{r.height}")


def _hist_median(hist: np.ndarray) -> float:
    n = int(hist.sum())
    cum = np.cumsum(hist)
    lo = int(np.searchsorted(cum, (n - 1) // 2 + 1))
    hi = int(np.searchsorted(cum, n // 2 + 1))
    return (lo + hi) / 2.0


def _channel_hists(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Histograms of |adjacent difference| for boundary and interior pairs."""
    x = x.astype(np.int16)
    dh = np.abs(np.diff(x, axis=1))
    dv = np.abs(np.diff(x, axis=0))
    total = np.bincount(dh.ravel(), minlength=256) + np.bincount(dv.ravel(), minlength=256)
    s = BLOCK - 1
    boundary = np.bincount(dh[:, s::BLOCK].ravel(), minlength=256) + np.bincount(
        dv[s::BLOCK, :].ravel(), minlength=256
    )
    return boundary, total - boundary


def _channel_medians(x: np.ndarray) -> tuple[float, float]:
    boundary, interior = _channel_hists(x)
    return _hist_median(boundary), _hist_median(interior)


def boundary_stats(r: Raster) -> BoundaryStats:
    """Median adjacent-pair discrepancy across block edges vs inside blocks, per channel.

    The block grid is anchored at pixel (0, 0).
    """
    _check_size(r)
    meds = [_channel_medians(r.pixels[:, :, c]) for c in range(r.channels)]
    boundary, interior = _channel_hists(r.pixels[:, :, 0])
    return BoundaryStats(
        tuple(m[0] for m in meds),
        tuple(m[1] for m in meds),
        (int(boundary.sum()), int(interior.sum())),
    )


def _smooth_edges(x: np.ndarray, strength: float, axis: int) -> np.ndarray:
    """Spread each edge step over offsets 6, 7, 8, 9 along ``axis``; returns a new array."""
    y = np.moveaxis(x.copy(), axis, 0)
    n = y.shape[0]
    a = np.arange(BLOCK - 1, n - 1, BLOCK)  # last row/col of each block with a neighbour
    b = a + 1
    step = (y[b] - y[a]) * strength
    y[a - 1] += _W_OUTER * step
    y[a] += _W_INNER * step
    y[b] -= _W_INNER * step
    far = b + 1 < n
    y[b[far] + 1] -= _W_OUTER * step[far]
    return np.moveaxis(y, 0, axis)


def smooth_channel(x: np.ndarray, strength: float) -> np.ndarray:
    """Apply the boundary filter to one 2-D channel at ``strength``; uint8 out."""
    if strength <= 0:
        return x.copy()
    y = x.astype(np.float64)
    y = _smooth_edges(y, strength, axis=1)
    y = _smooth_edges(y, strength, axis=0)
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def deblock(
    r: Raster,
    tolerance: float = DEFAULT_TOLERANCE,
    max_strength: float = DEFAULT_MAX_STRENGTH,
) -> DeblockResult:
    """Smooth block edges only as much as needed, channel by channel.

    For every channel the strength is the smallest value in
    ``[0, max_strength]`` (found by bisection) at which the boundary median
    is at most ``interior_median * (1 + tolerance)``.  A channel that already
    meets this is left bit-identical.  If a channel cannot meet it even at
    ``max_strength`` that result is used and ``converged`` is False.
    """
    _check_size(r)
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    if not 0 < max_strength <= 1:
        raise ValueError("max_strength must be in (0, 1]")
    before = boundary_stats(r)

    def ok(ch: np.ndarray) -> bool:
        bnd, inner = _channel_medians(ch)
        return bnd <= inner * (1 + tolerance)

    out_channels = []
    strengths = []
    converged = True
    for c in range(r.channels):
        x = r.pixels[:, :, c]
        if ok(x):
            out_channels.append(x.copy())
            strengths.append(0.0)
            continue
        top = smooth_channel(x, max_strength)
        if not ok(top):
            out_channels.append(top)
            strengths.append(float(max_strength))
            converged = False
            continue
        lo, hi, best = 0.0, float(max_strength), top
        for _ in range(_BISECT_STEPS):
            mid = (lo + hi) / 2
            trial = smooth_channel(x, mid)
            if ok(trial):
                hi, best = mid, trial
            else:
                lo = mid
        out_channels.append(best)
        strengths.append(hi)

    out = Raster(np.stack(out_channels, axis=-1))
    return DeblockResult(out, tuple(strengths), converged, before, boundary_stats(out))


def mse(a: Raster, b: Raster) -> float:
    if a.pixels.shape != b.pixels.shape:
        raise ValueError("shape mismatch")
    d = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(d * d))
