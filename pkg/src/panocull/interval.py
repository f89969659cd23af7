"""Turn a time window of the recording into a range of frame ordinals.

The window is expressed as a fraction of the video's duration and that
fraction is applied to the ordinal numbering.  Because extraction may have
dropped or merged frames, the result is approximate; check the frames at
either end by eye before stitching.
"""

from __future__ import annotations

import math
import re
import warnings
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Protocol, TypeVar

from .errors import BadInterval, EmptySelection

_EPS = 1e-9


@dataclass(frozen=True)
class IntervalSpec:
    """A time window, either in seconds or as fractions of the duration.

    ``unit`` is ``"s"`` or ``"fraction"``.
    """

    start: float
    end: float
    unit: str = "s"

    def __post_init__(self) -> None:
        if self.unit not in ("s", "fraction"):
            raise BadInterval(f"unknown unit {self.unit!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.end)):
            raise BadInterval("interval endpoints must be finite")
        if self.start < 0:
            raise BadInterval(f"start {self.start} is negative")
        if not self.end > self.start:
            raise BadInterval(f"end {self.end} must be after start {self.start}")
        if self.unit == "fraction" and self.end > 1 + _EPS:
            raise BadInterval(f"fractional end {self.end} exceeds 1")

    def fractions(self, duration_s: float) -> tuple[float, float]:
        if self.unit == "fraction":
            return self.start, self.end
        if not duration_s > 0:
            raise BadInterval("duration must be positive")
        if self.end > duration_s * (1 + _EPS):
            raise BadInterval(f"end {self.end} s is past the {duration_s} s recording")
        return self.start / duration_s, self.end / duration_s


def _round_half_away(x: float) -> int:
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def map_interval(
    spec: IntervalSpec, duration_s: float, frame_count: int, base_ordinal: int = 0
) -> tuple[int, int]:
    """Inclusive ordinal range ``(lo, hi)`` covering ``spec``.

    Each endpoint is ``round(highest_ordinal * fraction)`` (ties away from
    zero), clamped to the valid ordinals and offset by ``base_ordinal``.
    """
    if frame_count < 1:
        raise BadInterval("frame_count must be >= 1")
    f_lo, f_hi = spec.fractions(duration_s)
    n_max = frame_count - 1
    lo = min(max(_round_half_away(n_max * f_lo), 0), n_max)
    hi = min(max(_round_half_away(n_max * f_hi), 0), n_max)
    return base_ordinal + lo, base_ordinal + max(lo, hi)


class _HasOrdinal(Protocol):
    ordinal: int


T = TypeVar("T", bound=_HasOrdinal)


def select(frames: Sequence[T], rng: tuple[int, int]) -> list[T]:
    """Frames whose ordinal lies in the inclusive range, in their original order.

    Warns with :class:`EmptySelection` when nothing survives.
    """
    lo, hi = rng
    if lo > hi:
        raise BadInterval(f"range ({lo}, {hi}) is reversed")
    chosen = [f for f in frames if lo <= f.ordinal <= hi]
    if not chosen:
        warnings.warn(f"no frames in ordinal range [{lo}, {hi}]", EmptySelection, stacklevel=2)
    return chosen


_ENDPOINT = re.compile(r"^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(s|%)?\s*$")


def parse_endpoint(text: str) -> tuple[float, str]:
    """Parse ``"50s"``, ``"50"`` (seconds) or ``"50%"`` into ``(value, unit)``."""
    m = _ENDPOINT.match(text)
    if not m:
        raise BadInterval(f"cannot parse interval endpoint {text!r}")
    value = float(m.group(1))
    if m.group(2) == "%":
        return value / 100.0, "fraction"
    return value, "s"


def parse_interval(start: str, end: str) -> IntervalSpec:
    """Build an :class:`IntervalSpec` from two command-line endpoints of the same unit."""
    s, su = parse_endpoint(start)
    e, eu = parse_endpoint(end)
    if su != eu:
        raise BadInterval("start and end must both be seconds or both be percentages")
    return IntervalSpec(s, e, su)
