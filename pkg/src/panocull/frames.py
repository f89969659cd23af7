"""Frame records: one extracted frame and where it came from."""

from __future__ import annotations

import os
from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import cached_property

from .avi import VideoIndex, extract_frame
from .dedup import digest


@dataclass(frozen=True)
class FrameRecord:
    ordinal: int
    timestamp_s: float
    data: bytes = field(repr=False)
    source: str = ""
    camera_id: str = ""
    dropped: bool = False

    @cached_property
    def digest(self) -> str:
        return digest(self.data)


def iter_frames(
    data: bytes,
    index: VideoIndex,
    source: str | os.PathLike[str] = "",
    camera_id: str = "",
) -> Iterator[FrameRecord]:
    """Yield every indexed frame; zero-length entries come back with ``dropped=True``."""
    for entry in index.entries:
        ts = index.timestamp(entry.ordinal)
        if entry.zero_length:
            yield FrameRecord(entry.ordinal, ts, b"", str(source), camera_id, dropped=True)
        else:
            payload = extract_frame(data, index, entry.ordinal)
            yield FrameRecord(entry.ordinal, ts, payload, str(source), camera_id)
