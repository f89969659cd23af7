"""Byte-exact duplicate frame removal.

Two passes are offered.  :func:`cull_consecutive` drops a frame that repeats
the frame kept just before it, which is what a "don't duplicate frames to
keep the frame rate" extractor does.  :func:`cull_global` drops any repeat of
any earlier kept frame, the way a duplicate-file finder does: payload sizes
are compared first, and only frames whose size collides with another frame
are digested and byte-compared.
"""

from __future__ import annotations

import hashlib
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol


class HasPayload(Protocol):
    ordinal: int
    data: bytes


@dataclass(frozen=True)
class Removal:
    ordinal: int
    duplicate_of: int


@dataclass(frozen=True)
class DedupReport:
    kept: tuple[int, ...]
    removed: tuple[Removal, ...]
    digests_computed: int = 0

    def duplicate_map(self) -> dict[int, int]:
        return {r.ordinal: r.duplicate_of for r in self.removed}


def digest(data: bytes) -> str:
    """SHA-256 of the raw payload, as 64 hex characters."""
    return hashlib.sha256(data).hexdigest()


def cull_consecutive(frames: Sequence[HasPayload]) -> DedupReport:
    kept: list[int] = []
    removed: list[Removal] = []
    last = None
    for f in frames:
        if last is not None and len(f.data) == len(last.data) and f.data == last.data:
            removed.append(Removal(f.ordinal, last.ordinal))
            continue
        kept.append(f.ordinal)
        last = f
    return DedupReport(tuple(kept), tuple(removed))


def cull_global(frames: Sequence[HasPayload], workers: int = 1) -> DedupReport:
    """Remove every frame whose payload equals an earlier kept frame's.

    Frames with a unique payload size are never digested.  ``workers > 1``
    digests the size-colliding frames in a thread pool; the decision pass is
    a sequential fold, so the result does not depend on ``workers``.
    """
    by_size: dict[int, int] = defaultdict(int)
    for f in frames:
        by_size[len(f.data)] += 1
    needs_digest = [i for i, f in enumerate(frames) if by_size[len(f.data)] > 1]

    if workers > 1 and len(needs_digest) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hashed = list(pool.map(lambda i: digest(frames[i].data), needs_digest))
    else:
        hashed = [digest(frames[i].data) for i in needs_digest]
    digests = dict(zip(needs_digest, hashed))

    # size -> digest -> kept positions with that digest
    seen: dict[int, dict[str, list[int]]] = defaultdict(lambda: defaultdict(list))
    kept: list[int] = []
    removed: list[Removal] = []
    for i, f in enumerate(frames):
        size = len(f.data)
        if i not in digests:
            kept.append(f.ordinal)
            continue
        match = None
        for j in seen[size][digests[i]]:
            if frames[j].data == f.data:
                match = j
                break
        if match is None:
            seen[size][digests[i]].append(i)
            kept.append(f.ordinal)
        else:
            removed.append(Removal(f.ordinal, frames[match].ordinal))
    return DedupReport(tuple(kept), tuple(removed), len(digests))
