"""RIFF/AVI motion-JPEG containers: parse, index, extract, and write fixtures.

Frames are pulled out of the ``movi`` list byte-for-byte; nothing is ever
transcoded.  The only modification ever made to a payload is splicing the
standard Huffman tables into AVI1-style frames that omit them.
"""

from __future__ import annotations

import dataclasses
import os
import struct
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from . import jpegtables
from .errors import (
    BadForm,
    DroppedFrame,
    MissingHeader,
    NotJpeg,
    NotRiff,
    NoVideoStream,
    OutOfRange,
    Truncated,
)

MJPEG_FOURCCS = frozenset({b"MJPG", b"mjpg", b"AVI1"})
_CONTAINERS = frozenset({b"RIFF", b"LIST"})
_AVIIF_KEYFRAME = 0x10
_AVIF_HASINDEX = 0x10


@dataclass(frozen=True)
class RiffChunk:
    """One chunk of a RIFF stream.

    ``offset`` is the absolute position of the chunk header in the parsed
    buffer; the payload starts 8 bytes later.  For ``RIFF``/``LIST`` chunks
    ``form`` holds the 4-byte form type and ``children`` the sub-chunks that
    follow it.
    """

    fourcc: bytes
    size: int
    offset: int
    payload: memoryview = field(repr=False, compare=False)
    form: bytes | None = None
    children: tuple[RiffChunk, ...] = ()
    buffer: memoryview | None = field(default=None, repr=False, compare=False)

    @property
    def data_offset(self) -> int:
        return self.offset + 8

    def find(self, fourcc: bytes, form: bytes | None = None) -> RiffChunk | None:
        for child in self.children:
            if child.fourcc == fourcc and (form is None or child.form == form):
                return child
        return None

    def find_all(self, fourcc: bytes, form: bytes | None = None) -> list[RiffChunk]:
        return [
            c for c in self.children if c.fourcc == fourcc and (form is None or c.form == form)
        ]


@dataclass(frozen=True)
class IndexEntry:
    ordinal: int
    byte_offset: int
    byte_length: int
    zero_length: bool


@dataclass(frozen=True)
class VideoIndex:
    micro_sec_per_frame: int
    declared_total_frames: int
    entries: tuple[IndexEntry, ...]
    width: int = 0
    height: int = 0

    @property
    def duration_s(self) -> float:
        return len(self.entries) * self.micro_sec_per_frame / 1e6

    @property
    def fps(self) -> float:
        return 1e6 / self.micro_sec_per_frame

    def timestamp(self, ordinal: int) -> float:
        return ordinal * self.micro_sec_per_frame / 1e6

    def __len__(self) -> int:
        return len(self.entries)


def _parse_children(buf: memoryview, start: int, end: int) -> tuple[RiffChunk, ...]:
    children = []
    pos = start
    while pos < end:
        if end - pos < 8:
            # A lone trailing pad/junk byte is tolerated; anything longer is a torn header.
            if end - pos == 1:
                break
            raise Truncated(f"chunk header at offset {pos} runs past its parent")
        children.append(_parse_chunk(buf, pos, end))
        size = children[-1].size
        pos += 8 + size + (size & 1)
    return tuple(children)


def _parse_chunk(buf: memoryview, pos: int, limit: int) -> RiffChunk:
    fourcc = bytes(buf[pos : pos + 4])
    (size,) = struct.unpack_from("<I", buf, pos + 4)
    data_start = pos + 8
    if data_start + size > limit:
        raise Truncated(
            f"chunk {fourcc!r} at offset {pos} declares {size} bytes, "
            f"only {limit - data_start} remain"
        )
    payload = buf[data_start : data_start + size]
    if fourcc in _CONTAINERS:
        if size < 4:
            raise Truncated(f"{fourcc!r} at offset {pos} too small for a form type")
        form = bytes(buf[data_start : data_start + 4])
        children = _parse_children(buf, data_start + 4, data_start + size)
        return RiffChunk(fourcc, size, pos, payload, form, children)
    return RiffChunk(fourcc, size, pos, payload)


def parse_riff(data: bytes | bytearray | memoryview) -> RiffChunk:
    """Parse an ``AVI `` RIFF form into a chunk tree without copying payloads."""
    buf = memoryview(data).cast("B")
    if len(buf) == 0:
        raise NotRiff("empty input")
    if bytes(buf[:4]) != b"RIFF":
        raise NotRiff(f"magic is {bytes(buf[:4])!r}, not b'RIFF'")
    if len(buf) < 12:
        raise Truncated("RIFF header shorter than 12 bytes")
    root = dataclasses.replace(_parse_chunk(buf, 0, len(buf)), buffer=buf)
    if root.form != b"AVI ":
        raise BadForm(f"RIFF form type is {root.form!r}, expected b'AVI '")
    return root


def _video_stream(hdrl: RiffChunk) -> tuple[int, int, int, int, int]:
    """Find the first MJPEG ``vids`` stream: (stream number, scale, rate, width, height)."""
    for n, strl in enumerate(hdrl.find_all(b"LIST", b"strl")):
        strh = strl.find(b"strh")
        if strh is None or len(strh.payload) < 32:
            continue
        fcc_type = bytes(strh.payload[0:4])
        handler = bytes(strh.payload[4:8])
        if fcc_type != b"vids":
            continue
        strf = strl.find(b"strf")
        compression = b""
        width = height = 0
        if strf is not None and len(strf.payload) >= 20:
            width, height = struct.unpack_from("<ii", strf.payload, 4)
            compression = bytes(strf.payload[16:20])
        if handler not in MJPEG_FOURCCS and compression not in MJPEG_FOURCCS:
            raise NoVideoStream(
                f"video stream {n} is {handler!r}/{compression!r}, not motion JPEG"
            )
        scale, rate = struct.unpack_from("<II", strh.payload, 20)
        return n, scale, rate, width, abs(height)
    raise NoVideoStream("no video stream header")


def _entries_from_idx1(
    buf: memoryview, idx1: RiffChunk, movi: RiffChunk, ids: frozenset[bytes]
) -> list[tuple[int, int]] | None:
    """Resolve idx1 records to (payload offset, length); None if they don't check out."""
    raw = idx1.payload
    records = []
    for i in range(len(raw) // 16):
        ckid, _flags, off, size = struct.unpack_from("<4sIII", raw, i * 16)
        if ckid in ids:
            records.append((ckid, off, size))
    if not records:
        return None
    # Offsets are usually relative to the 'movi' form type, occasionally absolute.
    for base in (movi.data_offset, 0):
        resolved = []
        for ckid, off, size in records:
            hdr = base + off
            if hdr + 8 > len(buf) or bytes(buf[hdr : hdr + 4]) != ckid:
                break
            (actual,) = struct.unpack_from("<I", buf, hdr + 4)
            if actual != size or hdr + 8 + size > len(buf):
                break
            resolved.append((hdr + 8, size))
        else:
            resolved.sort()
            # Repeated offsets (one chunk indexed twice) would break ordinal density.
            if all(a[0] < b[0] for a, b in zip(resolved, resolved[1:])):
                return resolved
    return None


def _scan_movi(movi: RiffChunk, ids: frozenset[bytes]) -> list[tuple[int, int]]:
    found = []
    for chunk in movi.children:
        if chunk.fourcc == b"LIST" and chunk.form == b"rec ":
            found.extend(_scan_movi(chunk, ids))
        elif chunk.fourcc in ids:
            found.append((chunk.data_offset, chunk.size))
    return found


def index_video(root: RiffChunk) -> VideoIndex:
    """Locate every video data chunk of the MJPEG stream, in file order.

    Uses ``idx1`` when present and consistent, otherwise scans ``movi``.
    Zero-length chunks stay in the index flagged as dropped frames.
    """
    hdrl = root.find(b"LIST", b"hdrl")
    avih = hdrl.find(b"avih") if hdrl is not None else None
    if avih is None:
        raise NoVideoStream("no avih main header")
    if len(avih.payload) < 20:
        raise MissingHeader("avih header too short")
    usec, _maxbps, _gran, _flags, total = struct.unpack_from("<5I", avih.payload, 0)
    stream_no, scale, rate, width, height = _video_stream(hdrl)
    if usec == 0 and scale and rate:
        usec = round(1e6 * scale / rate)
    if usec == 0:
        raise MissingHeader("no frame period in avih or strh")

    movi = root.find(b"LIST", b"movi")
    if movi is None:
        raise NoVideoStream("no movi list")
    ids = frozenset({f"{stream_no:02d}dc".encode(), f"{stream_no:02d}db".encode()})
    located = None
    idx1 = root.find(b"idx1")
    if idx1 is not None:
        whole = root.buffer if root.buffer is not None else root.payload
        located = _entries_from_idx1(whole, idx1, movi, ids)
    if located is None:
        located = _scan_movi(movi, ids)
    if not located:
        raise NoVideoStream("movi contains no video data chunks")
    entries = tuple(
        IndexEntry(i, off, size, size == 0) for i, (off, size) in enumerate(located)
    )
    return VideoIndex(usec, total, entries, width, height)


def open_video(path: str | os.PathLike[str]) -> tuple[bytes, VideoIndex]:
    """Read an AVI file and index it."""
    with open(path, "rb") as fh:
        data = fh.read()
    return data, index_video(parse_riff(data))


def extract_frame(
    file: bytes | bytearray | memoryview | str | os.PathLike[str],
    index: VideoIndex,
    ordinal: int,
) -> bytes:
    """Return frame ``ordinal`` as a standalone JPEG.

    The payload is returned untouched unless it lacks a DHT segment, in which
    case the standard tables are inserted just before SOS.
    """
    if not 0 <= ordinal < len(index.entries):
        raise OutOfRange(f"ordinal {ordinal} not in 0..{len(index.entries) - 1}")
    entry = index.entries[ordinal]
    if entry.zero_length:
        raise DroppedFrame(f"frame {ordinal} is a zero-length placeholder")
    if isinstance(file, (bytes, bytearray, memoryview)):
        payload = bytes(file[entry.byte_offset : entry.byte_offset + entry.byte_length])
    else:
        with open(file, "rb") as fh:
            fh.seek(entry.byte_offset)
            payload = fh.read(entry.byte_length)
    if payload[:2] != jpegtables.SOI:
        raise NotJpeg(f"frame {ordinal} does not start with SOI")
    try:
        if not jpegtables.has_dht(payload):
            return jpegtables.insert_standard_dht(payload)
    except ValueError:
        # Broken headers are passed through; decoding reports them later.
        pass
    return payload


# --- fixture writer -------------------------------------------------------


def riff_chunk(fourcc: bytes, payload: bytes) -> bytes:
    out = fourcc + struct.pack("<I", len(payload)) + payload
    return out + b"\0" if len(payload) & 1 else out


def riff_list(kind: bytes, form: bytes, children: Sequence[bytes]) -> bytes:
    body = form + b"".join(children)
    return kind + struct.pack("<I", len(body)) + body


def _frame_size(frames: Sequence[bytes]) -> tuple[int, int]:
    from .raster import sof_info

    for f in frames:
        if f:
            try:
                _m, h, w, _n = sof_info(f)
                return w, h
            except Exception:
                continue
    return 0, 0


def build_avi(
    frames: Sequence[bytes],
    fps: float,
    *,
    audio_chunks: Sequence[bytes] = (),
    with_index: bool = True,
    handler: bytes = b"MJPG",
    include_video: bool = True,
) -> bytes:
    """Low-level writer behind :func:`write_fixture_avi`; performs no validation.

    ``audio_chunks`` are interleaved as ``01wb`` after the video frame of the
    same position (remaining ones are appended).  ``include_video=False``
    writes only the audio chunks, for negative tests.
    """
    rate = Fraction(fps).limit_denominator(1001)
    usec = round(1e6 / fps)
    width, height = _frame_size(frames)
    n = len(frames) if include_video else 0
    biggest = max((len(f) for f in frames), default=0)

    avih = struct.pack(
        "<10I4I",
        usec, biggest * round(fps), 0, _AVIF_HASINDEX if with_index else 0,
        n, 0, 2 if audio_chunks else 1, biggest, width, height,
        0, 0, 0, 0,
    )
    strh = struct.pack(
        "<4s4sIHHIIIIIIIIhhhh",
        b"vids", handler, 0, 0, 0, 0,
        rate.denominator, rate.numerator, 0, n, biggest, 0xFFFFFFFF, 0,
        0, 0, width, height,
    )
    strf = struct.pack(
        "<IiiHH4sIiiII", 40, width, height, 1, 24, handler, width * height * 3, 0, 0, 0, 0
    )
    strls = [riff_list(b"LIST", b"strl", [riff_chunk(b"strh", strh), riff_chunk(b"strf", strf)])]
    if audio_chunks:
        wav = struct.pack("<HHIIHH", 1, 1, 8000, 8000, 1, 8)
        astrh = struct.pack(
            "<4s4sIHHIIIIIIIIhhhh",
            b"auds", b"\0\0\0\0", 0, 0, 0, 0, 1, 8000, 0, sum(map(len, audio_chunks)),
            0, 0xFFFFFFFF, 1, 0, 0, 0, 0,
        )
        strls.append(
            riff_list(b"LIST", b"strl", [riff_chunk(b"strh", astrh), riff_chunk(b"strf", wav)])
        )
    hdrl = riff_list(b"LIST", b"hdrl", [riff_chunk(b"avih", avih), *strls])

    movi_children: list[tuple[bytes, bytes]] = []
    video = list(frames) if include_video else []
    for i in range(max(len(video), len(audio_chunks))):
        if i < len(video):
            movi_children.append((b"00dc", video[i]))
        if i < len(audio_chunks):
            movi_children.append((b"01wb", audio_chunks[i]))

    encoded = []
    idx = []
    pos = 4  # relative to the 'movi' form type
    for ckid, payload in movi_children:
        chunk = riff_chunk(ckid, payload)
        flags = _AVIIF_KEYFRAME if ckid == b"00dc" else 0
        idx.append(struct.pack("<4sIII", ckid, flags, pos, len(payload)))
        encoded.append(chunk)
        pos += len(chunk)
    movi = riff_list(b"LIST", b"movi", encoded)

    parts = [hdrl, movi]
    if with_index:
        parts.append(riff_chunk(b"idx1", b"".join(idx)))
    return riff_list(b"RIFF", b"AVI ", parts)


def write_fixture_avi(frames: Sequence[bytes], fps: float, **kwargs) -> bytes:
    """Write a minimal MJPEG AVI (avih, one video stream, movi, idx1).

    An empty byte string in ``frames`` becomes a zero-length ``00dc`` chunk,
    i.e. a dropped frame.
    """
    if len(frames) == 0:
        raise ValueError("frames must be non-empty")
    if not fps > 0:
        raise ValueError("fps must be positive")
    return build_avi(frames, fps, **kwargs)
