import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panocull import avi, fixtures, jpegtables
from panocull.errors import (
    BadForm,
    ContainerError,
    DroppedFrame,
    MissingHeader,
    NotJpeg,
    NotRiff,
    NoVideoStream,
    OutOfRange,
    Truncated,
)
from panocull.raster import decode_jpeg


def _index(data):
    return avi.index_video(avi.parse_riff(data))


def test_parse_three_frame_fixture(small_frames):
    root = avi.parse_riff(avi.write_fixture_avi(small_frames[:3], 30))
    assert root.fourcc == b"RIFF" and root.form == b"AVI "
    assert root.find(b"LIST", b"hdrl").find(b"avih") is not None
    movi = root.find(b"LIST", b"movi")
    assert [c.fourcc for c in movi.children] == [b"00dc"] * 3
    assert root.find(b"idx1") is not None


def test_not_riff():
    with pytest.raises(NotRiff):
        avi.parse_riff(b"JUNK" + bytes(20))
    with pytest.raises(NotRiff):
        avi.parse_riff(b"")


def test_bad_form():
    with pytest.raises(BadForm):
        avi.parse_riff(avi.riff_list(b"RIFF", b"WAVE", []))


def test_truncated_declared_size(small_frames):
    data = avi.write_fixture_avi(small_frames[:3], 30)
    with pytest.raises(Truncated):
        avi.parse_riff(data[:-40])


def test_odd_chunk_pad_byte_consumed():
    body = avi.riff_chunk(b"abcd", b"12345") + avi.riff_chunk(b"efgh", b"xy")
    assert len(body) == 8 + 5 + 1 + 8 + 2
    data = avi.riff_list(b"RIFF", b"AVI ", [body])
    root = avi.parse_riff(data)
    assert [(c.fourcc, c.size) for c in root.children] == [(b"abcd", 5), (b"efgh", 2)]
    assert bytes(root.children[0].payload) == b"12345"
    assert bytes(root.children[1].payload) == b"xy"


def test_children_tile_parent(small_frames):
    frames = list(small_frames[:5])
    frames[2] = frames[2] + b"\0"  # odd length payload somewhere
    root = avi.parse_riff(avi.write_fixture_avi(frames, 25))

    def check(chunk):
        if chunk.form is None:
            return
        pos = chunk.data_offset + 4
        for child in chunk.children:
            assert child.offset == pos
            pos += 8 + child.size + (child.size & 1)
            check(child)
        assert pos == chunk.data_offset + chunk.size

    check(root)


def test_index_ten_frames_at_30fps(small_frames):
    idx = _index(avi.write_fixture_avi(small_frames[:10], 30))
    assert len(idx.entries) == 10
    assert idx.micro_sec_per_frame == 33333
    assert idx.duration_s == pytest.approx(0.333, abs=1e-3)
    assert [e.ordinal for e in idx.entries] == list(range(10))
    offsets = [e.byte_offset for e in idx.entries]
    assert offsets == sorted(set(offsets))
    assert idx.declared_total_frames == 10
    assert (idx.width, idx.height) == (16, 16)


def test_zero_length_entry_is_flagged(small_frames):
    frames = list(small_frames[:6])
    frames[3] = b""
    data = avi.write_fixture_avi(frames, 30)
    idx = _index(data)
    assert [e.zero_length for e in idx.entries] == [False, False, False, True, False, False]
    with pytest.raises(DroppedFrame):
        avi.extract_frame(data, idx, 3)


def test_single_frame_duration():
    idx = _index(avi.write_fixture_avi([fixtures.tiny_jpeg(1)], 25))
    assert idx.duration_s == pytest.approx(1 / 25)


def test_audio_only_has_no_video():
    data = avi.build_avi([], 30, audio_chunks=[b"\x80" * 100, b"\x80" * 99], include_video=False)
    with pytest.raises(NoVideoStream):
        _index(data)


def test_audio_chunks_skipped(small_frames):
    frames = small_frames[:4]
    data = avi.write_fixture_avi(frames, 30, audio_chunks=[b"\x01" * 33] * 6)
    idx = _index(data)
    assert len(idx.entries) == 4
    assert [avi.extract_frame(data, idx, i) for i in range(4)] == list(frames)


def test_non_mjpeg_stream_rejected(small_frames):
    data = avi.write_fixture_avi(small_frames[:2], 30, handler=b"H264")
    with pytest.raises(NoVideoStream):
        _index(data)


def test_missing_avih():
    data = avi.riff_list(b"RIFF", b"AVI ", [avi.riff_list(b"LIST", b"movi", [])])
    with pytest.raises(NoVideoStream):
        _index(data)


def test_missing_frame_period(small_frames):
    data = bytearray(avi.write_fixture_avi(small_frames[:2], 30))
    root = avi.parse_riff(bytes(data))
    hdrl = root.find(b"LIST", b"hdrl")
    avih = hdrl.find(b"avih")
    strh = hdrl.find(b"LIST", b"strl").find(b"strh")
    struct.pack_into("<I", data, avih.data_offset, 0)
    struct.pack_into("<II", data, strh.data_offset + 20, 0, 0)
    with pytest.raises(MissingHeader):
        _index(bytes(data))


def test_frame_period_falls_back_to_stream_rate(small_frames):
    data = bytearray(avi.write_fixture_avi(small_frames[:2], 30))
    avih = avi.parse_riff(bytes(data)).find(b"LIST", b"hdrl").find(b"avih")
    struct.pack_into("<I", data, avih.data_offset, 0)
    assert _index(bytes(data)).micro_sec_per_frame == 33333


def test_linear_scan_without_idx1(small_frames):
    with_idx = avi.write_fixture_avi(small_frames[:7], 30)
    without = avi.write_fixture_avi(small_frames[:7], 30, with_index=False)
    assert avi.parse_riff(without).find(b"idx1") is None
    a, b = _index(with_idx), _index(without)
    assert [e.byte_length for e in a.entries] == [e.byte_length for e in b.entries]
    assert [avi.extract_frame(without, b, i) for i in range(7)] == list(small_frames[:7])


def test_idx1_with_absolute_offsets(small_frames):
    frames = small_frames[:3]
    data = bytearray(avi.write_fixture_avi(frames, 30))
    root = avi.parse_riff(bytes(data))
    movi_base = root.find(b"LIST", b"movi").data_offset
    idx1 = root.find(b"idx1")
    for i in range(3):
        pos = idx1.data_offset + 16 * i + 8
        (rel,) = struct.unpack_from("<I", data, pos)
        struct.pack_into("<I", data, pos, rel + movi_base)
    data = bytes(data)
    idx = _index(data)
    assert [avi.extract_frame(data, idx, i) for i in range(3)] == list(frames)


def test_corrupt_idx1_falls_back_to_scan(small_frames):
    frames = small_frames[:3]
    data = bytearray(avi.write_fixture_avi(frames, 30))
    idx1 = avi.parse_riff(bytes(data)).find(b"idx1")
    struct.pack_into("<I", data, idx1.data_offset + 8, 999999)
    data = bytes(data)
    idx = _index(data)
    assert [avi.extract_frame(data, idx, i) for i in range(3)] == list(frames)


def test_extract_passthrough_with_dht(small_frames):
    data = avi.write_fixture_avi(small_frames[:3], 30)
    idx = _index(data)
    assert avi.extract_frame(data, idx, 1) == small_frames[1]


def test_extract_from_path(tmp_path, small_frames):
    p = tmp_path / "v.avi"
    p.write_bytes(avi.write_fixture_avi(small_frames[:4], 30))
    data, idx = avi.open_video(p)
    assert avi.extract_frame(p, idx, 2) == small_frames[2]


def test_extract_injects_dht_for_avi1_frames(small_frames):
    originals = small_frames[:5]
    stripped = [jpegtables.strip_dht(f) for f in originals]
    data = avi.write_fixture_avi(stripped, 30, handler=b"AVI1")
    idx = _index(data)
    for i, orig in enumerate(originals):
        out = avi.extract_frame(data, idx, i)
        assert jpegtables.has_dht(out)
        assert out != stripped[i]
        assert decode_jpeg(out) == decode_jpeg(orig)


def test_extract_out_of_range(small_frames):
    data = avi.write_fixture_avi(small_frames[:3], 30)
    idx = _index(data)
    with pytest.raises(OutOfRange):
        avi.extract_frame(data, idx, 3)
    with pytest.raises(OutOfRange):
        avi.extract_frame(data, idx, -1)


def test_extract_not_jpeg():
    data = avi.write_fixture_avi([b"not a jpeg"], 30)
    with pytest.raises(NotJpeg):
        avi.extract_frame(data, _index(data), 0)


def test_120_one_pixel_roundtrip():
    frames = [fixtures.tiny_jpeg(v) for v in range(120)]
    data = avi.write_fixture_avi(frames, 30)
    idx = _index(data)
    assert [avi.extract_frame(data, idx, i) for i in range(120)] == frames


def test_write_fixture_preconditions():
    with pytest.raises(ValueError):
        avi.write_fixture_avi([], 30)
    with pytest.raises(ValueError):
        avi.write_fixture_avi([b"x"], 0)


def test_entry_lengths_fit_in_movi(small_frames):
    data = avi.write_fixture_avi(small_frames[:20], 30)
    root = avi.parse_riff(data)
    idx = avi.index_video(root)
    assert sum(e.byte_length for e in idx.entries) <= root.find(b"LIST", b"movi").size


payloads = st.one_of(
    st.just(b""),
    st.binary(min_size=1, max_size=64).map(lambda b: b"\xff\xd8\xff\xc4\x00\x02" + b),
)


@settings(max_examples=60, deadline=None)
@given(st.lists(payloads, min_size=1, max_size=30), st.sampled_from([10, 24, 25, 29.97, 30, 60]))
def test_roundtrip_property(frames, fps):
    data = avi.write_fixture_avi(frames, fps)
    idx = _index(data)
    assert len(idx.entries) == len(frames)
    for i, f in enumerate(frames):
        assert idx.entries[i].zero_length == (f == b"")
        if f:
            assert avi.extract_frame(data, idx, i) == f
    assert idx.duration_s > 0


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_parsing_is_total_on_mangled_fixtures(seed, data):
    # Any truncation or byte flip of a fixture either parses or raises a container error.
    base = avi.write_fixture_avi(fixtures.distinct_frames(1, 3, 8, 8), 30)
    rng = np.random.default_rng(seed)
    buf = bytearray(base)
    for _ in range(data.draw(st.integers(0, 4))):
        buf[int(rng.integers(0, len(buf)))] = int(rng.integers(0, 256))
    cut = data.draw(st.integers(0, len(buf)))
    try:
        root = avi.parse_riff(bytes(buf[:cut]))
        idx = avi.index_video(root)
        for e in idx.entries:
            assert e.byte_offset + e.byte_length <= cut
    except ContainerError:
        pass
