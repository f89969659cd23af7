from dataclasses import dataclass

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panocull import fixtures
from panocull.dedup import cull_consecutive, cull_global, digest


@dataclass(frozen=True)
class F:
    ordinal: int
    data: bytes


def frames_of(payloads, start=0):
    return [F(start + i, p) for i, p in enumerate(payloads)]


# --- oracles -------------------------------------------------------------


def linear_scan_oracle(frames):
    kept, dup = [], {}
    for f in frames:
        if kept and f.data == kept[-1].data:
            dup[f.ordinal] = kept[-1].ordinal
        else:
            kept.append(f)
    return [f.ordinal for f in kept], dup


def pairwise_oracle(frames):
    # O(n^2): a frame is kept unless some earlier kept frame has identical bytes.
    kept, dup = [], {}
    for f in frames:
        match = next((k for k in kept if k.data == f.data), None)
        if match is None:
            kept.append(f)
        else:
            dup[f.ordinal] = match.ordinal
    return [f.ordinal for f in kept], dup


# --- examples --------------------------------------------------------------


def test_consecutive_keeps_non_adjacent_repeat():
    frames = frames_of([b"A", b"A", b"B", b"A"])
    rep = cull_consecutive(frames)
    assert rep.kept == (0, 2, 3)
    assert rep.duplicate_map() == {1: 0}


def test_global_removes_any_repeat():
    frames = frames_of([b"A", b"A", b"B", b"A"])
    rep = cull_global(frames)
    assert rep.kept == (0, 2)
    assert rep.duplicate_map() == {1: 0, 3: 0}


def test_empty_input():
    assert cull_consecutive([]).kept == ()
    assert cull_global([]).kept == ()


def test_duplicate_of_points_at_kept_frame():
    frames = frames_of([b"x", b"y", b"x", b"x", b"y"], start=10)
    rep = cull_global(frames)
    assert set(rep.duplicate_map().values()) <= set(rep.kept)
    assert rep.duplicate_map() == {12: 10, 13: 10, 14: 11}


def test_same_size_different_bytes_are_kept():
    frames = frames_of([b"abcd", b"abce", b"abcd"])
    rep = cull_global(frames)
    assert rep.kept == (0, 1)
    assert rep.digests_computed == 3


def test_unique_sizes_are_never_digested():
    frames = frames_of([b"a", b"bb", b"ccc", b"dd", b"eeee"])
    rep = cull_global(frames)
    assert rep.kept == (0, 1, 2, 3, 4)
    assert rep.digests_computed == 2  # only the two 2-byte payloads collide


# --- digest ----------------------------------------------------------------


def test_digest_is_sha256_hex():
    assert digest(b"") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
    assert len(digest(b"frame")) == 64


@settings(max_examples=100)
@given(st.binary(max_size=64), st.binary(max_size=64))
def test_digest_equality_tracks_byte_equality(a, b):
    assert (digest(a) == digest(b)) == (a == b)


# --- oracle equivalence --------------------------------------------------


def test_consecutive_matches_linear_scan_500():
    frames = frames_of(fixtures.inject_duplicates(3, 500))
    kept, dup = linear_scan_oracle(frames)
    rep = cull_consecutive(frames)
    assert list(rep.kept) == kept
    assert rep.duplicate_map() == dup
    assert len(rep.removed) > 0


def test_global_matches_pairwise_200():
    frames = frames_of(fixtures.inject_duplicates(5, 200))
    kept, dup = pairwise_oracle(frames)
    rep = cull_global(frames)
    assert list(rep.kept) == kept
    assert rep.duplicate_map() == dup


@pytest.mark.parametrize("workers", [2, 4, 8])
def test_workers_do_not_change_result(workers):
    frames = frames_of(fixtures.inject_duplicates(9, 150))
    assert cull_global(frames, workers=workers) == cull_global(frames, workers=1)


payload_lists = st.lists(st.sampled_from([b"", b"a", b"b", b"ab", b"ba", b"abc"]), max_size=40)


@settings(max_examples=200)
@given(payload_lists)
def test_global_property_matches_oracle(payloads):
    frames = frames_of(payloads)
    kept, dup = pairwise_oracle(frames)
    rep = cull_global(frames)
    assert list(rep.kept) == kept and rep.duplicate_map() == dup
    assert len({frames[i].data for i in rep.kept}) == len(rep.kept)


@settings(max_examples=200)
@given(payload_lists)
def test_consecutive_property_matches_oracle(payloads):
    frames = frames_of(payloads)
    kept, dup = linear_scan_oracle(frames)
    rep = cull_consecutive(frames)
    assert list(rep.kept) == kept and rep.duplicate_map() == dup
    kept_data = [frames[i].data for i in rep.kept]
    assert all(a != b for a, b in zip(kept_data, kept_data[1:]))


@settings(max_examples=100)
@given(payload_lists)
def test_global_after_consecutive_equals_global(payloads):
    frames = frames_of(payloads)
    by_ord = {f.ordinal: f for f in frames}
    first = [by_ord[o] for o in cull_consecutive(frames).kept]
    assert cull_global(first).kept == cull_global(frames).kept


@settings(max_examples=100)
@given(payload_lists)
def test_global_is_idempotent(payloads):
    frames = frames_of(payloads)
    by_ord = {f.ordinal: f for f in frames}
    once = [by_ord[o] for o in cull_global(frames).kept]
    assert cull_global(once).kept == tuple(f.ordinal for f in once)
