import json

from dataclasses import dataclass

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panocull import avi, fixtures
from panocull.dedup import cull_consecutive, cull_global
from panocull.errors import ConfigError
from panocull.interval import IntervalSpec
from panocull.raster import encode_jpeg
from panocull.pipeline import (
    ROW_KEYS,
    STATUSES,
    InputError,
    Manifest,
    PipelineConfig,
    VideoInput,
    run,
    workers_from_env,
)


@dataclass(frozen=True)
class Frame:
    ordinal: int
    data: bytes


def cfg_for(paths, out, **kw):
    inputs = tuple(VideoInput(str(p), cam) for cam, p in paths.items())
    return PipelineConfig(inputs=inputs, out_dir=str(out), **kw)


@pytest.fixture(scope="module")
def clean_avi(tmp_path_factory):
    p = tmp_path_factory.mktemp("v") / "clean.avi"
    frames = [encode_jpeg(fixtures.detailed_image(i, 64, 48), 75) for i in range(120)]
    p.write_bytes(avi.write_fixture_avi(frames, 30))
    return p


def test_keep_all_without_dedup_hits(clean_avi, tmp_path):
    m = run(cfg_for({"a": clean_avi}, tmp_path / "out", keep_fraction=1.0, deblock=False))
    assert len(m.rows) == 120
    assert all(r["status"] == "selected" for r in m.rows)
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert len(files) == 121 and "manifest.jsonl" in files
    # deblock off: selected outputs are the untouched payloads
    data = clean_avi.read_bytes()
    idx = avi.index_video(avi.parse_riff(data))
    for r in m.rows:
        assert (tmp_path / "out" / r["output_name"]).read_bytes() == avi.extract_frame(data, idx, r["ordinal"])


def test_default_keeps_ten_percent(clean_avi, tmp_path):
    m = run(cfg_for({"a": clean_avi}, tmp_path / "out", max_black=1.0, max_white=1.0))
    assert len(m.selected()) == 12
    ranks = sorted(r["blur_rank"] for r in m.selected())
    assert ranks == list(range(12))


def test_rows_partition_frames(corpus, tmp_path):
    m = run(cfg_for({"a": corpus / "avi/duplicates.avi"}, tmp_path / "out"))
    assert [r["ordinal"] for r in m.rows] == list(range(200))
    assert {r["status"] for r in m.rows} <= set(STATUSES)
    assert all(set(r) == set(ROW_KEYS) for r in m.rows)
    by = {r["ordinal"]: r for r in m.rows}
    assert by[17]["status"] == "dropped"
    for r in m.rows:
        if r["status"] == "duplicate":
            assert by[r["duplicate_of"]]["status"] not in ("duplicate", "dropped")
        assert r["selected"] == (r["status"] == "selected")


def test_two_cameras_prefix_outputs(corpus, tmp_path):
    paths = {"a": corpus / "avi/clean.avi", "b": corpus / "avi/duplicates.avi"}
    m = run(cfg_for(paths, tmp_path / "out"))
    cams = {r["camera_id"] for r in m.rows}
    assert cams == {"a", "b"}
    for r in m.selected():
        assert r["output_name"].startswith(r["camera_id"] + "_")
    names = [r["output_name"] for r in m.selected()]
    assert len(names) == len(set(names))


def test_interval_restricts_selection(clean_avi, tmp_path):
    spec = IntervalSpec(0.5, 0.6, "fraction")
    m = run(cfg_for({"a": clean_avi}, tmp_path / "out", interval=spec, keep_fraction=1.0, deblock=False))
    inside = [r["ordinal"] for r in m.rows if r["status"] != "outside_interval"]
    lo, hi = round(119 * 0.5), round(119 * 0.6)
    assert inside == list(range(lo, hi + 1))


def test_determinism_across_workers(corpus, tmp_path):
    paths = {"a": corpus / "avi/clean.avi", "b": corpus / "avi/duplicates.avi"}
    m1 = run(cfg_for(paths, tmp_path / "w1", workers=1))
    m8 = run(cfg_for(paths, tmp_path / "w8", workers=8))
    h1, h8 = dict(m1.header), dict(m8.header)
    h1.pop("created"), h8.pop("created")
    assert h1 == h8 and m1.rows == m8.rows
    for r in m1.selected():
        assert (tmp_path / "w1" / r["output_name"]).read_bytes() == (tmp_path / "w8" / r["output_name"]).read_bytes()


def test_manifest_roundtrip_and_schema(clean_avi, tmp_path):
    m = run(cfg_for({"a": clean_avi}, tmp_path / "out"))
    back = Manifest.read(tmp_path / "out" / "manifest.jsonl")
    assert back.header == m.header and back.rows == m.rows
    assert m.header["schema"] == 1
    assert m.header["inputs"][0]["camera_id"] == "a"
    assert "out_dir" not in m.header["params"] and "workers" not in m.header["params"]
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"schema": 99}) + "\n")
    with pytest.raises(ValueError):
        Manifest.read(bad)


def test_deblock_records_strength(tmp_path):
    # 64x64 frames at quality 10 are blocky enough for the filter to act
    grad = fixtures.gradient_texture(0, 64, 64)
    frames = [encode_jpeg(grad, 10)]
    p = tmp_path / "v.avi"
    p.write_bytes(avi.write_fixture_avi(frames, 30))
    m = run(cfg_for({"a": p}, tmp_path / "out", keep_fraction=1.0))
    (row,) = m.rows
    assert row["deblocked"] and row["deblock_strength"] > 0
    assert (tmp_path / "out" / row["output_name"]).read_bytes() != frames[0]


def test_undecodable_frame_is_ranked_last(small_frames, tmp_path):
    frames = list(small_frames[:9]) + [b"\xff\xd8\xff\xc4\x00\x02broken"]
    p = tmp_path / "v.avi"
    p.write_bytes(avi.write_fixture_avi(frames, 30))
    m = run(cfg_for({"a": p}, tmp_path / "out", keep_fraction=1.0, deblock=False))
    last = m.rows[9]
    assert last["status"] == "undecodable" and last["blur_rank"] == 9 and last["blur_score"] is None


def test_bad_input_leaves_nothing(tmp_path, clean_avi):
    bad = tmp_path / "bad.avi"
    bad.write_bytes(b"RIFX" + bytes(40))
    out = tmp_path / "out"
    with pytest.raises(InputError):
        run(cfg_for({"a": clean_avi, "b": bad}, out))
    assert not out.exists()


def test_failure_in_existing_dir_removes_own_files(tmp_path, clean_avi):
    bad = tmp_path / "bad.avi"
    bad.write_bytes(b"RIFF" + bytes(4))
    out = tmp_path / "out"
    out.mkdir()
    with pytest.raises(InputError):
        run(cfg_for({"a": clean_avi, "b": bad}, out))
    assert out.exists() and not any(out.iterdir())


def test_nonempty_out_dir_refused(tmp_path, clean_avi):
    out = tmp_path / "out"
    out.mkdir()
    (out / "keep.txt").write_text("x")
    with pytest.raises(ConfigError):
        run(cfg_for({"a": clean_avi}, out))
    assert (out / "keep.txt").exists()


@pytest.mark.parametrize(
    "kw",
    [
        {"keep_fraction": 0},
        {"dedup_mode": "fuzzy"},
        {"t_low": 200, "t_high": 100},
        {"max_black": 2},
        {"output_quality": 0},
        {"workers": 0},
    ],
)
def test_config_validation(kw, tmp_path, clean_avi):
    with pytest.raises(ConfigError):
        run(cfg_for({"a": clean_avi}, tmp_path / "out", **kw))


def test_camera_ids_checked(tmp_path, clean_avi):
    with pytest.raises(ConfigError):
        run(cfg_for({"a/b": clean_avi}, tmp_path / "out"))
    dup = (VideoInput(str(clean_avi), "a"), VideoInput(str(clean_avi), "a"))
    with pytest.raises(ConfigError):
        run(PipelineConfig(inputs=dup, out_dir=str(tmp_path / "o")))


def test_missing_input(tmp_path):
    with pytest.raises(InputError):
        run(cfg_for({"a": tmp_path / "nope.avi"}, tmp_path / "out"))


def test_workers_from_env(monkeypatch):
    monkeypatch.delenv("PANOCULL_WORKERS", raising=False)
    assert workers_from_env() == 1
    monkeypatch.setenv("PANOCULL_WORKERS", "6")
    assert workers_from_env() == 6
    monkeypatch.setenv("PANOCULL_WORKERS", "many")
    with pytest.raises(ConfigError):
        workers_from_env()


payloads = st.lists(st.sampled_from([b"p", b"q", b"r", b"s"]), min_size=1, max_size=30)


@settings(max_examples=150)
@given(payloads, st.data())
def test_dedup_and_select_commute_within_range(data, draw):
    # Dedup-then-select is always a subset of select-then-dedup; they agree
    # whenever no frame in range repeats a frame from before the range.
    frames = [Frame(i, d) for i, d in enumerate(data)]
    by = {f.ordinal: f for f in frames}
    lo = draw.draw(st.integers(0, len(frames) - 1))
    hi = draw.draw(st.integers(lo, len(frames) - 1))
    for cull in (cull_global, cull_consecutive):
        survivors = [by[o] for o in cull(frames).kept]
        a = [f.ordinal for f in survivors if lo <= f.ordinal <= hi]
        b = list(cull([f for f in frames if lo <= f.ordinal <= hi]).kept)
        assert set(a) <= set(b)
        before = {f.data for f in frames[:lo]}
        if cull is cull_global and not any(f.data in before for f in frames[lo : hi + 1]):
            assert a == b
        if cull is cull_consecutive and (lo == 0 or frames[lo].data != frames[lo - 1].data):
            assert a == b
