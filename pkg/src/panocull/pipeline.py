"""End-to-end batch run: extract, dedup, select, blur-cull, clip-flag, deblock.

One or more MJPEG AVIs go in; stitch-ready JPEGs plus ``manifest.jsonl`` come
out.  Each input is processed on its own and the results are pooled, so a
second camera simply adds more frames for the stitcher.

The manifest is line-delimited JSON.  The first line is a header with the
schema version, the parameters that determine the output, and a digest of
every input; every further line describes one input frame and the fate it
met (``status``), so the rows account for all frames exactly once.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
import os
import re
import shutil
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, TypeVar

from . import __version__
from .avi import index_video, parse_riff
from .blur import BlurParams, BlurScore, cull_top_fraction, rank, rank_width, score_raster
from .dedup import DedupReport, cull_consecutive, cull_global
from .deblock import DEFAULT_TOLERANCE, deblock
from .errors import ConfigError, ContainerError, CorruptStream, PanoCullError, UnsupportedMode
from .frames import FrameRecord, iter_frames
from .interval import IntervalSpec, map_interval
from .raster import DEFAULT_T_HIGH, DEFAULT_T_LOW, clipped_fraction, decode_jpeg, encode_jpeg

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.jsonl"
WORKERS_ENV = "PANOCULL_WORKERS"
DEDUP_MODES = ("consecutive", "global", "off")

# Row statuses; every input frame gets exactly one.
DROPPED = "dropped"
DUPLICATE = "duplicate"
OUTSIDE = "outside_interval"
UNDECODABLE = "undecodable"
BLUR_CULLED = "blur_culled"
CLIPPED = "clipped"
SELECTED = "selected"
STATUSES = (DROPPED, DUPLICATE, OUTSIDE, UNDECODABLE, BLUR_CULLED, CLIPPED, SELECTED)

ROW_KEYS = (
    "source_file",
    "camera_id",
    "ordinal",
    "timestamp_s",
    "digest",
    "status",
    "duplicate_of",
    "blur_score",
    "blur_rank",
    "clip_black",
    "clip_white",
    "deblocked",
    "deblock_strength",
    "selected",
    "output_name",
)

_CAMERA_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")


class InputError(PanoCullError):
    """An input video could not be read or parsed."""


class PipelineError(PanoCullError):
    """A stage failed after the inputs were parsed."""


@dataclass(frozen=True)
class VideoInput:
    path: str
    camera_id: str


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[VideoInput, ...]
    out_dir: str
    interval: IntervalSpec | None = None
    dedup_mode: str = "global"
    keep_fraction: float = 0.10
    blur: BlurParams = BlurParams()
    deblock: bool = True
    deblock_tolerance: float = DEFAULT_TOLERANCE
    output_quality: int = 95
    t_low: int = DEFAULT_T_LOW
    t_high: int = DEFAULT_T_HIGH
    max_black: float = 0.25
    max_white: float = 0.25
    link: bool = False
    workers: int = 1

    def validate(self) -> None:
        if not self.inputs:
            raise ConfigError("no input videos")
        ids = [i.camera_id for i in self.inputs]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"camera ids must be unique, got {ids}")
        for inp in self.inputs:
            if not _CAMERA_ID.match(inp.camera_id):
                raise ConfigError(f"camera id {inp.camera_id!r} is not filename-safe")
            if not Path(inp.path).is_file():
                raise InputError(f"input {inp.path!r} does not exist")
        if self.dedup_mode not in DEDUP_MODES:
            raise ConfigError(f"dedup_mode must be one of {DEDUP_MODES}")
        if not 0 < self.keep_fraction <= 1:
            raise ConfigError("keep_fraction must be in (0, 1]")
        if not 0 <= self.t_low < self.t_high <= 255:
            raise ConfigError("need 0 <= t_low < t_high <= 255")
        for name in ("max_black", "max_white"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.deblock_tolerance < 0:
            raise ConfigError("deblock_tolerance must be >= 0")
        if not 1 <= self.output_quality <= 100:
            raise ConfigError("output_quality must be in 1..100")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.link:
            # Frames live inside the AVI, so there is nothing on disk to link to.
            logger.info("link mode has no effect for frames extracted from video; copying")

    def reproducible_params(self) -> dict[str, Any]:
        """Everything that influences the output bytes (not paths or worker count)."""
        return {
            "interval": dataclasses.asdict(self.interval) if self.interval else None,
            "dedup_mode": self.dedup_mode,
            "keep_fraction": self.keep_fraction,
            "blur": dataclasses.asdict(self.blur),
            "deblock": self.deblock,
            "deblock_tolerance": self.deblock_tolerance,
            "output_quality": self.output_quality,
            "t_low": self.t_low,
            "t_high": self.t_high,
            "max_black": self.max_black,
            "max_white": self.max_white,
        }


@dataclass
class Manifest:
    header: dict[str, Any]
    rows: list[dict[str, Any]] = field(default_factory=list)

    def selected(self) -> list[dict[str, Any]]:
        return [r for r in self.rows if r["selected"]]

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header, allow_nan=False)]
        lines += [json.dumps(r, allow_nan=False) for r in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path: str | os.PathLike[str]) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | os.PathLike[str]) -> Manifest:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        header = json.loads(lines[0])
        if header.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported manifest schema {header.get('schema')!r}")
        return cls(header, [json.loads(line) for line in lines[1:] if line])


def workers_from_env(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from exc
    return max(1, n)


T = TypeVar("T")
R = TypeVar("R")


def _map(fn: Callable[[T], R], items: Sequence[T], workers: int) -> list[R]:
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _blank_row(f: FrameRecord) -> dict[str, Any]:
    row: dict[str, Any] = dict.fromkeys(ROW_KEYS)
    row.update(
        source_file=f.source,
        camera_id=f.camera_id,
        ordinal=f.ordinal,
        timestamp_s=round(f.timestamp_s, 6),
        digest=None if f.dropped else f.digest,
        deblocked=False,
        selected=False,
    )
    return row


@dataclass(frozen=True)
class _Analysis:
    score: float
    clip_black: float | None
    clip_white: float | None
    undecodable: bool


def _analyse(f: FrameRecord, cfg: PipelineConfig) -> _Analysis:
    try:
        r = decode_jpeg(f.data)
    except (CorruptStream, UnsupportedMode):
        return _Analysis(math.inf, None, None, True)
    clip = clipped_fraction(r, cfg.t_low, cfg.t_high)
    return _Analysis(score_raster(r, cfg.blur), clip.black_frac, clip.white_frac, False)


def _finish(f: FrameRecord, cfg: PipelineConfig) -> tuple[bytes, float | None]:
    """Output bytes for a selected frame, plus the deblock strength applied (None: not run)."""
    if not cfg.deblock:
        return f.data, None
    r = decode_jpeg(f.data)
    if r.width < 16 or r.height < 16:
        return f.data, None
    res = deblock(r, cfg.deblock_tolerance)
    if not res.changed:
        return f.data, 0.0
    return encode_jpeg(res.raster, cfg.output_quality), max(res.strength)


def load_frames(inp: VideoInput) -> tuple[list[FrameRecord], float]:
    try:
        with open(inp.path, "rb") as fh:
            data = fh.read()
        index = index_video(parse_riff(data))
        frames = list(iter_frames(data, index, inp.path, inp.camera_id))
    except (OSError, ContainerError) as exc:
        raise InputError(f"{inp.path}: {type(exc).__name__}: {exc}") from exc
    return frames, index.duration_s


def _dedup(frames: list[FrameRecord], mode: str, workers: int) -> DedupReport | None:
    live = [f for f in frames if not f.dropped]
    if mode == "consecutive":
        return cull_consecutive(live)
    if mode == "global":
        return cull_global(live, workers=workers)
    return None


def process_input(
    inp: VideoInput, cfg: PipelineConfig
) -> tuple[list[dict[str, Any]], dict[str, bytes]]:
    """Run every per-camera stage; returns manifest rows and ``{output_name: bytes}``."""
    frames, duration = load_frames(inp)
    rows = {f.ordinal: _blank_row(f) for f in frames}
    for f in frames:
        if f.dropped:
            rows[f.ordinal]["status"] = DROPPED

    report = _dedup(frames, cfg.dedup_mode, cfg.workers)
    if report is not None:
        for rem in report.removed:
            rows[rem.ordinal]["status"] = DUPLICATE
            rows[rem.ordinal]["duplicate_of"] = rem.duplicate_of
    live = [f for f in frames if rows[f.ordinal]["status"] is None]

    if cfg.interval is not None:
        lo, hi = map_interval(cfg.interval, duration, len(frames))
        for f in live:
            if not lo <= f.ordinal <= hi:
                rows[f.ordinal]["status"] = OUTSIDE
        live = [f for f in live if lo <= f.ordinal <= hi]

    outputs: dict[str, bytes] = {}
    if not live:
        return [rows[k] for k in sorted(rows)], outputs

    analyses = _map(lambda f: _analyse(f, cfg), live, cfg.workers)
    by_ord = {f.ordinal: f for f in live}
    scores = []
    for f, a in zip(live, analyses):
        row = rows[f.ordinal]
        row["blur_score"] = None if a.undecodable else a.score
        row["clip_black"] = a.clip_black
        row["clip_white"] = a.clip_white
        scores.append((a.score, f.ordinal))
    ranking = rank([BlurScore(o, s) for s, o in scores])
    kept = set(cull_top_fraction(ranking, cfg.keep_fraction))
    width = rank_width(len(ranking))
    analysis_of = dict(zip((f.ordinal for f in live), analyses))

    chosen: list[tuple[int, int]] = []
    for position, ordinal in enumerate(ranking):
        row = rows[ordinal]
        row["blur_rank"] = position
        a = analysis_of[ordinal]
        if a.undecodable:
            row["status"] = UNDECODABLE
        elif ordinal not in kept:
            row["status"] = BLUR_CULLED
        elif a.clip_black > cfg.max_black or a.clip_white > cfg.max_white:
            row["status"] = CLIPPED
        else:
            chosen.append((position, ordinal))

    finished = _map(lambda po: _finish(by_ord[po[1]], cfg), chosen, cfg.workers)
    for (position, ordinal), (data, strength) in zip(chosen, finished):
        name = f"{inp.camera_id}_{position:0{width}d}_{ordinal:04d}.jpg"
        row = rows[ordinal]
        row.update(
            status=SELECTED,
            selected=True,
            output_name=name,
            deblocked=bool(strength),
            deblock_strength=strength,
        )
        outputs[name] = data
    return [rows[k] for k in sorted(rows)], outputs


def run(cfg: PipelineConfig) -> Manifest:
    """Process every input and write selected frames plus the manifest to ``cfg.out_dir``.

    Output is a deterministic function of the inputs and
    :meth:`PipelineConfig.reproducible_params`; the worker count does not
    matter.  If anything fails, files written by this run are removed again.
    """
    cfg.validate()
    out = Path(cfg.out_dir)
    if out.exists() and (not out.is_dir() or any(out.iterdir())):
        raise ConfigError(f"output directory {out} exists and is not empty")
    header = {
        "schema": SCHEMA_VERSION,
        "tool": "panocull",
        "version": __version__,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "params": cfg.reproducible_params(),
        "inputs": [
            {"path": i.path, "camera_id": i.camera_id, "sha256": _sha256_file(i.path)}
            for i in cfg.inputs
        ],
    }
    manifest = Manifest(header)
    created = not out.exists()
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for inp in cfg.inputs:
            try:
                rows, outputs = process_input(inp, cfg)
            except InputError:
                raise
            except PanoCullError as exc:
                raise PipelineError(f"{inp.path}: {type(exc).__name__}: {exc}") from exc
            manifest.rows.extend(rows)
            for name, data in outputs.items():
                p = out / name
                p.write_bytes(data)
                written.append(p)
        mpath = out / MANIFEST_NAME
        manifest.write(mpath)
        written.append(mpath)
    except BaseException:
        if created:
            shutil.rmtree(out, ignore_errors=True)
        else:
            for p in written:
                p.unlink(missing_ok=True)
        raise
    counts = {s: sum(r["status"] == s for r in manifest.rows) for s in STATUSES}
    logger.info("run complete: %s", counts)
    return manifest
