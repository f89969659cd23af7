"""Command-line entry point.

Subcommands wrap one stage each (``extract``, ``dedup``, ``score``, ``sort``,
``select``, ``deblock``, ``fixtures``) plus ``run`` for the whole pipeline.

Exit status: 0 success, 1 usage error, 2 an input could not be parsed,
3 the pipeline failed.  Errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .avi import extract_frame, index_video, parse_riff
from .blur import BlurParams, cull_top_fraction, score_all, sort_directory
from .deblock import DEFAULT_TOLERANCE, deblock
from .dedup import cull_consecutive, cull_global
from .errors import BadInterval, ConfigError, ContainerError, PanoCullError
from .fixtures import write_corpus
from .frames import FrameRecord, iter_frames
from .interval import map_interval, parse_interval
from .pipeline import InputError, PipelineConfig, VideoInput, run, workers_from_env
from .raster import decode_jpeg, encode_jpeg

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_PIPELINE = 3


class UsageError(Exception):
    """Bad command line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _emit(obj: object) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _load_video(path: str) -> tuple[bytes, object]:
    try:
        data = Path(path).read_bytes()
        return data, index_video(parse_riff(data))
    except (OSError, ContainerError) as exc:
        raise InputError(f"{path}: {type(exc).__name__}: {exc}") from exc


def _dir_frames(src: str) -> list[tuple[Path, FrameRecord]]:
    paths = sorted(Path(src).glob("*.jpg"))
    out = []
    for i, p in enumerate(paths):
        stem = p.stem
        ordinal = int(stem) if stem.isdigit() else i
        out.append((p, FrameRecord(ordinal, 0.0, p.read_bytes(), str(p))))
    return out


def _blur_params(args: argparse.Namespace) -> BlurParams:
    return BlurParams(args.factor, args.sigma, args.quality)


def _add_blur_args(p: argparse.ArgumentParser) -> None:
    d = BlurParams()
    p.add_argument("--factor", type=int, default=d.downsample_factor, help="downsample factor")
    p.add_argument("--sigma", type=float, default=d.blur_sigma, help="blur sigma after downsampling")
    p.add_argument("--quality", type=int, default=d.jpeg_quality, help="re-encode quality")


def cmd_extract(args: argparse.Namespace) -> int:
    data, index = _load_video(args.video)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frames = [f for f in iter_frames(data, index, args.video) if not f.dropped]
    if args.dedup == "consecutive":
        keep = set(cull_consecutive(frames).kept)
    elif args.dedup == "global":
        keep = set(cull_global(frames).kept)
    else:
        keep = {f.ordinal for f in frames}
    written = 0
    for f in frames:
        if f.ordinal in keep:
            (out / f"{f.ordinal:04d}.jpg").write_bytes(f.data)
            written += 1
    _emit(
        {
            "video": args.video,
            "frames": len(index.entries),
            "dropped": sum(e.zero_length for e in index.entries),
            "written": written,
            "duration_s": index.duration_s,
        }
    )
    return EXIT_OK


def cmd_dedup(args: argparse.Namespace) -> int:
    items = _dir_frames(args.dir)
    frames = [f for _p, f in items]
    report = cull_consecutive(frames) if args.mode == "consecutive" else cull_global(frames)
    by_ord = {f.ordinal: p for p, f in items}
    if args.delete:
        for r in report.removed:
            by_ord[r.ordinal].unlink()
    _emit(
        {
            "kept": [by_ord[o].name for o in report.kept],
            "removed": [
                {"file": by_ord[r.ordinal].name, "duplicate_of": by_ord[r.duplicate_of].name}
                for r in report.removed
            ],
            "deleted": bool(args.delete),
        }
    )
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    paths = sorted(Path(args.dir).glob("*.jpg"))
    scores = score_all(
        ((i, p.read_bytes()) for i, p in enumerate(paths)), _blur_params(args), args.workers
    )
    for p, s in zip(paths, scores):
        _emit({"file": p.name, "score": None if s.undecodable else s.score, "undecodable": s.undecodable})
    return EXIT_OK


def cmd_sort(args: argparse.Namespace) -> int:
    ranked = sort_directory(
        args.dir, args.out_dir, _blur_params(args), link=not args.copy, workers=args.workers
    )
    keep = cull_top_fraction(list(range(len(ranked))), args.keep) if ranked else []
    for position, (name, s) in enumerate(ranked):
        _emit(
            {
                "rank": position,
                "file": name,
                "score": None if s.undecodable else s.score,
                "keep": position < len(keep),
            }
        )
    return EXIT_OK


def cmd_select(args: argparse.Namespace) -> int:
    data, index = _load_video(args.video)
    spec = parse_interval(args.start, args.end)
    lo, hi = map_interval(spec, index.duration_s, len(index.entries))
    result = {"lo": lo, "hi": hi, "duration_s": index.duration_s, "approximate": True}
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        n = 0
        for o in range(lo, hi + 1):
            if not index.entries[o].zero_length:
                (out / f"{o:04d}.jpg").write_bytes(extract_frame(data, index, o))
                n += 1
        result["written"] = n
    _emit(result)
    return EXIT_OK


def cmd_deblock(args: argparse.Namespace) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.images:
        src = Path(name)
        r = decode_jpeg(src.read_bytes())
        res = deblock(r, args.tolerance)
        dest = out / src.name
        if res.changed:
            dest.write_bytes(encode_jpeg(res.raster, args.quality))
        else:
            dest.write_bytes(src.read_bytes())
        _emit(
            {
                "file": src.name,
                "strength": list(res.strength),
                "converged": res.converged,
                "boundary_median_before": list(res.before.boundary_median),
                "boundary_median_after": list(res.after.boundary_median),
                "interior_median_after": list(res.after.interior_median),
            }
        )
    return EXIT_OK


def cmd_fixtures(args: argparse.Namespace) -> int:
    written = write_corpus(args.out_dir, args.seed)
    _emit({"out_dir": args.out_dir, "seed": args.seed, "files": len(written)})
    return EXIT_OK


def _video_inputs(specs: Sequence[str]) -> tuple[VideoInput, ...]:
    inputs = []
    for i, s in enumerate(specs):
        path, sep, cam = s.partition("=")
        if not sep:
            # path=camera_id is optional; default ids are a, b, c, ...
            cam = chr(ord("a") + i) if i < 26 else f"cam{i}"
        inputs.append(VideoInput(path, cam))
    return tuple(inputs)


def cmd_run(args: argparse.Namespace) -> int:
    interval = None
    if args.start is not None or args.end is not None:
        if args.start is None or args.end is None:
            raise BadInterval("--start and --end must be given together")
        interval = parse_interval(args.start, args.end)
    cfg = PipelineConfig(
        inputs=_video_inputs(args.videos),
        out_dir=args.out_dir,
        interval=interval,
        dedup_mode=args.dedup,
        keep_fraction=args.keep,
        blur=_blur_params(args),
        deblock=not args.no_deblock,
        deblock_tolerance=args.tolerance,
        output_quality=args.output_quality,
        t_low=args.t_low,
        t_high=args.t_high,
        max_black=args.max_black,
        max_white=args.max_white,
        link=args.link,
        workers=args.workers,
    )
    manifest = run(cfg)
    counts: dict[str, int] = {}
    for row in manifest.rows:
        counts[row["status"]] = counts.get(row["status"], 0) + 1
    _emit({"out_dir": args.out_dir, "frames": len(manifest.rows), "status": counts})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="panocull", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument(
        "--workers", type=int, default=None,
        help="parallel per-frame workers (default: $PANOCULL_WORKERS or 1)",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="write every frame of an AVI as NNNN.jpg, untranscoded")
    p.add_argument("video")
    p.add_argument("out_dir")
    p.add_argument("--dedup", choices=("off", "consecutive", "global"), default="off")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("dedup", help="report (and optionally delete) duplicate JPEGs in a directory")
    p.add_argument("dir")
    p.add_argument("--mode", choices=("consecutive", "global"), default="global")
    p.add_argument("--delete", action="store_true")
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("score", help="print the blur score of every JPEG in a directory")
    p.add_argument("dir")
    _add_blur_args(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sort", help="lay out a directory's JPEGs sorted by blurriness")
    p.add_argument("dir")
    p.add_argument("out_dir")
    p.add_argument("--copy", action="store_true", help="copy files instead of symlinking")
    p.add_argument("--keep", type=float, default=0.10, help="fraction reported as keepers")
    _add_blur_args(p)
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("select", help="map a time window to an ordinal range")
    p.add_argument("video")
    p.add_argument("--start", required=True, help="seconds ('50s') or percent ('50%%')")
    p.add_argument("--end", required=True)
    p.add_argument("--out-dir", dest="out_dir", help="also extract the selected frames here")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("deblock", help="suppress 8x8 blocking in JPEG images")
    p.add_argument("images", nargs="+")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--quality", type=int, default=95, help="quality for re-encoded output")
    p.set_defaults(func=cmd_deblock)

    p = sub.add_parser("fixtures", help="generate the synthetic test corpus")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("run", help="full pipeline over one or more videos")
    p.add_argument("videos", nargs="+", help="video path, optionally PATH=CAMERA_ID")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--start")
    p.add_argument("--end")
    p.add_argument("--dedup", choices=("off", "consecutive", "global"), default="global")
    p.add_argument("--keep", type=float, default=0.10, help="fraction of sharpest frames kept")
    p.add_argument("--no-deblock", action="store_true")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)
    p.add_argument("--output-quality", type=int, default=95)
    p.add_argument("--t-low", type=int, default=2)
    p.add_argument("--t-high", type=int, default=253)
    p.add_argument("--max-black", type=float, default=0.25)
    p.add_argument("--max-white", type=float, default=0.25)
    p.add_argument("--link", action="store_true")
    _add_blur_args(p)
    p.set_defaults(func=cmd_run)
    return parser


def _fail(code: int, exc: BaseException) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code}) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.workers is None:
            args.workers = workers_from_env()
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except UsageError as exc:
        return _fail(EXIT_USAGE, exc)
    except ConfigError as exc:
        return _fail(EXIT_USAGE, exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ConfigError, BadInterval) as exc:
        return _fail(EXIT_USAGE, exc)
    except (InputError, ContainerError) as exc:
        return _fail(EXIT_INPUT, exc)
    except (PanoCullError, OSError, ValueError) as exc:
        return _fail(EXIT_PIPELINE, exc)


if __name__ == "__main__":
    sys.exit(main())
