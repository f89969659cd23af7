"""Motion-blur scoring by JPEG re-compression, ranking, and culling.

A frame is shrunk, then JPEG-encoded twice: as is, and after a Gaussian
blur.  Blurring a sharp frame throws away a lot of detail and the second
file comes out much smaller; blurring an already blurry frame changes little.
The score is ``size(blurred) / size(plain)``, so larger means blurrier and an
ascending sort puts the sharpest frames first.
"""

from __future__ import annotations

import math
import os
import shutil
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .errors import CorruptStream, IoFailure, UnsupportedMode
from .raster import Raster, decode_jpeg, downsample, encode_jpeg, gaussian_blur

WORST_SCORE = math.inf


@dataclass(frozen=True)
class BlurParams:
    downsample_factor: int = 4
    blur_sigma: float = 2.0
    jpeg_quality: int = 75

    def __post_init__(self) -> None:
        if int(self.downsample_factor) != self.downsample_factor or self.downsample_factor < 1:
            raise ValueError("downsample_factor must be an integer >= 1")
        if not self.blur_sigma > 0:
            raise ValueError("blur_sigma must be > 0")
        if not 1 <= self.jpeg_quality <= 100:
            raise ValueError("jpeg_quality must be in 1..100")


@dataclass(frozen=True)
class BlurScore:
    ordinal: int
    score: float
    undecodable: bool = False


def score_raster(r: Raster, params: BlurParams = BlurParams()) -> float:
    small = downsample(r, params.downsample_factor)
    plain = len(encode_jpeg(small, params.jpeg_quality))
    blurred = len(encode_jpeg(gaussian_blur(small, params.blur_sigma), params.jpeg_quality))
    return blurred / plain


def blur_score(
    jpeg_bytes: bytes, params: BlurParams = BlurParams(), ordinal: int = 0
) -> BlurScore:
    """Score one frame.

    A frame that cannot be decoded gets the worst possible score and is
    flagged, so it sorts after every real frame instead of vanishing.
    """
    try:
        r = decode_jpeg(jpeg_bytes)
    except (CorruptStream, UnsupportedMode):
        return BlurScore(ordinal, WORST_SCORE, undecodable=True)
    return BlurScore(ordinal, score_raster(r, params))


def score_all(
    frames: Iterable[tuple[int, bytes]],
    params: BlurParams = BlurParams(),
    workers: int = 1,
) -> list[BlurScore]:
    """Score ``(ordinal, jpeg_bytes)`` pairs, optionally on a thread pool.

    Output order follows input order regardless of ``workers``.
    """
    items = list(frames)

    def one(item: tuple[int, bytes]) -> BlurScore:
        return blur_score(item[1], params, item[0])

    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, items))
    return [one(it) for it in items]


def rank(scores: Sequence[BlurScore]) -> list[int]:
    """Ordinals sorted sharpest first; ties keep ascending ordinal order."""
    # Schwartzian transform: the key is computed once per frame, then sorted on.
    decorated = [(s.score, s.ordinal) for s in scores]
    decorated.sort()
    return [ordinal for _score, ordinal in decorated]


def cull_top_fraction(ranking: Sequence[int], keep_fraction: float = 0.10) -> list[int]:
    """The first ``ceil(keep_fraction * N)`` ordinals of ``ranking``."""
    if not ranking:
        raise ValueError("ranking must be non-empty")
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must be in (0, 1]")
    # Guard against 0.1 * 100 == 10.000000000000002 style overshoot.
    n = math.ceil(round(keep_fraction * len(ranking), 9))
    return list(ranking[:n])


def rank_width(n: int) -> int:
    """Digits needed for rank prefixes: at least four, more once ranks need them."""
    return max(4, len(str(max(n - 1, 0))))


def emit_sorted(
    frames: Mapping[int, tuple[str, bytes | str | os.PathLike[str]]],
    ranking: Sequence[int],
    out_dir: str | os.PathLike[str],
    link: bool = False,
) -> list[Path]:
    """Write frames into ``out_dir`` named ``{rank}_{original_name}``.

    ``frames`` maps ordinal to ``(original_name, source)`` where source is
    either the JPEG bytes or a path to the file.  With ``link=True`` path
    sources become symbolic links (bytes sources are always written).
    Lexicographic order of the new names equals rank order.
    """
    out = Path(out_dir)
    width = rank_width(len(ranking))
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for r, ordinal in enumerate(ranking):
            name, src = frames[ordinal]
            dest = out / f"{r:0{width}d}_{name}"
            if isinstance(src, (bytes, bytearray, memoryview)):
                dest.write_bytes(bytes(src))
            elif link:
                if dest.is_symlink() or dest.exists():
                    dest.unlink()
                dest.symlink_to(Path(src).resolve())
            else:
                shutil.copyfile(src, dest)
            written.append(dest)
    except OSError as exc:
        raise IoFailure(f"writing sorted frames to {out}: {exc}") from exc
    return written


def sort_directory(
    src_dir: str | os.PathLike[str],
    out_dir: str | os.PathLike[str],
    params: BlurParams = BlurParams(),
    link: bool = True,
    workers: int = 1,
    pattern: str = "*.jpg",
    on_score: Callable[[str, BlurScore], None] | None = None,
) -> list[tuple[str, BlurScore]]:
    """Score every JPEG in ``src_dir`` and lay them out sorted by blurriness."""
    paths = sorted(Path(src_dir).glob(pattern))
    scores = score_all(((i, p.read_bytes()) for i, p in enumerate(paths)), params, workers)
    if on_score is not None:
        for p, s in zip(paths, scores):
            on_score(p.name, s)
    order = rank(scores)
    emit_sorted({i: (p.name, p) for i, p in enumerate(paths)}, order, out_dir, link=link)
    return [(paths[i].name, scores[i]) for i in order]
