"""Turn motion-JPEG aerial video into a culled, deblocked set of stitch-ready frames."""

__version__ = "0.1.0"

from .avi import VideoIndex, extract_frame, index_video, parse_riff, write_fixture_avi
from .blur import BlurParams, BlurScore, blur_score, cull_top_fraction, emit_sorted, rank
from .deblock import BoundaryStats, boundary_stats, deblock
from .dedup import DedupReport, cull_consecutive, cull_global, digest
from .frames import FrameRecord
from .interval import IntervalSpec, map_interval, select
from .pipeline import Manifest, PipelineConfig, VideoInput, run
from .raster import (
    ClipStats,
    Raster,
    clipped_fraction,
    decode_jpeg,
    downsample,
    encode_jpeg,
    gaussian_blur,
)

__all__ = [
    "BlurParams",
    "BlurScore",
    "BoundaryStats",
    "ClipStats",
    "DedupReport",
    "FrameRecord",
    "IntervalSpec",
    "Manifest",
    "PipelineConfig",
    "Raster",
    "VideoIndex",
    "VideoInput",
    "blur_score",
    "boundary_stats",
    "clipped_fraction",
    "cull_consecutive",
    "cull_global",
    "cull_top_fraction",
    "deblock",
    "decode_jpeg",
    "digest",
    "downsample",
    "emit_sorted",
    "encode_jpeg",
    "extract_frame",
    "gaussian_blur",
    "index_video",
    "map_interval",
    "parse_riff",
    "rank",
    "run",
    "select",
    "write_fixture_avi",
]
