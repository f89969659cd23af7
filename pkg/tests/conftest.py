from __future__ import annotations

import numpy as np
import pytest

from panocull import fixtures
from panocull.raster import Raster, encode_jpeg

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome; printed in the terminal summary."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _CRITERIA.append((name, bool(ok), detail))
        assert ok, f"{name} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def small_frames() -> list[bytes]:
    """120 distinct 16x16 colour JPEGs (with DHT)."""
    return fixtures.distinct_frames(7, 120, 16, 16)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    fixtures.write_corpus(root, seed=0)
    return root


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def noise_raster(seed: int, h: int = 64, w: int = 64, c: int = 3) -> Raster:
    return Raster(np.random.default_rng(seed).integers(0, 256, (h, w, c), dtype=np.uint8))


def jpeg_of(r: Raster, q: int = 90) -> bytes:
    return encode_jpeg(r, q)
