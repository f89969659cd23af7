# %% [markdown]
# The whole pipeline
#
# Two "cameras" are processed separately and their picks pooled into one
# directory: extract, drop duplicates, optionally cut to a time window, rank
# by sharpness, keep the best tenth, flag clipped exposures, deblock.
# A manifest records what happened to every frame.

# %%
import collections
import tempfile
from pathlib import Path

from panocull import fixtures
from panocull.pipeline import PipelineConfig, VideoInput, run

with tempfile.TemporaryDirectory() as tmp:
    corpus = Path(tmp) / "corpus"
    fixtures.write_corpus(corpus, seed=0)

    cfg = PipelineConfig(
        inputs=(
            VideoInput(str(corpus / "avi/clean.avi"), "a"),
            VideoInput(str(corpus / "avi/duplicates.avi"), "b"),
        ),
        out_dir=str(Path(tmp) / "picked"),
    )
    manifest = run(cfg)

    # %%
    for cam in ("a", "b"):
        counts = collections.Counter(r["status"] for r in manifest.rows if r["camera_id"] == cam)
        print(cam, dict(counts))

    # %%
    print(sorted(p.name for p in Path(cfg.out_dir).iterdir())[:6])
    print(manifest.to_jsonl().splitlines()[1])
