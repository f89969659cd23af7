# %% [markdown]
# Extracting frames from a motion-JPEG AVI
#
# Every frame of an MJPEG video is a complete JPEG file.  Pulling frames out
# of the container is a matter of walking the RIFF chunks and copying bytes,
# so nothing is re-encoded and nothing is lost.

# %%
import tempfile
from pathlib import Path

from panocull import avi, fixtures, jpegtables
from panocull.raster import decode_jpeg

frames = fixtures.distinct_frames(seed=1, n=10, width=64, height=48)
data = avi.write_fixture_avi(frames, fps=30)
print(f"fixture video: {len(frames)} frames, {len(data)} bytes")

# %% The chunk tree
root = avi.parse_riff(data)
for chunk in root.children:
    print(chunk.fourcc, chunk.form, chunk.size)

# %% Index and extract
index = avi.index_video(root)
print(f"{len(index)} frames, {index.fps:.2f} fps, {index.duration_s:.3f} s")
out = [avi.extract_frame(data, index, i) for i in range(len(index))]
print("byte-identical to what went in:", out == frames)

# %% [markdown]
# Some cameras write "AVI1" frames with the Huffman tables left out to save
# space.  The extractor splices in the standard tables so ordinary decoders
# can read the result.

# %%
stripped = [jpegtables.strip_dht(f) for f in frames]
print("bytes saved per frame:", len(frames[0]) - len(stripped[0]))
data = avi.write_fixture_avi(stripped, fps=30, handler=b"AVI1")
index = avi.index_video(avi.parse_riff(data))
fixed = avi.extract_frame(data, index, 0)
print("has tables again:", jpegtables.has_dht(fixed))
print("same pixels:", decode_jpeg(fixed) == decode_jpeg(frames[0]))

# %%
with tempfile.TemporaryDirectory() as tmp:
    for i, f in enumerate(out):
        (Path(tmp) / f"{i:04d}.jpg").write_bytes(f)
    print(sorted(p.name for p in Path(tmp).iterdir())[:3], "...")
