# %% [markdown]
# Removing duplicate frames
#
# Cheap cameras repeat a frame when they fall behind, to keep the frame rate
# up.  The repeats are byte-for-byte copies, so an exact comparison finds
# them.  Comparing sizes first means most frames never get hashed.

# %%
from dataclasses import dataclass

from panocull import fixtures
from panocull.dedup import cull_consecutive, cull_global


@dataclass(frozen=True)
class Frame:
    ordinal: int
    data: bytes


payloads = fixtures.inject_duplicates(seed=3, n=60)
frames = [Frame(i, p) for i, p in enumerate(payloads)]
print("frames:", len(frames), "distinct payloads:", len(set(payloads)))

# %% Only runs of identical neighbours
c = cull_consecutive(frames)
print("consecutive pass keeps", len(c.kept), "removes", len(c.removed))

# %% Any repeat anywhere
g = cull_global(frames)
print("global pass keeps", len(g.kept), "removes", len(g.removed))
print("frames hashed:", g.digests_computed, "of", len(frames))
print("first few removals:", list(g.duplicate_map().items())[:5])
