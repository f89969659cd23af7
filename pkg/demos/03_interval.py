# %% [markdown]
# From a time window to frame numbers
#
# The useful part of a flight is often a short stretch, say seconds 50 to 60
# of a 100 second recording.  The window is turned into a fraction of the
# duration and applied to the frame numbering.  If frames were dropped the
# mapping is only approximate, so look at the end frames before stitching.

# %%
from panocull.interval import IntervalSpec, map_interval, parse_interval

spec = IntervalSpec(50, 60)
print("100 s, frames 0..3000:", map_interval(spec, duration_s=100.0, frame_count=3001))

# %% The same window written as percentages
print(parse_interval("50%", "60%"))
print(map_interval(parse_interval("50%", "60%"), 100.0, 3001))

# %% A shorter clip
for start, end in [(0, 10), (5, 7.5), (9, 10)]:
    print((start, end), map_interval(IntervalSpec(start, end), 10.0, 300))
