# %% [markdown]
# Ranking frames by sharpness
#
# Blurring a sharp image removes detail, so its JPEG gets much smaller.
# Blurring a frame that is already soft hardly changes it.  The ratio of the
# two encoded sizes is therefore a blur score: near 1 is blurry, lower is
# sharper.  Working on a 4x smaller copy makes this 16 times cheaper.

# %%
from panocull import fixtures
from panocull.blur import BlurParams, BlurScore, cull_top_fraction, rank, score_raster
from panocull.raster import downsample

params = BlurParams()
print(params)

source = fixtures.detailed_image(seed=0)
small = downsample(source, params.downsample_factor)
print(f"{source.width}x{source.height} -> {small.width}x{small.height}")

# %% A ladder of progressively blurrier copies
ladder = fixtures.blur_ladder(seed=0)
scores = [BlurScore(i, score_raster(r, params)) for i, r in enumerate(ladder)]
for sigma, s in zip(fixtures.LADDER_SIGMAS, scores):
    print(f"sigma {sigma:>3g}: score {s.score:.3f}")

# %% Sharpest first
order = rank(scores)
print("ranking:", [fixtures.LADDER_SIGMAS[i] for i in order])
print("keep top 40%:", cull_top_fraction(order, 0.4))
