# %% [markdown]
# Taking the edge off JPEG blocks
#
# At low quality JPEG shows its 8x8 grid.  Steps between neighbouring pixels
# are then larger across block edges than inside blocks.  The filter spreads
# each edge step over two pixels on either side, and picks the weakest
# strength that makes the typical edge step match the typical inside step.

# %%
from panocull import fixtures
from panocull.deblock import boundary_stats, deblock, mse

pristine = fixtures.gradient_texture(seed=0)
damaged = fixtures.roundtrip(pristine, quality=10)

before = boundary_stats(damaged)
print("boundary medians:", before.boundary_median)
print("interior medians:", before.interior_median)

# %%
res = deblock(damaged, tolerance=0.10)
print("strength per channel:", [round(s, 3) for s in res.strength])
print("converged:", res.converged)
print("boundary medians after:", res.after.boundary_median)
print(f"MSE vs original: {mse(damaged, pristine):.1f} -> {mse(res.raster, pristine):.1f}")

# %% A clean image is left alone
clean = fixtures.roundtrip(pristine, quality=95)
print("changed:", deblock(clean).changed)
