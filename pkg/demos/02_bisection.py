# %% [markdown]
# # A balanced bisection with controlled degrees
#
# Vertices are paired up and each pair is split randomly. Any vertex whose
# neighbourhood lands too lopsided triggers a local resample until none are
# left. A greedy pair-flip pass then tightens the counts.

# %%
import numpy as np

from regbip.bisect import initial_bisection
from regbip.generators import random_regular

# %%
g = random_regular(400, 64, seed=3)
res = initial_bisection(g, 64, rng=np.random.default_rng(3), polish=True)
X, Y = res.bipartition.left, res.bipartition.right
print("sides", len(X), len(Y))
print("resamples", res.stats.resamples, "polish moves", res.polish_moves)

# %%
inx = np.zeros(g.n)
inx[list(X)] = 1
counts = g.adjacency_matrix() @ inx
print("|N(v) & X| ranges over", int(counts.min()), "..", int(counts.max()), "around", 64 / 2)
print("allowed slack d^(2/3) =", round(64 ** (2 / 3), 2))
