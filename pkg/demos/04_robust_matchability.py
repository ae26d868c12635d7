# %% [markdown]
# # Probing robust matchability
#
# Delete a random subgraph of small max degree from the cross graph G[X, Y],
# pick an f with f(X) = f(Y) in a narrow window, and ask for an f-factor.
# A failure comes back with a violated Ore cut.

# %%
import numpy as np

from regbip.bisect import initial_bisection
from regbip.factor import probe_robust_matchability
from regbip.generators import random_regular
from regbip.graph import induced_bipartite

# %%
g = random_regular(400, 64, seed=3)
split = initial_bisection(g, 64, rng=np.random.default_rng(3), polish=True)
h = induced_bipartite(g, split.bipartition)
print("cross edges", h.graph.m)

# %%
rep = probe_robust_matchability(h, d=64, rho=1 / 16, alpha=1 / 4, gamma=1 / 30, trials=50, rng=np.random.default_rng(3))
print(rep.successes, "/", rep.trials, "succeeded")
if rep.first_failure:
    print("first failure:", rep.first_failure)
