# %% [markdown]
# # Spectral certificates and edge mixing
#
# lambda(G) is the largest nontrivial eigenvalue magnitude of a d-regular
# graph. Small lambda means edges spread out evenly between any two vertex
# sets, which the decomposition relies on.

# %%
import numpy as np

from regbip.generators import complete, petersen, random_regular
from regbip.spectral import certify, mixing_check

# %%
for name, g in [("K_6", complete(6)), ("Petersen", petersen()), ("rr(100,10)", random_regular(100, 10, seed=7))]:
    cert = certify(g)
    print(f"{name:12s} d={cert.d:3d} lambda={cert.lambda_:.4f} budget={cert.budget:.3f} ok={cert.satisfied}")

# %% [markdown]
# The dense solver and the in-house Jacobi sweep agree to rounding.

# %%
g = random_regular(100, 10, seed=7)
dense = certify(g, method="dense").lambda_
jac = certify(g, method="jacobi").lambda_
print("dense", dense, "jacobi", jac, "diff", abs(dense - jac))

# %% [markdown]
# Mixing: the number of S-T edge pairs stays within lambda * sqrt(|S||T|)
# of the random-graph expectation d|S||T|/n.

# %%
rng = np.random.default_rng(0)
cert = certify(g)
worst = 0.0
for _ in range(200):
    s = rng.choice(100, size=rng.integers(1, 100), replace=False)
    t = rng.choice(100, size=rng.integers(1, 100), replace=False)
    lhs, rhs, ok = mixing_check(g, cert, s, t)
    worst = max(worst, lhs / rhs if rhs else 0.0)
print("worst lhs/rhs over 200 random pairs:", round(worst, 3))
