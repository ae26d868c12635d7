# %% [markdown]
# # Decomposing K_256 into regular bipartite pieces
#
# Every piece is a regular bipartite subgraph and every edge lands in exactly
# one piece. The part count is compared with log2(d) + 36.

# %%
import time

from regbip.generators import complete
from regbip.pipeline import PipelineParams, decompose, part_bound

# %%
g = complete(256)
t0 = time.perf_counter()
res = decompose(g, PipelineParams(seed=1))
print(f"{time.perf_counter() - t0:.1f}s")

# %%
rep = res.report
print("verified:", rep.ok)
print("parts:", rep.part_count, "bound:", round(part_bound(255), 2))
print("piece degrees:", rep.piece_degrees)

# %%
for stage in res.trace["stages"]:
    print(stage["stage"], {k: v for k, v in stage.items() if k != "stage"})
