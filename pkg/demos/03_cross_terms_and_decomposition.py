"""Cross terms and the exact dyadic decomposition of an observable."""

# %%
# Splitting a segment at m creates a subadditivity defect
#   E = X[0,m] + X[m,t] - X[0,t]
# which is nonnegative for all three observables: gluing the two halves
# can only help the endpoints connect.
from rwrange_lab import ObservableKind, cross_term, simulate_walk

path = simulate_walk(d=6, n=4096, seed=0, stream=3)
for kind in ObservableKind:
    term = cross_term(path, kind, split=2048, end=4096)
    print(f"{kind.value:>10}: E = {term.value}")

# %%
# Applying the split recursively K times rewrites X[0,n] exactly:
#   X[0,n] = sum of 2^K leaf observables - sum of all cross terms,
# with one cross term per internal node of the dyadic tree.
from rwrange_lab import dyadic_decompose

decomposition = dyadic_decompose(path, ObservableKind.CUT_POINTS, levels=4)
leaf_sum = sum(decomposition.leaves)
error_sum = sum(sum(level) for level in decomposition.errors)
print("X[0,n]:", decomposition.total)
print("leaves:", len(decomposition.leaves), "summing to", leaf_sum)
print("cross terms:", sum(len(level) for level in decomposition.errors))
print("identity residue:", decomposition.total - (leaf_sum - error_sum))

# %%
# Level k holds the 2^k cross terms of splits at scale n / 2^k; coarse
# splits carry the big defects, fine splits the small ones.
for k, level in enumerate(decomposition.errors):
    print(f"level {k}: {len(level):2d} terms, sum {sum(level):.1f}")

# %%
# Independent draws of the equal-split cross term at a given half-length
# feed the tail and variance studies; they stream in (seed, stream) order.
from rwrange_lab import cross_term_tail_samples

values = cross_term_tail_samples(d=6, n=512, kind=ObservableKind.CUT_POINTS,
                                 samples=2000, seed=0)
print("samples:", values.size)
print("mean:", values.mean())
print("P(E >= 1):", (values >= 1).mean())
print("max:", values.max())

# %%
# Cross-term draws serialize to the shared CSV layout for external tools.
import io
from pathlib import Path
import tempfile

from rwrange_lab import read_csv, tail_sample_rows, write_cross_term_csv

rows = tail_sample_rows(6, 512, ObservableKind.CUT_POINTS, values[:5], seed=0)
target = Path(tempfile.mkdtemp()) / "cross-terms.csv"
write_cross_term_csv(target, rows)
columns, loaded = read_csv(target)
print("columns:", columns)
print("first row:", loaded[0])
