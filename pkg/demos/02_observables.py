"""The three endpoint observables: graph distance, cut points, resistance."""

# %%
# All three observables measure how well the two ends of a walk segment stay
# connected through the walk's own trace.  On the same segment they always
# satisfy cut_points <= resistance <= distance.
from rwrange_lab import ObservableKind, observable, simulate_walk

path = simulate_walk(d=5, n=2000, seed=0, stream=7)
for kind in ObservableKind:
    print(f"{kind.value:>10}:", observable(path, kind))

# %%
# Graph distance is the BFS shortest path on the range graph; a slower
# Dijkstra solve on the same graph is kept as a cross-check.
from rwrange_lab import build_range_graph, graph_distance, graph_distance_dijkstra

graph = build_range_graph(path)
print("BFS:", graph_distance(graph))
print("Dijkstra:", graph_distance_dijkstra(graph))

# %%
# A cut time is an i whose strict past and future traces share no site.
# The production counter runs a sweep over the segment; the quadratic naive
# version recomputes each disjointness from scratch.
from rwrange_lab import cut_point_count, cut_point_count_naive

print("cut points (sweep):", cut_point_count(path))
print("cut points (naive):", cut_point_count_naive(path))

# %%
# Effective resistance treats every traversed bond as a unit resistor.
# A straight walk of n steps is n resistors in series.
import numpy as np

from rwrange_lab import WalkPath, effective_resistance, effective_resistance_dense

straight = np.zeros((9, 5), dtype=np.int64)
straight[:, 0] = np.arange(9)
rod = WalkPath(straight)
rod_graph = build_range_graph(rod)
print("series resistance of 8 bonds:", effective_resistance(rod_graph))

# %%
# The conjugate-gradient solve agrees with a dense grounded-Laplacian solve.
print("CG: ", effective_resistance(graph))
print("dense:", effective_resistance_dense(graph))

# %%
# Adding edges can only lower resistance (Rayleigh monotonicity): the trace
# of a superset segment contains the subset's trace plus whatever shortcuts
# the surrounding walk happened to build.  At d=4 the walk revisits often
# enough for the drop to be visible.
from rwrange_lab import resistance_between

low_d = simulate_walk(d=4, n=2000, seed=0, stream=10)
a = low_d.point(500)
b = low_d.point(1000)
inner = build_range_graph(low_d.segment(500, 1000))
outer = build_range_graph(low_d.segment(0, 1500))
inner_r = resistance_between(inner, inner.vertex_index[a], inner.vertex_index[b])
outer_r = resistance_between(outer, outer.vertex_index[a], outer.vertex_index[b])
print("resistance in [500,1000] trace:", round(inner_r, 4))
print("same terminals in [0,1500] trace:", round(outer_r, 4), "(never larger)")
