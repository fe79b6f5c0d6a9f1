"""Simulating lattice walks and building their range graphs.

Run as a script or cell-by-cell in an editor that understands `# %%`.
"""

# %%
# A walk is produced by a counter-based generator keyed by (seed, stream),
# so any (d, n, seed, stream) quadruple names one reproducible trajectory.
from rwrange_lab import simulate_walk

path = simulate_walk(d=5, n=1000, seed=0, stream=0)
print("dimension:", path.d)
print("steps:", path.n)
print("start:", path.point(0).coords)
print("end:", path.point(1000).coords)

# %%
# The same quadruple always gives the same walk; a different stream gives an
# independent one.
again = simulate_walk(d=5, n=1000, seed=0, stream=0)
other = simulate_walk(d=5, n=1000, seed=0, stream=1)
print("identical replay:", (path.coords == again.coords).all())
print("distinct stream differs:", (path.coords != other.coords).any())

# %%
# Every step moves by exactly one unit along one axis.
import numpy as np

steps = np.diff(path.coords, axis=0)
print("unit steps only:", (np.abs(steps).sum(axis=1) == 1).all())

# %%
# The range graph keeps one vertex per visited site and one edge per
# traversed bond, both deduplicated.
from rwrange_lab import build_range_graph

graph = build_range_graph(path)
print("vertices:", graph.num_vertices, "of", path.n + 1, "positions")
print("edges:", graph.edge_count)
print("endpoint vertex ids:", graph.endpoints)

# %%
# Sub-segments of a walk expose the same interface, so observables can be
# evaluated on any time window [a, b] without copying coordinates.
middle = path.segment(250, 750)
print("segment steps:", middle.length)
print("segment graph vertices:", build_range_graph(middle).num_vertices)

# %%
# Paths round-trip through a compact binary dump, byte for byte.
import io

from rwrange_lab import dump_path, load_path

buffer = io.BytesIO()
dump_path(path, buffer)
buffer.seek(0)
restored = load_path(buffer)
print("dump size (bytes):", len(buffer.getvalue()))
print("round trip exact:", (restored.coords == path.coords).all())
