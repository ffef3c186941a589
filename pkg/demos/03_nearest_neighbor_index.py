"""
Exact and inverted-file nearest-neighbor search
===============================================

The blocker retrieves candidates by k-nearest-neighbor probes over
embedding matrices.  The exact backend scans all squared euclidean
distances; the ivf backend first clusters rows into cells with k-means
and only scans the cells nearest the query.
"""

import numpy as np

from erloop.indexing import ExactIndex, IndexConfig, build_index, probe

rng = np.random.default_rng(5)
vectors = rng.standard_normal((500, 16))
query = vectors[42] + 0.05 * rng.standard_normal(16)  # a noisy copy of row 42

# Exact search: ties always broken by ascending row id.
exact = ExactIndex(vectors)
print("exact   :", probe(exact, query, k=3))

# IVF search with the default probe width: fast, may miss neighbors that
# fell into unprobed cells.
ivf = build_index(vectors, IndexConfig(backend="ivf", ivf_nlist=25, ivf_nprobe=3))
print("ivf p=3 :", probe(ivf, query, k=3))

# Probing every cell makes ivf exhaustive, so it must agree with exact
# search down to the tie order.
full = build_index(vectors, IndexConfig(backend="ivf", ivf_nlist=25, ivf_nprobe=25))
print("ivf full:", probe(full, query, k=3))
print("exhaustive ivf == exact:",
      [i for i, _ in probe(full, query, 3)] == [i for i, _ in probe(exact, query, 3)])
