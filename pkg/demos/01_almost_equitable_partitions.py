"""Which ways of clustering a small network are almost equitable?

A partition is almost equitable when every vertex of a cell receives the
same total effective weight (edge weight over own mass) from each other
cell. We test two partitions of a three-vertex path, then list every
almost equitable partition of a slightly larger network.
"""

import numpy as np

from netclust import NetworkGraph, Partition, check_aep_definition, check_aep_subspace, enumerate_aeps

# 1 -- 2 -- 3, unit masses and weights, input at vertex 1 (0-based ids in code)
path = NetworkGraph(masses=[1, 1, 1], edges=[(0, 1, 1.0), (1, 2, 1.0)], forced=[0])

for cells in [((0, 2), (1,)), ((0, 1), (2,))]:
    part = Partition(cells)
    w = check_aep_definition(path, part)
    s = check_aep_subspace(path, part)
    print("cells", [[v + 1 for v in c] for c in part.cells])
    for (p, q), sums in w.sums.items():
        print(f"   weight into cell {p + 1} from cell {q + 1}: {np.round(sums, 3)}")
    print(f"   verdict {w.verdict}, subspace residual {s.residual:.2e}")

# The ends of the path see the middle alike, so {1,3},{2} passes, while
# {1,2},{3} fails because vertex 1 has no edge to vertex 3.

# A heavier hub with three light leaves: the leaves can be merged in any
# combination, and the hub must stay on its own or join everyone.
hub = NetworkGraph([4.0, 1.0, 1.0, 1.0], [(0, 1, 2.0), (0, 2, 2.0), (0, 3, 2.0)], forced=[1])
found = enumerate_aeps(hub)
print(f"\n{len(found)} almost equitable partitions of the hub network:")
for part in found:
    print("  ", [[v + 1 for v in c] for c in part.cells])
