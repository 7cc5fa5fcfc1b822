"""Clustering a mass-spring-damper network.

Springs add potential energy and oscillations, but if the partition is
almost equitable for the springs and the dampers at once, the reduced
model misses exactly the same output energy as in the damper-only case.
"""

from netclust import DAMPER, SPRING, NetworkGraph, Partition
from netclust.second_order import (assemble_second_order, check_joint_aep, h2_error_second_order,
                                   reduce_second_order)


def ring(dampers):
    springs = [(i, (i + 1) % 4, 2.0, SPRING) for i in range(4)]
    return NetworkGraph([1.0] * 4, springs + [(a, b, 0.5, DAMPER) for a, b in dampers], forced=[0])


def show(g, cells):
    part = Partition(cells)
    damper, spring = check_joint_aep(g, part)
    reduced, _ = reduce_second_order(g, part)
    oracle, formula = h2_error_second_order(g, part)
    print(f"cells {[[v + 1 for v in c] for c in cells]}: "
          f"damper AEP {damper.verdict}, spring AEP {spring.verdict}")
    print(f"   reduced model: {reduced.n_springs} spring states + {reduced.n} momenta")
    print(f"   squared H2 error: numerical {oracle:.8f}, formula {formula:.8f}")


# a ring of four unit masses with a spring and a damper on every side
g = ring([(0, 1), (1, 2), (2, 3), (3, 0)])
full = assemble_second_order(g)
print(f"full model: {full.n_springs} spring states + {full.n} momenta\n")
for cells in [((0, 2), (1, 3)), ((0, 1), (2, 3)), ((0,), (1, 2, 3))]:
    show(g, cells)

# The last split is not equitable (vertex 3 has no edge to vertex 1), and
# although the input vertex sits alone the reduced model is no longer exact.

# With dampers only on the diagonals the damper graph falls apart into two
# pieces. The partition below is still equitable for both edge kinds, but
# the formula assumes a connected damper graph and is off by a factor of two.
print("\ndampers on the diagonals only:")
show(ring([(0, 2), (1, 3)]), ((0, 1), (2, 3)))
