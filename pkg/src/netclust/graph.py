"""Vertex- and edge-weighted graphs and the matrices built from them.

Vertices are indexed from 0 internally. Every edge carries an explicit
orientation (tail -> head), a nonnegative weight and a kind tag which is
either ``"damper"`` or ``"spring"``. None of the Laplacian-type quantities
depend on the orientation; it is stored only so that this can be checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError

DAMPER = "damper"
SPRING = "spring"
EDGE_KINDS = (DAMPER, SPRING)


class Edge(NamedTuple):
    tail: int
    head: int
    weight: float
    kind: str = DAMPER


@dataclass(frozen=True)
class NetworkGraph:
    """An undirected multigraph with masses on the vertices.

    Parameters
    ----------
    masses : sequence of float
        Strictly positive vertex weights, one per vertex.
    edges : sequence of Edge or tuple
        ``(tail, head, weight[, kind])`` with 0-based vertex indices.
    forced : sequence of int
        Vertex receiving each input channel. Repeats are allowed and give
        separate input columns.
    """

    masses: tuple
    edges: tuple = ()
    forced: tuple = ()
    _mass_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        masses = tuple(float(m) for m in self.masses)
        edges = tuple(Edge(int(e[0]), int(e[1]), float(e[2]), *(e[3:] if len(e) > 3 else ()))
                      for e in self.edges)
        forced = tuple(int(i) for i in self.forced)
        n = len(masses)
        if n == 0:
            raise InputError("graph needs at least one vertex")
        if not all(np.isfinite(m) and m > 0 for m in masses):
            raise InputError(f"masses must be finite and strictly positive, got {masses}")
        for idx, e in enumerate(edges):
            if not (0 <= e.tail < n and 0 <= e.head < n):
                raise InputError(f"edge {idx} references a vertex outside 0..{n - 1}")
            if e.tail == e.head:
                raise InputError(f"edge {idx} is a self-loop at vertex {e.tail}")
            if not (np.isfinite(e.weight) and e.weight >= 0):
                raise InputError(f"edge {idx} has invalid weight {e.weight}")
            if e.kind not in EDGE_KINDS:
                raise InputError(f"edge {idx} has unknown kind {e.kind!r}")
        for i in forced:
            if not 0 <= i < n:
                raise InputError(f"forced vertex {i} out of range 0..{n - 1}")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "forced", forced)
        arr = np.asarray(masses, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "_mass_array", arr)

    @property
    def n(self) -> int:
        return len(self.masses)

    @property
    def mass_vector(self) -> np.ndarray:
        return self._mass_array

    @property
    def total_mass(self) -> float:
        return float(self._mass_array.sum())

    def edge_indices(self, kind: Optional[str] = None) -> list[int]:
        """Positions in ``self.edges`` of the edges passing the kind filter."""
        _check_kind(kind)
        return [i for i, e in enumerate(self.edges) if kind is None or e.kind == kind]

    def edge_weights(self, kind: Optional[str] = None) -> np.ndarray:
        return np.array([self.edges[i].weight for i in self.edge_indices(kind)], dtype=float)

    def reoriented(self, flip: Sequence[bool]) -> "NetworkGraph":
        """Copy with the orientation of edge ``i`` reversed wherever ``flip[i]``."""
        edges = [Edge(e.head, e.tail, e.weight, e.kind) if f else e
                 for e, f in zip(self.edges, flip)]
        return NetworkGraph(self.masses, edges, self.forced)

    def relabeled(self, perm: Sequence[int]) -> "NetworkGraph":
        """Copy where old vertex ``i`` becomes vertex ``perm[i]``."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise InputError("perm must be a permutation of the vertices")
        masses = [0.0] * self.n
        for old, new in enumerate(perm):
            masses[new] = self.masses[old]
        edges = [Edge(perm[e.tail], perm[e.head], e.weight, e.kind) for e in self.edges]
        return NetworkGraph(masses, edges, [perm[i] for i in self.forced])

    def with_weights(self, weights: Sequence[float]) -> "NetworkGraph":
        if len(weights) != len(self.edges):
            raise InputError("need one weight per edge")
        edges = [Edge(e.tail, e.head, float(w), e.kind) for e, w in zip(self.edges, weights)]
        return NetworkGraph(self.masses, edges, self.forced)

    def with_forced(self, forced: Sequence[int]) -> "NetworkGraph":
        return NetworkGraph(self.masses, self.edges, forced)


def _check_kind(kind):
    if kind is not None and kind not in EDGE_KINDS:
        raise InputError(f"kind must be one of {EDGE_KINDS} or None, got {kind!r}")


def incidence_matrix(g: NetworkGraph, kind: Optional[str] = None) -> np.ndarray:
    """n x k incidence matrix: -1 at the tail and +1 at the head of each edge.

    Columns follow the order of ``g.edges`` restricted to ``kind``
    (``None`` keeps every edge).
    """
    idx = g.edge_indices(kind)
    D = np.zeros((g.n, len(idx)))
    for col, i in enumerate(idx):
        e = g.edges[i]
        D[e.tail, col] = -1.0
        D[e.head, col] = 1.0
    return D


def weighted_laplacian(g: NetworkGraph, kind: Optional[str] = None) -> np.ndarray:
    """L = D R D^T for the edges of the given kind."""
    # Assembled edge by edge so that reversing an edge reproduces L bit for bit.
    L = np.zeros((g.n, g.n))
    for i in g.edge_indices(kind):
        e = g.edges[i]
        L[e.tail, e.tail] += e.weight
        L[e.head, e.head] += e.weight
        L[e.tail, e.head] -= e.weight
        L[e.head, e.tail] -= e.weight
    return L


def effective_laplacian(g: NetworkGraph, kind: Optional[str] = None) -> np.ndarray:
    """M^{-1} L: row i holds the edge weights seen by vertex i divided by its mass."""
    return weighted_laplacian(g, kind) / g.mass_vector[:, None]


def input_matrix(g: NetworkGraph) -> np.ndarray:
    """n x m matrix E with a single 1 at row ``forced[j]`` of column j."""
    E = np.zeros((g.n, len(g.forced)))
    for j, i in enumerate(g.forced):
        E[i, j] = 1.0
    return E


def is_connected(g: NetworkGraph, kind: Optional[str] = None) -> bool:
    """Whether the subgraph of strictly positive-weight edges of ``kind`` is connected."""
    if g.n == 1:
        return True
    pairs = [(g.edges[i].tail, g.edges[i].head) for i in g.edge_indices(kind)
             if g.edges[i].weight > 0]
    if len(pairs) < g.n - 1:
        return False
    rows, cols = zip(*pairs)
    adj = coo_matrix((np.ones(len(pairs)), (rows, cols)), shape=(g.n, g.n))
    ncomp, _ = connected_components(adj, directed=False)
    return ncomp == 1
