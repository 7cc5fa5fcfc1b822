"""Vertex partitions, characteristic matrices and almost equitable partitions.

A partition is almost equitable (AEP) when every vertex of a cell ``C_p``
receives the same total effective weight (edge weight divided by its own
mass) from the edges running to any other cell ``C_q``. Equivalently the
column space of the characteristic matrix is invariant under ``M^{-1} L``.
Both tests are implemented here, separately, so that each can serve as an
oracle for the other.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import InputError
from .graph import DAMPER, EDGE_KINDS, SPRING, Edge, NetworkGraph, effective_laplacian

DEFAULT_TOL = 1e-9
DEFAULT_ENUMERATION_CAP = 12


@dataclass(frozen=True)
class Partition:
    """Ordered cells of 0-based vertex indices covering ``range(n)``."""

    cells: tuple

    def __post_init__(self):
        cells = tuple(tuple(sorted(int(v) for v in c)) for c in self.cells)
        if any(len(c) == 0 for c in cells):
            raise InputError("partition cells must be nonempty")
        flat = [v for c in cells for v in c]
        if len(set(flat)) != len(flat):
            raise InputError("partition cells overlap")
        if sorted(flat) != list(range(len(flat))):
            raise InputError(f"partition cells must cover 0..{len(flat) - 1} exactly")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Build from a cell label per vertex; cells are ordered by label."""
        groups: dict = {}
        for v, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(v)
        return cls(tuple(groups[k] for k in sorted(groups)))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(tuple((i,) for i in range(n)))

    @classmethod
    def whole(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),))

    @property
    def n(self) -> int:
        return sum(len(c) for c in self.cells)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def labels(self) -> np.ndarray:
        """Cell index of every vertex."""
        lab = np.empty(self.n, dtype=int)
        for p, cell in enumerate(self.cells):
            lab[list(cell)] = p
        return lab

    def canonical(self) -> "Partition":
        """Same partition with cells sorted by their smallest vertex."""
        return Partition(tuple(sorted(self.cells, key=min)))

    def relabeled(self, perm: Sequence[int]) -> "Partition":
        return Partition(tuple(tuple(perm[v] for v in c) for c in self.cells))

    def is_refinement_of(self, other: "Partition") -> bool:
        lab = other.labels
        return all(len({lab[v] for v in c}) == 1 for c in self.cells)


def characteristic_matrix(part: Partition, n: Optional[int] = None) -> np.ndarray:
    """Binary n x n_cells matrix whose columns indicate the cells."""
    if n is not None and n != part.n:
        raise InputError(f"partition covers {part.n} vertices, graph has {n}")
    P = np.zeros((part.n, part.n_cells))
    P[np.arange(part.n), part.labels] = 1.0
    return P


@dataclass
class AepWitness:
    """Evidence for or against almost equitability.

    ``sums[(p, q)]`` lists, for each vertex of cell p (in cell order), the
    effective weight it receives from cell q; ``spreads[(p, q)]`` is the
    max-min range of that list. ``residual`` is the relative Frobenius norm
    of the part of ``L_eff P`` lying outside ``im P``.
    """

    verdict: bool
    method: str
    tol: float
    residual: float
    sums: dict = field(default_factory=dict)
    spreads: dict = field(default_factory=dict)

    @property
    def max_spread(self) -> float:
        return max(self.spreads.values(), default=0.0)

    def to_dict(self) -> dict:
        """JSON-friendly view using 1-based cell numbers."""
        return {
            "verdict": bool(self.verdict),
            "method": self.method,
            "tol": self.tol,
            "residual": float(self.residual),
            "pairs": [
                {"cells": [p + 1, q + 1],
                 "sums": [float(s) for s in self.sums[(p, q)]],
                 "spread": float(self.spreads[(p, q)])}
                for (p, q) in sorted(self.sums)
            ],
        }


def _received_weights(g: NetworkGraph, part: Partition, kind: Optional[str]) -> np.ndarray:
    # (i, q): effective weight vertex i receives from edges into cell q.
    lab = part.labels
    T = np.zeros((g.n, part.n_cells))
    m = g.mass_vector
    for idx in g.edge_indices(kind):
        e = g.edges[idx]
        T[e.tail, lab[e.head]] += e.weight / m[e.tail]
        T[e.head, lab[e.tail]] += e.weight / m[e.head]
    return T


def _pair_table(g, part, kind):
    T = _received_weights(g, part, kind)
    sums, spreads, ok_scale = {}, {}, {}
    for p, cell in enumerate(part.cells):
        for q in range(part.n_cells):
            if p == q:
                continue
            s = T[list(cell), q]
            sums[(p, q)] = s
            spreads[(p, q)] = float(s.max() - s.min())
            ok_scale[(p, q)] = 1.0 + abs(float(s.mean()))
    return sums, spreads, ok_scale


def subspace_residual(L_eff: np.ndarray, part: Partition) -> float:
    """||(I - P (P^T P)^{-1} P^T) L_eff P||_F / max(1, ||L_eff P||_F)."""
    P = characteristic_matrix(part, L_eff.shape[0])
    Y = L_eff @ P
    sizes = P.sum(axis=0)
    cell_means = (P.T @ Y) / sizes[:, None]
    outside = Y - P @ cell_means
    return float(np.linalg.norm(outside) / max(1.0, np.linalg.norm(Y)))


def check_aep_definition(g: NetworkGraph, part: Partition, kind: Optional[str] = DAMPER,
                         tol: float = DEFAULT_TOL) -> AepWitness:
    """Combinatorial test: equal received effective weight across each cell."""
    characteristic_matrix(part, g.n)
    sums, spreads, scale = _pair_table(g, part, kind)
    verdict = all(spreads[k] <= tol * scale[k] for k in spreads)
    rho = subspace_residual(effective_laplacian(g, kind), part)
    return AepWitness(verdict, "definition", tol, rho, sums, spreads)


def check_aep_subspace(g: NetworkGraph, part: Partition, kind: Optional[str] = DAMPER,
                       tol: float = DEFAULT_TOL) -> AepWitness:
    """Invariant-subspace test: ``L_eff im P`` contained in ``im P``."""
    rho = subspace_residual(effective_laplacian(g, kind), part)
    sums, spreads, _ = _pair_table(g, part, kind)
    return AepWitness(rho <= tol, "subspace", tol, rho, sums, spreads)


def is_aep(g: NetworkGraph, part: Partition, kind: Optional[str] = DAMPER,
           tol: float = DEFAULT_TOL) -> bool:
    return check_aep_subspace(g, part, kind, tol).verdict


# -- exhaustive enumeration ---------------------------------------------------

def restricted_growth_strings(n: int) -> Iterator[tuple]:
    """All restricted growth strings of length n in lexicographic order.

    ``a[0] = 0`` and ``a[i] <= 1 + max(a[:i])``; each string labels one set
    partition with cells numbered by first appearance.
    """
    if n <= 0:
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield tuple(a)
        j = n - 1
        while j > 0 and a[j] == b[j]:
            j -= 1
        if j == 0:
            return
        a[j] += 1
        nb = b[j] + (a[j] == b[j])
        for k in range(j + 1, n):
            a[k] = 0
            b[k] = nb


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _label_batches(n: int, batch: int) -> Iterator[np.ndarray]:
    it = restricted_growth_strings(n)
    while True:
        chunk = list(itertools.islice(it, batch))
        if not chunk:
            return
        yield np.array(chunk, dtype=np.intp)


def _one_hot(labels: np.ndarray, n: int) -> np.ndarray:
    B = labels.shape[0]
    P = np.zeros((B, n, n))
    P[np.arange(B)[:, None], np.arange(n)[None, :], labels] = 1.0
    return P


def batch_definition_verdicts(g: NetworkGraph, labels: np.ndarray, kind: Optional[str] = DAMPER,
                              tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorised combinatorial AEP test over many label vectors (shape B x n)."""
    n = g.n
    A = np.zeros((n, n))
    m = g.mass_vector
    for idx in g.edge_indices(kind):
        e = g.edges[idx]
        A[e.tail, e.head] += e.weight / m[e.tail]
        A[e.head, e.tail] += e.weight / m[e.head]
    P = _one_hot(labels, n)
    T = A @ P                                   # B x n x n: weight vertex i gets from cell q
    own = P.transpose(0, 2, 1)                  # B x p x i membership
    big = np.where(own[:, :, :, None] > 0, T[:, None, :, :], np.nan)  # B x p x i x q
    with warnings.catch_warnings():
        # padded (empty) cells give all-NaN slices
        warnings.simplefilter("ignore", RuntimeWarning)
        hi = np.nanmax(big, axis=2)
        lo = np.nanmin(big, axis=2)
        mean = np.nanmean(big, axis=2)
    spread = np.nan_to_num(hi - lo, nan=0.0)
    scale = 1.0 + np.abs(np.nan_to_num(mean, nan=0.0))
    bad = spread > tol * scale
    diag = np.arange(n)
    bad[:, diag, diag] = False
    return ~bad.any(axis=(1, 2))


def batch_subspace_residuals(g: NetworkGraph, labels: np.ndarray,
                             kind: Optional[str] = DAMPER) -> np.ndarray:
    """Vectorised subspace residuals over many label vectors (shape B x n)."""
    n = g.n
    L_eff = effective_laplacian(g, kind)
    P = _one_hot(labels, n)
    Y = L_eff @ P
    sizes = P.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.nan_to_num(np.einsum("bip,biq->bpq", P, Y) / sizes[:, :, None])
    outside = Y - P @ means
    num = np.linalg.norm(outside, axis=(1, 2))
    den = np.maximum(1.0, np.linalg.norm(Y, axis=(1, 2)))
    return num / den


def enumerate_aeps(g: NetworkGraph, kind: Optional[str] = DAMPER, tol: float = DEFAULT_TOL,
                   max_n: int = DEFAULT_ENUMERATION_CAP, batch: int = 4096) -> list[Partition]:
    """Every almost equitable partition of ``g``, in restricted-growth-string order.

    Raises
    ------
    InputError
        If ``g.n`` exceeds ``max_n`` (Bell(n) partitions would be checked).
    """
    if g.n > max_n:
        raise InputError(f"refusing to enumerate {bell_number(g.n)} partitions of "
                         f"{g.n} vertices (cap is n <= {max_n})")
    found = []
    for labels in _label_batches(g.n, batch):
        ok = batch_definition_verdicts(g, labels, kind, tol)
        found.extend(Partition.from_labels(row) for row in labels[ok])
    return found


# -- generator of graphs with a known AEP -------------------------------------

@dataclass(frozen=True)
class QuotientSpec:
    """Recipe for a graph that is almost equitable by construction.

    Vertices are numbered cell by cell. Every pair of cells listed in
    ``damper_weights`` / ``spring_weights`` is joined by a complete bipartite
    set of edges of that weight. ``intra_edges`` holds extra
    ``(tail, head, weight, kind)`` edges whose endpoints must share a cell.
    ``cell_masses[p]`` is a scalar or a per-vertex list, which must be uniform.
    """

    cell_sizes: tuple
    cell_masses: tuple
    damper_weights: Mapping = field(default_factory=dict)
    spring_weights: Mapping = field(default_factory=dict)
    intra_edges: tuple = ()
    forced: tuple = ()


def synthesize_aep_graph(spec: QuotientSpec) -> tuple[NetworkGraph, Partition]:
    sizes = [int(s) for s in spec.cell_sizes]
    if not sizes or any(s <= 0 for s in sizes):
        raise InputError("cell sizes must be positive")
    if len(spec.cell_masses) != len(sizes):
        raise InputError("need masses for every cell")
    starts = np.concatenate([[0], np.cumsum(sizes)])
    cells = [tuple(range(starts[p], starts[p + 1])) for p in range(len(sizes))]
    masses = []
    for p, mass in enumerate(spec.cell_masses):
        vals = [float(mass)] * sizes[p] if np.isscalar(mass) else [float(x) for x in mass]
        if len(vals) != sizes[p]:
            raise InputError(f"cell {p} needs {sizes[p]} masses")
        if max(vals) != min(vals):
            raise InputError(f"masses in cell {p} are not uniform: {vals}")
        masses.extend(vals)
    edges = []
    for kind, table in ((DAMPER, spec.damper_weights), (SPRING, spec.spring_weights)):
        for (p, q), w in sorted(table.items()):
            if p == q or not (0 <= p < len(sizes) and 0 <= q < len(sizes)):
                raise InputError(f"bad cell pair {(p, q)}")
            edges.extend(Edge(i, j, float(w), kind) for i in cells[p] for j in cells[q])
    lab = np.repeat(np.arange(len(sizes)), sizes)
    for e in spec.intra_edges:
        e = Edge(int(e[0]), int(e[1]), float(e[2]), *(e[3:] if len(e) > 3 else ()))
        if e.kind not in EDGE_KINDS:
            raise InputError(f"unknown edge kind {e.kind!r}")
        if lab[e.tail] != lab[e.head]:
            raise InputError(f"intra-cell edge {e[:2]} crosses cells")
        edges.append(e)
    return NetworkGraph(masses, edges, spec.forced), Partition(tuple(cells))

