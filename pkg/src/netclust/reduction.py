"""Clustering-based reduction of first-order network systems.

The full model in momentum coordinates is

    x' = -D R D^T M^{-1} x + E u,    y = R^{1/2} D^T M^{-1} x

over the damper edges. Clustering the vertices by a partition with
characteristic matrix P gives a system of the same form on the quotient
graph: masses are summed per cell, edges inside a cell disappear and
edges between cells survive unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import InputError
from .graph import (DAMPER, Edge, NetworkGraph, incidence_matrix, input_matrix,
                    weighted_laplacian)
from .partition import Partition, characteristic_matrix

MOMENTUM = "momentum"
VELOCITY = "velocity"


@dataclass(frozen=True)
class FirstOrderModel:
    """State-space realisation (A, B, C) of a mass-damper network.

    In momentum coordinates the state is x = M v; in velocity coordinates it
    is v. Both realisations have the same transfer matrix.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    coords: str
    graph: NetworkGraph

    @property
    def order(self) -> int:
        return self.A.shape[0]

    def velocities(self, states: np.ndarray) -> np.ndarray:
        """Vertex velocities for states stacked along the first axis."""
        states = np.asarray(states)
        if self.coords == VELOCITY:
            return states
        return states / self.graph.mass_vector[(...,) + (None,) * (states.ndim - 1)]

    def energy(self, states: np.ndarray) -> np.ndarray:
        """Kinetic energy 1/2 v^T M v of each column of ``states``."""
        v = self.velocities(states)
        m = self.graph.mass_vector.reshape((-1,) + (1,) * (v.ndim - 1))
        return 0.5 * np.sum(m * v * v, axis=0)

    def excess_energy(self, states: np.ndarray) -> np.ndarray:
        """Energy above the consensus limit; equals the output energy still to come."""
        v = self.velocities(states)
        m = self.graph.mass_vector.reshape((-1,) + (1,) * (v.ndim - 1))
        momentum = np.sum(m * v, axis=0)
        return np.maximum(self.energy(states) - 0.5 * momentum ** 2 / self.graph.total_mass, 0.0)


def assemble_first_order(g: NetworkGraph, coords: str = MOMENTUM) -> FirstOrderModel:
    """Realisation of the mass-damper dynamics on the damper edges of ``g``."""
    D = incidence_matrix(g, DAMPER)
    r = g.edge_weights(DAMPER)
    L = weighted_laplacian(g, DAMPER)
    m = g.mass_vector
    E = input_matrix(g)
    Ry = np.sqrt(r)[:, None] * D.T
    if coords == MOMENTUM:
        return FirstOrderModel(-L / m[None, :], E, Ry / m[None, :], coords, g)
    if coords == VELOCITY:
        return FirstOrderModel(-L / m[:, None], E / m[:, None], Ry, coords, g)
    raise InputError(f"coords must be {MOMENTUM!r} or {VELOCITY!r}")


@dataclass(frozen=True)
class ReductionResult:
    """Quotient graph plus the maps linking it to the original graph.

    ``edge_map[i]`` is the index in ``reduced.edges`` of original edge i, or
    ``None`` when the edge lies inside a cell and was dropped.
    """

    original: NetworkGraph
    partition: Partition
    reduced: NetworkGraph
    V: np.ndarray
    W: np.ndarray
    edge_map: tuple

    def channel_alignment(self, kind: Optional[str] = DAMPER) -> np.ndarray:
        """k x k_hat 0/1 matrix placing each reduced output channel of ``kind``
        on the row of the original edge it came from."""
        full_idx = self.original.edge_indices(kind)
        red_pos = {e: c for c, e in enumerate(self.reduced.edge_indices(kind))}
        Pi = np.zeros((len(full_idx), len(red_pos)))
        for row, i in enumerate(full_idx):
            j = self.edge_map[i]
            if j is not None:
                Pi[row, red_pos[j]] = 1.0
        return Pi


def reduce_graph(g: NetworkGraph, part: Partition) -> tuple[NetworkGraph, tuple]:
    """Quotient graph of ``g`` by ``part`` and the edge survival map."""
    characteristic_matrix(part, g.n)
    lab = part.labels
    masses = np.zeros(part.n_cells)
    np.add.at(masses, lab, g.mass_vector)
    edges, edge_map = [], []
    for e in g.edges:
        if lab[e.tail] == lab[e.head]:
            edge_map.append(None)
        else:
            edge_map.append(len(edges))
            edges.append(Edge(int(lab[e.tail]), int(lab[e.head]), e.weight, e.kind))
    forced = [int(lab[i]) for i in g.forced]
    return NetworkGraph(masses, edges, forced), tuple(edge_map)


def petrov_galerkin_factors(g: NetworkGraph, part: Partition) -> tuple[np.ndarray, np.ndarray]:
    """V = M P (P^T M P)^{-1} and W = P, so that W^T V = I."""
    P = characteristic_matrix(part, g.n)
    MP = g.mass_vector[:, None] * P
    V = MP / (P.T @ MP).diagonal()[None, :]
    return V, P


def reduce_first_order(g: NetworkGraph, part: Partition) -> ReductionResult:
    """Cluster the vertices of ``g``; defined for any partition, AEP or not."""
    reduced, edge_map = reduce_graph(g, part)
    V, W = petrov_galerkin_factors(g, part)
    return ReductionResult(g, part, reduced, V, W, edge_map)


def compose_partitions(outer: Partition, inner: Partition) -> Partition:
    """Partition of the original vertices from ``outer`` (on them) followed
    by ``inner`` (on the cells of ``outer``)."""
    if inner.n != outer.n_cells:
        raise InputError("inner partition must act on the cells of the outer one")
    return Partition.from_labels(inner.labels[outer.labels])


@dataclass(frozen=True)
class DecouplingTransform:
    """Similarity z = [P^T; S^T] x applied to A = -L M^{-1}.

    ``blocks`` is the transformed state matrix; its leading n_hat x n_hat
    block always equals the reduced state matrix. The off-diagonal blocks
    vanish exactly when the partition is almost equitable, in which case the
    trailing block is the state matrix of the error dynamics.
    """

    S: np.ndarray
    blocks: np.ndarray
    n_cells: int
    coupling_residual: float

    @property
    def reduced_block(self) -> np.ndarray:
        k = self.n_cells
        return self.blocks[:k, :k]

    @property
    def error_block(self) -> np.ndarray:
        k = self.n_cells
        return self.blocks[k:, k:]


def decoupling_transform(g: NetworkGraph, part: Partition) -> DecouplingTransform:
    P = characteristic_matrix(part, g.n)
    m = g.mass_vector
    MP = m[:, None] * P
    S = scipy.linalg.null_space(MP.T)
    T = np.vstack([P.T, S.T])
    MS = m[:, None] * S
    T_inv = np.hstack([MP / (P.T @ MP).diagonal()[None, :],
                       MS @ np.linalg.inv(S.T @ MS) if S.shape[1] else MS])
    A = -weighted_laplacian(g, DAMPER) / m[None, :]
    blocks = T @ A @ T_inv
    k = part.n_cells
    off = np.sqrt(np.linalg.norm(blocks[:k, k:]) ** 2 + np.linalg.norm(blocks[k:, :k]) ** 2)
    residual = float(off / max(1.0, np.linalg.norm(A)))
    return DecouplingTransform(S, blocks, k, residual)
