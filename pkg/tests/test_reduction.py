import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netclust import (NetworkGraph, Partition, assemble_first_order, characteristic_matrix,
                      check_aep_subspace, decoupling_transform, is_connected, petrov_galerkin_factors,
                      reduce_first_order, weighted_laplacian)
from netclust.reduction import VELOCITY, compose_partitions

from _factories import path3, random_aep_instance, random_graph, random_partition


def transfer(model, s):
    n = model.A.shape[0]
    return model.C @ np.linalg.solve(s * np.eye(n) - model.A, model.B)


def test_assemble_two_vertex():
    m = assemble_first_order(NetworkGraph([1, 1], [(0, 1, 1.0)], [0]))
    np.testing.assert_array_equal(m.A, [[-1, 1], [1, -1]])
    np.testing.assert_array_equal(m.B, [[1], [0]])
    np.testing.assert_array_equal(m.C, [[-1, 1]])


def test_assemble_masses_both_coordinates():
    g = NetworkGraph([1, 2], [(0, 1, 1.0)], [0])
    L = np.array([[1.0, -1.0], [-1.0, 1.0]])
    np.testing.assert_allclose(assemble_first_order(g).A, -L @ np.diag([1, 0.5]))
    np.testing.assert_allclose(assemble_first_order(g, VELOCITY).A, -np.diag([1, 0.5]) @ L)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 9))
def test_coordinate_forms_same_transfer(seed, n):
    g = random_graph(np.random.default_rng(seed), n)
    x, v = assemble_first_order(g), assemble_first_order(g, VELOCITY)
    for s in (1.0, 0.3 + 2.0j):
        np.testing.assert_allclose(transfer(x, s), transfer(v, s), atol=1e-12, rtol=1e-12)


def test_momentum_form_is_minus_L_Minv():
    g = random_graph(np.random.default_rng(1), 6)
    A = assemble_first_order(g).A
    assert np.array_equal(A, -weighted_laplacian(g) / g.mass_vector[None, :])


def test_reduce_path3():
    red = reduce_first_order(path3(), Partition(((0, 2), (1,))))
    r = red.reduced
    assert r.n == 2 and len(r.edges) == 2
    assert r.masses == (2.0, 1.0)
    np.testing.assert_array_equal(weighted_laplacian(r), [[2, -2], [-2, 2]])
    assert red.edge_map == (0, 1)
    assert r.forced == (0,)


def test_reduce_singletons_identity():
    g = random_graph(np.random.default_rng(4), 6)
    red = reduce_first_order(g, Partition.singletons(g.n))
    assert red.reduced == g
    np.testing.assert_array_equal(assemble_first_order(red.reduced).A, assemble_first_order(g).A)


def test_reduce_one_cell():
    g = random_graph(np.random.default_rng(8), 5)
    red = reduce_first_order(g, Partition.whole(5))
    assert red.reduced.n == 1 and red.reduced.edges == ()
    assert red.reduced.masses[0] == pytest.approx(g.total_mass)
    np.testing.assert_array_equal(assemble_first_order(red.reduced).A, [[0.0]])
    assert all(j is None for j in red.edge_map)


def test_reduce_input_mapping_keeps_columns():
    g = NetworkGraph([1, 1, 1], [(0, 1, 1.0), (1, 2, 1.0)], [0, 2, 2])
    red = reduce_first_order(g, Partition(((0, 2), (1,))))
    assert red.reduced.forced == (0, 0, 0)
    P = characteristic_matrix(red.partition)
    np.testing.assert_array_equal(assemble_first_order(red.reduced).B,
                                  P.T @ assemble_first_order(g).B)


def test_pg_factors_unit_masses():
    part = Partition(((0, 2), (1,), (3,)))
    g = NetworkGraph([1.0] * 4, [(0, 1, 1.0)])
    V, W = petrov_galerkin_factors(g, part)
    P = characteristic_matrix(part)
    np.testing.assert_allclose(V, P @ np.linalg.inv(P.T @ P))
    np.testing.assert_array_equal(W, P)


def test_pg_factors_weighted():
    V, _ = petrov_galerkin_factors(path3(masses=(1, 1, 2)), Partition(((0, 2), (1,))))
    np.testing.assert_allclose(V[:, 0], [1 / 3, 0, 2 / 3])


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10))
def test_pg_identities(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    part = random_partition(rng, n)
    red = reduce_first_order(g, part)
    V, W = red.V, red.W
    np.testing.assert_allclose(W.T @ V, np.eye(part.n_cells), atol=1e-12)
    Mhat_inv = np.diag(1.0 / red.reduced.mass_vector)
    np.testing.assert_allclose(V.T @ np.diag(1 / g.mass_vector) @ V, Mhat_inv, atol=1e-12)
    A, Ahat = assemble_first_order(g).A, assemble_first_order(red.reduced).A
    np.testing.assert_allclose(W.T @ A @ V, Ahat, atol=1e-12 * max(1, np.abs(A).max()))
    assert red.reduced.total_mass == pytest.approx(g.total_mass, rel=1e-14)
    assert is_connected(red.reduced)
    Lhat = weighted_laplacian(red.reduced)
    if part.n_cells > 1:
        lam = np.linalg.eigvalsh(Lhat)
        assert lam[1] > 1e-10 * lam[-1]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 10))
def test_reduction_composes(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    outer = random_partition(rng, n)
    inner = random_partition(rng, outer.n_cells)
    twice = reduce_first_order(reduce_first_order(g, outer).reduced, inner).reduced
    once = reduce_first_order(g, compose_partitions(outer, inner)).reduced
    P1, P2 = characteristic_matrix(outer), characteristic_matrix(inner)
    np.testing.assert_array_equal(P1 @ P2, characteristic_matrix(compose_partitions(outer, inner)))
    np.testing.assert_allclose(once.mass_vector, twice.mass_vector, rtol=1e-12)
    np.testing.assert_allclose(weighted_laplacian(once), weighted_laplacian(twice), atol=1e-12)
    assert once.forced == twice.forced
    np.testing.assert_allclose(assemble_first_order(once).A, assemble_first_order(twice).A,
                               atol=1e-12)


def test_decoupling_path3_aep():
    dt = decoupling_transform(path3(), Partition(((0, 2), (1,))))
    assert dt.coupling_residual <= 1e-10
    s = dt.S[:, 0]
    np.testing.assert_allclose(np.abs(s), [2 ** -0.5, 0, 2 ** -0.5], atol=1e-12)
    assert s[0] == pytest.approx(-s[2])
    np.testing.assert_allclose(dt.reduced_block, [[-1, 2], [1, -2]], atol=1e-12)
    # error dynamics: -S^T L S (S^T M S)^{-1} = -1 for S = (1, 0, -1)/sqrt(2)
    np.testing.assert_allclose(dt.error_block, [[-1.0]], atol=1e-12)


def test_decoupling_path3_not_aep():
    assert decoupling_transform(path3(), Partition(((0, 1), (2,)))).coupling_residual > 0.1


def test_decoupling_singletons():
    dt = decoupling_transform(random_graph(np.random.default_rng(3), 5), Partition.singletons(5))
    assert dt.S.shape == (5, 0)
    assert dt.coupling_residual == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_aep_decoupling_and_spectrum(seed):
    g, part = random_aep_instance(np.random.default_rng(seed), n_max=10)
    assert check_aep_subspace(g, part).verdict
    dt = decoupling_transform(g, part)
    assert dt.coupling_residual <= 1e-9
    np.testing.assert_allclose(dt.S.T @ dt.S, np.eye(dt.S.shape[1]), atol=1e-12)
    P = characteristic_matrix(part)
    ortho = dt.S.T @ (g.mass_vector[:, None] * P)
    assert ortho.size == 0 or np.abs(ortho).max() <= 1e-12 * g.mass_vector.max()
    red = reduce_first_order(g, part)
    A, Ahat = assemble_first_order(g).A, assemble_first_order(red.reduced).A
    np.testing.assert_allclose(dt.reduced_block, Ahat, atol=1e-10 * max(1, np.linalg.norm(Ahat)))
    lam = np.sort(np.linalg.eigvals(A).real)
    for mu in np.linalg.eigvals(Ahat).real:
        assert np.min(np.abs(lam - mu)) <= 1e-8 * max(1.0, np.abs(lam).max())
