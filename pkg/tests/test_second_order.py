import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netclust import DAMPER, SPRING, NetworkGraph, Partition, assemble_first_order
from netclust.second_order import (assemble_second_order, build_report_second_order,
                                   check_joint_aep, galerkin_extension, h2_error_second_order,
                                   hamiltonian, reduce_second_order, vertex_form_residual)
from netclust.partition import check_aep_definition

from _factories import random_aep_instance, random_graph, random_partition

SD = NetworkGraph([1, 1], [(0, 1, 1.0, SPRING), (0, 1, 1.0, DAMPER)], [0])


def assert_port_hamiltonian(model, tol=1e-12):
    J, Rd = model.interconnection, model.dissipation
    ks = model.n_springs
    assert np.abs(J + J.T).max(initial=0) <= tol
    assert np.abs(Rd - Rd.T).max(initial=0) <= tol
    scale = max(1.0, np.abs(Rd).max(initial=0))
    assert np.linalg.eigvalsh(-Rd).max(initial=0) <= tol * scale
    assert np.abs(Rd[:ks, :]).max(initial=0) == 0 and np.abs(Rd[:, :ks]).max(initial=0) == 0
    assert np.all(model.K >= 0) and np.all(model.R >= 0)


def test_assemble_spring_damper_pair():
    m = assemble_second_order(SD)
    np.testing.assert_array_equal(m.A, [[0, -1, 1], [1, -1, 1], [-1, 1, -1]])
    np.testing.assert_array_equal(m.B, [[0], [1], [0]])
    np.testing.assert_array_equal(m.C, [[0, -1, 1]])
    assert_port_hamiltonian(m)


def test_no_dampers_conserves_energy():
    g = NetworkGraph([1, 2, 1], [(0, 1, 1.0, SPRING), (1, 2, 3.0, SPRING)], [1])
    m = assemble_second_order(g)
    # d/dt H = grad H^T A x = 0 for skew J and zero dissipation
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.normal(size=m.A.shape[0])
        grad = m.hessian @ x
        assert abs(grad @ (m.A @ x)) <= 1e-12
    assert not np.any(m.C)


def test_no_springs_is_first_order_on_p():
    g = random_graph(np.random.default_rng(1), 5)
    m = assemble_second_order(g)
    f = assemble_first_order(g)
    assert m.n_springs == 0
    np.testing.assert_allclose(m.A, f.A, atol=1e-14)
    np.testing.assert_array_equal(m.B, f.B)
    np.testing.assert_allclose(m.C, f.C, atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_vertex_form(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, kinds=(DAMPER, SPRING), p_extra=0.5)
    m = assemble_second_order(g)
    assert_port_hamiltonian(m)
    x = rng.normal(size=m.A.shape[0])
    u, du = rng.normal(size=len(g.forced)), rng.normal(size=len(g.forced))
    scale = max(1.0, np.abs(m.A).max()) ** 2 * max(1.0, np.abs(x).max())
    assert vertex_form_residual(m, x, u, du) <= 1e-12 * scale


def test_hamiltonian_examples():
    g = NetworkGraph([1.0, 2.0, 3.0], [(0, 1, 2.0, SPRING), (1, 2, 1.0, DAMPER)], [0])
    m = assemble_second_order(g)
    assert hamiltonian(m, np.zeros(4)) == 0.0
    x = np.concatenate([[0.0], g.mass_vector])
    assert hamiltonian(m, x) == pytest.approx(0.5 * g.total_mass)
    assert hamiltonian(m, np.array([1.5, 0, 0, 0])) == pytest.approx(0.5 * 2.0 * 1.5 ** 2)
    # vectorised over columns
    np.testing.assert_allclose(hamiltonian(m, np.stack([np.zeros(4), x], axis=1)),
                               [0, 0.5 * g.total_mass])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_energy_dissipates_at_output_rate(seed):
    rng = np.random.default_rng(seed)
    m = assemble_second_order(random_graph(rng, 5, kinds=(DAMPER, SPRING), p_extra=0.5))
    x = rng.normal(size=m.A.shape[0])
    dH = (m.hessian @ x) @ (m.A @ x)
    y = m.C @ x
    assert dH == pytest.approx(-y @ y, abs=1e-10 * max(1.0, abs(dH)))


def test_joint_aep_trivial():
    g = random_graph(np.random.default_rng(2), 5, kinds=(DAMPER, SPRING))
    assert all(w.verdict for w in check_joint_aep(g, Partition.whole(5)))
    assert all(w.verdict for w in check_joint_aep(SD, Partition.singletons(2)))


def test_joint_aep_four_vertex_example():
    springs = [(0, 1, 1.0, SPRING), (1, 2, 1.0, SPRING), (2, 3, 1.0, SPRING)]
    dampers = [(0, 2, 1.0, DAMPER), (1, 3, 1.0, DAMPER)]
    g = NetworkGraph([1.0] * 4, springs + dampers, [0])
    part = Partition(((0, 3), (1, 2)))
    d, s = check_joint_aep(g, part)
    # hand sums: every vertex receives weight 1 from the other cell, for both kinds
    for kind in (DAMPER, SPRING):
        w = check_aep_definition(g, part, kind)
        np.testing.assert_allclose(w.sums[(0, 1)], [1.0, 1.0])
        np.testing.assert_allclose(w.sums[(1, 0)], [1.0, 1.0])
    assert d.verdict and s.verdict
    oracle, formula = h2_error_second_order(g, part)
    assert formula == pytest.approx(0.25)
    assert oracle == pytest.approx(formula, abs=1e-6)


def test_reduce_singletons_identity():
    g = random_graph(np.random.default_rng(3), 5, kinds=(DAMPER, SPRING), p_extra=0.6)
    full = assemble_second_order(g)
    red, _ = reduce_second_order(g, Partition.singletons(5))
    np.testing.assert_array_equal(red.A, full.A)
    np.testing.assert_array_equal(red.B, full.B)
    np.testing.assert_array_equal(red.C, full.C)


def test_reduce_one_cell_double_integrator():
    red, _ = reduce_second_order(SD, Partition.whole(2))
    assert red.n == 1 and red.n_springs == 0 and red.Dd.shape[1] == 0
    np.testing.assert_array_equal(red.A, [[0.0]])
    np.testing.assert_array_equal(red.B, [[1.0]])


def test_reduce_preserves_total_momentum_map():
    rng = np.random.default_rng(4)
    g = random_graph(rng, 6, kinds=(DAMPER, SPRING))
    part = random_partition(rng, 6)
    _, res = reduce_second_order(g, part)
    p = rng.normal(size=6)
    assert np.sum(res.W.T @ p) == pytest.approx(np.sum(p), rel=1e-13)


def test_reduced_equation_sign():
    # spring chain 1-2-3 clustered as {1,3},{2}: the reduced q equation reads
    # q_hat' = D_hat_s^T M_hat^{-1} p_hat, p_hat' = -D_hat_s K_hat q_hat - ...
    g = NetworkGraph([1, 1, 1], [(0, 1, 2.0, SPRING), (1, 2, 2.0, SPRING), (0, 1, 1.0),
                                 (1, 2, 1.0)], [0])
    red, _ = reduce_second_order(g, Partition(((0, 2), (1,))))
    ks = red.n_springs
    np.testing.assert_allclose(red.A[:ks, ks:], red.Ds.T / red.masses[None, :])
    np.testing.assert_allclose(red.A[ks:, :ks], -red.Ds * red.K[None, :])


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 8))
def test_structure_preserved_and_galerkin_identity(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, kinds=(DAMPER, SPRING), p_extra=0.5)
    part = random_partition(rng, n)
    full = assemble_second_order(g)
    red, _ = reduce_second_order(g, part)
    assert_port_hamiltonian(red)
    W, V = galerkin_extension(g, part)
    scale = max(1.0, np.abs(full.A).max())
    np.testing.assert_allclose(W.T @ V, np.eye(V.shape[1]), atol=1e-12)
    np.testing.assert_allclose(W.T @ full.A @ V, red.A, atol=1e-9 * scale)
    np.testing.assert_allclose(W.T @ full.B, red.B, atol=1e-12)


def test_h2_error_examples():
    oracle, formula = h2_error_second_order(SD, Partition.whole(2))
    assert formula == pytest.approx(0.25)
    assert oracle == pytest.approx(0.25, abs=1e-6)
    oracle, formula = h2_error_second_order(SD, Partition.singletons(2))
    assert formula == 0.0 and oracle == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_h2_error_joint_aep_synthesized(seed):
    g, part = random_aep_instance(np.random.default_rng(seed), n_max=7, joint=True)
    assert all(w.verdict for w in check_joint_aep(g, part))
    oracle, formula = h2_error_second_order(g, part)
    assert abs(oracle - formula) <= 1e-6 * (1 + formula)


def test_report_second_order():
    rep = build_report_second_order(SD, Partition.whole(2))
    assert rep.order == 2 and rep.aep
    assert rep.h2_full_oracle == pytest.approx(0.25, abs=1e-6)
    assert rep.error_oracle == pytest.approx(0.25, abs=1e-6)
    assert rep.pythagoras_residual <= 1e-6


def ring(dampers):
    springs = [(i, (i + 1) % 4, 2.0, SPRING) for i in range(4)]
    return NetworkGraph([1.0] * 4, springs + [(a, b, 0.5, DAMPER) for a, b in dampers], [0])


def test_undamped_hidden_mode_is_handled():
    # diagonal dampers leave the mode p = (1, -1, 1, -1) undamped and unobservable
    g = ring([(0, 2), (1, 3)])
    for cells in [((0, 2), (1, 3)), ((0,), (1, 3), (2,))]:
        q, _ = h2_error_second_order(g, Partition(cells), method="quadrature")
        e, f = h2_error_second_order(g, Partition(cells), method="eigen")
        assert q == pytest.approx(e, abs=1e-8)
        assert e == pytest.approx(f, abs=1e-8)


def test_disconnected_dampers_break_the_formula():
    # jointly equitable, yet the damper graph has two components: 1/8 instead of 1/4
    g = ring([(0, 2), (1, 3)])
    part = Partition(((0, 1), (2, 3)))
    assert all(w.verdict for w in check_joint_aep(g, part))
    oracle, formula = h2_error_second_order(g, part, method="eigen")
    assert oracle == pytest.approx(0.125, abs=1e-10) and formula == pytest.approx(0.25)


def test_ring_with_connected_dampers():
    g = ring([(0, 1), (1, 2), (2, 3), (3, 0)])
    for cells in [((0, 2), (1, 3)), ((0, 1), (2, 3))]:
        oracle, formula = h2_error_second_order(g, Partition(cells))
        assert oracle == pytest.approx(formula, abs=1e-8)
    oracle, formula = h2_error_second_order(g, Partition(((0,), (1, 2, 3))))
    assert formula == 0.0 and oracle > 0.01
