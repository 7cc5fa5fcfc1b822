"""H2 norms of network models: closed forms and independent numerical oracles.

The closed forms only need the masses, the partition and the forced
vertices. The oracles never touch them; they work from an (A, B, C)
realisation, either through an eigenvalue expansion of the impulse
response or through adaptive quadrature of ``||C e^{At} B||_F^2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import DisconnectedGraphError, H2UndefinedError, InputError
from .graph import DAMPER, NetworkGraph, is_connected, weighted_laplacian
from .partition import DEFAULT_TOL, Partition, check_aep_subspace
from .reduction import FirstOrderModel, assemble_first_order, reduce_first_order

log = logging.getLogger(__name__)

MARGINAL_RTOL = 1e-10
OBSERVABILITY_TOL = 1e-9


def _require_connected(g: NetworkGraph):
    if not is_connected(g, DAMPER):
        raise DisconnectedGraphError(
            "the damper graph must be connected: with several zero eigenvalues the "
            "consensus limit, and hence the closed-form Gramian, does not exist")


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigen-triples of ``M^{-1} L`` with ``W.T @ V = I``.

    Column i of ``V`` (``W``) is the right (left) eigenvector for
    ``eigenvalues[i]``; eigenvalues ascend, and for a connected graph the
    first pair is normalised to ``V[:, 0] = 1`` and ``W[:, 0] = M 1 / sigma``.
    """

    eigenvalues: np.ndarray
    V: np.ndarray
    W: np.ndarray


def effective_eigendecomposition(g: NetworkGraph) -> EigenDecomposition:
    """Diagonalise ``M^{-1} L`` through the symmetric matrix ``M^{-1/2} L M^{-1/2}``."""
    L = weighted_laplacian(g, DAMPER)
    s = np.sqrt(g.mass_vector)
    lam, U = np.linalg.eigh(L / s[:, None] / s[None, :])
    V = U / s[:, None]
    W = U * s[:, None]
    if is_connected(g, DAMPER):
        scale = V[:, 0].mean()
        V[:, 0] /= scale
        W[:, 0] *= scale
        lam[0] = 0.0
    return EigenDecomposition(lam, V, W)


def gramian_closed_form(g: NetworkGraph) -> np.ndarray:
    """X = (M - M 1 1^T M / sigma_M) / 2."""
    _require_connected(g)
    m = g.mass_vector
    return 0.5 * (np.diag(m) - np.outer(m, m) / g.total_mass)


def gramian_quadrature(g: NetworkGraph, atol: float = 1e-12) -> np.ndarray:
    """X as the integral of e^{-L M^{-1} t} L e^{-M^{-1} L t}, by Gauss-Legendre panels."""
    _require_connected(g)
    L = weighted_laplacian(g, DAMPER)
    m = g.mass_vector
    A = -L / m[:, None]                     # e^{At} = e^{-M^{-1} L t}
    lam2 = effective_eigendecomposition(g).eigenvalues[1]
    t_end = 40.0 / lam2
    nodes, weights = np.polynomial.legendre.leggauss(20)
    n_panels = max(8, int(np.ceil(t_end * max(1.0, np.abs(A).sum(axis=1).max()) / 2.0)))
    h = t_end / n_panels
    expm_nodes = [scipy.linalg.expm(A * (0.5 * h * (1 + x))) for x in nodes]
    step = scipy.linalg.expm(A * h)
    Phi = np.eye(g.n)
    X = np.zeros((g.n, g.n))
    for _ in range(n_panels):
        for E_k, w_k in zip(expm_nodes, weights):
            F = E_k @ Phi
            X += 0.5 * h * w_k * (F.T @ L @ F)
        Phi = step @ Phi
    return X


def h2_full_closed_form(g: NetworkGraph) -> float:
    """||G||^2 = 1/2 sum over input columns of (1/m_i - 1/sigma_M)."""
    _require_connected(g)
    m = g.mass_vector
    return 0.5 * float(sum(1.0 / m[i] - 1.0 / g.total_mass for i in g.forced))


def cell_masses_of(g: NetworkGraph, part: Partition) -> np.ndarray:
    """sigma_M^i: total mass of the cell containing vertex i."""
    lab = part.labels
    totals = np.zeros(part.n_cells)
    np.add.at(totals, lab, g.mass_vector)
    return totals[lab]


def h2_reduced_closed_form(g: NetworkGraph, part: Partition) -> float:
    """||G_hat||^2 = 1/2 sum over input columns of (1/sigma_M^i - 1/sigma_M)."""
    _require_connected(g)
    sig = cell_masses_of(g, part)
    return 0.5 * float(sum(1.0 / sig[i] - 1.0 / g.total_mass for i in g.forced))


def reduction_error_formula(g: NetworkGraph, part: Partition) -> float:
    """1/2 sum over input columns of (1/m_i - 1/sigma_M^i).

    This is the exact squared H2 reduction error only when ``part`` is
    almost equitable; otherwise it is just a number.
    """
    if part.n != g.n:
        raise InputError(f"partition covers {part.n} vertices, graph has {g.n}")
    m = g.mass_vector
    sig = cell_masses_of(g, part)
    return 0.5 * float(sum(1.0 / m[i] - 1.0 / sig[i] for i in g.forced))


# -- oracles ------------------------------------------------------------------

def _abc(model):
    if isinstance(model, tuple):
        A, B, C = model
    else:
        A, B, C = model.A, model.B, model.C
    return (np.atleast_2d(np.asarray(A, dtype=float)), np.atleast_2d(np.asarray(B, dtype=float)),
            np.atleast_2d(np.asarray(C, dtype=float)))


def h2_eigen(A, B, C, max_cond: float = 1e8) -> float:
    """Squared H2 norm from the modal expansion of C e^{At} B.

    With A = V diag(lam) V^{-1} the impulse response is
    sum_i (C v_i)(w_i^T B) e^{lam_i t}; integrating the squared Frobenius norm
    termwise gives sum_ij <F_i, F_j> / -(lam_i + conj(lam_j)). Marginal modes
    are dropped when they are unobservable or uncontrollable and rejected
    otherwise.
    """
    n = A.shape[0]
    if n == 0 or not np.any(B) or not np.any(C):
        return 0.0
    lam, V = scipy.linalg.eig(A)
    if np.linalg.cond(V) > max_cond:
        raise np.linalg.LinAlgError("eigenvector matrix is ill-conditioned")
    W = np.linalg.inv(V).T
    c = C @ V                       # columns C v_i
    b = B.T @ W                     # columns B^T w_i
    scale = max(1.0, np.linalg.norm(A, 2))
    marginal = lam.real > -MARGINAL_RTOL * scale
    if np.any(marginal):
        gain = np.linalg.norm(c[:, marginal], axis=0) * np.linalg.norm(b[:, marginal], axis=0)
        bad = gain > OBSERVABILITY_TOL * max(1.0, np.linalg.norm(B) * np.linalg.norm(C))
        if np.any(bad):
            raise H2UndefinedError(
                f"marginal mode(s) {lam[marginal][bad]} are observable and controllable")
        log.debug("deflated %d marginal mode(s)", int(marginal.sum()))
    keep = ~marginal
    lam, c, b = lam[keep], c[:, keep], b[:, keep]
    Gc = c.conj().T @ c             # [j, i] = c_j^H c_i
    Gb = b.T @ b.conj()             # [i, j] = b_i^T conj(b_j)
    denom = -(lam[:, None] + lam.conj()[None, :])
    total = np.sum(Gc.T * Gb / denom)
    return float(max(total.real, 0.0))


class _PanelRule:
    """Gauss-Legendre nodes with cached propagators for one panel width."""

    def __init__(self, A, h, nodes, weights):
        self.h = h
        self.weights = 0.5 * h * weights
        self.at_nodes = np.stack([scipy.linalg.expm(A * (0.5 * h * (1 + x))) for x in nodes])
        self.step = scipy.linalg.expm(A * h)

    def integrate(self, C, Phi):
        F = C @ (self.at_nodes @ Phi)            # (nodes, k, m)
        return float(np.sum(self.weights * np.sum(F * F, axis=(1, 2))))


def h2_quadrature(A, B, C, tail_bound: Optional[Callable[[np.ndarray], float]] = None,
                  atol: float = 1e-10, order: int = 8, max_panels: int = 200_000) -> float:
    """Squared H2 norm by adaptive Gauss-Legendre quadrature of ||C e^{At} B||_F^2.

    Each panel is integrated once whole and once as two halves; the panel
    width is halved until the two agree and doubled when they agree by a
    wide margin. The horizon is extended until ``tail_bound(e^{AT} B)``,
    an upper bound on the output energy still to come, falls below
    ``atol``. Without a bound the realisation is first cut down to its
    controllable and observable part, whose remaining output energy is
    measured exactly with its observability Gramian.
    """
    n = A.shape[0]
    if n == 0 or not np.any(B) or not np.any(C):
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(order)
    norm_a = max(np.abs(A).sum(axis=1).max(), 1e-300)
    if tail_bound is None:
        A, B, C = minimal_part(A, B, C)
        if A.shape[0] == 0:
            return 0.0
        tail_bound = _observability_tail(A, B, C)

    rules: dict = {}

    def rule(level):
        if level not in rules:
            rules[level] = _PanelRule(A, 2.0 ** level, nodes, weights)
        return rules[level]

    level = int(np.floor(np.log2(1.0 / norm_a)))
    Phi = B.copy()
    total = 0.0
    panels = 0
    while tail_bound(Phi) > atol:
        panels += 1
        if panels > max_panels:
            raise H2UndefinedError("quadrature did not converge; impulse response is not decaying")
        whole = rule(level).integrate(C, Phi)
        half = rule(level - 1)
        first = half.integrate(C, Phi)
        mid = half.step @ Phi
        second = half.integrate(C, mid)
        err = abs(whole - first - second)
        panel_tol = atol * 1e-3 + 1e-13 * (total + first + second)
        if err > panel_tol and level > -60:
            level -= 1
            continue
        total += first + second
        Phi = half.step @ mid
        if err < panel_tol / 64 and level < 20:
            level += 1
    return total


def _range(X, cut):
    U, sv, _ = np.linalg.svd(X, full_matrices=False)
    return U[:, sv > cut]


def _krylov_basis(A, X, ref, rtol):
    """Orthonormal basis of the smallest A-invariant subspace containing range(X).

    Directions are kept when their singular value exceeds ``rtol * ref``;
    ``ref`` is the size of the original (unrestricted) matrix, so a block that
    is zero up to rounding yields an empty basis.
    """
    scale = max(np.linalg.norm(A, 2), 1e-300)
    Q = _range(X / max(ref, 1e-300), rtol)
    while 0 < Q.shape[1] < A.shape[0]:
        grown = _range(np.hstack([Q, A @ Q / scale]), rtol)
        if grown.shape[1] == Q.shape[1]:
            break
        Q = grown
    return Q


def minimal_part(A, B, C, rtol: float = 1e-10):
    """Restrict (A, B, C) to its controllable and then its observable part.

    The impulse response is unchanged. The controllable subspace is
    A-invariant, so restricting to it is exact; the unobservable subspace is
    A-invariant as well, so projecting onto its orthogonal complement is too.
    """
    R = _krylov_basis(A, B, np.linalg.norm(B, 2), rtol)
    Ac, Bc, Cc = R.T @ A @ R, R.T @ B, C @ R
    Q = _krylov_basis(Ac.T, Cc.T, np.linalg.norm(C, 2), rtol)
    return Q.T @ Ac @ Q, Q.T @ Bc, Cc @ Q


def _observability_tail(A, B, C):
    """Exact remaining output energy of the strictly stable part.

    Marginal modes are split off with an ordered Schur form; they must carry
    negligible gain (rounding leaks past the minimal-part rank test), else
    the norm is undefined.
    """
    scale = max(1.0, np.linalg.norm(A, 2))
    thr = MARGINAL_RTOL * scale
    T, Z, k = scipy.linalg.schur(A, output="real", sort=lambda re, im: re < -thr)
    if k < A.shape[0]:
        lam, V = np.linalg.eig(A)
        W = np.linalg.inv(V).conj().T
        marginal = lam.real >= -thr
        gain = np.linalg.norm(C @ V[:, marginal], axis=0) * np.linalg.norm(W[:, marginal].conj().T @ B, axis=1)
        bad = gain > OBSERVABILITY_TOL * max(1.0, np.linalg.norm(B) * np.linalg.norm(C))
        if np.any(bad):
            raise H2UndefinedError(f"observable and controllable mode(s) {lam[marginal][bad]} "
                                   "are not strictly stable")
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    # spectral projection onto the stable invariant subspace
    X = scipy.linalg.solve_sylvester(T11, -T22, -T12) if k < A.shape[0] else np.zeros((k, 0))
    P = Z[:, :k].T + X @ Z[:, k:].T
    Cs = C @ Z[:, :k]
    Q = scipy.linalg.solve_continuous_lyapunov(T11.T, -Cs.T @ Cs)

    def bound(Phi):
        Y = P @ Phi
        return float(np.trace(Y.T @ Q @ Y))
    return bound


def h2_oracle(model, method: str = "auto", tail_bound=None, atol: float = 1e-10) -> float:
    """Squared H2 norm of a realisation, independent of any closed form.

    ``model`` is anything with A, B, C attributes or an (A, B, C) tuple.
    ``method`` is ``"eigen"``, ``"quadrature"`` or ``"auto"`` (eigen, falling
    back to quadrature for badly conditioned eigenvectors). For quadrature,
    ``tail_bound`` may be a callable, ``"energy"`` to use the model's own
    ``excess_energy`` (valid when every mode holding energy is damped), or
    None for the exact Gramian-based tail.

    Raises
    ------
    H2UndefinedError
        If an observable, controllable mode is not strictly stable.
    """
    A, B, C = _abc(model)
    if tail_bound == "energy":
        tail_bound = _energy_tail(model.excess_energy)
    if method == "eigen":
        return h2_eigen(A, B, C)
    if method == "quadrature":
        return h2_quadrature(A, B, C, tail_bound, atol=atol)
    if method != "auto":
        raise InputError(f"unknown method {method!r}")
    try:
        return h2_eigen(A, B, C)
    except np.linalg.LinAlgError:
        log.info("eigenvector basis ill-conditioned; falling back to quadrature")
        return h2_quadrature(A, B, C, tail_bound, atol=atol)


def _energy_tail(excess):
    def bound(Phi):
        return float(np.sum(excess(Phi)))
    return bound


@dataclass(frozen=True)
class ErrorSystem:
    """Full and reduced models driven by a shared input, output ``y - y_hat``.

    Reduced output channels are placed on the rows of the original edges
    they descend from; rows of dropped edges get no reduced contribution.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    full: object
    reduced: object

    def excess_energy(self, states: np.ndarray) -> np.ndarray:
        k = self.full.A.shape[0]
        ef = self.full.excess_energy(states[:k])
        er = self.reduced.excess_energy(states[k:])
        return (np.sqrt(ef) + np.sqrt(er)) ** 2


def stack_error_system(full, reduced, alignment: np.ndarray) -> ErrorSystem:
    A = scipy.linalg.block_diag(full.A, reduced.A)
    B = np.vstack([full.B, reduced.B])
    C = np.hstack([full.C, -alignment @ reduced.C])
    return ErrorSystem(A, B, C, full, reduced)


def first_order_error_system(g: NetworkGraph, part: Partition) -> ErrorSystem:
    red = reduce_first_order(g, part)
    return stack_error_system(assemble_first_order(g), assemble_first_order(red.reduced),
                              red.channel_alignment(DAMPER))


def h2_error_oracle(g: NetworkGraph, part: Partition, method: str = "auto") -> float:
    """||G - G_hat||^2 computed numerically from the stacked error system."""
    return h2_oracle(first_order_error_system(g, part), method=method)


@dataclass
class H2Report:
    """Closed-form and numerical H2 quantities for one graph and partition."""

    h2_full_closed: float
    forced: list
    h2_full_oracle: Optional[float] = None
    h2_reduced_closed: Optional[float] = None
    h2_reduced_oracle: Optional[float] = None
    error_formula: Optional[float] = None
    error_oracle: Optional[float] = None
    pythagoras_residual: Optional[float] = None
    aep: Optional[bool] = None
    order: int = 1
    notes: list = field(default_factory=list)

    @property
    def error_guaranteed(self) -> Optional[bool]:
        return self.aep

    def to_dict(self) -> dict:
        out = {
            "order": self.order,
            "h2_full_closed": self.h2_full_closed,
            "h2_full_oracle": self.h2_full_oracle,
            "h2_reduced_closed": self.h2_reduced_closed,
            "h2_reduced_oracle": self.h2_reduced_oracle,
            "error_formula": self.error_formula,
            "error_oracle": self.error_oracle,
            "pythagoras_residual": self.pythagoras_residual,
            "aep": self.aep,
            "error_formula_is_exact": self.error_guaranteed,
            "forced": self.forced,
            "notes": list(self.notes),
        }
        if self.aep is None:
            for key in ("h2_reduced_closed", "h2_reduced_oracle", "error_formula",
                        "error_oracle", "pythagoras_residual", "aep", "error_formula_is_exact"):
                out.pop(key)
        return out


def forced_table(g, part):
    m = g.mass_vector
    sig = cell_masses_of(g, part) if part is not None else None
    rows = []
    for col, i in enumerate(g.forced):
        row = {"input": col + 1, "vertex": i + 1, "mass": float(m[i])}
        if sig is not None:
            row["cell_mass"] = float(sig[i])
        rows.append(row)
    return rows


def build_report(g: NetworkGraph, part: Optional[Partition] = None, oracle: bool = True,
                 tol: float = DEFAULT_TOL, method: str = "auto") -> H2Report:
    """Collect closed forms (and, if ``oracle``, their numerical checks)."""
    rep = H2Report(h2_full_closed=h2_full_closed_form(g), forced=forced_table(g, part))
    if oracle:
        rep.h2_full_oracle = h2_oracle(assemble_first_order(g), method=method)
    if part is None:
        return rep
    rep.aep = check_aep_subspace(g, part, DAMPER, tol).verdict
    rep.h2_reduced_closed = h2_reduced_closed_form(g, part)
    rep.error_formula = reduction_error_formula(g, part)
    if not rep.aep:
        rep.notes.append("partition is not almost equitable: error_formula is not an error guarantee")
    if oracle:
        red = reduce_first_order(g, part)
        rep.h2_reduced_oracle = h2_oracle(assemble_first_order(red.reduced), method=method)
        rep.error_oracle = h2_error_oracle(g, part, method=method)
        rep.pythagoras_residual = abs(rep.h2_full_oracle - rep.error_oracle - rep.h2_reduced_oracle)
    return rep
