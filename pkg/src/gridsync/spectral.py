"""Incidence matrices, weighted Laplacians and algebraic connectivity."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import Disconnected, NotSymmetric
from .network import SYMMETRY_TOL, CouplingNetwork, GraphView, is_symmetric
from .torus import lift, pair_index

FloatArray = NDArray[np.float64]


def incidence_matrix(n: int) -> FloatArray:
    """Complete-graph incidence matrix H, rows (i, j) in lexicographic order.

    Row ``(i, j)`` has ``-1`` at ``i`` and ``+1`` at ``j`` so that
    ``(H x)_(i,j) = x_j - x_i``.
    """
    i, j = pair_index(n)
    H = np.zeros((i.shape[0], n))
    rows = np.arange(i.shape[0])
    H[rows, i] = -1.0
    H[rows, j] = 1.0
    return H


def edge_weights(W: ArrayLike) -> FloatArray:
    """Pair weights ``W_ij`` in the same lexicographic order as ``incidence_matrix``."""
    W = np.asarray(W, dtype=float)
    i, j = pair_index(W.shape[0])
    return W[i, j]


def laplacian(weights: ArrayLike) -> FloatArray:
    """L = diag(row sums) - A for a symmetric, zero-diagonal weight matrix."""
    A = np.asarray(weights, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"weights must be square, got shape {A.shape}")
    if np.any(np.abs(A - A.T) > SYMMETRY_TOL):
        raise NotSymmetric("Laplacian weights must be symmetric")
    A = A - np.diag(np.diag(A))
    # ascending-j row sums keep the result bit-reproducible
    return np.diag(A.sum(axis=1)) - A


def lambda2(L: ArrayLike) -> float:
    """Second-smallest eigenvalue of a symmetric Laplacian (0 for n = 1)."""
    L = np.asarray(L, dtype=float)
    if L.shape[0] < 2:
        return 0.0
    ev = np.linalg.eigvalsh(L)
    return float(max(ev[1], 0.0))


def algebraic_connectivity(weights: ArrayLike) -> float:
    return lambda2(laplacian(weights))


def lossless_weights(net: CouplingNetwork) -> FloatArray:
    """The matrix with entries P_ij cos(phi_ij)."""
    return net.P * np.cos(net.phi)


def dihedral_cos(D: ArrayLike) -> float:
    """cos of the angle between the vector D and the all-ones vector."""
    d = np.asarray(D, dtype=float)
    return float(d.sum() / (np.linalg.norm(d) * np.sqrt(d.shape[0])))


def check_dotW_identity(net: CouplingNetwork, theta: ArrayLike) -> float:
    """|LHS - RHS| of the diagonal simplification used for dW/dt.

    LHS = (H th)^T diag(D_i D_j) H D^-1 H^T diag(P_ij cos phi_ij) sin(H th),
    RHS = kappa (H th)^T diag(P_ij cos phi_ij) sin(H th), kappa = sum D.
    """
    if not is_symmetric(net):
        raise NotSymmetric("dW identity needs P = P^T")
    n = net.n
    x = lift(theta)
    H = incidence_matrix(n)
    i, j = pair_index(n)
    Hx = H @ x
    DD = net.D[i] * net.D[j]
    w = edge_weights(lossless_weights(net))
    s = np.sin(Hx)
    lhs = (Hx * DD) @ (H @ ((H.T @ (w * s)) / net.D))
    rhs = net.D.sum() * np.dot(Hx, w * s)
    return float(abs(lhs - rhs))


def check_hx_bound(weights: ArrayLike, x: ArrayLike) -> tuple[float, float]:
    """(sum_edges A_ij (x_i - x_j)^2, (lambda2 / n) ||H x||^2) for a connected graph."""
    A = np.asarray(weights, dtype=float)
    x = np.asarray(x, dtype=float)
    if not GraphView.from_weights(A).is_connected():
        raise Disconnected("weights do not induce a connected graph")
    L = laplacian(A)
    n = x.shape[0]
    i, j = pair_index(n)
    diffs = x[j] - x[i]
    lhs = float(np.sum(A[i, j] * diffs**2))
    rhs = float(lambda2(L) / n * np.dot(diffs, diffs))
    return lhs, rhs
