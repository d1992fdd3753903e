from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from gridsync.errors import Disconnected, NotSymmetric
from gridsync.network import CouplingNetwork
from gridsync.spectral import (
    algebraic_connectivity,
    check_dotW_identity,
    check_hx_bound,
    dihedral_cos,
    edge_weights,
    incidence_matrix,
    lambda2,
    laplacian,
)

from conftest import random_symmetric_network


def test_incidence_ordering():
    H = incidence_matrix(3)
    assert H.tolist() == [[-1, 1, 0], [-1, 0, 1], [0, -1, 1]]
    assert edge_weights([[0, 1, 2], [1, 0, 3], [2, 3, 0]]).tolist() == [1, 2, 3]


def test_laplacian_examples():
    assert laplacian([[0, 3], [3, 0]]).tolist() == [[3, -3], [-3, 3]]
    ones = np.ones((4, 4)) - np.eye(4)
    assert np.allclose(laplacian(ones), 4 * np.eye(4) - np.ones((4, 4)))
    assert not laplacian(np.zeros((3, 3))).any()
    with pytest.raises(NotSymmetric):
        laplacian([[0, 1], [0, 0]])


def test_laplacian_matches_incidence_form(rng):
    A = rng.random((5, 5))
    A = np.triu(A, 1) + np.triu(A, 1).T
    H = incidence_matrix(5)
    assert np.allclose(laplacian(A), H.T @ np.diag(edge_weights(A)) @ H)


def test_lambda2_examples():
    assert lambda2(laplacian(np.ones((4, 4)) - np.eye(4))) == pytest.approx(4.0, rel=1e-12)
    assert lambda2(laplacian([[0, 1], [1, 0]])) == pytest.approx(2.0, rel=1e-12)
    path = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
    assert lambda2(laplacian(path)) == pytest.approx(1.0, rel=1e-10)
    assert lambda2(np.zeros((1, 1))) == 0.0
    assert algebraic_connectivity([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]) == pytest.approx(0, abs=1e-14)


def test_dihedral_cos():
    assert dihedral_cos([1, 1, 1]) == pytest.approx(1.0)
    assert dihedral_cos([1, 2]) == pytest.approx(3 / (math.sqrt(5) * math.sqrt(2)))
    assert dihedral_cos([1, 1, 1, 1e9]) == pytest.approx(1 / 2, rel=1e-6)


def brute_dotW(net, theta):
    """Triple-sum form of both sides: sum over pairs (i<j), node k, pairs (k, l)."""
    n = net.n
    D, W = net.D, net.P * np.cos(net.phi)
    pairs = list(itertools.combinations(range(n), 2))
    lhs = 0.0
    for (i, j) in pairs:
        # (H D^-1 H^T w sin)_(i,j) = g_j - g_i with g_k = (1/D_k) sum over edges touching k
        g = np.zeros(n)
        for (a, b) in pairs:
            s = W[a, b] * math.sin(theta[b] - theta[a])
            g[a] -= s / D[a]
            g[b] += s / D[b]
        lhs += (theta[j] - theta[i]) * D[i] * D[j] * (g[j] - g[i])
    rhs = D.sum() * sum((theta[j] - theta[i]) * W[i, j] * math.sin(theta[j] - theta[i]) for i, j in pairs)
    return lhs, rhs


def test_dotW_identity_against_brute_force(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        net = random_symmetric_network(rng, n, lossless=True)
        theta = rng.uniform(0, 2.5, n)
        lhs, rhs = brute_dotW(net, theta)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
        assert check_dotW_identity(net, theta) < 1e-10


def test_dotW_identity_trivial_cases(rng):
    net = random_symmetric_network(rng, 2)
    assert check_dotW_identity(net, [0.3, 1.1]) < 1e-12
    assert check_dotW_identity(random_symmetric_network(rng, 4), [0.4] * 4) == 0.0
    with pytest.raises(NotSymmetric):
        check_dotW_identity(CouplingNetwork([1, 1], [0, 0], [[0, 1], [2, 0]]), [0, 0.1])


def test_hx_bound_examples():
    W = np.ones((4, 4)) - np.eye(4)
    x = np.array([0.3, -1.0, 2.0, 0.5])
    lhs, rhs = check_hx_bound(W, x)
    assert lhs == pytest.approx(rhs)
    assert check_hx_bound(W, np.ones(4)) == (0.0, 0.0)
    lhs, rhs = check_hx_bound([[0, 1, 0], [1, 0, 1], [0, 1, 0]], [0, 0, 1])
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(2 / 3)
    with pytest.raises(Disconnected):
        check_hx_bound(np.zeros((3, 3)), [0, 1, 2])
