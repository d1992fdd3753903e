from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsync.errors import (
    InvalidDamping,
    InvalidInertia,
    InvalidPhaseShift,
    MissingInertia,
    NegativeCoupling,
    NetworkInvalid,
    NonzeroDiagonal,
    ShapeMismatch,
)
from gridsync.network import (
    CouplingNetwork,
    GraphView,
    has_globally_reachable_node,
    is_complete,
    is_symmetric,
    kuramoto_network,
)

P2 = [[0.0, 1.0], [1.0, 0.0]]


def test_valid_two_node():
    net = CouplingNetwork([1, 1], [0, 0], P2)
    assert net.n == 2 and not net.has_inertia and net.is_lossless


def test_phase_shift_boundary_excluded():
    with pytest.raises(InvalidPhaseShift):
        CouplingNetwork([1, 1], [0, 0], P2, [[0, math.pi / 2], [math.pi / 2, 0]])


def test_phase_shift_ignored_without_edge():
    net = CouplingNetwork([1, 1, 1], [0, 0, 0], [[0, 1, 0], [1, 0, 1], [0, 1, 0]],
                          [[0, 0, 2.0], [0, 0, 0], [2.0, 0, 0]])
    assert net.phi_max == 0.0


@pytest.mark.parametrize(
    "kwargs, err",
    [
        (dict(D=[1, 0]), InvalidDamping),
        (dict(M=[1, -1]), InvalidInertia),
        (dict(P=[[1, 1], [1, 0]]), NonzeroDiagonal),
        (dict(P=[[0, -1], [1, 0]]), NegativeCoupling),
        (dict(omega=[0, 0, 0]), ShapeMismatch),
        (dict(phi=[[0, -0.1], [-0.1, 0]]), InvalidPhaseShift),
        (dict(D=[1, np.nan]), ShapeMismatch),
    ],
)
def test_validation_errors(kwargs, err):
    args = dict(D=[1, 1], omega=[0, 0], P=P2, phi=None, M=None)
    args.update(kwargs)
    with pytest.raises(err):
        CouplingNetwork(**args)
    assert issubclass(err, NetworkInvalid) and issubclass(err, ValueError)


def test_arrays_are_frozen():
    net = CouplingNetwork([1, 1], [0, 0], P2)
    with pytest.raises(ValueError):
        net.P[0, 1] = 3.0


def test_missing_inertia():
    with pytest.raises(MissingInertia):
        CouplingNetwork([1, 1], [0, 0], P2).require_inertia()


def test_symmetric_and_complete():
    net = CouplingNetwork([1, 1], [0, 0], P2)
    assert is_symmetric(net) and is_complete(net)
    assert not is_symmetric(CouplingNetwork([1, 1], [0, 0], [[0, 1], [0, 0]]))
    ring_missing = CouplingNetwork([1] * 3, [0] * 3, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert not is_complete(ring_missing)


def test_symmetry_tolerance():
    assert is_symmetric(CouplingNetwork([1, 1], [0, 0], [[0, 1], [1 + 1e-13, 0]]))
    assert not is_symmetric(CouplingNetwork([1, 1], [0, 0], [[0, 1], [1 + 1e-11, 0]]))


def test_reachability_examples():
    assert has_globally_reachable_node(kuramoto_network([0, 0, 0], 1.0))
    chain = np.zeros((3, 3))
    chain[1, 0] = chain[2, 1] = 1.0  # node 1 influences 2, 2 influences 3
    assert has_globally_reachable_node(GraphView.from_weights(chain))
    pairs = np.zeros((4, 4))
    pairs[0, 1] = pairs[1, 0] = pairs[2, 3] = pairs[3, 2] = 1.0
    assert not has_globally_reachable_node(GraphView.from_weights(pairs))
    assert not GraphView.from_weights(pairs).is_connected()


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 2**32 - 1))
def test_reachability_monotone_under_edge_addition(n, seed):
    rng = np.random.default_rng(seed)
    A = (rng.random((n, n)) < 0.3).astype(float)
    np.fill_diagonal(A, 0)
    before = has_globally_reachable_node(GraphView.from_weights(A))
    i, j = rng.choice(n, 2, replace=False)
    A[i, j] = 1.0
    after = has_globally_reachable_node(GraphView.from_weights(A))
    assert after or not before


def test_permuted_relabels(rng):
    net = CouplingNetwork(rng.uniform(1, 2, 3), [0, 1, 2], [[0, 1, 2], [1, 0, 3], [2, 3, 0]])
    p = net.permuted([2, 0, 1])
    assert p.omega.tolist() == [2, 0, 1]
    assert p.P[0, 1] == net.P[2, 0]


def test_kuramoto_network():
    net = kuramoto_network([0, 1, 2], 3.0)
    assert np.allclose(net.P, 1.0 - np.eye(3)) and np.all(net.D == 1)
