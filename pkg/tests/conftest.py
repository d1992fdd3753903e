from __future__ import annotations

import numpy as np
import pytest

from gridsync.network import CouplingNetwork


def random_symmetric_network(rng, n, lossless=False, complete=True, phi_cap=0.3, inertia=False):
    D = rng.uniform(0.5, 2.0, n)
    P = rng.uniform(0.2, 2.0, (n, n))
    if not complete:
        P *= rng.random((n, n)) < 0.6
        for k in range(n - 1):  # keep a spanning path
            P[k, k + 1] = max(P[k, k + 1], 0.3)
    P = np.triu(P, 1)
    P = P + P.T
    phi = np.zeros((n, n)) if lossless else np.triu(rng.uniform(0, phi_cap, (n, n)), 1)
    phi = (phi + phi.T) * (P > 0)
    M = rng.uniform(0.1, 1.0, n) if inertia else None
    return CouplingNetwork(D, rng.uniform(-1, 1, n), P, phi, M)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
