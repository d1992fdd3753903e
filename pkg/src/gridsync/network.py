"""Static network data: damping, inertia, natural frequencies, couplings.

One ``CouplingNetwork`` serves the first-order (non-uniform Kuramoto),
grounded and second-order (swing) models; inertia is simply optional.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    InvalidDamping,
    InvalidInertia,
    InvalidPhaseShift,
    MissingInertia,
    NegativeCoupling,
    NonzeroDiagonal,
    ShapeMismatch,
)

FloatArray = NDArray[np.float64]

SYMMETRY_TOL = 1e-12


def _readonly(a: ArrayLike) -> FloatArray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CouplingNetwork:
    """Parameters of an oscillator network.

    ``P[i, j]`` is the coupling felt by oscillator ``i`` from ``j`` and
    ``phi[i, j]`` the matching phase shift, so the first-order vector field is
    ``D_i dtheta_i = omega_i - sum_j P_ij sin(theta_i - theta_j + phi_ij)``.
    Arrays are copied and frozen on construction.
    """

    D: FloatArray
    omega: FloatArray
    P: FloatArray
    phi: FloatArray = None  # type: ignore[assignment]
    M: Optional[FloatArray] = None
    validated: bool = field(default=True, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "D", _readonly(np.atleast_1d(self.D)))
        object.__setattr__(self, "omega", _readonly(np.atleast_1d(self.omega)))
        object.__setattr__(self, "P", _readonly(np.atleast_2d(self.P)))
        phi = np.zeros_like(self.P) if self.phi is None else np.atleast_2d(self.phi)
        object.__setattr__(self, "phi", _readonly(phi))
        if self.M is not None:
            object.__setattr__(self, "M", _readonly(np.atleast_1d(self.M)))
        if self.validated:
            validate(self)

    @property
    def n(self) -> int:
        return int(self.D.shape[0])

    @property
    def has_inertia(self) -> bool:
        return self.M is not None

    @property
    def phi_max(self) -> float:
        """Largest phase shift over existing edges (absent edges are ignored)."""
        mask = self.P > 0
        if not mask.any():
            return 0.0
        return float(self.phi[mask].max())

    @property
    def is_lossless(self) -> bool:
        return self.phi_max == 0.0

    def require_inertia(self) -> FloatArray:
        if self.M is None:
            raise MissingInertia("network has no inertia vector M")
        return self.M

    def with_inertia(self, M: ArrayLike) -> "CouplingNetwork":
        return CouplingNetwork(self.D, self.omega, self.P, self.phi, M)

    def with_omega(self, omega: ArrayLike) -> "CouplingNetwork":
        return CouplingNetwork(self.D, omega, self.P, self.phi, self.M)

    def scaled_coupling(self, c: float) -> "CouplingNetwork":
        return CouplingNetwork(self.D, self.omega, c * self.P, self.phi, self.M)

    def permuted(self, perm: ArrayLike) -> "CouplingNetwork":
        """Relabel oscillators: new oscillator ``k`` is old ``perm[k]``."""
        p = np.asarray(perm, dtype=int)
        M = None if self.M is None else self.M[p]
        return CouplingNetwork(
            self.D[p], self.omega[p], self.P[np.ix_(p, p)], self.phi[np.ix_(p, p)], M
        )

    def graph(self) -> "GraphView":
        return GraphView.from_network(self)


def validate(net: CouplingNetwork) -> None:
    """Raise the matching ``NetworkInvalid`` subclass if an invariant fails."""
    n = net.D.shape[0] if net.D.ndim == 1 else -1
    if net.D.ndim != 1 or n < 1:
        raise ShapeMismatch(f"D must be a non-empty vector, got shape {net.D.shape}")
    if net.omega.shape != (n,):
        raise ShapeMismatch(f"omega has shape {net.omega.shape}, expected ({n},)")
    if net.P.shape != (n, n):
        raise ShapeMismatch(f"P has shape {net.P.shape}, expected ({n}, {n})")
    if net.phi.shape != (n, n):
        raise ShapeMismatch(f"phi has shape {net.phi.shape}, expected ({n}, {n})")
    if net.M is not None and net.M.shape != (n,):
        raise ShapeMismatch(f"M has shape {net.M.shape}, expected ({n},)")

    arrays = [net.D, net.omega, net.P, net.phi] + ([] if net.M is None else [net.M])
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise ShapeMismatch("network parameters must be finite")

    if np.any(net.D <= 0):
        i = int(np.argmin(net.D))
        raise InvalidDamping(f"D[{i}] = {float(net.D[i])!r} must be > 0")
    if net.M is not None and np.any(net.M <= 0):
        i = int(np.argmin(net.M))
        raise InvalidInertia(f"M[{i}] = {float(net.M[i])!r} must be > 0")
    if np.any(np.diag(net.P) != 0) or np.any(np.diag(net.phi) != 0):
        raise NonzeroDiagonal("P and phi must have zero diagonals")
    if np.any(net.P < 0):
        i, j = np.argwhere(net.P < 0)[0]
        raise NegativeCoupling(f"P[{i},{j}] = {float(net.P[i, j])!r} is negative")
    off = ~np.eye(n, dtype=bool) & (net.P > 0)
    bad = off & ((net.phi < 0) | (net.phi >= np.pi / 2))
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise InvalidPhaseShift(f"phi[{i},{j}] = {float(net.phi[i, j])!r} not in [0, pi/2)")


def is_symmetric(net: CouplingNetwork, tol: float = SYMMETRY_TOL) -> bool:
    return bool(
        np.all(np.abs(net.P - net.P.T) <= tol)
        and np.all(np.abs(net.phi - net.phi.T) <= tol)
    )


def is_complete(net: CouplingNetwork) -> bool:
    off = ~np.eye(net.n, dtype=bool)
    return bool(np.all(net.P[off] > 0))


@dataclass(frozen=True, eq=False)
class GraphView:
    """Boolean influence graph: ``adjacency[i, j]`` is an edge j -> i."""

    adjacency: NDArray[np.bool_]

    @classmethod
    def from_network(cls, net: CouplingNetwork) -> "GraphView":
        return cls.from_weights(net.P)

    @classmethod
    def from_weights(cls, W: ArrayLike) -> "GraphView":
        adj = np.asarray(W) > 0
        adj = adj & ~np.eye(adj.shape[0], dtype=bool)
        adj.setflags(write=False)
        return cls(adj)

    @property
    def n(self) -> int:
        return int(self.adjacency.shape[0])

    def reaches(self, target: int) -> NDArray[np.bool_]:
        """Mask of nodes with a directed path to ``target`` (target included)."""
        seen = np.zeros(self.n, dtype=bool)
        seen[target] = True
        queue = deque([target])
        while queue:
            k = queue.popleft()
            # j -> k exists when adjacency[k, j]
            for j in np.flatnonzero(self.adjacency[k] & ~seen):
                seen[j] = True
                queue.append(int(j))
        return seen

    def is_connected(self) -> bool:
        """Weak connectivity (edge directions ignored)."""
        sym = GraphView(self.adjacency | self.adjacency.T)
        return bool(sym.reaches(0).all())


def has_globally_reachable_node(g: GraphView | CouplingNetwork) -> bool:
    if isinstance(g, CouplingNetwork):
        g = g.graph()
    return any(g.reaches(k).all() for k in range(g.n))


def kuramoto_network(
    omega: ArrayLike, K: float, D: ArrayLike | None = None, M: ArrayLike | None = None
) -> CouplingNetwork:
    """Classic all-to-all Kuramoto network, ``P_ij = K / n``, lossless."""
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[0]
    P = np.full((n, n), K / n)
    np.fill_diagonal(P, 0.0)
    return CouplingNetwork(np.ones(n) if D is None else D, omega, P, M=M)
