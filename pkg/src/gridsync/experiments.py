"""Random instance families and batched certificate-by-simulation runs.

Instances are drawn with O(1) coupling and the natural frequencies rescaled
so that the certificate ratio (critical value over available coupling) hits
a prescribed target. Keeping the coupling bounded keeps the RK4 step large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .conditions import ConditionReport, condition_I, condition_II
from .dynamics import KuramotoField, default_horizon, integrate_kuramoto_batch
from .network import CouplingNetwork
from .spectral import algebraic_connectivity, dihedral_cos, incidence_matrix, lossless_weights
from .torus import arc_length_V, in_Delta, two_norm

FloatArray = NDArray[np.float64]


def _sym(a: FloatArray) -> FloatArray:
    a = 0.5 * (a + a.T)
    np.fill_diagonal(a, 0.0)
    return a


def _unit_spread(rng: np.random.Generator, n: int) -> FloatArray:
    u = rng.random(n)
    return (u - u.min()) / np.ptp(u)


def random_condition_I_instance(
    rng: np.random.Generator,
    n: int,
    phi_cap: float = 0.3,
    ratio_range: tuple[float, float] = (0.2, 0.95),
    lossless: bool = False,
    damping_range: tuple[float, float] = (0.5, 2.0),
) -> tuple[CouplingNetwork, ConditionReport]:
    """Symmetric complete network certified by condition I.

    The target ratio ``Gamma_crit / Gamma_min`` is drawn from ``ratio_range``.
    """
    while True:
        D = rng.uniform(*damping_range, n)
        K = rng.uniform(1.0, 3.0)
        P = _sym(K * rng.uniform(0.5, 1.5, (n, n)) / n)
        phi = np.zeros((n, n)) if lossless else _sym(rng.uniform(0.0, phi_cap, (n, n)))
        base = condition_I(CouplingNetwork(D, np.zeros(n), P, phi))
        cos_phi = math.cos(base.phi_max)
        losses = base.rhs * cos_phi  # = 2 max_i sum_j (P_ij/D_i) sin(phi_ij)
        gap = rng.uniform(*ratio_range) * base.lhs * cos_phi - losses
        if gap <= 0:
            continue
        omega = D * (gap * _unit_spread(rng, n) + rng.uniform(-1.0, 1.0))
        net = CouplingNetwork(D, omega, P, phi)
        report = condition_I(net)
        if report.holds:
            return net, report


def random_connected_weights(
    rng: np.random.Generator, n: int, extra_edge_prob: float = 0.3, scale: float = 1.0
) -> FloatArray:
    """Symmetric weights on a random spanning tree plus random extra edges."""
    W = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):
        a, b = order[k], order[rng.integers(0, k)]
        W[a, b] = W[b, a] = 1.0
    extra = np.triu(rng.random((n, n)) < extra_edge_prob, 1)
    W = np.maximum(W, extra + extra.T)
    weights = _sym(rng.uniform(0.5, 1.5, (n, n)))
    return scale * W * weights


def random_condition_II_instance(
    rng: np.random.Generator,
    n: int,
    phi_cap: float = 0.05,
    ratio_range: tuple[float, float] = (0.2, 0.95),
    lossless: bool = False,
    damping_range: tuple[float, float] = (0.8, 1.25),
) -> tuple[CouplingNetwork, ConditionReport]:
    """Symmetric connected (generally non-complete) network certified by condition II."""
    H = incidence_matrix(n)
    while True:
        D = rng.uniform(*damping_range, n)
        P = random_connected_weights(rng, n, scale=rng.uniform(1.0, 3.0))
        mask = P > 0
        phi = np.zeros((n, n)) if lossless else _sym(rng.uniform(0.0, phi_cap, (n, n))) * mask
        base = condition_II(CouplingNetwork(D, np.zeros(n), P, phi))
        lam2 = base.details["lambda2"]
        denominator = math.cos(base.phi_max) * (base.details["kappa"] / n) * base.details["alpha"]
        i, j = np.triu_indices(n, 1)
        denominator /= float((D[i] * D[j]).max())
        losses = base.rhs * denominator
        gap = rng.uniform(*ratio_range) * lam2 * denominator - losses
        if gap <= 0:
            continue
        u = rng.standard_normal(n)
        u *= gap / float(np.linalg.norm(H @ u))
        net = CouplingNetwork(D, D * (u + rng.uniform(-1.0, 1.0)), P, phi)
        report = condition_II(net)
        if report.holds:
            return net, report


def random_phase_sync_instance(
    rng: np.random.Generator, n: int, complete: bool = True
) -> CouplingNetwork:
    """Lossless symmetric network with omega_i / D_i uniform."""
    D = rng.uniform(0.5, 2.0, n)
    if complete:
        P = _sym(rng.uniform(0.5, 1.5, (n, n)) * rng.uniform(1.0, 3.0) / n)
    else:
        P = random_connected_weights(rng, n, scale=rng.uniform(0.5, 1.5))
    return CouplingNetwork(D, D * rng.uniform(-1.0, 1.0), P)


def rate_estimate(net: CouplingNetwork, gamma: float) -> float:
    """Frequency-sync rate heuristic, equal to lambda_fe(gamma) when lossless.

    Lossy networks use the lossless coupling P_ij cos(phi_ij) and cos(gamma + phi_max).
    """
    arg = min(gamma + net.phi_max, 0.5 * math.pi - 1e-3)
    lam2 = algebraic_connectivity(lossless_weights(net))
    return lam2 * math.cos(arg) * dihedral_cos(net.D) ** 2 / float(net.D.max())


def stable_step(nets: Sequence[CouplingNetwork], dt_max: float = 0.05, courant: float = 0.5) -> float:
    """RK4 step that keeps h * max_i sum_j P_ij / D_i below ``courant``."""
    stiff = max(float((net.P / net.D[:, None]).sum(axis=1).max()) for net in nets)
    return min(dt_max, courant / stiff) if stiff > 0 else dt_max


@dataclass(frozen=True)
class EnsembleResult:
    """Per-instance samples of a batched run, cut at each instance's horizon."""

    times: FloatArray  # shared sample grid
    states: FloatArray  # (T, B, n) lifted angles
    horizons: FloatArray  # (B,)
    nets: tuple[CouplingNetwork, ...]

    def index_at(self, b: int) -> int:
        return int(np.searchsorted(self.times, self.horizons[b] - 1e-9))

    def final_state(self, b: int) -> FloatArray:
        return self.states[self.index_at(b), b]

    def frequencies(self, b: int, upto_horizon: bool = True) -> FloatArray:
        stop = self.index_at(b) + 1 if upto_horizon else len(self.times)
        return KuramotoField([self.nets[b]])(0.0, self.states[:stop, b])

    def series(self, b: int) -> tuple[FloatArray, FloatArray]:
        stop = self.index_at(b) + 1
        return self.times[:stop], self.states[:stop, b]


def run_ensemble(
    nets: Sequence[CouplingNetwork],
    thetas0: FloatArray,
    horizons: Sequence[float],
    dt: Optional[float] = None,
    output_dt: float = 0.5,
) -> EnsembleResult:
    """Batched RK4 of same-size first-order networks up to the largest horizon."""
    hz = np.asarray(horizons, dtype=float)
    step = stable_step(nets) if dt is None else dt
    times, states = integrate_kuramoto_batch(nets, thetas0, float(hz.max()), step, output_dt)
    return EnsembleResult(times, states, hz, tuple(nets))


@dataclass(frozen=True)
class CertificateOutcome:
    n: int
    freq_spread: float
    final_measure: float
    bound: float
    horizon: float

    def ok(self, spread_tol: float = 1e-6, slack: float = 1e-3) -> bool:
        return self.freq_spread < spread_tol and self.final_measure <= self.bound + slack


def certificate_sweep(
    rng: np.random.Generator,
    sizes: Sequence[int],
    per_size: int,
    make_instance: Callable,
    sample_initial: Callable,
    measure: Callable[[FloatArray], float],
) -> list[CertificateOutcome]:
    """Draw certified instances, simulate to their horizons, measure the end state.

    ``sample_initial(report, n, rng)`` returns theta0; ``measure`` maps the
    final angles to the cohesiveness measure compared against ``gamma_min``.
    """
    outcomes = []
    for n in sizes:
        nets, thetas, horizons, reports = [], [], [], []
        for _ in range(per_size):
            net, report = make_instance(rng, n)
            nets.append(net)
            reports.append(report)
            thetas.append(sample_initial(report, n, rng))
            horizons.append(default_horizon(rate_estimate(net, report.gamma_min)))
        res = run_ensemble(nets, np.array(thetas), horizons)
        for b, report in enumerate(reports):
            freqs = res.frequencies(b)[-1]
            outcomes.append(
                CertificateOutcome(
                    n,
                    float(np.ptp(freqs)),
                    measure(res.final_state(b)),
                    float(report.gamma_min),
                    float(res.horizons[b]),
                )
            )
    return outcomes


def arc_measure(theta: FloatArray) -> float:
    v = arc_length_V(theta)
    return math.inf if v is None else v


def two_norm_measure(theta: FloatArray) -> float:
    return two_norm(theta) if in_Delta(theta, math.pi) else math.inf
