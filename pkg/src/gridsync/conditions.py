"""Synchronization certificates, practical-stability gaps and rate bounds.

Every certificate is a strict inequality ``lhs > rhs``. When it holds, the
gap between the two sides defines an initial region (``gamma_max``) and an
ultimate region (``gamma_min``) of phase cohesiveness. Rates are reported as
positive decay constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import bisect

from .errors import (
    Disconnected,
    GammaOutOfRange,
    LossyNetwork,
    NotComplete,
    NotSymmetric,
    NTooSmall,
    RatioOutOfRange,
    RootNotBracketed,
)
from .network import CouplingNetwork, is_complete, is_symmetric
from .spectral import algebraic_connectivity, dihedral_cos, incidence_matrix, lossless_weights
from .torus import pair_index, weighted_mean_angle as _weighted_mean_angle

HALF_PI = 0.5 * math.pi
K_INFINITY = 1e15
ROOT_RESIDUAL = 1e-12


def sinc(x: float | np.ndarray) -> float | np.ndarray:
    """Unnormalized sinc, sin(x)/x with sinc(0) = 1."""
    return np.sinc(np.asarray(x) / math.pi)


@dataclass(frozen=True)
class ConditionReport:
    """Evaluated certificate. ``holds`` is always ``lhs > rhs``."""

    name: str
    lhs: float
    rhs: float
    holds: bool
    gamma_min: Optional[float] = None
    gamma_max: Optional[float] = None
    phi_max: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        """rhs / lhs, critical value over available coupling; below 1 iff the test holds."""
        if self.lhs <= 0.0:
            return math.inf
        return self.rhs / self.lhs


# -- root solving -------------------------------------------------------------


ENDPOINT_TOL = 1e-14


def _solve_monotone(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of ``f`` on [lo, hi] by bisection; endpoints count as roots.

    An endpoint value within ``ENDPOINT_TOL`` of zero is treated as a root so
    that e.g. sinc(pi), which rounds to 4e-17, still brackets ratio 0.
    """
    flo, fhi = f(lo), f(hi)
    if abs(flo) <= ENDPOINT_TOL:
        return lo
    if abs(fhi) <= ENDPOINT_TOL:
        return hi
    if np.sign(flo) == np.sign(fhi):
        raise RootNotBracketed(f"f({lo:.6g})={flo:.3g}, f({hi:.6g})={fhi:.3g}")
    root = bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(root)


def solve_gamma(
    ratio: float, phi_max: float = 0.0, law: Literal["sine", "sinc"] = "sine"
) -> tuple[float, float]:
    """Practical-stability radii (gamma_min, gamma_max) for a certificate ratio.

    ``ratio`` is critical value over available coupling (Gamma_crit/Gamma_min
    for the sine law, lambda_crit/lambda_2 for the sinc law); the certificate
    holds exactly when it is below one. Both laws share
    ``sin(gamma_min) = cos(phi_max) * ratio``. For ``gamma_max`` the sine law
    uses the same equation on (pi/2, pi] and the sinc law solves
    ``sinc(gamma_max) / sinc(pi/2 - phi_max) = ratio`` on (pi/2 - phi_max, pi].
    """
    if not 0.0 <= ratio < 1.0:
        raise RatioOutOfRange(f"ratio {ratio!r} not in [0, 1)")
    if not 0.0 <= phi_max < HALF_PI:
        raise GammaOutOfRange(f"phi_max {phi_max!r} not in [0, pi/2)")
    target = math.cos(phi_max) * ratio
    gamma_min = math.asin(target)
    if law == "sine":
        return gamma_min, math.pi - gamma_min
    if law != "sinc":
        raise ValueError(f"unknown law {law!r}")
    edge = HALF_PI - phi_max
    scale = float(sinc(edge))
    gamma_max = _solve_monotone(lambda g: float(sinc(g)) / scale - ratio, edge, math.pi)
    return gamma_min, gamma_max


# -- helpers ------------------------------------------------------------------


def _require_symmetric(net: CouplingNetwork) -> None:
    if not is_symmetric(net):
        raise NotSymmetric("certificate requires P = P^T and phi = phi^T")


def _require_complete(net: CouplingNetwork) -> None:
    _require_symmetric(net)
    if not is_complete(net):
        raise NotComplete("certificate requires a complete coupling graph")


def _scaled_frequencies(net: CouplingNetwork) -> np.ndarray:
    return net.omega / net.D


def _max_frequency_gap(net: CouplingNetwork) -> float:
    w = _scaled_frequencies(net)
    return float(w.max() - w.min())


def _lossy_row_sums(net: CouplingNetwork) -> np.ndarray:
    """sum_j (P_ij / D_i) sin(phi_ij) for each i."""
    return (net.P * np.sin(net.phi)).sum(axis=1) / net.D


def _gamma_pair(holds: bool, ratio: float, phi_max: float, law: str):
    if not holds:
        return None, None
    return solve_gamma(ratio, phi_max, law)  # type: ignore[arg-type]


# -- Condition I family -------------------------------------------------------


def condition_I(net: CouplingNetwork) -> ConditionReport:
    """Minimal lossless coupling of any oscillator vs. non-uniformity plus losses.

    Gamma_min = n * min_{i != j} (P_ij / D_i) cos(phi_ij); for n = 2 the min runs
    over both ordered pairs, i.e. min(P_12/D_1, P_12/D_2) cos(phi_12).
    """
    _require_complete(net)
    n = net.n
    phi_max = net.phi_max
    off = ~np.eye(n, dtype=bool)
    scaled = (lossless_weights(net) / net.D[:, None])[off]
    gamma_min_cpl = n * float(scaled.min()) if n > 1 else math.inf
    gamma_crit = (_max_frequency_gap(net) + 2.0 * float(_lossy_row_sums(net).max())) / math.cos(
        phi_max
    )
    holds = gamma_min_cpl > gamma_crit
    ratio = gamma_crit / gamma_min_cpl if holds else math.nan
    g_lo, g_hi = _gamma_pair(holds, ratio, phi_max, "sine")
    return ConditionReport(
        "condition_I",
        gamma_min_cpl,
        gamma_crit,
        holds,
        g_lo,
        g_hi,
        phi_max,
        {"Gamma_min": gamma_min_cpl, "Gamma_critical": gamma_crit},
    )


def _pair_lossless_coupling(a: np.ndarray, m: int, l: int) -> float:
    """sum_k min_{i in {m, l} minus {k}} a[i, k]."""
    n = a.shape[0]
    total = 0.0
    for k in range(n):
        if k == m:
            total += a[l, k]
        elif k == l:
            total += a[m, k]
        else:
            total += min(a[m, k], a[l, k])
    return total


def condition_appendix_pairwise(net: CouplingNetwork) -> ConditionReport:
    """Pairwise variant: every pair's lossless coupling beats its own critical value."""
    _require_complete(net)
    phi_max = net.phi_max
    a = lossless_weights(net) / net.D[:, None]
    w = _scaled_frequencies(net)
    lossy = _lossy_row_sums(net)
    pairs = {}
    worst = None
    for m, l in zip(*pair_index(net.n)):
        m, l = int(m), int(l)
        g = _pair_lossless_coupling(a, m, l)
        gc = (abs(w[m] - w[l]) + lossy[m] + lossy[l]) / math.cos(phi_max)
        r = gc / g if g > 0 else math.inf
        pairs[(m, l)] = {"Gamma": g, "Gamma_critical": gc, "ratio": r, "holds": g > gc}
        if worst is None or r > pairs[worst]["ratio"]:
            worst = (m, l)
    if worst is None:  # n == 1
        return ConditionReport("appendix_pairwise", math.inf, 0.0, True, 0.0, math.pi)
    holds = all(p["holds"] for p in pairs.values())
    wp = pairs[worst]
    g_lo, g_hi = _gamma_pair(holds, wp["ratio"], phi_max, "sine")
    failing = [pq for pq, p in pairs.items() if not p["holds"]]
    return ConditionReport(
        "appendix_pairwise",
        wp["Gamma"],
        wp["Gamma_critical"],
        holds,
        g_lo,
        g_hi,
        phi_max,
        {"pairs": pairs, "worst_pair": worst, "failing_pairs": failing},
    )


def condition_appendix_concave(net: CouplingNetwork) -> ConditionReport:
    """Concavity-based pairwise variant with implicit gap equations per pair."""
    _require_complete(net)
    n = net.n
    phi_max = net.phi_max
    PD = net.P / net.D[:, None]
    w = _scaled_frequencies(net)
    lossy = _lossy_row_sums(net)

    def pair_sum(m: int, l: int, values: np.ndarray) -> float:
        return _pair_lossless_coupling(values, m, l)

    pairs = {}
    worst = None
    for m, l in zip(*pair_index(n)):
        m, l = int(m), int(l)
        lhs = pair_sum(m, l, PD * np.cos(net.phi + phi_max))
        gc = abs(w[m] - w[l]) + max(lossy[m], lossy[l])
        r = gc / lhs if lhs > 0 else math.inf
        pairs[(m, l)] = {"lhs": lhs, "Gamma_critical": gc, "ratio": r, "holds": lhs > gc}
        if worst is None or r > pairs[worst]["ratio"]:
            worst = (m, l)
    if worst is None:
        return ConditionReport("appendix_concave", math.inf, 0.0, True, 0.0, math.pi)
    holds = all(p["holds"] for p in pairs.values())
    g_lo = g_hi = None
    if holds:
        edge = HALF_PI - phi_max
        lows, highs = [], []
        for (m, l), p in pairs.items():
            gc = p["Gamma_critical"]
            f_lo = lambda g, m=m, l=l, gc=gc: pair_sum(m, l, PD * np.sin(g - net.phi)) - gc
            f_hi = lambda g, m=m, l=l, gc=gc: pair_sum(m, l, PD * np.sin(g + net.phi)) - gc
            p["gamma_min"] = _solve_monotone(f_lo, 0.0, edge)
            p["gamma_max"] = _solve_monotone(f_hi, HALF_PI, math.pi)
            lows.append(p["gamma_min"])
            highs.append(p["gamma_max"])
        g_lo, g_hi = max(lows), min(highs)
    wp = pairs[worst]
    return ConditionReport(
        "appendix_concave",
        wp["lhs"],
        wp["Gamma_critical"],
        holds,
        g_lo,
        g_hi,
        phi_max,
        {
            "pairs": pairs,
            "worst_pair": worst,
            "failing_pairs": [pq for pq, p in pairs.items() if not p["holds"]],
        },
    )


def condition_appendix_pmin(net: CouplingNetwork) -> ConditionReport:
    """Most conservative variant: smallest coupling vs. a scaled critical value."""
    _require_complete(net)
    n = net.n
    phi_max = net.phi_max
    off = ~np.eye(n, dtype=bool)
    p_min = float(net.P[off].min()) if n > 1 else math.inf
    p_crit = (
        net.D.max()
        / (n * math.cos(phi_max))
        * (_max_frequency_gap(net) + float(_lossy_row_sums(net).max()))
    )
    holds = p_min > p_crit
    g_lo = g_hi = None
    if holds:
        g_lo = math.asin(math.cos(phi_max) * p_crit / p_min)
        g_hi = HALF_PI - phi_max
    return ConditionReport(
        "appendix_pmin",
        p_min,
        float(p_crit),
        holds,
        g_lo,
        g_hi,
        phi_max,
        {"P_min": p_min, "P_critical": float(p_crit)},
    )


# -- Condition II -------------------------------------------------------------


def condition_II(net: CouplingNetwork) -> ConditionReport:
    """Algebraic connectivity of the lossless coupling vs. a critical value.

    The ultimate and initial regions are two-norm balls ``||H theta||_2 <= gamma``;
    trajectories are only guaranteed from inside ``alpha * gamma_max``.
    """
    _require_symmetric(net)
    n = net.n
    if n < 2:
        raise NTooSmall("condition II needs n >= 2")
    if not net.graph().is_connected():
        raise Disconnected("condition II requires a connected coupling graph")
    phi_max = net.phi_max
    lam2 = algebraic_connectivity(lossless_weights(net))
    H = incidence_matrix(n)
    i, j = pair_index(n)
    DD = net.D[i] * net.D[j]
    kappa = float(net.D.sum())
    alpha = math.sqrt(DD.min() / DD.max())
    numerator = float(np.linalg.norm(H @ _scaled_frequencies(net))) + math.sqrt(n) * float(
        np.linalg.norm(_lossy_row_sums(net))
    )
    denominator = math.cos(phi_max) * (kappa / n) * alpha / DD.max()
    lam_crit = numerator / denominator
    holds = lam2 > lam_crit
    ratio = lam_crit / lam2 if holds else math.nan
    g_lo, g_hi = _gamma_pair(holds, ratio, phi_max, "sinc")
    details = {"lambda2": lam2, "lambda_critical": lam_crit, "kappa": kappa, "alpha": alpha}
    if holds:
        details["initial_radius"] = alpha * g_hi
    return ConditionReport("condition_II", lam2, lam_crit, holds, g_lo, g_hi, phi_max, details)


# -- necessary condition ------------------------------------------------------


@dataclass(frozen=True)
class NecessaryReport:
    """Pairs for which no common-frequency solution can exist."""

    lhs: np.ndarray
    rhs: np.ndarray
    flagged: list[tuple[int, int]]

    @property
    def any_flagged(self) -> bool:
        return bool(self.flagged)


def necessary_condition(net: CouplingNetwork) -> NecessaryReport:
    w = _scaled_frequencies(net)
    lhs = np.abs(w[:, None] - w[None, :])
    strength = net.P.sum(axis=1) / net.D
    rhs = strength[:, None] + strength[None, :]
    flagged = [
        (int(i), int(j)) for i, j in zip(*pair_index(net.n)) if lhs[i, j] > rhs[i, j]
    ]
    return NecessaryReport(lhs, rhs, flagged)


# -- classic Kuramoto bounds --------------------------------------------------


def K_critical(omega: ArrayLike) -> float:
    w = np.asarray(omega, dtype=float)
    return float(w.max() - w.min())


def classic_K_of_gamma(omega: ArrayLike, gamma: float) -> float:
    """Coupling that keeps the closed arc of length pi/2 - gamma invariant."""
    if not 0.0 < gamma <= HALF_PI:
        raise GammaOutOfRange(f"gamma {gamma!r} not in (0, pi/2]")
    kc = K_critical(omega)
    if kc == 0.0:
        return 0.0
    K = kc / math.cos(gamma)
    return math.inf if K > K_INFINITY else K


def literature_bounds(omega: ArrayLike, gamma: float, n: int) -> dict[str, float]:
    """Compare K(gamma) with three earlier sufficient bounds for classic Kuramoto."""
    if n < 3:
        raise NTooSmall("the n/(n-2) bound needs n >= 3")
    K = classic_K_of_gamma(omega, gamma)
    x = HALF_PI - gamma
    return {
        "this": K,
        "chopra": K * n / 2.0,
        "schmidt": K * n / (n - 2.0),
        "geometric": K * math.cos(x / 2.0) / math.cos(x) if K else 0.0,
    }


# -- rates and limits ---------------------------------------------------------


def _require_lossless_symmetric(net: CouplingNetwork) -> None:
    _require_symmetric(net)
    if not net.is_lossless:
        raise LossyNetwork("rate bound needs phi = 0 on every edge")


def rate_lambda_fe(net: CouplingNetwork, gamma: float) -> float:
    """Worst-case frequency synchronization rate (positive decay constant)."""
    _require_lossless_symmetric(net)
    if not 0.0 <= gamma < HALF_PI:
        raise GammaOutOfRange(f"gamma {gamma!r} not in [0, pi/2)")
    lam2 = algebraic_connectivity(net.P)
    return lam2 * math.cos(gamma) * dihedral_cos(net.D) ** 2 / float(net.D.max())


def rate_lambda_ps(net: CouplingNetwork, gamma: float) -> float:
    """Worst-case phase synchronization rate (positive decay constant)."""
    _require_lossless_symmetric(net)
    if not 0.0 <= gamma < math.pi:
        raise GammaOutOfRange(f"gamma {gamma!r} not in [0, pi)")
    lam2 = algebraic_connectivity(net.P)
    return lam2 * float(sinc(gamma)) * dihedral_cos(net.D) ** 2 / float(net.D.max())


def sync_frequency_omega(net: CouplingNetwork) -> float:
    return float(net.omega.sum() / net.D.sum())


def weighted_mean_angle(net: CouplingNetwork, theta0: ArrayLike) -> float:
    return _weighted_mean_angle(net.D, theta0)
