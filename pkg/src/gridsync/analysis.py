"""Post-processing of trajectories.

Synchronization detection, exponential-rate fits, the phase-synchronization
limit and the comparison between the second-order model and its first-order
(grounded Kuramoto) reduction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .conditions import rate_lambda_ps, sync_frequency_omega
from .dynamics import (
    IntegratorOptions,
    Trajectory,
    integrate,
    rhs_grounded,
    rk4,
    model_field,
    slow_manifold,
    sp_parameters,
)
from .errors import (
    HypothesisViolated,
    NoDecayWindow,
    NotPhaseCohesive,
    ReducedModelDiverged,
    TrajectoryTooShort,
)
from .network import CouplingNetwork, is_symmetric
from .torus import TWO_PI, arc, arc_length_V, geodesic, grnd, in_Delta, lift, two_norm

FloatArray = NDArray[np.float64]
Channel = Literal["freq_spread", "disagreement", "arc_excess"]

MIN_SAMPLES = 20


# -- frequency synchronization ------------------------------------------------


@dataclass(frozen=True)
class SyncVerdict:
    frequency_synced: bool
    sync_frequency: float
    rate_fit: Optional[float]
    final_cohesiveness: dict[str, float]
    settled_at: Optional[float]
    trailing_spread: float = math.nan
    containment_violation: Optional[str] = None


def _final_cohesiveness(theta: FloatArray) -> dict[str, float]:
    v = arc_length_V(theta)
    if v is None:
        return {"inf_norm": math.nan, "two_norm": math.nan}
    two = two_norm(theta) if v < math.pi else math.nan
    return {"inf_norm": v, "two_norm": two}


def detect_frequency_sync(traj: Trajectory, tol: float = 1e-6) -> SyncVerdict:
    """Synced iff the frequency spread stays below ``tol`` over the last 10% of samples."""
    if len(traj) < MIN_SAMPLES:
        raise TrajectoryTooShort(f"{len(traj)} samples, need at least {MIN_SAMPLES}")
    freqs = traj.frequencies
    spread = freqs.max(axis=1) - freqs.min(axis=1)
    tail = max(1, int(math.ceil(0.1 * len(traj))))
    trailing = float(spread[-tail:].max())
    synced = trailing < tol
    sync_freq = float(freqs[-tail:].mean())

    settled_at = None
    rate = None
    violation = None
    if synced:
        above = np.flatnonzero(spread >= tol)
        settled_at = float(traj.times[0 if above.size == 0 else min(above[-1] + 1, len(traj) - 1)])
        try:
            rate = fit_exponential_rate(traj, "freq_spread")
        except NoDecayWindow:
            rate = None
        lo, hi = float(freqs[0].min()), float(freqs[0].max())
        if not (lo - tol <= sync_freq <= hi + tol):
            violation = f"sync frequency {sync_freq:.17g} outside [{lo:.17g}, {hi:.17g}]"
    return SyncVerdict(
        synced,
        sync_freq,
        rate,
        _final_cohesiveness(traj.theta[-1]),
        settled_at,
        trailing,
        violation,
    )


# -- rate fitting ---------------------------------------------------------------


def fit_rate_series(
    times: ArrayLike, values: ArrayLike, window: tuple[float, float] = (1e-8, 1e-2)
) -> float:
    """Decay rate from a log-linear least-squares fit over a mid-decay window.

    The window starts at the first sample below ``window[1] * values[0]`` and
    ends at the last following sample still above ``window[0] * values[0]``.
    """
    t = np.asarray(times, dtype=float)
    v = np.abs(np.asarray(values, dtype=float))
    if v.size < 3 or not np.isfinite(v[0]) or v[0] <= 0:
        raise NoDecayWindow("channel is empty or starts at zero")
    lo, hi = window[0] * v[0], window[1] * v[0]
    below = np.flatnonzero(v <= hi)
    if below.size == 0:
        raise NoDecayWindow("channel never decays into the fit window")
    start = int(below[0])
    tail = v[start:]
    inside = np.flatnonzero((tail >= lo) & np.isfinite(tail) & (tail > 0))
    if inside.size == 0:
        raise NoDecayWindow("no samples inside the fit window")
    # stop at the first exit from the window
    breaks = np.flatnonzero(np.diff(inside) != 1)
    stop = inside[breaks[0]] if breaks.size else inside[-1]
    idx = np.arange(start, start + stop + 1)
    if idx.size < 3:
        raise NoDecayWindow(f"only {idx.size} samples in the fit window")
    slope = np.polyfit(t[idx], np.log(v[idx]), 1)[0]
    if not slope < 0:
        raise NoDecayWindow(f"channel does not decay in the window (slope {slope:.3g})")
    return float(-slope)


def channel_series(traj: Trajectory, channel: Channel) -> FloatArray:
    if channel == "freq_spread":
        f = traj.frequencies
        return f.max(axis=1) - f.min(axis=1)
    if channel == "disagreement":
        f = traj.frequencies
        net = traj.net
        if is_symmetric(net) and net.is_lossless:
            omega = sync_frequency_omega(net)
        else:
            omega = float(f[-1].mean())
        return np.linalg.norm(f - omega, axis=1)
    if channel == "arc_excess":
        V = traj.arc_lengths()
        return V - V[-1]
    raise ValueError(f"unknown channel {channel!r}")


def fit_exponential_rate(traj: Trajectory, channel: Channel = "freq_spread") -> float:
    return fit_rate_series(traj.times, channel_series(traj, channel))


# -- phase synchronization ------------------------------------------------------


@dataclass(frozen=True)
class PhaseSyncReport:
    final_arc: float
    arc_converged: bool
    limit_in_initial_arc: bool
    weighted_mean_error: Optional[float]
    weighted_mean_ok: Optional[bool]
    fitted_rate: Optional[float]
    rate_bound: Optional[float]
    rate_ok: Optional[bool]

    @property
    def ok(self) -> bool:
        checks = [self.arc_converged, self.limit_in_initial_arc, self.weighted_mean_ok, self.rate_ok]
        return all(c for c in checks if c is not None)


def _uniform_ratio(net: CouplingNetwork) -> float:
    ratio = net.omega / net.D
    if net.phi_max != 0.0:
        raise HypothesisViolated("phase synchronization needs phi = 0")
    if np.ptp(ratio) > 1e-12 * max(1.0, float(np.abs(ratio).max())):
        raise HypothesisViolated("phase synchronization needs omega_i / D_i uniform")
    return float(ratio.mean())


def check_phase_sync_limit(
    net: CouplingNetwork, traj: Trajectory, tol: float = 1e-5, rate_slack: float = 0.05
) -> PhaseSyncReport:
    """Verify convergence to a co-rotating consensus and, for P = P^T, its location."""
    omega_bar = _uniform_ratio(net)
    theta0 = traj.theta[0]
    gamma = arc_length_V(theta0)
    if gamma is None or gamma >= math.pi:
        raise NotPhaseCohesive("initial angles must lie in an arc shorter than pi")
    t_end = float(traj.times[-1])
    final = traj.theta[-1]
    final_arc = arc_length_V(final)
    final_arc = math.inf if final_arc is None else final_arc
    converged = final_arc < tol

    # de-rotated limit inside the initial arc
    info = arc(theta0)
    derot = final - omega_bar * t_end
    rel = np.mod(derot - info.start, TWO_PI)
    rel = np.where(rel > TWO_PI - tol, rel - TWO_PI, rel)
    in_arc = bool(np.all((rel >= -tol) & (rel <= info.length + tol)))

    wm_err = wm_ok = None
    rate = bound = rate_ok = None
    if is_symmetric(net):
        target = float(np.dot(net.D, lift(theta0)) / net.D.sum()) + omega_bar * t_end
        wm_err = float(geodesic(final, target).max())
        wm_ok = wm_err < tol
        bound = rate_lambda_ps(net, gamma)
        try:
            rate = fit_rate_series(traj.times, traj.arc_lengths())
            rate_ok = rate >= (1.0 - rate_slack) * bound
        except NoDecayWindow:
            rate_ok = gamma == 0.0
    return PhaseSyncReport(final_arc, converged, in_arc, wm_err, wm_ok, rate, bound, rate_ok)


# -- singular perturbation ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpComparison:
    """Full swing model (in grounded coordinates) against its reduction.

    Error channels are max over oscillators at each sample time.
    """

    eps: float
    F: FloatArray
    t_b: float
    times: FloatArray
    delta_error: FloatArray
    freq_error: FloatArray
    boundary_layer_error: FloatArray
    full: FloatArray = field(repr=False)
    reduced: FloatArray = field(repr=False)

    @property
    def sup_delta_error(self) -> float:
        return float(self.delta_error.max())

    @property
    def sup_freq_error_after_tb(self) -> float:
        mask = self.times >= self.t_b
        return float(self.freq_error[mask].max()) if mask.any() else math.nan

    @property
    def corrected_error_at_zero(self) -> float:
        return float(self.boundary_layer_error[0])


def default_t_b(eps: float, F: ArrayLike) -> float:
    return 5.0 * eps * float(np.max(1.0 / np.asarray(F)))


def _two_phase_rk4(f, y0, t_end, dt, t_fine, fine_out, coarse_out):
    """RK4 sampled densely on [0, t_fine] and at ``coarse_out`` afterwards."""
    t_fine = min(t_fine, t_end)
    t1, y1 = rk4(f, y0, t_fine, dt, fine_out)
    if t_fine >= t_end:
        return t1, y1
    t2, y2 = rk4(f, y1[-1], t_end - t_fine, dt, coarse_out)
    return np.concatenate([t1, t_fine + t2[1:]]), np.concatenate([y1, y2[1:]])


def check_reduced_convergence(
    net: CouplingNetwork, delta0: ArrayLike, horizon: float = 100.0, tol: float = 1e-4
) -> FloatArray:
    """Run the grounded model to ``horizon`` and require a fixed point; returns it.

    Only the settled state matters, so the RK4 step is tied to the coupling
    stiffness (h * max_i sum_j P_ij / D_i <= 0.5) rather than to accuracy.
    """
    stiff = float((net.P / net.D[:, None]).sum(axis=1).max())
    dt = min(0.05, 0.5 / stiff) if stiff > 0 else 0.05
    _, y = rk4(model_field("grounded", net), np.asarray(delta0, dtype=float), horizon, dt, horizon)
    residual = float(np.abs(rhs_grounded(net, y[-1])).max())
    if not np.isfinite(residual) or residual > tol:
        raise ReducedModelDiverged(
            f"reduced model not at a fixed point by t={horizon:g} (|ddelta| = {residual:.3g})"
        )
    return y[-1]


def sp_compare(
    net: CouplingNetwork,
    theta0: ArrayLike,
    dtheta0: ArrayLike,
    t_end: float,
    t_b: Optional[float] = None,
    dt: Optional[float] = None,
    converge_tol: float = 1e-4,
    precheck_horizon: Optional[float] = None,
) -> SpComparison:
    """Integrate the full model and its grounded reduction from matched data.

    Sampling is at most ``min(0.01, eps/5)`` apart during the boundary layer
    ``[0, 10 eps]`` and 0.01 s afterwards. The fixed RK4 step defaults to
    ``min(0.005, eps / (2 F_max))`` so the fast scale is resolved.

    Before comparing, the reduced model is run on its own (coarse step) up to
    ``precheck_horizon`` (default ``max(t_end, 100)``) and must settle to a
    fixed point, ``max |ddelta| < converge_tol``. A horizon of 0 skips it.
    """
    eps, F = sp_parameters(net)
    n = net.n
    delta0 = grnd(theta0, math.pi)
    dtheta0 = np.asarray(dtheta0, dtype=float)
    if dt is None:
        dt = min(0.005, eps / (2.0 * float(F.max())))
    fine_out = min(0.01, eps / 5.0)
    coarse_out = max(0.01, dt)

    red_f = model_field("grounded", net)
    horizon = max(t_end, 100.0) if precheck_horizon is None else precheck_horizon
    if horizon > 0:
        check_reduced_convergence(net, delta0, horizon, converge_tol)
    tr, yr = _two_phase_rk4(red_f, delta0, t_end, dt, 10 * eps, fine_out, coarse_out)
    if not np.all(np.isfinite(yr)):
        raise ReducedModelDiverged("reduced model produced non-finite values")

    full_f = model_field("sp_form", net)
    y0 = np.concatenate([delta0, dtheta0])
    tf, yf = _two_phase_rk4(full_f, y0, t_end, dt, 10 * eps, fine_out, coarse_out)
    if not np.all(np.isfinite(yf)):
        raise ReducedModelDiverged("full model produced non-finite values")

    d_full, w_full = yf[:, : n - 1], yf[:, n - 1 :]
    h = slow_manifold(net, yr)
    layer = (dtheta0 - slow_manifold(net, delta0)) * np.exp(-np.outer(tf, F) / eps)
    return SpComparison(
        eps,
        F,
        default_t_b(eps, F) if t_b is None else t_b,
        tf,
        np.abs(d_full - yr).max(axis=1) if n > 1 else np.zeros(len(tf)),
        np.abs(w_full - h).max(axis=1),
        np.abs(w_full - h - layer).max(axis=1),
        yf,
        yr,
    )


def check_asymptotic_error_decay(cmp: SpComparison, floor: float = 1e-14) -> bool:
    """Trailing-window errors below 1% of their sup values."""
    tail = max(1, int(math.ceil(0.1 * len(cmp.times))))
    checks = []
    for series, mask in (
        (cmp.delta_error, np.ones_like(cmp.times, dtype=bool)),
        (cmp.freq_error, cmp.times >= cmp.t_b),
    ):
        sup = float(series[mask].max()) if mask.any() else 0.0
        trailing = float(series[-tail:].max())
        checks.append(sup <= floor or trailing <= 0.01 * sup)
    return all(checks)


def scale_to_epsilon(net: CouplingNetwork, eps: float) -> CouplingNetwork:
    """Rescale all inertias uniformly so that M_max / D_min equals ``eps``."""
    M = net.require_inertia()
    return net.with_inertia(M * (eps * float(net.D.min()) / float(M.max())))
