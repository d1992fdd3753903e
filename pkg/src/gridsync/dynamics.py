"""Vector fields of the three models and the numerical integrators.

Models
------
``kuramoto``  first-order non-uniform Kuramoto model, state theta (n,)
``swing``     second-order swing equations, state (theta, dtheta) (2n,)
``grounded``  grounded Kuramoto model, state delta (n-1,)
``sp_form``   swing equations in singular-perturbation coordinates,
              state (delta, dtheta) (2n-1,)

Angles are integrated on the real line (a continuous lift); they are only
reduced modulo 2*pi when read back through ``Trajectory.phases``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

from .errors import MissingInertia, NonFiniteState, StepUnderflow
from .network import CouplingNetwork
from .torus import (  # noqa: F401  (re-exported torus geometry)
    arc_length_V,
    arc_length_or_nan,
    cohesiveness_norms,
    geodesic,
    grnd,
    in_Delta,
    lift,
    two_norm,
    wrap,
)

FloatArray = NDArray[np.float64]
Model = Literal["kuramoto", "swing", "grounded", "sp_form"]
MODELS = ("kuramoto", "swing", "grounded", "sp_form")


# -- vector fields ------------------------------------------------------------


def power_flow_Q(net: CouplingNetwork, theta: ArrayLike) -> FloatArray:
    """Q_i(theta) = omega_i - sum_j P_ij sin(theta_i - theta_j + phi_ij)."""
    th = np.asarray(theta, dtype=float)
    diff = th[..., :, None] - th[..., None, :] + net.phi
    return net.omega - (net.P * np.sin(diff)).sum(axis=-1)


def rhs_nonuniform_kuramoto(net: CouplingNetwork, theta: ArrayLike) -> FloatArray:
    return power_flow_Q(net, theta) / net.D


def rhs_swing(
    net: CouplingNetwork, theta: ArrayLike, dtheta: ArrayLike
) -> tuple[FloatArray, FloatArray]:
    """(dtheta, ddtheta) with M ddtheta = -D dtheta + Q(theta)."""
    M = net.require_inertia()
    dth = np.asarray(dtheta, dtype=float)
    return dth, (-net.D * dth + power_flow_Q(net, theta)) / M


def rhs_grounded(net: CouplingNetwork, delta: ArrayLike) -> FloatArray:
    """Grounded Kuramoto vector field in delta_i = theta_i - theta_n.

    Written out term by term: coupling among the first n-1 oscillators, the
    drift of the grounding node, and the direct link between i and n.
    """
    d = np.asarray(delta, dtype=float)
    n = net.n
    D, w, P, phi = net.D, net.omega, net.P, net.phi
    Pi, phii = P[:-1, :-1], phi[:-1, :-1]
    among = (Pi * np.sin(d[..., :, None] - d[..., None, :] + phii)).sum(axis=-1) / D[:-1]
    drift = (P[n - 1, :-1] * np.sin(d - phi[n - 1, :-1])).sum(axis=-1)[..., None] / D[n - 1]
    direct = P[:-1, n - 1] / D[:-1] * np.sin(d + phi[:-1, n - 1])
    return w[:-1] / D[:-1] - w[n - 1] / D[n - 1] - among - drift - direct


def sp_parameters(net: CouplingNetwork) -> tuple[float, FloatArray]:
    """(epsilon, F) with epsilon = M_max / D_min, F_i = (D_i/D_min) / (M_i/M_max)."""
    M = net.require_inertia()
    eps = float(M.max() / net.D.min())
    F = (net.D / net.D.min()) / (M / M.max())
    return eps, F


def rhs_sp_form(
    net: CouplingNetwork, delta: ArrayLike, dtheta: ArrayLike
) -> tuple[FloatArray, FloatArray]:
    """(ddelta, epsilon * d(dtheta)/dt) in singular-perturbation standard form."""
    eps, F = sp_parameters(net)
    d = np.asarray(delta, dtype=float)
    dth = np.asarray(dtheta, dtype=float)
    full = np.concatenate([d, np.zeros(d.shape[:-1] + (1,))], axis=-1)
    g = -F * dth + F / net.D * power_flow_Q(net, full)
    return dth[..., :-1] - dth[..., -1:], g


def slow_manifold(net: CouplingNetwork, delta: ArrayLike) -> FloatArray:
    """Quasi-steady frequencies h(delta) = D^-1 Q(delta) with delta_n = 0."""
    d = np.asarray(delta, dtype=float)
    full = np.concatenate([d, np.zeros(d.shape[:-1] + (1,))], axis=-1)
    return power_flow_Q(net, full) / net.D


# -- batched first-order field --------------------------------------------------


class KuramotoField:
    """First-order field for a stack of same-size networks.

    Parameters are stacked along a leading batch axis so ``B`` independent
    trajectories advance in one vectorized RK4 loop.
    """

    def __init__(self, nets: Sequence[CouplingNetwork] | CouplingNetwork):
        if isinstance(nets, CouplingNetwork):
            nets = [nets]
        sizes = {net.n for net in nets}
        if len(sizes) != 1:
            raise ValueError(f"batched networks must share n, got {sorted(sizes)}")
        self.nets = list(nets)
        self.D = np.stack([net.D for net in nets])
        self.w = np.stack([net.omega / net.D for net in nets])
        self.a = np.stack([net.P / net.D[:, None] for net in nets])
        self.phi = np.stack([net.phi for net in nets])

    def __call__(self, t: float, theta: FloatArray) -> FloatArray:
        diff = theta[..., :, None] - theta[..., None, :] + self.phi
        return self.w - (self.a * np.sin(diff)).sum(axis=-1)


# -- integrators ----------------------------------------------------------------


@dataclass(frozen=True)
class IntegratorOptions:
    """``method`` is ``"rk4"`` (fixed step ``dt``) or ``"rk45"`` (adaptive).

    ``output_dt`` is the sampling stride; for RK4 it is rounded to a whole
    number of steps.
    """

    method: Literal["rk4", "rk45"] = "rk4"
    dt: float = 0.01
    rtol: float = 1e-9
    atol: float = 1e-11
    output_dt: Optional[float] = None


def _check_finite(y: FloatArray, t: float) -> None:
    if not np.all(np.isfinite(y)):
        raise NonFiniteState(f"state became non-finite at t={t:.6g}")


def rk4(
    f: Callable[[float, FloatArray], FloatArray],
    y0: ArrayLike,
    t_end: float,
    dt: float,
    output_dt: Optional[float] = None,
) -> tuple[FloatArray, FloatArray]:
    """Classical fixed-step RK4. Returns (times, states) sampled every stride.

    The step is shrunk so that a whole number of steps lands on ``t_end``.
    ``y0`` may carry leading batch axes; the time axis is inserted first.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    h = t_end / n_steps
    every = 1 if output_dt is None else max(1, int(round(output_dt / h)))
    y = np.array(y0, dtype=float)
    times = [0.0]
    states = [y.copy()]
    for k in range(1, n_steps + 1):
        t = (k - 1) * h
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if k % every == 0 or k == n_steps:
            tk = k * h
            _check_finite(y, tk)
            times.append(tk)
            states.append(y.copy())
    return np.asarray(times), np.stack(states)


def rk45(
    f: Callable[[float, FloatArray], FloatArray],
    y0: ArrayLike,
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-11,
    output_dt: Optional[float] = None,
) -> tuple[FloatArray, FloatArray]:
    """Adaptive Dormand-Prince 5(4), sampled on a uniform output grid."""
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    y0 = np.asarray(y0, dtype=float)
    shape = y0.shape
    n_out = max(1, math.ceil(t_end / output_dt - 1e-9)) if output_dt else 100
    t_eval = np.linspace(0.0, t_end, n_out + 1)

    def flat(t, y):
        return f(t, y.reshape(shape)).ravel()

    sol = solve_ivp(flat, (0.0, t_end), y0.ravel(), method="RK45", t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status == -1:
        if "step size" in sol.message:
            raise StepUnderflow(sol.message)
        raise NonFiniteState(sol.message)
    states = sol.y.T.reshape((-1,) + shape)
    _check_finite(states, t_end)
    return sol.t, states


def run_integrator(f, y0, t_end, opts: IntegratorOptions):
    if opts.method == "rk4":
        return rk4(f, y0, t_end, opts.dt, opts.output_dt)
    if opts.method == "rk45":
        return rk45(f, y0, t_end, opts.rtol, opts.atol, opts.output_dt)
    raise ValueError(f"unknown method {opts.method!r}")


# -- trajectories ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution of one model.

    ``states`` holds the raw integrator state (lifted angles, never reduced);
    use the accessors for per-model views.
    """

    times: FloatArray
    states: FloatArray
    model: str
    net: CouplingNetwork = field(repr=False)
    options: IntegratorOptions = field(default_factory=IntegratorOptions)

    def __post_init__(self) -> None:
        for a in (self.times, self.states):
            a.setflags(write=False)

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def n(self) -> int:
        return self.net.n

    @property
    def theta(self) -> FloatArray:
        """Lifted angles (kuramoto/swing) or grounded angles padded with 0."""
        if self.model in ("kuramoto",):
            return self.states
        if self.model == "swing":
            return self.states[:, : self.n]
        delta = self.delta
        return np.concatenate([delta, np.zeros((len(self), 1))], axis=1)

    @property
    def phases(self) -> FloatArray:
        return wrap(self.theta)

    @property
    def delta(self) -> FloatArray:
        if self.model in ("grounded",):
            return self.states
        if self.model == "sp_form":
            return self.states[:, : self.n - 1]
        th = self.theta
        return th[:, :-1] - th[:, -1:]

    @property
    def has_frequencies(self) -> bool:
        return self.model != "grounded"

    @property
    def frequencies(self) -> FloatArray:
        """dtheta at every sample (evaluated through the field for first order)."""
        if self.model == "kuramoto":
            return rhs_nonuniform_kuramoto(self.net, self.states)
        if self.model == "swing":
            return self.states[:, self.n :]
        if self.model == "sp_form":
            return self.states[:, self.n - 1 :]
        raise ValueError("grounded trajectories carry no absolute frequencies")

    def arc_lengths(self) -> FloatArray:
        return np.array([arc_length_or_nan(th) for th in self.theta])

    def two_norms(self) -> FloatArray:
        out = np.full(len(self), np.nan)
        for k, th in enumerate(self.theta):
            if in_Delta(th, math.pi):
                out[k] = two_norm(th)
        return out


def _unpack_pair(init, n_first: int, n_second: int) -> FloatArray:
    if isinstance(init, tuple) and len(init) == 2:
        a, b = (np.asarray(x, dtype=float) for x in init)
        if a.shape != (n_first,) or b.shape != (n_second,):
            raise ValueError("initial condition has the wrong shape")
        return np.concatenate([a, b])
    y = np.asarray(init, dtype=float)
    if y.shape != (n_first + n_second,):
        raise ValueError("initial condition has the wrong shape")
    return y


def model_field(model: Model, net: CouplingNetwork) -> Callable[[float, FloatArray], FloatArray]:
    n = net.n
    if model == "kuramoto":
        return lambda t, y: rhs_nonuniform_kuramoto(net, y)
    if model == "grounded":
        return lambda t, y: rhs_grounded(net, y)
    if model == "swing":
        if net.M is None:
            raise MissingInertia("swing model needs inertia M")

        def swing(t, y):
            a, b = rhs_swing(net, y[..., :n], y[..., n:])
            return np.concatenate([a, b], axis=-1)

        return swing
    if model == "sp_form":
        eps, _ = sp_parameters(net)

        def sp(t, y):
            a, g = rhs_sp_form(net, y[..., : n - 1], y[..., n - 1 :])
            return np.concatenate([a, g / eps], axis=-1)

        return sp
    raise ValueError(f"unknown model {model!r}")


def integrate(
    model: Model,
    net: CouplingNetwork,
    init,
    t_end: float,
    opts: Optional[IntegratorOptions] = None,
) -> Trajectory:
    """Integrate one model from ``init`` over [0, t_end].

    ``init`` is theta0 (kuramoto), delta0 (grounded) or a pair / flat vector
    (theta0, dtheta0) for swing and (delta0, dtheta0) for sp_form.
    """
    opts = opts or IntegratorOptions()
    n = net.n
    if model == "kuramoto":
        y0 = np.asarray(init, dtype=float).reshape(n)
    elif model == "grounded":
        y0 = np.asarray(init, dtype=float).reshape(n - 1)
    elif model == "swing":
        y0 = _unpack_pair(init, n, n)
    elif model == "sp_form":
        y0 = _unpack_pair(init, n - 1, n)
    else:
        raise ValueError(f"unknown model {model!r}")
    f = model_field(model, net)
    _check_finite(y0, 0.0)
    times, states = run_integrator(f, y0, t_end, opts)
    return Trajectory(times, states, model, net, opts)


def integrate_kuramoto_batch(
    nets: Sequence[CouplingNetwork],
    thetas0: ArrayLike,
    t_end: float,
    dt: float,
    output_dt: Optional[float] = None,
) -> tuple[FloatArray, FloatArray]:
    """RK4 on B same-size first-order networks at once.

    Returns ``(times, states)`` with ``states`` shaped (T, B, n). Each batch
    member follows exactly the arithmetic of an unbatched RK4 run.
    """
    field_ = KuramotoField(nets)
    y0 = np.asarray(thetas0, dtype=float)
    return rk4(field_, y0, t_end, dt, output_dt)


# -- initial-condition samplers -------------------------------------------------


def sample_arc_uniform(n: int, gamma: float, rng: np.random.Generator) -> FloatArray:
    """Angles i.i.d. uniform on a randomly placed arc of length gamma (in Delta(gamma))."""
    offset = rng.uniform(0.0, 2.0 * math.pi)
    return wrap(offset + gamma * rng.random(n))


def sample_two_norm_ball(n: int, r: float, rng: np.random.Generator) -> FloatArray:
    """Uniform draw from {theta : ||H theta||_2 < r} (modulo rotation), r <= pi.

    Uses ||H x||^2 = n ||x_perp||^2: a Gaussian direction in the plane
    orthogonal to the ones vector, scaled by r * U^(1/(n-1)).
    """
    if n < 2:
        return wrap(np.array([rng.uniform(0.0, 2.0 * math.pi)]))
    while True:
        g = rng.standard_normal(n)
        g -= g.mean()
        norm = math.sqrt(n) * float(np.linalg.norm(g))
        if norm == 0.0:
            continue
        radius = r * rng.random() ** (1.0 / (n - 1))
        x = g * (radius / norm)
        th = wrap(rng.uniform(0.0, 2.0 * math.pi) + x)
        if radius < r and in_Delta(th, math.pi) and two_norm(th) < r:
            return th


def default_horizon(rate_estimate: Optional[float]) -> float:
    """max(50, 20 / rate) when a rate estimate exists, else 50 s."""
    if rate_estimate is None or rate_estimate <= 0:
        return 50.0
    return max(50.0, 20.0 / rate_estimate)
