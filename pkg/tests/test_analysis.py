from __future__ import annotations

import math

import numpy as np
import pytest

from gridsync.analysis import (
    check_asymptotic_error_decay,
    check_phase_sync_limit,
    check_reduced_convergence,
    detect_frequency_sync,
    fit_exponential_rate,
    fit_rate_series,
    scale_to_epsilon,
    sp_compare,
)
from gridsync.conditions import condition_I, rate_lambda_fe
from gridsync.dynamics import IntegratorOptions, integrate, slow_manifold, sp_parameters
from gridsync.errors import HypothesisViolated, NoDecayWindow, ReducedModelDiverged, TrajectoryTooShort
from gridsync.network import CouplingNetwork, kuramoto_network
from gridsync.torus import grnd

OPTS = IntegratorOptions(dt=0.01, output_dt=0.05)


def run(net, theta0, t_end, model="kuramoto", opts=OPTS):
    return integrate(model, net, theta0, t_end, opts)


# -- frequency synchronization ----------------------------------------------------


def test_certified_instance_synchronizes():
    net = kuramoto_network([0.0, 1.0], 2.0)
    verdict = detect_frequency_sync(run(net, [0.0, 2.0], 40.0))
    assert verdict.frequency_synced and verdict.sync_frequency == pytest.approx(0.5, abs=1e-6)
    assert verdict.containment_violation is None and verdict.settled_at is not None
    assert verdict.final_cohesiveness["inf_norm"] == pytest.approx(math.pi / 6, abs=1e-6)


def test_necessary_violation_never_synchronizes():
    net = CouplingNetwork([1, 1], [0, 3], [[0, 1], [1, 0]])
    for t_end in (20.0, 80.0):
        assert not detect_frequency_sync(run(net, [0.0, 0.0], t_end)).frequency_synced


def test_single_oscillator_trivially_synced():
    net = CouplingNetwork([2.0], [0.8], [[0.0]])
    verdict = detect_frequency_sync(run(net, [0.0], 5.0))
    assert verdict.frequency_synced and verdict.sync_frequency == pytest.approx(0.4)


def test_too_short():
    net = kuramoto_network([0, 1], 2.0)
    with pytest.raises(TrajectoryTooShort):
        detect_frequency_sync(run(net, [0, 0], 0.5, opts=IntegratorOptions(output_dt=0.1)))


# -- rate fits ----------------------------------------------------------------------


def test_fit_rate_series_exact_exponential():
    t = np.linspace(0, 20, 401)
    assert fit_rate_series(t, 3 * np.exp(-1.3 * t)) == pytest.approx(1.3, rel=1e-9)
    with pytest.raises(NoDecayWindow):
        fit_rate_series(t, np.ones_like(t))


def test_single_machine_rate():
    D, M = 1.2, 0.5
    net = CouplingNetwork([D], [0.0], [[0.0]], M=[M])
    traj = run(net, ([0.0], [1.0]), 40.0, "swing", IntegratorOptions(dt=0.005, output_dt=0.05))
    t, v = traj.times, traj.states[:, 1]
    assert fit_rate_series(t, v) == pytest.approx(D / M, rel=0.02)


def test_identical_pair_decays_at_K():
    K = 1.5
    net = kuramoto_network([0.2, 0.2], K)
    traj = run(net, [0.0, 0.4], 30.0)
    assert fit_exponential_rate(traj, "arc_excess") == pytest.approx(K, rel=0.05)


def test_certified_rate_lower_bound():
    net = CouplingNetwork([1.0, 1.5, 0.8], [0.0, 0.3, 0.1],
                          [[0, 1.2, 0.9], [1.2, 0, 1.0], [0.9, 1.0, 0]])
    report = condition_I(net)
    assert report.holds
    traj = run(net, [0.0, 0.5, 1.0], 60.0)
    bound = rate_lambda_fe(net, report.gamma_min)
    assert fit_exponential_rate(traj, "disagreement") >= 0.95 * bound


# -- phase synchronization ----------------------------------------------------------


def test_phase_sync_weighted_mean_example():
    net = CouplingNetwork([1, 3], [2, 6], [[0, 1], [1, 0]])
    traj = run(net, [0.0, 1.0], 30.0)
    report = check_phase_sync_limit(net, traj)
    assert report.ok and report.weighted_mean_error < 1e-5
    assert traj.theta[-1] == pytest.approx(0.75 + 2 * 30.0, abs=1e-5)


def test_phase_sync_from_synchronized_start():
    net = CouplingNetwork([1, 2, 3], [1, 2, 3], np.ones((3, 3)) - np.eye(3))
    traj = run(net, [0.4, 0.4, 0.4], 10.0)
    assert np.allclose(traj.theta[-1], 0.4 + 10.0, atol=1e-9)
    report = check_phase_sync_limit(net, traj)
    assert report.arc_converged and report.limit_in_initial_arc and report.weighted_mean_ok


def test_phase_sync_directed_star():
    # centre 0 influences every leaf; no leaf influences the centre
    n = 4
    P = np.zeros((n, n))
    P[1:, 0] = 1.0
    net = CouplingNetwork(np.ones(n), np.full(n, 0.5), P)
    traj = run(net, [0.0, 0.4, 0.8, 1.2], 40.0)
    report = check_phase_sync_limit(net, traj)
    assert report.arc_converged and report.limit_in_initial_arc
    assert report.weighted_mean_ok is None and report.rate_ok is None


def test_phase_sync_hypotheses():
    net = CouplingNetwork([1, 1], [0, 1], [[0, 1], [1, 0]])
    with pytest.raises(HypothesisViolated):
        check_phase_sync_limit(net, run(net, [0, 0.1], 5.0))


# -- singular perturbation -------------------------------------------------------------


def sp_net(eps=0.1):
    net = CouplingNetwork([1.0, 1.2, 0.9], [0.0, 0.3, 0.5],
                          [[0, 1, 1.2], [1, 0, 0.8], [1.2, 0.8, 0]], M=[1.0, 0.8, 1.1])
    return scale_to_epsilon(net, eps)


THETA0 = np.array([0.0, 0.3, 0.6])


def test_scale_to_epsilon():
    eps, _ = sp_parameters(sp_net(0.037))
    assert eps == pytest.approx(0.037)


def test_sp_epsilon_halving():
    net = sp_net(0.1)
    dth0 = slow_manifold(net, grnd(THETA0)) + np.array([0.5, -0.5, 0.5])
    a = sp_compare(net, THETA0, dth0, 5.0).sup_delta_error
    b = sp_compare(scale_to_epsilon(net, 0.05), THETA0, dth0, 5.0).sup_delta_error
    assert 1.6 <= a / b <= 2.4


def test_sp_small_epsilon():
    net = sp_net(1e-4)
    dth0 = slow_manifold(net, grnd(THETA0)) + 0.3
    c = sp_compare(net, THETA0, dth0, 0.5)
    assert c.sup_delta_error < 1e-3 and c.corrected_error_at_zero < 1e-9


def test_sp_start_on_slow_manifold():
    net = sp_net(0.05)
    dth0 = slow_manifold(net, grnd(THETA0))
    c = sp_compare(net, THETA0, dth0, 5.0)
    assert c.corrected_error_at_zero == 0.0 and c.freq_error[0] == 0.0
    assert c.freq_error.max() < 0.2


def test_asymptotic_decay_examples():
    net = sp_net(0.02)
    c = sp_compare(net, THETA0, slow_manifold(net, grnd(THETA0)) + 0.2, 40.0)
    assert check_asymptotic_error_decay(c)
    rest = CouplingNetwork([1, 1], [0, 0], [[0, 1], [1, 0]], M=[0.1, 0.1])
    c = sp_compare(rest, [0.0, 0.0], [0.0, 0.0], 5.0)
    assert c.sup_delta_error == 0.0 and check_asymptotic_error_decay(c)


def test_asymptotic_decay_lossy_large_eps_runs():
    # recorded, not asserted: no O(eps) guarantee applies at eps = 1 with losses
    base = sp_net(1.0)
    phi = 0.3 * (np.ones((3, 3)) - np.eye(3))
    net = CouplingNetwork(base.D, base.omega, base.P, phi, base.M)
    c = sp_compare(net, THETA0, np.zeros(3), 40.0)
    assert isinstance(check_asymptotic_error_decay(c), bool)


def test_reduced_model_divergence_detected():
    net = CouplingNetwork([1, 1], [0, 3], [[0, 1], [1, 0]], M=[0.1, 0.1])
    with pytest.raises(ReducedModelDiverged):
        check_reduced_convergence(net, [0.0], 50.0)
    with pytest.raises(ReducedModelDiverged):
        sp_compare(net, [0.0, 0.0], [0.0, 0.0], 5.0)
