"""Synchronization certificates and simulation for non-uniform Kuramoto
oscillator networks and the power-grid swing equations."""

from __future__ import annotations

from .conditions import (
    ConditionReport,
    K_critical,
    NecessaryReport,
    classic_K_of_gamma,
    condition_I,
    condition_II,
    condition_appendix_concave,
    condition_appendix_pairwise,
    condition_appendix_pmin,
    literature_bounds,
    necessary_condition,
    rate_lambda_fe,
    rate_lambda_ps,
    sinc,
    solve_gamma,
    sync_frequency_omega,
    weighted_mean_angle,
)
from .config import load_network, load_run_config, network_from_toml, run_config_from_toml
from .dynamics import (
    IntegratorOptions,
    Trajectory,
    integrate,
    integrate_kuramoto_batch,
    rhs_grounded,
    rhs_nonuniform_kuramoto,
    rhs_sp_form,
    rhs_swing,
    sample_arc_uniform,
    sample_two_norm_ball,
    slow_manifold,
    sp_parameters,
)
from .analysis import (
    check_phase_sync_limit,
    detect_frequency_sync,
    fit_exponential_rate,
    sp_compare,
)
from .network import (
    CouplingNetwork,
    GraphView,
    has_globally_reachable_node,
    is_complete,
    is_symmetric,
    kuramoto_network,
    validate,
)
from .spectral import algebraic_connectivity, incidence_matrix, lambda2, laplacian
from .torus import arc_length_V, grnd, in_Delta, two_norm, wrap

__version__ = "0.1.0"
