"""
Swing dynamics versus the first-order reduction
================================================

Scale the inertias so that epsilon = M_max / D_min sweeps a decade, and watch
the angle error between the second-order swing model and its first-order
reduction shrink linearly in epsilon.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

import gridsync as gs
from gridsync.analysis import scale_to_epsilon

net = gs.load_network(Path(__file__).parents[2] / "tests" / "data" / "machines3.toml")
theta0 = np.array([0.0, 0.3, 0.6])
# Start half a rad/s off the slow manifold so the boundary layer is visible.
dtheta0 = gs.slow_manifold(net, gs.grnd(theta0)) + np.array([0.5, -0.5, 0.5])

eps_list = [0.2, 0.1, 0.05, 0.025]
errors = []
for eps in eps_list:
    cmp = gs.sp_compare(scale_to_epsilon(net, eps), theta0, dtheta0, t_end=5.0)
    errors.append(cmp.sup_delta_error)
    print(f"eps={eps:<6} sup angle error={cmp.sup_delta_error:.3e}  "
          f"frequency error after layer={cmp.sup_freq_error_after_tb:.3e}")

slope = np.polyfit(np.log(eps_list), np.log(errors), 1)[0]
print(f"log-log slope {slope:.3f} (first order expected)")
