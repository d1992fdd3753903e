"""Command-line entry point: ``gridsync check|simulate|sp-sweep|bounds|gamma``.

Exit codes: 0 on success (a failed certificate is a result), 1 for bad
input or configuration, 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import conditions as cond
from .analysis import (
    check_asymptotic_error_decay,
    check_reduced_convergence,
    scale_to_epsilon,
    sp_compare,
)
from .config import RunConfig, load_network, load_run_config
from .dynamics import integrate
from .errors import (
    Disconnected,
    GridsyncError,
    NotComplete,
    NotSymmetric,
    NTooSmall,
    NumericalError,
    ReducedModelDiverged,
)
from .network import CouplingNetwork, has_globally_reachable_node, is_complete, is_symmetric
from .torus import arc_length_V, grnd, in_Delta, two_norm

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2


class UsageError(GridsyncError, ValueError):
    pass


def fmt(x) -> str:
    """17 significant digits; booleans as true/false."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "nan"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def thread_cap() -> int:
    raw = os.environ.get("GRIDSYNC_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"GRIDSYNC_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"GRIDSYNC_THREADS must be a positive integer, got {raw!r}")
    return value


def _emit(text: str, path: Optional[Path], fallback) -> None:
    if path is None:
        fallback.write(text)
        fallback.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return out.getvalue()


# -- check ----------------------------------------------------------------------


def _section(name: str, fields: dict) -> str:
    lines = [f"[{name}]"]
    for key, value in fields.items():
        lines.append(f'{key} = "{value}"' if isinstance(value, str) else f"{key} = {fmt(value)}")
    return "\n".join(lines) + "\n"


def _certificate(fn: Callable[[CouplingNetwork], cond.ConditionReport], net: CouplingNetwork) -> dict:
    try:
        r = fn(net)
    except (NotSymmetric, NotComplete, Disconnected, NTooSmall) as exc:
        return {"applicable": False, "note": f"skipped: {exc}"}
    fields = {
        "applicable": True,
        "holds": r.holds,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "margin": r.margin,
        "gamma_min": r.gamma_min,
        "gamma_max": r.gamma_max,
        "phi_max": r.phi_max,
    }
    for key in ("Gamma_min", "Gamma_critical", "lambda2", "lambda_critical", "kappa", "alpha", "initial_radius"):
        if key in r.details:
            fields[key] = r.details[key]
    return fields


def check_report(net: CouplingNetwork) -> str:
    symmetric = is_symmetric(net)
    complete = is_complete(net)
    connected = net.graph().is_connected()
    parts = [
        _section(
            "network",
            {
                "n": net.n,
                "symmetric": symmetric,
                "complete": complete,
                "connected": connected,
                "globally_reachable_node": has_globally_reachable_node(net),
                "lossless": net.is_lossless,
                "phi_max": net.phi_max,
                "has_inertia": net.has_inertia,
            },
        )
    ]
    certs = {
        "condition_I": cond.condition_I,
        "condition_appendix_pairwise": cond.condition_appendix_pairwise,
        "condition_appendix_concave": cond.condition_appendix_concave,
        "condition_appendix_pmin": cond.condition_appendix_pmin,
        "condition_II": cond.condition_II,
    }
    reports = {}
    for name, fn in certs.items():
        fields = _certificate(fn, net)
        if not fields["applicable"] and name != "condition_II":
            reason = "graph not complete" if symmetric and not complete else "coupling not symmetric"
            fields["note"] = f"{name} skipped: {reason}"
        reports[name] = fields
        parts.append(_section(name, fields))

    nec = cond.necessary_condition(net)
    flagged = ";".join(f"{i + 1}-{j + 1}" for i, j in nec.flagged)
    parts.append(_section("necessary_condition", {"any_flagged": nec.any_flagged, "flagged_pairs": flagged}))

    if symmetric and net.is_lossless:
        rates = {"sync_frequency": cond.sync_frequency_omega(net)}
        g1 = reports["condition_I"]
        if g1.get("holds") and g1["gamma_min"] < math.pi / 2:
            rates["lambda_fe_at_gamma_min"] = cond.rate_lambda_fe(net, g1["gamma_min"])
        parts.append(_section("rates", rates))
    return "\n".join(parts)


def cmd_check(args) -> int:
    net = load_network(args.network)
    _emit(check_report(net), Path(args.out) if args.out else None, sys.stdout)
    return EXIT_OK


# -- simulate -------------------------------------------------------------------


def simulate_csv(cfg: RunConfig) -> str:
    net = cfg.network
    n = net.n
    theta0 = cfg.initial_angles()
    dtheta0 = cfg.initial_frequencies()
    model = cfg.model
    if model == "kuramoto":
        init = theta0
    elif model == "grounded":
        init = grnd(theta0)
    elif model == "swing":
        init = (theta0, dtheta0)
    else:
        init = (grnd(theta0), dtheta0)
    traj = integrate(model, net, init, cfg.horizon, cfg.integrator)

    y = traj.states
    if model in ("grounded", "sp_form"):
        theta = np.concatenate([y[:, : n - 1], np.zeros((len(y), 1))], axis=1)
    else:
        theta = y[:, :n]
    second = model in ("swing", "sp_form")
    dtheta = y[:, -n:] if second else None

    header = ["t"] + [f"theta_{i + 1}" for i in range(n)]
    if second:
        header += [f"dtheta_{i + 1}" for i in range(n)]
    header += ["V", "Htheta2"]

    def rows():
        for k, t in enumerate(traj.times):
            th = theta[k]
            v = arc_length_V(th)
            h2 = two_norm(th) if in_Delta(th, math.pi) else math.nan
            row = [t, *th]
            if second:
                row += list(dtheta[k])
            yield row + [math.nan if v is None else v, h2]

    return _csv(header, rows())


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config)
    out = Path(args.out) if args.out else cfg.csv_path
    _emit(simulate_csv(cfg), out, sys.stdout)
    return EXIT_OK


# -- sp-sweep -------------------------------------------------------------------


def parse_float_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if not values or any(not (math.isfinite(v) and v > 0) for v in values):
        raise UsageError(f"expected positive numbers, got {text!r}")
    return values


def sp_sweep(cfg: RunConfig, eps_list: Sequence[float], threads: int = 1) -> tuple[str, str]:
    """Returns (csv, report). Rows follow ``eps_list`` order whatever the thread count."""
    net = cfg.network
    net.require_inertia()
    theta0 = cfg.initial_angles()
    dtheta0 = cfg.initial_frequencies()
    warnings = []
    try:
        check_reduced_convergence(net, grnd(theta0), max(cfg.horizon, 100.0))
        diverged = None
    except ReducedModelDiverged as exc:
        diverged = str(exc)

    def row(eps: float):
        if diverged is not None:
            return [eps, math.nan, math.nan, "error:reduced-model-diverged"]
        try:
            c = sp_compare(scale_to_epsilon(net, eps), theta0, dtheta0, cfg.horizon, precheck_horizon=0)
        except ReducedModelDiverged:
            return [eps, math.nan, math.nan, "error:reduced-model-diverged"]
        return [eps, c.sup_delta_error, c.sup_freq_error_after_tb, check_asymptotic_error_decay(c)]

    with ThreadPoolExecutor(max_workers=max(1, min(threads, len(eps_list)))) as pool:
        rows = list(pool.map(row, eps_list))

    lines = [f"rows = {len(rows)}"]
    if diverged is not None:
        warnings.append(f"warning: {diverged}")
    good = [(r[0], r[1]) for r in rows if isinstance(r[1], float) and r[1] > 0 and math.isfinite(r[1])]
    if len(eps_list) > 1 and len(good) >= 2:
        e, err = np.log(np.array(good)).T
        lines.append(f"loglog_slope = {fmt(np.polyfit(e, err, 1)[0])}")
    elif len(eps_list) > 1:
        warnings.append("warning: fewer than two usable rows, slope omitted")
    csv = _csv(["epsilon", "sup_delta_err", "sup_freq_err_tb", "asymptotic_decay"], rows)
    return csv, "\n".join(lines + warnings) + "\n"


def cmd_sp_sweep(args) -> int:
    cfg = load_run_config(args.config)
    eps_list = parse_float_list(args.eps)
    csv, report = sp_sweep(cfg, eps_list, thread_cap())
    _emit(csv, Path(args.out) if args.out else cfg.csv_path, sys.stdout)
    _emit(report, cfg.report_path, sys.stderr)
    return EXIT_OK


# -- bounds ---------------------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``a:b:c`` (inclusive of b up to rounding) or a comma list."""
    if ":" not in text:
        return parse_float_list(text)
    parts = text.split(":")
    try:
        a, b, c = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"expected start:stop:step, got {text!r}") from None
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)) or c <= 0:
        raise UsageError(f"expected finite start:stop:step with step > 0, got {text!r}")
    if b < a:
        return []
    count = int(math.floor((b - a) / c + 1e-9)) + 1
    return [a + k * c for k in range(count)]


def bounds_csv(net: CouplingNetwork, grid: Sequence[float]) -> str:
    omega = net.omega / net.D

    def rows():
        for g in grid:
            b = cond.literature_bounds(omega, g, net.n)
            others = (b["chopra"], b["schmidt"], b["geometric"])
            yield [g, b["this"], *others, all(b["this"] <= x for x in others)]

    return _csv(["gamma", "K_this", "K_chopra", "K_schmidt", "K_geometric", "dominates"], rows())


def cmd_bounds(args) -> int:
    net = load_network(args.network)
    grid = parse_grid(args.gamma)
    _emit(bounds_csv(net, grid), Path(args.out) if args.out else None, sys.stdout)
    return EXIT_OK


# -- gamma ----------------------------------------------------------------------


def cmd_gamma(args) -> int:
    g_min, g_max = cond.solve_gamma(args.ratio, args.phimax, args.law)
    sys.stdout.write(f"gamma_min = {fmt(g_min)}\ngamma_max = {fmt(g_max)}\n")
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridsync", description="Synchronization certificates and simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="evaluate every applicable certificate")
    c.add_argument("network")
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("simulate", help="integrate a run configuration to CSV")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sp-sweep", help="second-order vs reduced model over epsilon")
    w.add_argument("config")
    w.add_argument("--eps", default="0.2,0.1,0.05,0.025")
    w.add_argument("--out")
    w.set_defaults(func=cmd_sp_sweep)

    b = sub.add_parser("bounds", help="coupling bounds against earlier results")
    b.add_argument("network")
    b.add_argument("--gamma", required=True)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    g = sub.add_parser("gamma", help="solve for gamma_min and gamma_max")
    g.add_argument("--ratio", type=float, required=True)
    g.add_argument("--phimax", type=float, default=0.0)
    g.add_argument("--law", choices=("sine", "sinc"), default="sine")
    g.set_defaults(func=cmd_gamma)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    for stream in (sys.stdout, sys.stderr):
        if hasattr(stream, "reconfigure"):
            stream.reconfigure(encoding="utf-8", newline="\n")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        sys.stderr.write(f"gridsync: numerical failure: {exc}\n")
        return EXIT_NUMERICAL
    except (GridsyncError, ValueError) as exc:
        sys.stderr.write(f"gridsync: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
