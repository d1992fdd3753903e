"""TOML network and run configuration.

Network file::

    n = 3                      # optional, checked against the arrays
    degrees = false            # phase shifts given in degrees
    D = [1.0, 1.0, 1.0]
    M = [0.1, 0.1, 0.1]        # optional
    omega = [0.0, 0.5, 1.0]
    P = [[0, 1, 1], [1, 0, 1], [1, 1, 0]]
    phi = [[0, 0.1, 0.1], [0.1, 0, 0.1], [0.1, 0.1, 0]]   # optional

or, instead of ``P``/``phi``, a sparse edge list with 1-based node indices::

    symmetric = true
    edges = [{i = 1, j = 2, p = 1.0, phi = 0.1}, {i = 2, j = 3, p = 0.5}]

Run file::

    network = "net.toml"       # path relative to the run file, or an inline table
    model = "kuramoto"         # kuramoto | grounded | swing | sp_form
    horizon = 20.0
    seed = 7
    [init]
    kind = "arc-uniform"       # explicit | arc-uniform | two-norm-ball
    gamma = 1.0                # arc-uniform
    r = 1.0                    # two-norm-ball
    theta = [...]              # explicit
    dtheta = [...]             # optional, second-order models (default 0)
    [integrator]
    method = "rk4"             # rk4 | rk45
    dt = 0.01
    rtol = 1e-9
    atol = 1e-11
    output_dt = 0.1
    [output]
    csv = "out.csv"            # default: standard output
    report = "out.txt"         # default: standard error
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dynamics import IntegratorOptions, sample_arc_uniform, sample_two_norm_ball
from .errors import ConfigParse
from .network import CouplingNetwork, validate

MODELS = ("kuramoto", "grounded", "swing", "sp_form")
INIT_KINDS = ("explicit", "arc-uniform", "two-norm-ball")


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(rf"^\s*{re.escape(key)}\s*=", text, flags=re.MULTILINE)
    return None if m is None else text.count("\n", 0, m.start()) + 1


class _Fields:
    """Typed access to a parsed TOML table with located error messages."""

    def __init__(self, data: dict, text: str, source: str, prefix: str = ""):
        self.data = data
        self.text = text
        self.source = source
        self.prefix = prefix

    def fail(self, key: str, msg: str) -> ConfigParse:
        line = _line_of(self.text, key)
        where = f"{self.source}:{line}" if line else self.source
        return ConfigParse(f"{where}: field '{self.prefix}{key}': {msg}")

    def has(self, key: str) -> bool:
        return key in self.data

    def sub(self, key: str) -> "_Fields":
        value = self.data.get(key, {})
        if not isinstance(value, dict):
            raise self.fail(key, "expected a table")
        return _Fields(value, self.text, self.source, f"{self.prefix}{key}.")

    def number(self, key: str, default: Any = None, positive: bool = False) -> Any:
        if key not in self.data:
            if default is None:
                raise self.fail(key, "missing")
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise self.fail(key, f"expected a number, got {type(value).__name__}")
        if not math.isfinite(value) or (positive and value <= 0):
            raise self.fail(key, f"expected a {'positive ' if positive else ''}finite number")
        return float(value)

    def integer(self, key: str, default: Optional[int] = None) -> Optional[int]:
        if key not in self.data:
            return default
        value = self.data[key]
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(key, "expected an integer")
        return value

    def string(self, key: str, default: Optional[str] = None, choices=None) -> str:
        if key not in self.data:
            if default is None:
                raise self.fail(key, "missing")
            return default
        value = self.data[key]
        if not isinstance(value, str):
            raise self.fail(key, "expected a string")
        if choices is not None and value not in choices:
            raise self.fail(key, f"expected one of {', '.join(choices)}, got {value!r}")
        return value

    def boolean(self, key: str, default: bool = False) -> bool:
        value = self.data.get(key, default)
        if not isinstance(value, bool):
            raise self.fail(key, "expected true or false")
        return value

    def vector(self, key: str, n: Optional[int] = None, required: bool = True):
        if key not in self.data:
            if required:
                raise self.fail(key, "missing")
            return None
        value = self.data[key]
        if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
        ):
            raise self.fail(key, "expected an array of numbers")
        if n is not None and len(value) != n:
            raise self.fail(key, f"expected {n} entries, got {len(value)}")
        return np.array(value, dtype=float)

    def matrix(self, key: str, n: int, required: bool = True):
        if key not in self.data:
            if required:
                raise self.fail(key, "missing")
            return None
        rows = self.data[key]
        if not isinstance(rows, list) or len(rows) != n:
            raise self.fail(key, f"expected {n} rows")
        for r, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != n:
                raise self.fail(key, f"row {r + 1}: expected {n} entries")
            if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in row):
                raise self.fail(key, f"row {r + 1}: expected numbers")
        return np.array(rows, dtype=float)


def _parse(text: str, source: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigParse(f"{source}: {exc}") from None


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParse(f"{path}: cannot read ({exc.strerror})") from None


def _edges(f: _Fields, n: int, symmetric: bool) -> tuple[np.ndarray, np.ndarray]:
    items = f.data["edges"]
    if not isinstance(items, list):
        raise f.fail("edges", "expected an array of tables")
    P = np.zeros((n, n))
    phi = np.zeros((n, n))
    for k, item in enumerate(items):
        if not isinstance(item, dict):
            raise f.fail("edges", f"entry {k + 1}: expected a table")
        e = _Fields(item, f.text, f.source, f"edges[{k + 1}].")
        i, j = e.integer("i"), e.integer("j")
        if i is None or j is None:
            raise f.fail("edges", f"entry {k + 1}: needs integer i and j")
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise f.fail("edges", f"entry {k + 1}: nodes ({i}, {j}) invalid for n = {n}")
        p = e.number("p")
        shift = e.number("phi", default=0.0)
        P[i - 1, j - 1], phi[i - 1, j - 1] = p, shift
        if symmetric:
            P[j - 1, i - 1], phi[j - 1, i - 1] = p, shift
    return P, phi


def network_from_toml(text: str, source: str = "<network>") -> CouplingNetwork:
    return _network_from_table(_parse(text, source), text, source)


def _network_from_table(data: dict, text: str, source: str) -> CouplingNetwork:
    f = _Fields(data, text, source)
    D = f.vector("D")
    n = len(D)
    declared = f.integer("n")
    if declared is not None and declared != n:
        raise f.fail("n", f"declares {declared} nodes but D has {n}")
    omega = f.vector("omega", n)
    M = f.vector("M", n, required=False)
    if f.has("edges"):
        if f.has("P"):
            raise f.fail("edges", "give either P or edges, not both")
        P, phi = _edges(f, n, f.boolean("symmetric", False))
    else:
        P = f.matrix("P", n)
        phi = f.matrix("phi", n, required=False)
        if phi is None:
            phi = np.zeros((n, n))
    if f.boolean("degrees", False):
        phi = np.deg2rad(phi)
    net = CouplingNetwork(D, omega, P, phi, M, validated=False)
    validate(net)
    return net


def load_network(path: str | Path) -> CouplingNetwork:
    path = Path(path)
    return network_from_toml(_read(path), str(path))


@dataclass(frozen=True)
class InitSpec:
    kind: str
    theta: Optional[np.ndarray] = None
    dtheta: Optional[np.ndarray] = None
    gamma: Optional[float] = None
    r: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    network: CouplingNetwork
    model: str
    init: InitSpec
    integrator: IntegratorOptions
    horizon: float
    seed: int = 0
    csv_path: Optional[Path] = None
    report_path: Optional[Path] = None
    source: str = field(default="<run>", repr=False)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def initial_angles(self) -> np.ndarray:
        """theta(0): explicit, or drawn from the seeded sampler."""
        n = self.network.n
        spec = self.init
        if spec.kind == "explicit":
            return spec.theta
        rng = self.rng()
        if spec.kind == "arc-uniform":
            return sample_arc_uniform(n, spec.gamma, rng)
        return sample_two_norm_ball(n, spec.r, rng)

    def initial_frequencies(self) -> np.ndarray:
        d = self.init.dtheta
        return np.zeros(self.network.n) if d is None else d


def _init_spec(f: _Fields, n: int) -> InitSpec:
    kind = f.string("kind", "explicit", INIT_KINDS)
    dtheta = f.vector("dtheta", n, required=False)
    if kind == "explicit":
        return InitSpec(kind, theta=f.vector("theta", n), dtheta=dtheta)
    if kind == "arc-uniform":
        gamma = f.number("gamma", positive=True)
        if gamma >= math.pi:
            raise f.fail("gamma", "arc length must be below pi")
        return InitSpec(kind, dtheta=dtheta, gamma=gamma)
    r = f.number("r", positive=True)
    if r > math.pi:
        raise f.fail("r", "radius must not exceed pi")
    return InitSpec(kind, dtheta=dtheta, r=r)


def run_config_from_toml(text: str, source: str = "<run>", base: Optional[Path] = None) -> RunConfig:
    data = _parse(text, source)
    f = _Fields(data, text, source)
    base = Path(".") if base is None else base
    if "network" not in data:
        raise f.fail("network", "missing")
    ref = data["network"]
    if isinstance(ref, str):
        net = load_network(base / ref)
    elif isinstance(ref, dict):
        net = _network_from_table(ref, text, source)
    else:
        raise f.fail("network", "expected a file path or an inline table")

    model = f.string("model", "kuramoto", MODELS)
    if model in ("swing", "sp_form") and net.M is None:
        raise f.fail("model", f"{model} needs inertia M in the network")
    horizon = f.number("horizon", positive=True)
    seed = f.integer("seed", 0)
    if not 0 <= seed < 2**64:
        raise f.fail("seed", "expected an unsigned 64-bit integer")

    g = f.sub("integrator")
    opts = IntegratorOptions(
        method=g.string("method", "rk4", ("rk4", "rk45")),
        dt=g.number("dt", 0.01, positive=True),
        rtol=g.number("rtol", 1e-9, positive=True),
        atol=g.number("atol", 1e-11, positive=True),
        output_dt=g.number("output_dt", positive=True) if g.has("output_dt") else None,
    )
    o = f.sub("output")
    csv = o.string("csv") if o.has("csv") else None
    report = o.string("report") if o.has("report") else None
    return RunConfig(
        net,
        model,
        _init_spec(f.sub("init"), net.n),
        opts,
        horizon,
        seed,
        None if csv is None else base / csv,
        None if report is None else base / report,
        source,
    )


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return run_config_from_toml(_read(path), str(path), path.parent)
