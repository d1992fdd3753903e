"""Geometry on the n-torus: geodesic distances, arc length, cohesive sets.

Angles inside a cohesive configuration are handled through a *lift*: real
representatives chosen so that every pairwise difference equals the signed
geodesic difference. A lift exists exactly when all angles fit in an arc
shorter than pi; outside that set the pairwise vector ``H theta`` is not
defined and the helpers raise ``NotPhaseCohesive``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import NotPhaseCohesive

TWO_PI = 2.0 * np.pi


def wrap(theta: ArrayLike) -> NDArray[np.float64]:
    """Reduce angles to [0, 2*pi)."""
    out = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    # mod can return 2*pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def geodesic(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Geodesic distance on the circle, in [0, pi]."""
    d = np.mod(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), TWO_PI)
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True)
class ArcInfo:
    """Smallest arc containing all angles.

    ``length`` is the arc length, ``start`` its clockwise end (so the arc is
    ``[start, start + length]`` mod 2*pi). ``i_max`` / ``i_min`` are the
    oscillators sitting on the counterclockwise / clockwise boundary.
    """

    length: float
    start: float
    i_max: tuple[int, ...]
    i_min: tuple[int, ...]


def _minimal_arc(theta: ArrayLike) -> ArcInfo:
    th = wrap(np.atleast_1d(theta))
    n = th.shape[0]
    if n == 1:
        return ArcInfo(0.0, float(th[0]), (0,), (0,))
    order = np.argsort(th, kind="stable")
    s = th[order]
    gaps = np.diff(np.append(s, s[0] + TWO_PI))
    k = int(np.argmax(gaps))
    length = float(TWO_PI - gaps[k])
    start = float(s[(k + 1) % n])
    rel = np.mod(th - start, TWO_PI)
    # angles equal to start may come back as ~2*pi after the subtraction
    rel = np.where(rel > TWO_PI - 1e-15, 0.0, rel)
    tol = 1e-15 * max(1.0, length)
    i_min = tuple(int(i) for i in np.flatnonzero(rel <= tol))
    i_max = tuple(int(i) for i in np.flatnonzero(rel >= length - tol))
    return ArcInfo(length, start, i_max, i_min)


def arc(theta: ArrayLike) -> Optional[ArcInfo]:
    """Minimal containing arc, or ``None`` if no closed half-circle holds all angles."""
    info = _minimal_arc(theta)
    if info.length > np.pi:
        return None
    return info


def arc_length_V(theta: ArrayLike) -> Optional[float]:
    """Arc length V(theta) in [0, pi]; ``None`` when the spread exceeds pi."""
    info = arc(theta)
    return None if info is None else info.length


def arc_length_or_nan(theta: ArrayLike) -> float:
    v = arc_length_V(theta)
    return float("nan") if v is None else v


def in_Delta(theta: ArrayLike, gamma: float, closed: bool = False) -> bool:
    """Membership in Delta(gamma) (open) or its closure."""
    length = _minimal_arc(theta).length
    if length > np.pi:
        return False
    return length <= gamma if closed else length < gamma


def lift(theta: ArrayLike) -> NDArray[np.float64]:
    """Real representatives of cohesive angles, all within ``[a, a + pi)``.

    Differences of the returned values are signed geodesic differences. The
    lift is anchored at the clockwise end of the minimal arc, so it does not
    depend on the 2*pi representative of the input.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    info = _minimal_arc(th)
    if info.length >= np.pi:
        raise NotPhaseCohesive(f"angles span an arc of {info.length:.6g} >= pi")
    rel = np.mod(th - info.start, TWO_PI)
    rel = np.where(rel > TWO_PI - 1e-12, rel - TWO_PI, rel)
    return info.start + rel


def lift_near(theta: ArrayLike, reference: ArrayLike) -> NDArray[np.float64]:
    """Representative of ``theta`` closest (per coordinate) to ``reference``."""
    th = np.asarray(theta, dtype=float)
    ref = np.asarray(reference, dtype=float)
    return ref + np.mod(th - ref + np.pi, TWO_PI) - np.pi


def pair_index(n: int) -> tuple[NDArray[np.intp], NDArray[np.intp]]:
    """Lexicographic complete-graph pairs (i, j), i < j."""
    return np.triu_indices(n, k=1)


def pairwise_differences(theta: ArrayLike) -> NDArray[np.float64]:
    """The vector H theta = (theta_j - theta_i) over lexicographic pairs."""
    x = lift(theta)
    i, j = pair_index(x.shape[0])
    return x[j] - x[i]


def two_norm(theta: ArrayLike) -> float:
    """||H theta||_2 over complete-graph pairs; requires theta in Delta(pi)."""
    th = np.atleast_1d(theta)
    if th.shape[0] < 2:
        return 0.0
    return float(np.linalg.norm(pairwise_differences(th)))


def cohesiveness_norms(theta: ArrayLike) -> dict[str, float]:
    """Infinity-norm (arc length) and two-norm of the pairwise differences."""
    inf = arc_length_V(theta)
    if inf is None or inf >= np.pi:
        raise NotPhaseCohesive("two-norm undefined outside Delta(pi)")
    return {"inf_norm": float(inf), "two_norm": two_norm(theta)}


def grnd(theta: ArrayLike, gamma: float = np.pi) -> NDArray[np.float64]:
    """Grounded coordinates delta_i = theta_i - theta_n for theta in Delta(gamma)."""
    if gamma > np.pi:
        raise ValueError("gamma must not exceed pi")
    th = np.atleast_1d(theta)
    if not in_Delta(th, gamma):
        raise NotPhaseCohesive(f"theta is not in Delta({gamma:.6g})")
    x = lift(th)
    return x[:-1] - x[-1]


def weighted_mean_angle(D: ArrayLike, theta: ArrayLike) -> float:
    """sum D_i theta_i / sum D_i on lifted representatives, reduced to [0, 2*pi)."""
    w = np.asarray(D, dtype=float)
    x = lift(theta)
    return float(wrap(np.dot(w, x) / w.sum()))
