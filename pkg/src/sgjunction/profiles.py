"""Closed-form stationary profiles on the junction and their shift solvers.

Two families are supported. The kink family places an increasing front on
the incoming edge and decreasing fronts on the outgoing edges; it exists
for coupling strengths Z strictly between -(c0+c1+c2) and 0. The
kink/anti-kink family (unit speeds) places a decreasing front on every
edge, with the incoming edge connecting to 2*pi at minus infinity; it
exists for Z strictly between -1 and 0.

Both solvers reduce the vertex flux condition to a scalar equation
``shape_fn(y) = target`` for a positive unknown y, where

    shape_fn(y) = (1 + y^2) * arctan(y) / y

is strictly increasing with limit 1 at 0+. Bisection on y is carried to
floating-point resolution, which puts the flux residual of the resulting
profile below 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .graph import GraphField, Mesh, YJunction

__all__ = [
    "ProfileKind",
    "KinkProfile",
    "AntiKinkProfile",
    "ProfileRangeError",
    "shape_fn",
    "solve_kink_shift",
    "solve_antikink_shift",
    "eval_kink",
    "eval_antikink",
    "sample_profile",
    "sample_profile_derivative",
    "kink_regime_boundary",
]

#: |a0| below this is classified as the smooth (zero-shift) regime
SMOOTH_SHIFT_TOL = 1e-12


class ProfileKind(str, Enum):
    TAIL = "tail"
    SMOOTH = "smooth"
    BUMP = "bump"


class ProfileRangeError(ValueError):
    """Coupling strength outside the existence interval of the family."""


@dataclass(frozen=True)
class KinkProfile:
    """Kink family member: shifts (a0, a1, a2) tied by a0/c0 = -aj/cj."""

    junction: YJunction
    z: float
    shifts: tuple[float, float, float]
    kind: ProfileKind


@dataclass(frozen=True)
class AntiKinkProfile:
    """Kink/anti-kink family member (unit speeds); one common shift."""

    z: float
    shift: float


def shape_fn(y):
    """(1 + y^2) * arctan(y) / y for y > 0; strictly increasing, -> 1 at 0+."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise ValueError("shape_fn requires y > 0")
    out = (1.0 + y * y) * np.arctan(y) / y
    return float(out) if out.ndim == 0 else out


def kink_regime_boundary(junction: YJunction) -> float:
    """Coupling strength separating tail and bump kinks: -(2/pi) sum_j c_j."""
    return -(2.0 / math.pi) * junction.speed_sum


def _bisect_shape(target: float) -> float:
    """Solve shape_fn(y) = target (target > 1) to floating-point resolution."""
    lo = 1e-300
    hi = 1.0
    while shape_fn(hi) < target:
        hi *= 2.0
        if hi > 1e12:  # pragma: no cover - target is finite
            raise ArithmeticError("shape equation bracket expansion failed")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if shape_fn(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_kink_shift(z: float, junction: YJunction) -> KinkProfile:
    """Solve the vertex conditions for the kink family at coupling ``z``.

    The flux condition with y = exp(-a0/c0) reads
    ``-(y / (1 + y^2)) * sum_j c_j = z * arctan(y)``, equivalently
    ``shape_fn(y) = -sum_j c_j / z``, which has a unique positive root
    exactly when z lies in (-sum_j c_j, 0).

    Raises
    ------
    ProfileRangeError
        If ``z`` is outside the existence interval.
    """
    z = float(z)
    csum = junction.speed_sum
    if not (-csum < z < 0.0):
        raise ProfileRangeError(
            f"no kink profile for Z={z}; admissible interval is ({-csum}, 0)"
        )
    target = -csum / z
    y = _bisect_shape(target)
    resid = abs(shape_fn(y) - target)
    if resid > 1e-13 * max(1.0, target):  # pragma: no cover - bisection is exact
        raise ArithmeticError(f"kink shift equation residual {resid} too large")
    c = junction.speeds
    a0 = -c[0] * math.log(y)
    shifts = (a0, -c[1] * a0 / c[0], -c[2] * a0 / c[0])
    if abs(a0) <= SMOOTH_SHIFT_TOL:
        kind = ProfileKind.SMOOTH
    elif a0 > 0.0:
        kind = ProfileKind.TAIL
    else:
        kind = ProfileKind.BUMP
    return KinkProfile(junction=junction, z=z, shifts=shifts, kind=kind)


def solve_antikink_shift(z: float) -> AntiKinkProfile:
    """Solve the vertex conditions for the kink/anti-kink family at ``z``.

    With y = exp(a0) the flux condition reads
    ``-y / (1 + y^2) = z * arctan(y)``, i.e. ``shape_fn(y) = -1/z``,
    solvable exactly for z in (-1, 0). The shift is negative for
    z < -2/pi, zero at z = -2/pi, and positive for z > -2/pi.
    """
    z = float(z)
    if not (-1.0 < z < 0.0):
        raise ProfileRangeError(
            f"no kink/anti-kink profile for Z={z}; admissible interval is (-1, 0)"
        )
    y = _bisect_shape(-1.0 / z)
    return AntiKinkProfile(z=z, shift=math.log(y))


def _atan_exp(t):
    """arctan(exp(t)) evaluated without overflow for large |t|."""
    t = np.asarray(t, dtype=float)
    small = np.arctan(np.exp(-np.abs(t)))
    return np.where(t > 0.0, 0.5 * math.pi - small, small)


def _sech(t):
    """1/cosh(t) evaluated without overflow for large |t|."""
    t = np.abs(np.asarray(t, dtype=float))
    e = np.exp(-t)
    return 2.0 * e / (1.0 + e * e)


def _check_edge_coords(edge: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if edge == 0:
        if np.any(x > 0.0):
            raise ValueError("edge 0 is parametrized by x <= 0")
    elif edge in (1, 2):
        if np.any(x < 0.0):
            raise ValueError(f"edge {edge} is parametrized by x >= 0")
    else:
        raise ValueError(f"edge index must be 0, 1, or 2, got {edge}")
    return x


def eval_kink(profile: KinkProfile, edge: int, x):
    """Evaluate (phi, phi', phi'') of the kink family on one edge.

    Edge 0: ``phi = 4 arctan(exp((x - a0)/c0))`` for x <= 0; edges 1, 2:
    ``phi = 4 arctan(exp(-(x - aj)/cj))`` for x >= 0. The closed-form
    second derivative satisfies ``cj^2 phi'' = sin(phi)`` identically.
    """
    x = _check_edge_coords(edge, x)
    c = profile.junction.speeds[edge]
    a = profile.shifts[edge]
    if edge == 0:
        theta = (x - a) / c
        sign = 1.0
    else:
        theta = -(x - a) / c
        sign = -1.0
    phi = 4.0 * _atan_exp(theta)
    sech = _sech(theta)
    dphi = sign * (2.0 / c) * sech
    d2phi = -(2.0 / c**2) * sech * np.tanh(theta)
    if phi.ndim == 0:
        return float(phi), float(dphi), float(d2phi)
    return phi, dphi, d2phi


def eval_antikink(profile: AntiKinkProfile, edge: int, x):
    """Evaluate (phi, phi', phi'') of the kink/anti-kink family on one edge.

    Every edge carries ``phi = 4 arctan(exp(-(x - a0)))`` (unit speeds);
    edge 0 tends to 2*pi at -inf, edges 1 and 2 tend to 0 at +inf.
    """
    x = _check_edge_coords(edge, x)
    theta = -(x - profile.shift)
    phi = 4.0 * _atan_exp(theta)
    sech = _sech(theta)
    dphi = -2.0 * sech
    d2phi = -2.0 * sech * np.tanh(theta)
    if phi.ndim == 0:
        return float(phi), float(dphi), float(d2phi)
    return phi, dphi, d2phi


def _profile_eval(profile, edge: int, x):
    if isinstance(profile, KinkProfile):
        return eval_kink(profile, edge, x)
    if isinstance(profile, AntiKinkProfile):
        return eval_antikink(profile, edge, x)
    raise TypeError(f"unsupported profile type {type(profile)!r}")


def _check_profile_mesh(profile, mesh: Mesh) -> None:
    if isinstance(profile, KinkProfile) and profile.junction != mesh.junction:
        raise ValueError(
            f"profile junction {profile.junction} does not match mesh junction {mesh.junction}"
        )
    if isinstance(profile, AntiKinkProfile) and mesh.junction.speeds != (1.0, 1.0, 1.0):
        raise ValueError("the kink/anti-kink family is defined for unit speeds only")


def sample_profile(profile, mesh: Mesh) -> GraphField:
    """Exact nodal samples of the profile value on a mesh.

    The anti-kink field stores the raw profile including its 2*pi tail;
    callers needing energy-space data subtract the background themselves.
    """
    _check_profile_mesh(profile, mesh)
    edges = []
    for j in range(3):
        phi, _, _ = _profile_eval(profile, j, mesh.edge_x(j))
        edges.append(phi)
    return GraphField(mesh, edges, copy=False)


def sample_profile_derivative(profile, mesh: Mesh) -> GraphField:
    """Exact nodal samples of phi'. Only the anti-kink derivative is
    continuous at the vertex; the kink derivative changes sign there and
    cannot be stored as a single-valued graph field."""
    _check_profile_mesh(profile, mesh)
    edges = []
    for j in range(3):
        _, dphi, _ = _profile_eval(profile, j, mesh.edge_x(j))
        edges.append(dphi)
    return GraphField(mesh, edges, copy=False)
