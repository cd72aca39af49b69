"""Y-junction geometry, meshes, graph fields, norms, and vertex conditions.

The junction consists of three semi-infinite edges joined at a single
vertex. Edge 0 is the incoming edge, parametrized by x in (-inf, 0];
edges 1 and 2 are outgoing, parametrized by x in [0, inf). A type II
junction uses the same internal representation with edge 0's coordinate
sign flipped on output only.

Meshes truncate every edge at a finite length L and impose a homogeneous
Dirichlet condition at the far ends. The value at the vertex is stored
exactly once, so continuity of a sampled field at the vertex holds by
construction. The remaining vertex condition is the flux balance

    -c0^2 u0'(0-) + c1^2 u1'(0+) + c2^2 u2'(0+) = Z u(0),

where Z is the coupling strength of the vertex interaction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "JunctionType",
    "YJunction",
    "VertexCoupling",
    "Mesh",
    "GraphField",
    "MeshMismatchError",
    "build_mesh",
    "l2_inner",
    "l2_norm",
    "h1z_norm_sq",
    "coupling_shift_constant",
    "vertex_residuals",
    "field_vertex_derivatives",
    "field_vertex_residuals",
    "edge_derivative",
]


class JunctionType(str, Enum):
    """Orientation convention for the three edges."""

    TYPE_I = "I"
    TYPE_II = "II"


class MeshMismatchError(ValueError):
    """Raised when fields or operators built on different meshes are mixed."""


@dataclass(frozen=True)
class YJunction:
    """Three-edge junction with constant wave speed on each edge.

    Parameters
    ----------
    speeds : tuple of three floats
        Positive wave speeds (c0, c1, c2), one per edge.
    kind : JunctionType
        Edge orientation convention. All internal formulas use the
        type I convention; type II only flips the sign of edge 0's
        coordinate in serialized output.
    """

    speeds: tuple[float, float, float]
    kind: JunctionType = JunctionType.TYPE_I

    def __post_init__(self) -> None:
        speeds = tuple(float(c) for c in self.speeds)
        if len(speeds) != 3:
            raise ValueError("a Y-junction has exactly three edge speeds")
        if not all(math.isfinite(c) and c > 0.0 for c in speeds):
            raise ValueError(f"edge speeds must be finite and positive, got {speeds}")
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "kind", JunctionType(self.kind))

    @property
    def speed_sum(self) -> float:
        return self.speeds[0] + self.speeds[1] + self.speeds[2]

    @property
    def max_speed(self) -> float:
        return max(self.speeds)


@dataclass(frozen=True)
class VertexCoupling:
    """Strength Z of the vertex interaction; any finite real is admissible."""

    z: float

    def __post_init__(self) -> None:
        z = float(self.z)
        if not math.isfinite(z):
            raise ValueError("vertex coupling strength must be finite")
        object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class Mesh:
    """Uniform mesh on the truncated junction with a shared vertex unknown.

    Each edge j carries nodes at distances 0, h, ..., n_j*h from the
    vertex; the node at distance n_j*h is the Dirichlet far end. Degrees
    of freedom are numbered with the vertex first, then the interior
    nodes of each edge ordered by increasing distance from the vertex,
    so the total count is 1 + sum_j (n_j - 1).
    """

    junction: YJunction
    lengths: tuple[float, float, float]
    spacing: float
    nodes_per_edge: tuple[int, int, int]
    vertex_dof_index: int = 0

    @property
    def ndof(self) -> int:
        return 1 + sum(n - 1 for n in self.nodes_per_edge)

    def edge_offsets(self) -> tuple[int, int, int]:
        """Start index of each edge's interior block in the DOF vector."""
        n0, n1, _ = self.nodes_per_edge
        return (1, 1 + (n0 - 1), 1 + (n0 - 1) + (n1 - 1))

    def edge_distance(self, edge: int) -> np.ndarray:
        """Node distances from the vertex, 0..L, for one edge."""
        n = self.nodes_per_edge[edge]
        return self.spacing * np.arange(n + 1)

    def edge_x(self, edge: int) -> np.ndarray:
        """Node coordinates in the type I convention, ascending."""
        d = self.edge_distance(edge)
        if edge == 0:
            return -d[::-1]
        return d


def build_mesh(junction: YJunction, length: float, spacing: float) -> Mesh:
    """Truncate all three edges at ``length`` and mesh them with ``spacing``.

    Raises
    ------
    ValueError
        If ``length`` or ``spacing`` is not positive, or if
        ``spacing > length / 8`` (fewer than eight nodes per edge).
    """
    length = float(length)
    spacing = float(spacing)
    if not (math.isfinite(length) and length > 0.0):
        raise ValueError(f"truncation length must be positive, got {length}")
    if not (math.isfinite(spacing) and spacing > 0.0):
        raise ValueError(f"mesh spacing must be positive, got {spacing}")
    if spacing > length / 8.0:
        raise ValueError(
            f"mesh spacing {spacing} too coarse for length {length}; need spacing <= length/8"
        )
    n = int(round(length / spacing))
    return Mesh(
        junction=junction,
        lengths=(length, length, length),
        spacing=spacing,
        nodes_per_edge=(n, n, n),
    )


class GraphField:
    """A scalar function sampled at the nodes of a :class:`Mesh`.

    The vertex value is shared between the three per-edge sample arrays,
    so continuity at the vertex is exact by construction. Edge arrays
    are stored in ascending-x order: edge 0 runs from the far end to the
    vertex (vertex sample last), edges 1 and 2 from the vertex outward
    (vertex sample first). Arrays are immutable after construction.
    """

    __slots__ = ("mesh", "_edges")

    #: relative disagreement of supplied vertex samples tolerated before
    #: they are unified to a single stored value
    _VERTEX_TOL = 1e-9

    def __init__(self, mesh: Mesh, edge_values, *, copy: bool = True):
        arrays = []
        for j, vals in enumerate(edge_values):
            a = np.array(vals, dtype=float, copy=copy)
            if a.shape != (mesh.nodes_per_edge[j] + 1,):
                raise MeshMismatchError(
                    f"edge {j} expects {mesh.nodes_per_edge[j] + 1} samples, got {a.shape}"
                )
            arrays.append(a)
        if len(arrays) != 3:
            raise ValueError("a graph field has exactly three edge arrays")
        vertex = arrays[0][-1]
        scale = max(1.0, abs(vertex))
        for j in (1, 2):
            if abs(arrays[j][0] - vertex) > self._VERTEX_TOL * scale:
                raise ValueError(
                    "edge samples disagree at the vertex: "
                    f"{arrays[0][-1]!r} vs {arrays[j][0]!r} on edge {j}"
                )
            arrays[j][0] = vertex
        for a in arrays:
            a.setflags(write=False)
        self.mesh = mesh
        self._edges = tuple(arrays)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GraphField":
        return cls(mesh, [np.zeros(n + 1) for n in mesh.nodes_per_edge], copy=False)

    @classmethod
    def from_dof(cls, mesh: Mesh, dof: np.ndarray, far_values=(0.0, 0.0, 0.0)) -> "GraphField":
        """Expand a DOF vector to per-edge arrays; far ends default to zero."""
        dof = np.asarray(dof, dtype=float)
        if dof.shape != (mesh.ndof,):
            raise MeshMismatchError(f"DOF vector of length {mesh.ndof} expected, got {dof.shape}")
        offs = mesh.edge_offsets()
        n0, n1, n2 = mesh.nodes_per_edge
        e0 = np.empty(n0 + 1)
        e0[0] = far_values[0]
        e0[1:n0] = dof[offs[0] : offs[0] + n0 - 1][::-1]
        e0[n0] = dof[mesh.vertex_dof_index]
        out = [e0]
        for j, n in ((1, n1), (2, n2)):
            e = np.empty(n + 1)
            e[0] = dof[mesh.vertex_dof_index]
            e[1:n] = dof[offs[j] : offs[j] + n - 1]
            e[n] = far_values[j]
            out.append(e)
        return cls(mesh, out, copy=False)

    def to_dof(self) -> np.ndarray:
        """Collapse to the DOF vector (vertex plus interior nodes)."""
        mesh = self.mesh
        n0, n1, n2 = mesh.nodes_per_edge
        dof = np.empty(mesh.ndof)
        dof[mesh.vertex_dof_index] = self.vertex_value
        offs = mesh.edge_offsets()
        dof[offs[0] : offs[0] + n0 - 1] = self._edges[0][1:n0][::-1]
        dof[offs[1] : offs[1] + n1 - 1] = self._edges[1][1:n1]
        dof[offs[2] : offs[2] + n2 - 1] = self._edges[2][1:n2]
        return dof

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self._edges

    @property
    def vertex_value(self) -> float:
        return float(self._edges[0][-1])

    @property
    def far_values(self) -> tuple[float, float, float]:
        return (float(self._edges[0][0]), float(self._edges[1][-1]), float(self._edges[2][-1]))

    def copy(self) -> "GraphField":
        return GraphField(self.mesh, self._edges, copy=True)

    def _binary(self, other, op) -> "GraphField":
        if not isinstance(other, GraphField):
            return NotImplemented
        if other.mesh != self.mesh:
            raise MeshMismatchError("fields live on different meshes")
        return GraphField(self.mesh, [op(a, b) for a, b in zip(self._edges, other._edges)], copy=False)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        s = float(scalar)
        return GraphField(self.mesh, [s * a for a in self._edges], copy=False)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _require_same_mesh(f: GraphField, g: GraphField) -> None:
    if f.mesh != g.mesh:
        raise MeshMismatchError("fields live on different meshes")


def l2_inner(f: GraphField, g: GraphField) -> float:
    """Trapezoidal approximation of the L2 inner product over all edges."""
    _require_same_mesh(f, g)
    h = f.mesh.spacing
    total = 0.0
    for a, b in zip(f.edges, g.edges):
        prod = a * b
        total += h * (prod.sum() - 0.5 * (prod[0] + prod[-1]))
    return float(total)


def l2_norm(f: GraphField) -> float:
    return math.sqrt(max(l2_inner(f, f), 0.0))


def edge_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Nodal derivative of one edge array: centered stencils in the
    interior, second-order one-sided stencils at both ends."""
    v = np.asarray(values, dtype=float)
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return d


def coupling_shift_constant(z: float, junction: YJunction) -> float:
    """Weight of the zeroth-order term that makes the graph norm definite:
    (Z / sum_j c_j)^2 for attractive coupling (Z < 0), zero otherwise."""
    if z < 0.0:
        return (z / junction.speed_sum) ** 2
    return 0.0


def h1z_norm_sq(f: GraphField, z: float, junction: YJunction) -> float:
    """Squared graph Sobolev norm adapted to the vertex coupling.

    Returns ``||f'||^2 + (beta + 1) ||f||^2 + Z |f(0)|^2`` with
    ``beta = (Z / sum_j c_j)^2`` for Z < 0 and ``beta = 0`` for Z >= 0.
    Derivatives are formed with :func:`edge_derivative`.
    """
    h = f.mesh.spacing
    deriv_sq = 0.0
    for a in f.edges:
        d = edge_derivative(a, h)
        dd = d * d
        deriv_sq += h * (dd.sum() - 0.5 * (dd[0] + dd[-1]))
    beta = coupling_shift_constant(z, junction)
    return float(deriv_sq + (beta + 1.0) * l2_inner(f, f) + z * f.vertex_value**2)


def vertex_residuals(
    values_at_vertex, derivs_at_vertex, z: float, junction: YJunction
) -> tuple[float, float]:
    """Residuals of the two vertex conditions from one-sided boundary data.

    Parameters
    ----------
    values_at_vertex : three floats
        (u0(0-), u1(0+), u2(0+)).
    derivs_at_vertex : three floats
        One-sided derivatives in the type I convention: edge 0 enters as
        a left limit, edges 1 and 2 as right limits.

    Returns
    -------
    continuity_residual : float
        Maximum pairwise disagreement of the vertex values.
    flux_residual : float
        ``|-c0^2 u0' + c1^2 u1' + c2^2 u2' - Z u0(0)|``.
    """
    u = [float(v) for v in values_at_vertex]
    du = [float(v) for v in derivs_at_vertex]
    c = junction.speeds
    cont = max(abs(u[0] - u[1]), abs(u[0] - u[2]), abs(u[1] - u[2]))
    flux = abs(-c[0] ** 2 * du[0] + c[1] ** 2 * du[1] + c[2] ** 2 * du[2] - z * u[0])
    return cont, flux


def field_vertex_derivatives(f: GraphField) -> tuple[float, float, float]:
    """One-sided second-order derivative estimates at the vertex."""
    h = f.mesh.spacing
    e0, e1, e2 = f.edges
    d0 = (3.0 * e0[-1] - 4.0 * e0[-2] + e0[-3]) / (2.0 * h)
    d1 = (-3.0 * e1[0] + 4.0 * e1[1] - e1[2]) / (2.0 * h)
    d2 = (-3.0 * e2[0] + 4.0 * e2[1] - e2[2]) / (2.0 * h)
    return d0, d1, d2


def field_vertex_residuals(f: GraphField, z: float, junction: YJunction) -> tuple[float, float]:
    """Vertex-condition residuals of a sampled field, with derivatives
    estimated by one-sided stencils (continuity is exact by storage)."""
    v = f.vertex_value
    return vertex_residuals((v, v, v), field_vertex_derivatives(f), z, junction)
