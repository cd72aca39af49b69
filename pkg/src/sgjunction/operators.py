"""Symmetric operator assembly on the meshed junction, the closed-form
resolvent of the free operator, and the extension-parameter map.

Assembly uses linear (hat) elements on each edge. The vertex interaction
enters the stiffness matrix as a single diagonal entry Z at the shared
vertex unknown, which keeps the matrix exactly symmetric; potential terms
are assembled with nodal (lumped) quadrature so the potential's sign
structure is preserved and the mass pattern is shared by all operators.
Homogeneous Dirichlet rows at the truncated far ends are eliminated.

The free resolvent at spectral parameter -lambda^2 is computed per edge as
a decaying exponential plus an exponential-kernel convolution; the three
homogeneous coefficients are matched at the vertex through a 3x3 linear
system whose determinant is ``(sum_j c_j + Z/lambda) / (c0 c1 c2)^2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .graph import GraphField, Mesh, MeshMismatchError, YJunction, l2_norm
from .profiles import AntiKinkProfile, KinkProfile, _profile_eval

__all__ = [
    "AssembledOperator",
    "ResolventData",
    "SingularMatchingError",
    "assemble_free",
    "assemble_linearized",
    "assemble_linearized_from_field",
    "quadratic_form",
    "matching_system",
    "resolvent_data",
    "resolvent_free_apply",
    "free_eigenpair",
    "theta_to_z",
    "POTENTIAL_FREE",
    "POTENTIAL_KINK",
    "POTENTIAL_ANTIKINK",
    "POTENTIAL_FIELD",
]

POTENTIAL_FREE = "free"
POTENTIAL_KINK = "kink"
POTENTIAL_ANTIKINK = "antikink"
POTENTIAL_FIELD = "field"

# fault-injection hook for the self-check command: flips the sign of the
# vertex coupling entry during assembly so downstream checks must notice
_FAULT_FLIP_VERTEX_SIGN = False


class SingularMatchingError(ArithmeticError):
    """The vertex matching system is singular: lambda sits at (or within
    tolerance of) the point spectrum -Z^2/(sum_j c_j)^2 of the free operator."""


@dataclass(frozen=True, eq=False)
class AssembledOperator:
    """Stiffness/mass pair for -c_j^2 d^2/dx^2 + V_j with vertex coupling Z.

    ``stiffness @ u . u`` approximates the quadratic form
    ``sum_j int c_j^2 (u')^2 + V_j u^2 + Z u(0)^2``; ``mass`` encodes the
    plain L2 norm. Both matrices are symmetric, in CSR format, on the
    shared-vertex DOF numbering of the mesh.
    """

    stiffness: sparse.csr_matrix
    mass: sparse.csr_matrix
    mesh: Mesh
    junction: YJunction
    z: float
    potential_tag: str
    # per-edge tridiagonal data used for O(n) inertia factorizations:
    # (kdiag, koff, kcross, mdiag, moff, mcross) per edge, plus the vertex
    # diagonal pair (kvert, mvert)
    _chains: tuple = field(repr=False, default=())
    _vertex_diag: tuple[float, float] = field(repr=False, default=(0.0, 0.0))

    def lumped_mass(self) -> np.ndarray:
        """Diagonal (lumped) mass: the trapezoid weights h at interior
        nodes and 3h/2 at the vertex. Lumping is done before eliminating
        the Dirichlet far ends, so the nodes next to the far ends keep
        their full weight."""
        h = self.mesh.spacing
        w = np.full(self.mesh.ndof, h)
        w[self.mesh.vertex_dof_index] = 1.5 * h
        return w


def _potential_from_profile(profile, mesh: Mesh):
    values = []
    for j in range(3):
        phi, _, _ = _profile_eval(profile, j, mesh.edge_x(j))
        values.append(np.cos(phi))
    return values


def _assemble(mesh: Mesh, junction: YJunction, z: float, potential, tag: str) -> AssembledOperator:
    if mesh.junction != junction:
        raise MeshMismatchError("mesh was built for a different junction")
    h = mesh.spacing
    c = junction.speeds
    z = float(z)

    chains = []
    rows, cols, vals = [], [], []
    mrows, mcols, mvals = [], [], []
    z_vertex = -z if _FAULT_FLIP_VERTEX_SIGN else z
    kvert = sum(cj**2 for cj in c) / h + z_vertex
    mvert = h  # three elements contribute h/3 each
    if potential is not None:
        # shared vertex value; nodal quadrature weight at the vertex is 3h/2
        kvert += 1.5 * h * potential[0][-1]

    offs = mesh.edge_offsets()
    for j in range(3):
        n = mesh.nodes_per_edge[j]
        m = n - 1  # interior nodes
        cj2 = c[j] ** 2
        kdiag = np.full(m, 2.0 * cj2 / h)
        koff = np.full(m - 1, -cj2 / h)
        kcross = -cj2 / h
        mdiag = np.full(m, 2.0 * h / 3.0)
        moff = np.full(m - 1, h / 6.0)
        mcross = h / 6.0
        if potential is not None:
            # edge arrays are in ascending-x order; interior node at
            # distance (k+1)h from the vertex
            v = np.asarray(potential[j], dtype=float)
            if v.shape != (n + 1,):
                raise MeshMismatchError("potential samples do not match the mesh")
            if j == 0:
                vint = v[1:n][::-1]
            else:
                vint = v[1:n]
            kdiag = kdiag + h * vint
        chains.append((kdiag, koff, kcross, mdiag, moff, mcross))

        idx = offs[j] + np.arange(m)
        rows.extend([idx, idx[:-1], idx[1:], idx[:1], np.array([0])])
        cols.extend([idx, idx[1:], idx[:-1], np.array([0]), idx[:1]])
        vals.extend([kdiag, koff, koff, np.array([kcross]), np.array([kcross])])
        mrows.extend([idx, idx[:-1], idx[1:], idx[:1], np.array([0])])
        mcols.extend([idx, idx[1:], idx[:-1], np.array([0]), idx[:1]])
        mvals.extend([mdiag, moff, moff, np.array([mcross]), np.array([mcross])])

    rows.append(np.array([0]))
    cols.append(np.array([0]))
    vals.append(np.array([kvert]))
    mrows.append(np.array([0]))
    mcols.append(np.array([0]))
    mvals.append(np.array([mvert]))

    ndof = mesh.ndof
    K = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(ndof, ndof)
    ).tocsr()
    M = sparse.coo_matrix(
        (np.concatenate(mvals), (np.concatenate(mrows), np.concatenate(mcols))), shape=(ndof, ndof)
    ).tocsr()
    return AssembledOperator(
        stiffness=K,
        mass=M,
        mesh=mesh,
        junction=junction,
        z=z,
        potential_tag=tag,
        _chains=tuple(chains),
        _vertex_diag=(kvert, mvert),
    )


def assemble_free(mesh: Mesh, junction: YJunction, z: float) -> AssembledOperator:
    """Assemble the potential-free operator with vertex coupling ``z``."""
    return _assemble(mesh, junction, z, None, POTENTIAL_FREE)


def assemble_linearized(mesh: Mesh, junction: YJunction, z: float, profile) -> AssembledOperator:
    """Assemble -c_j^2 d^2/dx^2 + cos(phi_j) for a closed-form profile."""
    if isinstance(profile, KinkProfile):
        tag = POTENTIAL_KINK
        if profile.junction != junction:
            raise MeshMismatchError("profile junction does not match the requested junction")
    elif isinstance(profile, AntiKinkProfile):
        tag = POTENTIAL_ANTIKINK
        if junction.speeds != (1.0, 1.0, 1.0):
            raise ValueError("the kink/anti-kink family is defined for unit speeds only")
    else:
        raise TypeError(f"unsupported profile type {type(profile)!r}")
    return _assemble(mesh, junction, z, _potential_from_profile(profile, mesh), tag)


def assemble_linearized_from_field(
    mesh: Mesh, junction: YJunction, z: float, background: GraphField
) -> AssembledOperator:
    """Assemble -c_j^2 d^2/dx^2 + cos(u_j) for a sampled background field.

    Used to linearize the discrete dynamics around a numerically relaxed
    equilibrium, where no closed form is available.
    """
    if background.mesh != mesh:
        raise MeshMismatchError("background field lives on a different mesh")
    return _assemble(mesh, junction, z, [np.cos(a) for a in background.edges], POTENTIAL_FIELD)


def quadratic_form(opr: AssembledOperator, f: GraphField) -> float:
    """Value u^T K u of the operator's quadratic form on a field."""
    if f.mesh != opr.mesh:
        raise MeshMismatchError("field and operator live on different meshes")
    u = f.to_dof()
    return float(u @ (opr.stiffness @ u))


# ---------------------------------------------------------------------------
# free resolvent


@dataclass(frozen=True)
class ResolventData:
    """Vertex matching data of the free resolvent at parameter -lambda^2.

    ``t`` holds the three edge integrals
    ``t_j = (1/(2 c_j)) int_0^inf u_j(d) exp(-lambda d / c_j) dd`` in the
    distance-from-vertex coordinate, ``d`` the matched coefficients of the
    decaying homogeneous solutions, ``mmat`` the 3x3 matching matrix and
    ``detm`` its determinant.
    """

    lam: float
    z: float
    t: tuple[float, float, float]
    d: tuple[float, float, float]
    mmat: np.ndarray
    detm: float


def matching_system(lam: float, z: float, junction: YJunction) -> tuple[np.ndarray, float]:
    """Matching matrix of the free resolvent and its determinant.

    The determinant is computed by elimination and equals
    ``(sum_j c_j + Z/lambda) / (c0 c1 c2)^2``.
    """
    lam = float(lam)
    if lam <= 0.0:
        raise ValueError("resolvent parameter lambda must be positive")
    c = junction.speeds
    m = np.array(
        [
            [1.0 / c[0] ** 2, -1.0 / c[1] ** 2, 0.0],
            [0.0, 1.0 / c[1] ** 2, -1.0 / c[2] ** 2],
            [1.0 / c[0] + z / (c[0] ** 2 * lam), 1.0 / c[1], 1.0 / c[2]],
        ]
    )
    detm = _det3_by_elimination(m)
    return m, detm


def _det3_by_elimination(m: np.ndarray) -> float:
    a = m.copy()
    det = 1.0
    for k in range(3):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
            det = -det
        piv = a[k, k]
        det *= piv
        if piv == 0.0:
            return 0.0
        for i in range(k + 1, 3):
            a[i, k:] -= (a[i, k] / piv) * a[k, k:]
    return float(det)


def _solve3(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    a = np.concatenate([m.copy(), rhs.reshape(3, 1)], axis=1)
    for k in range(3):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if p != k:
            a[[k, p]] = a[[p, k]]
        for i in range(k + 1, 3):
            a[i, k:] -= (a[i, k] / a[k, k]) * a[k, k:]
    x = np.zeros(3)
    for k in (2, 1, 0):
        x[k] = (a[k, 3] - a[k, k + 1 : 3] @ x[k + 1 : 3]) / a[k, k]
    return x


def _exp_kernel_weights(r: float, h: float) -> tuple[float, float]:
    """Exact integrals of the two hat-function halves against exp(-r s / h).

    Returns (gamma, delta) with
    ``gamma = int_0^h (1 - s/h) exp(-r s/h) ds`` and
    ``delta = int_0^h (s/h) exp(-r s/h) ds``.
    """
    if r < 0.5:
        # series sum_k (-r)^k / (k! (k+2)) resp. /(k! (k+1) (k+2)); the
        # closed forms lose ~r^-2 digits to cancellation for small r
        delta = 0.0
        gamma = 0.0
        term = 1.0  # (-r)^k / k!
        for k in range(0, 18):
            delta += term / (k + 2)
            gamma += term / ((k + 1) * (k + 2))
            term *= -r / (k + 1)
            if abs(term) < 1e-18:
                break
        return h * gamma, h * delta
    em = math.exp(-r)
    j0 = -h * math.expm1(-r) / r
    delta = h * (1.0 - (1.0 + r) * em) / r**2
    return j0 - delta, delta


def _edge_resolvent_pieces(u: np.ndarray, lam: float, cj: float, h: float):
    """Convolution ``int u(d') exp(-lam |d - d'|/cj) dd'`` at the nodes of one
    edge (ascending distance from the vertex), plus the decaying-kernel
    moment used for t_j. ``u`` is interpreted as its linear interpolant."""
    n = u.shape[0] - 1
    r = lam * h / cj
    q = math.exp(-r)
    gamma, delta = _exp_kernel_weights(r, h)
    # forward sweep: A_k = int_{d' < d_k} u exp(-lam (d_k - d')/cj)
    fwd = np.zeros(n + 1)
    acc = 0.0
    for k in range(1, n + 1):
        acc = acc * q + u[k - 1] * delta + u[k] * gamma
        fwd[k] = acc
    # backward sweep: B_k = int_{d' > d_k} u exp(-lam (d' - d_k)/cj)
    bwd = np.zeros(n + 1)
    acc = 0.0
    for k in range(n - 1, -1, -1):
        acc = acc * q + u[k] * gamma + u[k + 1] * delta
        bwd[k] = acc
    return fwd + bwd, bwd[0]


def resolvent_data(u: GraphField, lam: float, z: float, junction: YJunction) -> ResolventData:
    """Solve the vertex matching system of the free resolvent for ``u``."""
    lam = float(lam)
    z = float(z)
    mesh = u.mesh
    if mesh.junction != junction:
        raise MeshMismatchError("field mesh was built for a different junction")
    c = junction.speeds
    h = mesh.spacing
    m, detm = matching_system(lam, z, junction)
    csum = junction.speed_sum
    if abs(csum + z / lam) <= 1e-10 * csum:
        raise SingularMatchingError(
            f"lambda={lam} is within tolerance of the free bound state at "
            f"{-z / csum} (Z={z}); the matching system is singular"
        )

    t = []
    for j in range(3):
        vals = u.edges[j] if j != 0 else u.edges[0][::-1]  # ascending distance
        _, moment = _edge_resolvent_pieces(np.asarray(vals), lam, c[j], h)
        t.append(moment / (2.0 * c[j]))
    rhs = np.array(
        [
            (t[1] - t[0]) / lam,
            (t[2] - t[1]) / lam,
            (c[0] * t[0] + c[1] * t[1] + c[2] * t[2] - z * t[0] / lam) / lam,
        ]
    )
    d = _solve3(m, rhs)
    return ResolventData(lam=lam, z=z, t=tuple(t), d=tuple(d), mmat=m, detm=detm)


def resolvent_free_apply(
    u: GraphField,
    lam: float,
    z: float,
    junction: YJunction,
    *,
    include_point_term: bool = False,
) -> GraphField:
    """Apply the free resolvent at spectral parameter -lambda^2 to ``u``.

    The returned field satisfies ``(-c_j^2 d^2/dx^2 + lambda^2) Phi = u``
    on each edge together with both vertex conditions, for every Z with
    ``lambda != -Z / sum_j c_j``. With ``include_point_term`` (attractive
    coupling only) the per-edge bound-state split term
    ``exp(-alpha d/c_j) <u_j, exp(-alpha d/c_j)> / (lambda^2 + lambda_0)``
    is added on top; note the plain matching solution is already the
    resolvent, so the default is off.
    """
    data = resolvent_data(u, lam, z, junction)
    mesh = u.mesh
    c = junction.speeds
    h = mesh.spacing
    edges = []
    for j in range(3):
        vals = u.edges[j] if j != 0 else u.edges[0][::-1]
        conv, _ = _edge_resolvent_pieces(np.asarray(vals), lam, c[j], h)
        dist = mesh.edge_distance(j)
        phi = (data.d[j] / c[j] ** 2) * np.exp(-lam * dist / c[j]) + conv / (2.0 * c[j] * lam)
        if include_point_term:
            if z >= 0.0:
                raise ValueError("the bound-state split term exists only for Z < 0")
            alpha = -z / junction.speed_sum
            lam0 = -(z / junction.speed_sum) ** 2
            decay = np.exp(-alpha * dist / c[j])
            prod = np.asarray(vals) * decay
            inner = h * (prod.sum() - 0.5 * (prod[0] + prod[-1]))
            phi = phi + decay * inner / (lam**2 + lam0)
        edges.append(phi[::-1] if j == 0 else phi)
    # the three vertex samples agree to solver precision; unify them
    vert = data.d[0] / c[0] ** 2 + data.t[0] / lam
    edges[0][-1] = vert
    edges[1][0] = vert
    edges[2][0] = vert
    return GraphField(mesh, edges, copy=False)


def resolvent_vertex_derivatives(data: ResolventData, junction: YJunction) -> tuple[float, float, float]:
    """Closed-form one-sided derivatives of the resolvent at the vertex,
    in the type I convention (edge 0 as a left limit)."""
    c = junction.speeds
    lam = data.lam
    d0 = data.d[0] * lam / c[0] ** 3 - data.t[0] / c[0]
    d1 = -data.d[1] * lam / c[1] ** 3 + data.t[1] / c[1]
    d2 = -data.d[2] * lam / c[2] ** 3 + data.t[2] / c[2]
    return d0, d1, d2


def resolvent_vertex_value(data: ResolventData, junction: YJunction) -> float:
    return data.d[0] / junction.speeds[0] ** 2 + data.t[0] / data.lam


# ---------------------------------------------------------------------------
# free point spectrum and the extension-parameter map


def free_eigenpair(z: float, junction: YJunction, mesh: Mesh) -> tuple[float, GraphField]:
    """The single negative eigenvalue of the free operator and its
    eigenfunction, sampled on ``mesh`` and normalized in the discrete L2
    norm. Exists only for attractive coupling.

    The eigenvalue is ``-Z^2 / (sum_j c_j)^2``; the eigenfunction decays
    from the vertex at rate ``s / c_j`` per edge with ``s = -Z / sum_j c_j``,
    which satisfies both vertex conditions for arbitrary speeds.
    """
    z = float(z)
    if z >= 0.0:
        raise ValueError(f"the free operator has no point spectrum for Z={z} >= 0")
    if mesh.junction != junction:
        raise MeshMismatchError("mesh was built for a different junction")
    csum = junction.speed_sum
    s = -z / csum
    mu0 = -(s**2)
    edges = []
    for j in range(3):
        decay = np.exp(-s * mesh.edge_distance(j) / junction.speeds[j])
        edges.append(decay[::-1] if j == 0 else decay)
    field_ = GraphField(mesh, edges, copy=False)
    return mu0, field_ * (1.0 / l2_norm(field_))


def theta_to_z(theta: float, junction: YJunction) -> float:
    """Coupling strength of the self-adjoint extension with parameter
    ``theta`` in [0, 2*pi) excluding the pole at pi:

        Z(theta) = -sum_j c_j * (e^{i pi/4} + e^{i (theta - pi/4)}) / (1 + e^{i theta}).

    The complex expression is evaluated directly; a residual imaginary
    part above 1e-12 raises, which also rejects evaluation too close to
    the pole.
    """
    theta = float(theta)
    if not (0.0 <= theta < 2.0 * math.pi):
        raise ValueError("theta must lie in [0, 2*pi)")
    if abs(theta - math.pi) < 1e-12:
        raise ValueError("theta = pi is the pole of the extension map")
    num = cmath.exp(1j * math.pi / 4.0) + cmath.exp(1j * (theta - math.pi / 4.0))
    den = 1.0 + cmath.exp(1j * theta)
    zc = -junction.speed_sum * num / den
    if abs(zc.imag) > 1e-12:
        raise ArithmeticError(
            f"extension map lost realness at theta={theta}: imaginary part {zc.imag}"
        )
    return zc.real
