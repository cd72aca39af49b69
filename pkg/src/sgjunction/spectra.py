"""Eigenvalue counting, extremal eigenpairs, and an independent shooting
oracle for the assembled junction operators.

Morse indices are obtained from the inertia of K - sigma*M via a symmetric
triangular factorization that walks each edge chain from the far end
toward the vertex and eliminates the shared vertex unknown last; on the
tree-structured sparsity this is exact integer counting in O(n) work.
Individual eigenvalues are bracketed by inertia bisection and their
eigenvectors recovered by shifted inverse iteration.

The shooting oracle integrates the stationary eigenvalue ODE inward from
the truncated far ends with a fixed-step fourth-order scheme, scales each
edge solution to value one at the vertex, and root-finds the flux
residual; it never touches the element assembly, so agreement between the
two paths validates both.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .graph import GraphField, Mesh, YJunction
from .operators import AssembledOperator, assemble_free, assemble_linearized
from .profiles import (
    AntiKinkProfile,
    KinkProfile,
    _profile_eval,
    solve_antikink_shift,
    solve_kink_shift,
)

__all__ = [
    "SpectralError",
    "ShiftHitsSpectrumError",
    "NoBoundStateError",
    "IterationError",
    "SpectralReport",
    "CertificationResult",
    "inertia",
    "lowest_eigenpairs",
    "shooting_eigenvalue",
    "shooting_flux_mismatch",
    "spectral_report",
    "certify_criterion",
    "essential_edge_scan",
]


class SpectralError(RuntimeError):
    """Base class for numerical failures in spectral computations."""


class ShiftHitsSpectrumError(SpectralError):
    """A factorization pivot vanished: the shift sits on an eigenvalue."""


class NoBoundStateError(SpectralError):
    """The shooting residual has no sign change in the search interval."""


class IterationError(SpectralError):
    """An iterative solve failed to reach its tolerance."""


_PIVOT_TOL = 1e-13


def inertia(opr: AssembledOperator, sigma: float, *, lumped_mass: bool = False) -> int:
    """Number of pencil eigenvalues of (K, M) strictly below ``sigma``.

    Counts negative pivots of the symmetric factorization of
    ``K - sigma*M``, eliminating each edge chain from the far end inward
    and the vertex unknown last.

    Raises
    ------
    ShiftHitsSpectrumError
        If a pivot falls below the factorization tolerance; the caller
        should perturb ``sigma`` and retry.
    """
    sigma = float(sigma)
    h = opr.mesh.spacing
    kvert, mvert = opr._vertex_diag
    if lumped_mass:
        mvert = 1.5 * h
    vpiv = kvert - sigma * mvert
    negative = 0
    for kdiag, koff, kcross, mdiag, moff, mcross in opr._chains:
        if lumped_mass:
            d = (kdiag - sigma * h).tolist()
            o = (koff.copy()).tolist()
            cross = kcross
        else:
            d = (kdiag - sigma * mdiag).tolist()
            o = (koff - sigma * moff).tolist()
            cross = kcross - sigma * mcross
        m = len(d)
        piv = d[m - 1]
        if abs(piv) <= _PIVOT_TOL:
            raise ShiftHitsSpectrumError(f"zero pivot at shift {sigma}")
        if piv < 0.0:
            negative += 1
        for i in range(m - 2, -1, -1):
            piv = d[i] - o[i] * o[i] / piv
            if abs(piv) <= _PIVOT_TOL:
                raise ShiftHitsSpectrumError(f"zero pivot at shift {sigma}")
            if piv < 0.0:
                negative += 1
        vpiv -= cross * cross / piv
    if abs(vpiv) <= _PIVOT_TOL:
        raise ShiftHitsSpectrumError(f"zero vertex pivot at shift {sigma}")
    if vpiv < 0.0:
        negative += 1
    return negative


def _inertia_robust(opr, sigma, lumped_mass=False) -> int:
    """Inertia with automatic nudging off an exact eigenvalue."""
    step = 1e-9 * (1.0 + abs(sigma))
    for attempt in range(6):
        try:
            return inertia(opr, sigma + attempt * step, lumped_mass=lumped_mass)
        except ShiftHitsSpectrumError:
            continue
    raise ShiftHitsSpectrumError(f"could not move shift {sigma} off the spectrum")


def lowest_eigenpairs(
    opr: AssembledOperator,
    k: int,
    *,
    lumped_mass: bool = False,
    bracket_tol: float = 1e-10,
    residual_tol: float = 1e-8,
    max_iterations: int = 200,
) -> list[tuple[float, GraphField]]:
    """The ``k`` smallest pencil eigenvalues with eigenvectors, ascending.

    Each eigenvalue is isolated by inertia bisection to bracket width
    ``bracket_tol``; the eigenvector follows from shifted inverse
    iteration, and the returned eigenvalue is its Rayleigh quotient.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    lo = -2.0
    while _inertia_robust(opr, lo, lumped_mass) > 0:
        lo *= 2.0
        if lo < -1e7:  # pragma: no cover - spectra here are bounded below
            raise SpectralError("failed to bracket the spectrum from below")
    hi = 1.0
    while _inertia_robust(opr, hi, lumped_mass) < k:
        hi = hi * 2.0 + 1.0
        if hi > 1e7:  # pragma: no cover
            raise SpectralError(f"failed to find {k} eigenvalues below 1e7")

    if lumped_mass:
        m_op = _lumped_mass_operator(opr)
    else:
        m_op = opr.mass

    out = []
    left = lo
    for index in range(1, k + 1):
        a, b = left, hi
        while b - a > bracket_tol:
            mid = 0.5 * (a + b)
            if _inertia_robust(opr, mid, lumped_mass) >= index:
                b = mid
            else:
                a = mid
        mu_mid = 0.5 * (a + b)
        mu, vec = _inverse_iteration(
            opr, m_op, mu_mid, residual_tol=residual_tol, max_iterations=max_iterations
        )
        out.append((mu, GraphField.from_dof(opr.mesh, vec)))
        left = a
    return out


def _lumped_mass_operator(opr: AssembledOperator):
    from scipy import sparse

    return sparse.diags(opr.lumped_mass(), format="csr")


def _inverse_iteration(opr, m_op, sigma, *, residual_tol, max_iterations):
    K = opr.stiffness
    shifted = (K - sigma * m_op).tocsc()
    try:
        lu = splu(shifted)
    except RuntimeError as exc:  # exactly singular shift
        raise ShiftHitsSpectrumError(str(exc)) from exc
    n = K.shape[0]
    x = np.ones(n) + 1e-3 * np.cos(np.arange(n))
    x /= math.sqrt(x @ (m_op @ x))
    for _ in range(max_iterations):
        y = lu.solve(m_op @ x)
        norm = math.sqrt(max(y @ (m_op @ y), 1e-300))
        x = y / norm
        mx = m_op @ x
        mu = float(x @ (K @ x)) / float(x @ mx)
        residual = np.linalg.norm(K @ x - mu * mx) / np.linalg.norm(mx)
        if residual <= residual_tol:
            return mu, x
    raise IterationError(
        f"inverse iteration did not reach residual {residual_tol} in {max_iterations} steps"
    )


# ---------------------------------------------------------------------------
# shooting oracle


def _shooting_potentials(profile, mesh: Mesh, constant_potential):
    """Potential samples per edge on the half-step grid of the integrator,
    ascending in distance from the vertex, spacing h/8."""
    h = mesh.spacing
    out = []
    for j in range(3):
        n_steps = 4 * mesh.nodes_per_edge[j]
        d = (h / 8.0) * np.arange(2 * n_steps + 1)
        if profile is None:
            v = np.full(d.shape, 0.0 if constant_potential is None else float(constant_potential))
        else:
            x = -d if j == 0 else d
            phi, _, _ = _profile_eval(profile, j, x)
            v = np.cos(phi)
        out.append(v)
    return out


def _shoot_flux(mus: np.ndarray, potentials, junction: YJunction, mesh: Mesh) -> np.ndarray:
    """Vertex flux mismatch of the decaying shooting solutions, vectorized
    over trial eigenvalues. Integrates psi'' = (V - mu) psi / c^2 from the
    far end of each edge toward the vertex with classical RK4 at step h/4,
    then evaluates ``sum_j c_j^2 psi_j'(0)/psi_j(0)`` in the distance
    coordinate (equal to the type I flux combination)."""
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    c = np.array(junction.speeds).reshape(3, 1)
    inv_c2 = 1.0 / c**2
    h = mesh.spacing
    step = h / 4.0
    n_steps = 4 * mesh.nodes_per_edge[0]
    v_inf = np.array([p[-1] for p in potentials]).reshape(3, 1)
    kappa = np.sqrt(np.maximum(v_inf - mus[None, :], 1e-300))

    psi = np.ones((3, mus.shape[0]))
    chi = -(kappa / c) * psi  # d psi / d(distance) of the decaying branch
    vgrid = np.stack(potentials)  # (3, 2*n_steps+1)
    for i in range(n_steps):
        v0 = vgrid[:, 2 * (n_steps - i)].reshape(3, 1)
        vm = vgrid[:, 2 * (n_steps - i) - 1].reshape(3, 1)
        v1 = vgrid[:, 2 * (n_steps - i) - 2].reshape(3, 1)
        q0 = (v0 - mus) * inv_c2
        qm = (vm - mus) * inv_c2
        q1 = (v1 - mus) * inv_c2
        dt = -step
        k1p = chi
        k1c = q0 * psi
        k2p = chi + 0.5 * dt * k1c
        k2c = qm * (psi + 0.5 * dt * k1p)
        k3p = chi + 0.5 * dt * k2c
        k3c = qm * (psi + 0.5 * dt * k2p)
        k4p = chi + dt * k3c
        k4c = q1 * (psi + dt * k3p)
        psi = psi + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        chi = chi + (dt / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c)
        if i % 256 == 255:
            scale = np.maximum(np.abs(psi), np.abs(chi))
            psi = psi / scale
            chi = chi / scale
    return np.sum(c**2 * chi / psi, axis=0)


def shooting_flux_mismatch(
    mu: float,
    z: float,
    junction: YJunction,
    mesh: Mesh,
    profile=None,
    *,
    constant_potential=None,
) -> float:
    """Flux residual g(mu) of the shooting construction at one trial value."""
    potentials = _shooting_potentials(profile, mesh, constant_potential)
    g = _shoot_flux(np.array([mu]), potentials, junction, mesh)
    return float(g[0]) - float(z)


def shooting_eigenvalue(
    z: float,
    junction: YJunction,
    profile,
    mesh: Mesh,
    *,
    constant_potential=None,
    tol: float = 1e-12,
    scan_points: int = 240,
) -> float:
    """Lowest bound-state eigenvalue by shooting, independent of assembly.

    Scans trial values between -1 and the far-field potential level,
    then refines the first sign change of the flux residual to ``tol``.
    ``profile=None`` selects a constant potential (zero by default).

    Raises
    ------
    NoBoundStateError
        If the residual has no sign change in the scan interval.
    """
    z = float(z)
    potentials = _shooting_potentials(profile, mesh, constant_potential)
    v_inf = min(p[-1] for p in potentials)
    lo = -1.0 + 1e-9
    hi = v_inf - 1e-9
    if hi <= lo:
        raise NoBoundStateError("empty search interval for the shooting eigenvalue")

    grid = np.linspace(lo, hi, scan_points)
    g = _shoot_flux(grid, potentials, junction, mesh) - z
    sign_changes = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    for idx in sign_changes:
        a, b = grid[idx], grid[idx + 1]
        ga = g[idx]
        while b - a > tol:
            inner = np.linspace(a, b, 33)
            gi = _shoot_flux(inner, potentials, junction, mesh) - z
            flips = np.nonzero(np.sign(gi[:-1]) * np.sign(gi[1:]) < 0)[0]
            if flips.size == 0:  # pragma: no cover - bracket was exact
                break
            j = flips[0]
            a, b, ga = inner[j], inner[j + 1], gi[j]
        root = 0.5 * (a + b)
        g_root = _shoot_flux(np.array([root]), potentials, junction, mesh)[0] - z
        if abs(g_root) <= 1e-3 * max(1.0, abs(ga)):
            return float(root)
    raise NoBoundStateError(
        f"no bound state found for Z={z} in ({lo:.3g}, {hi:.3g})"
    )


# ---------------------------------------------------------------------------
# reports and certification


@dataclass
class SpectralReport:
    """Spectral summary of one assembled operator."""

    z: float
    morse_index: int
    negative_eigenvalues: list[tuple[float, GraphField]]
    kernel_gap: float
    second_eigenvalue: float
    essential_edge_estimate: float
    oracle_mu0: float | None
    mesh_params: tuple[float, float]  # (L, h)
    family: str = "kink"
    shift: float | None = None
    profile_kind: str | None = None
    lowest_eigenvalue: float = 0.0


@dataclass
class CertificationResult:
    passed: bool
    predicted_growth_rate: float | None
    diagnosis: str


def spectral_report(
    z: float,
    junction: YJunction,
    mesh: Mesh,
    family: str = "kink",
    *,
    oracle: bool = True,
    n_pairs: int = 2,
) -> SpectralReport:
    """Assemble the operator for one coupling strength and summarize its
    low spectrum: Morse index, lowest eigenpairs, kernel gap, and the
    independent shooting value when requested."""
    if family == "free":
        profile = None
        opr = assemble_free(mesh, junction, z)
    elif family == "kink":
        profile = solve_kink_shift(z, junction)
        opr = assemble_linearized(mesh, junction, z, profile)
    elif family == "antikink":
        profile = solve_antikink_shift(z)
        opr = assemble_linearized(mesh, junction, z, profile)
    else:
        raise ValueError(f"unknown family {family!r}")

    morse = _inertia_robust(opr, 0.0)
    pairs = lowest_eigenpairs(opr, max(n_pairs, 2))
    mus = [mu for mu, _ in pairs]
    negatives = [(mu, v) for mu, v in pairs if mu < 0.0]
    if len(negatives) != morse:
        # negative eigenvalues beyond the computed pairs; fetch just the values
        negatives = [(mu, v) for mu, v in lowest_eigenpairs(opr, max(morse, 1)) if mu < 0.0]
    oracle_mu = None
    if oracle:
        try:
            oracle_mu = shooting_eigenvalue(z, junction, profile, mesh)
        except NoBoundStateError:
            if family != "free":
                raise  # the profile operators always carry a bound state
            oracle_mu = None
    shift = None
    kind = None
    if isinstance(profile, KinkProfile):
        shift = profile.shifts[0]
        kind = profile.kind.value
    elif isinstance(profile, AntiKinkProfile):
        shift = profile.shift
    return SpectralReport(
        z=float(z),
        morse_index=morse,
        negative_eigenvalues=negatives,
        kernel_gap=float(min(abs(mu) for mu in mus)),
        second_eigenvalue=float(mus[1]),
        essential_edge_estimate=float(mus[1]),
        oracle_mu0=oracle_mu,
        mesh_params=(float(mesh.lengths[0]), float(mesh.spacing)),
        family=family,
        shift=shift,
        profile_kind=kind,
        lowest_eigenvalue=float(mus[0]),
    )


def certify_criterion(
    report: SpectralReport,
    *,
    gap_floor: float | None = None,
    r0_floor: float | None = None,
) -> CertificationResult:
    """Check the spectral conditions behind the instability conclusion:
    Morse index one, a quantitative gap around zero, and a positive rest
    of the spectrum. On success the predicted growing-mode rate
    ``sqrt(-mu_1)`` is attached; a solution of the linearized flow grows
    like exp(rate * t) along the corresponding eigenvector."""
    h = report.mesh_params[1]
    if gap_floor is None:
        gap_floor = 10.0 * h * h
    if r0_floor is None:
        r0_floor = 10.0 * h * h
    problems = []
    if report.morse_index != 1:
        problems.append(f"morse index {report.morse_index} != 1")
    if report.kernel_gap < gap_floor:
        problems.append(f"kernel gap {report.kernel_gap:.3e} below floor {gap_floor:.3e}")
    if report.second_eigenvalue < r0_floor:
        problems.append(
            f"second eigenvalue {report.second_eigenvalue:.3e} below floor {r0_floor:.3e}"
        )
    if problems:
        return CertificationResult(False, None, "; ".join(problems))
    mu1 = report.negative_eigenvalues[0][0]
    return CertificationResult(True, math.sqrt(-mu1), "spectral conditions hold")


def essential_edge_scan(
    operators: list[AssembledOperator],
    *,
    edge_level: float = 1.0,
    margin: float = 0.1,
) -> float:
    """Estimate the lower edge of the eigenvalue cluster above the isolated
    negative eigenvalue from a family of operators with growing truncation
    length. Asserts that the count of eigenvalues below
    ``edge_level - margin`` is the same (one) for every operator, then
    returns the second eigenvalue of the largest-length operator."""
    if not operators:
        raise ValueError("need at least one operator")
    counts = [
        _inertia_robust(op, edge_level - margin) for op in operators
    ]
    if len(set(counts)) != 1:
        raise SpectralError(
            f"eigenvalue count below {edge_level - margin} did not stabilize: {counts}"
        )
    largest = max(operators, key=lambda op: op.mesh.lengths[0])
    pairs = lowest_eigenpairs(largest, 2)
    return float(pairs[1][0])
