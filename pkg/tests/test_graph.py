import math

import numpy as np
import pytest

from sgjunction.graph import (
    GraphField,
    JunctionType,
    MeshMismatchError,
    VertexCoupling,
    YJunction,
    build_mesh,
    field_vertex_residuals,
    h1z_norm_sq,
    l2_inner,
    l2_norm,
    vertex_residuals,
)
from sgjunction.profiles import sample_profile, solve_kink_shift


def exp_field(mesh):
    """exp(-|x|) sampled on every edge."""
    edges = [np.exp(-mesh.edge_distance(j)) for j in range(3)]
    edges[0] = edges[0][::-1]
    return GraphField(mesh, edges, copy=False)


class TestYJunction:
    def test_valid(self):
        j = YJunction((1.0, 2.0, 2.0))
        assert j.speed_sum == 5.0
        assert j.max_speed == 2.0
        assert j.kind == JunctionType.TYPE_I

    @pytest.mark.parametrize("speeds", [(0.0, 1, 1), (1, -2, 1), (1, 1, float("nan")), (1, 1)])
    def test_invalid_speeds(self, speeds):
        with pytest.raises(ValueError):
            YJunction(speeds)

    def test_vertex_coupling_finite(self):
        assert VertexCoupling(-2.5).z == -2.5
        with pytest.raises(ValueError):
            VertexCoupling(float("inf"))


class TestBuildMesh:
    def test_unit_speeds_desk(self, jct111):
        mesh = build_mesh(jct111, 40.0, 0.01)
        assert mesh.nodes_per_edge == (4000, 4000, 4000)
        assert mesh.ndof == 1 + 3 * 3999 == 11998
        assert mesh.vertex_dof_index == 0

    def test_fast_edges(self):
        jct = YJunction((1.0, 2.0, 2.0))
        mesh = build_mesh(jct, 80.0, 0.02)
        assert mesh.nodes_per_edge == (4000, 4000, 4000)

    def test_too_coarse(self, jct111):
        with pytest.raises(ValueError, match="too coarse"):
            build_mesh(jct111, 1.0, 0.5)

    @pytest.mark.parametrize("L,h", [(0.0, 0.1), (-3.0, 0.1), (10.0, 0.0), (10.0, -0.1)])
    def test_nonpositive(self, jct111, L, h):
        with pytest.raises(ValueError):
            build_mesh(jct111, L, h)

    def test_edge_coordinates(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        x0 = mesh.edge_x(0)
        assert x0[0] == -10.0 and x0[-1] == 0.0
        x1 = mesh.edge_x(1)
        assert x1[0] == 0.0 and x1[-1] == 10.0


class TestGraphField:
    def test_dof_round_trip(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        rng = np.random.default_rng(0)
        dof = rng.standard_normal(mesh.ndof)
        f = GraphField.from_dof(mesh, dof)
        assert np.array_equal(f.to_dof(), dof)
        assert f.far_values == (0.0, 0.0, 0.0)

    def test_vertex_shared(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        f = GraphField.zeros(mesh)
        assert f.vertex_value == 0.0
        e = [np.ones(n + 1) for n in mesh.nodes_per_edge]
        e[1][0] = 2.0  # inconsistent vertex sample
        with pytest.raises(ValueError, match="disagree at the vertex"):
            GraphField(mesh, e)

    def test_arithmetic(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        f = exp_field(mesh)
        g = 2.0 * f - f
        assert np.allclose(g.edges[1], f.edges[1])
        with pytest.raises(MeshMismatchError):
            f + exp_field(build_mesh(jct111, 10.0, 0.05))


class TestL2Inner:
    def test_hat_at_vertex(self, jct111):
        mesh = build_mesh(jct111, 40.0, 0.01)
        dof = np.zeros(mesh.ndof)
        dof[mesh.vertex_dof_index] = 1.0
        f = GraphField.from_dof(mesh, dof)
        # trapezoid weight of the single vertex sample is h/2 per edge
        assert l2_inner(f, f) == pytest.approx(0.015, rel=1e-12)

    def test_disjoint_supports(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        n = mesh.nodes_per_edge[0]
        zero = np.zeros(n + 1)
        e2 = zero.copy()
        e2[5] = 1.0
        e3 = zero.copy()
        e3[7] = 2.0
        f = GraphField(mesh, [zero, e2, zero.copy()], copy=False)
        g = GraphField(mesh, [zero.copy(), zero.copy(), e3], copy=False)
        assert l2_inner(f, g) == 0.0

    def test_exponential_closed_form(self, jct111):
        # int exp(-2|x|) over the three edges = 3/2 up to truncation
        mesh = build_mesh(jct111, 40.0, 0.005)
        f = exp_field(mesh)
        assert l2_inner(f, f) == pytest.approx(1.5, rel=1e-4)

    def test_mesh_mismatch(self, jct111):
        f = exp_field(build_mesh(jct111, 10.0, 0.1))
        g = exp_field(build_mesh(jct111, 20.0, 0.1))
        with pytest.raises(MeshMismatchError):
            l2_inner(f, g)

    def test_symmetric_bilinear(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        rng = np.random.default_rng(3)
        f = GraphField.from_dof(mesh, rng.standard_normal(mesh.ndof))
        g = GraphField.from_dof(mesh, rng.standard_normal(mesh.ndof))
        w = GraphField.from_dof(mesh, rng.standard_normal(mesh.ndof))
        assert l2_inner(f, g) == pytest.approx(l2_inner(g, f), rel=1e-14)
        lhs = l2_inner(f + 2.0 * g, w)
        rhs = l2_inner(f, w) + 2.0 * l2_inner(g, w)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-13)


class TestH1ZNorm:
    def test_zero_field(self, jct111):
        mesh = build_mesh(jct111, 10.0, 0.1)
        assert h1z_norm_sq(GraphField.zeros(mesh), -1.0, jct111) == 0.0

    def test_kirchhoff_value(self, jct111):
        mesh = build_mesh(jct111, 40.0, 0.005)
        f = exp_field(mesh)
        # ||f'||^2 + ||f||^2 = 3/2 + 3/2
        assert h1z_norm_sq(f, 0.0, jct111) == pytest.approx(3.0, rel=1e-3)

    def test_attractive_value(self, jct111):
        mesh = build_mesh(jct111, 40.0, 0.005)
        f = exp_field(mesh)
        # beta = 1/9: 3/2 + (10/9)(3/2) - 1 = 13/6
        assert h1z_norm_sq(f, -1.0, jct111) == pytest.approx(13.0 / 6.0, rel=1e-3)

    def test_positive_on_random_fields(self, jct111):
        mesh = build_mesh(jct111, 20.0, 0.05)
        rng = np.random.default_rng(12)
        for z in (-5.0, -2.9, -1.0, 0.0, 2.0, 5.0):
            for _ in range(5):
                f = GraphField.from_dof(mesh, rng.standard_normal(mesh.ndof))
                assert h1z_norm_sq(f, z, jct111) > 0.0

    def test_positive_general_speeds(self):
        jct = YJunction((1.0, 2.0, 2.0))
        mesh = build_mesh(jct, 20.0, 0.05)
        rng = np.random.default_rng(13)
        for z in (-3.0, -1.0, 0.5, 3.0):
            for _ in range(5):
                f = GraphField.from_dof(mesh, rng.standard_normal(mesh.ndof))
                assert h1z_norm_sq(f, z, jct) > 0.0


class TestVertexResiduals:
    def test_arranged_identity(self, jct111):
        cont, flux = vertex_residuals((1.0, 1.0, 1.0), (1.0, -1.0, 0.0), -2.0, jct111)
        assert cont == 0.0
        assert flux == 0.0

    def test_continuity_violation(self, jct111):
        cont, _ = vertex_residuals((1.0, 1.0, 2.0), (0.0, 0.0, 0.0), 0.0, jct111)
        assert cont == 1.0

    def test_speed_weights(self):
        jct = YJunction((1.0, 2.0, 3.0))
        # flux = |-1*1 + 4*1 + 9*1 - z*1| with z = 12
        _, flux = vertex_residuals((1.0, 1.0, 1.0), (1.0, 1.0, 1.0), 12.0, jct)
        assert flux == 0.0

    def test_sampled_profile_continuity_exact(self, jct111):
        mesh = build_mesh(jct111, 20.0, 0.05)
        prof = solve_kink_shift(-1.2, jct111)
        f = sample_profile(prof, mesh)
        cont, _ = field_vertex_residuals(f, -1.2, jct111)
        assert cont == 0.0  # single stored vertex value

    def test_stencil_flux_small(self, jct111):
        mesh = build_mesh(jct111, 20.0, 0.02)
        prof = solve_kink_shift(-1.2, jct111)
        f = sample_profile(prof, mesh)
        _, flux = field_vertex_residuals(f, -1.2, jct111)
        # one-sided stencils resolve the closed-form flux to O(h^2)
        assert flux <= 10.0 * mesh.spacing**2


def test_l2_norm_matches_inner(jct111):
    mesh = build_mesh(jct111, 10.0, 0.1)
    f = exp_field(mesh)
    assert l2_norm(f) == pytest.approx(math.sqrt(l2_inner(f, f)), rel=1e-15)
