"""Acceptance suite at desk scale: h = 0.01, L = 40, unit speeds unless a
case needs a longer box (stated inline). One test per criterion; each
appends a verdict line that pytest prints in its terminal summary.
"""

import cmath
import json
import math

import numpy as np
import pytest

from conftest import DESK_H, DESK_L, Z_AK_SMOOTH, Z_SMOOTH
from sgjunction import cli
from sgjunction.graph import (
    GraphField,
    YJunction,
    build_mesh,
    field_vertex_residuals,
    vertex_residuals,
)
from sgjunction.operators import (
    assemble_free,
    assemble_linearized,
    assemble_linearized_from_field,
    matching_system,
    quadratic_form,
    resolvent_free_apply,
    theta_to_z,
)
from sgjunction.profiles import (
    eval_antikink,
    eval_kink,
    sample_profile,
    sample_profile_derivative,
    solve_antikink_shift,
    solve_kink_shift,
)
from sgjunction.spectra import inertia, lowest_eigenpairs, shooting_eigenvalue
from sgjunction.dynamics import (
    EvolveConfig,
    Formulation,
    State,
    auto_window,
    evolve,
    growth_rate,
    relax_static,
    step_leapfrog,
)

GAP_FLOOR = 10.0 * DESK_H * DESK_H

# Growth-rate cases: the bump kink's mode is slow (s ~ 0.17), so its run
# needs a longer box for the window to span three e-foldings before the
# reflection-safe time cap; seeds are scaled so the linear window ends
# inside the cap in every case.
GROWTH_CASES = {
    ("kink", -2.5): dict(length=DESK_L, eps=1e-6),
    ("kink", Z_SMOOTH): dict(length=DESK_L, eps=1e-6),
    ("kink", -1.0 / 6.0): dict(length=56.0, eps=2e-5),
    ("antikink", -0.9): dict(length=DESK_L, eps=2e-5),
    ("antikink", Z_AK_SMOOTH): dict(length=DESK_L, eps=1e-6),
    ("antikink", -0.25): dict(length=DESK_L, eps=1e-6),
}


def _solve_profile(family, z, junction):
    if family == "kink":
        return solve_kink_shift(z, junction)
    return solve_antikink_shift(z)


def _run_growth_case(jct, family, z, length, eps):
    mesh = build_mesh(jct, length, DESK_H)
    opr0 = assemble_free(mesh, jct, z)
    profile = _solve_profile(family, z, jct)
    if family == "kink":
        background = relax_static(sample_profile(profile, mesh), opr0)
        opr_dyn = assemble_linearized_from_field(mesh, jct, z, background)
        formulation = Formulation.FULL
    else:
        background = sample_profile(profile, mesh)
        opr_dyn = assemble_linearized(mesh, jct, z, profile)
        formulation = Formulation.PERTURBATION_ANTIKINK

    opr_consistent = assemble_linearized(mesh, jct, z, profile)
    s_pred = math.sqrt(-lowest_eigenpairs(opr_consistent, 1)[0][0])

    pairs = lowest_eigenpairs(opr_dyn, 2, lumped_mass=True)
    (mu1, psi1), (mu2, psi2) = pairs
    s_seed = math.sqrt(-mu1)
    if formulation == Formulation.FULL:
        state0 = State(u=background + eps * psi1, v=(eps * s_seed) * psi1)
    else:
        state0 = State(u=eps * psi1, v=(eps * s_seed) * psi1)
    record = evolve(
        state0,
        EvolveConfig(dt=DESK_H / 4.0, t_final=0.8 * length, record_every=8,
                     formulation=formulation),
        opr0,
        background=background,
    )
    window = auto_window(record, eps * math.sqrt(1.0 + s_seed**2))
    s_fit, r2 = growth_rate(record, window)
    return dict(
        mesh=mesh, opr0=opr0, background=background, formulation=formulation,
        psi2=psi2, mu2=mu2, eps=eps, s_pred=s_pred, s_fit=s_fit, r2=r2,
        window=window, efolds=(window[1] - window[0]) * s_fit,
    )


@pytest.fixture(scope="session")
def growth_results(jct111):
    return {
        key: _run_growth_case(jct111, key[0], key[1], **params)
        for key, params in GROWTH_CASES.items()
    }


def test_c01_free_operator_eigenvalue(jct111, mesh_desk, acceptance_log):
    worst = 0.0
    for z in (-0.5, -1.0, -2.0, -3.0):
        opr = assemble_free(mesh_desk, jct111, z)
        mu1 = lowest_eigenpairs(opr, 1)[0][0]
        exact = -(z / 3.0) ** 2
        worst = max(worst, abs(mu1 - exact) / abs(exact))
        assert abs(mu1 - exact) / abs(exact) <= 1e-3
    # fast edges decay slowly: the truncation rule L = 40 max(c) applies
    jct = YJunction((1.0, 2.0, 2.0))
    mesh = build_mesh(jct, 80.0, 0.02)
    mu1 = lowest_eigenpairs(assemble_free(mesh, jct, -1.0), 1)[0][0]
    rel = abs(mu1 + 0.04) / 0.04
    worst = max(worst, rel)
    assert rel <= 1e-3
    acceptance_log(f"[C01] free-operator eigenvalue vs -Z^2/(sum c)^2: worst rel {worst:.2e} <= 1e-3 PASS")


def test_c02_free_operator_repulsive_inertia(jct111, mesh_desk, acceptance_log):
    counts = [inertia(assemble_free(mesh_desk, jct111, z), 0.0) for z in (0.0, 0.5, 2.0)]
    assert counts == [0, 0, 0]
    acceptance_log(f"[C02] repulsive free operator inertia(0) = {counts} == 0 PASS")


def test_c03_kink_shift_solver(jct111, acceptance_log):
    smooth = solve_kink_shift(Z_SMOOTH, jct111)
    assert abs(smooth.shifts[0]) <= 1e-12
    tail = solve_kink_shift(-2.5, jct111)
    bump = solve_kink_shift(-1.0 / 6.0, jct111)
    assert tail.shifts[0] > 0.0 and tail.kind.value == "tail"
    assert bump.shifts[0] < 0.0 and bump.kind.value == "bump"
    acceptance_log(
        f"[C03] kink shifts: |a1(smooth)|={abs(smooth.shifts[0]):.1e} <= 1e-12, "
        f"a1(-5/2)={tail.shifts[0]:+.3f}>0, a1(-1/6)={bump.shifts[0]:+.3f}<0 PASS"
    )


def test_c04_vertex_conditions(jct111, mesh_coarse, acceptance_log):
    cases = []
    for z in (-2.5, Z_SMOOTH, -1.0 / 6.0):
        cases.append((jct111, solve_kink_shift(z, jct111), z, eval_kink))
    jct123 = YJunction((1.0, 2.0, 3.0))
    cases.append((jct123, solve_kink_shift(-2.0, jct123), -2.0, eval_kink))
    for z in (-0.9, Z_AK_SMOOTH, -0.25):
        cases.append((jct111, solve_antikink_shift(z), z, eval_antikink))
    worst_flux = 0.0
    for junction, profile, z, evaluate in cases:
        triples = [evaluate(profile, j, 0.0) for j in range(3)]
        cont, flux = vertex_residuals(
            [t[0] for t in triples], [t[1] for t in triples], z, junction
        )
        assert cont <= 1e-12
        assert flux <= 1e-12
        worst_flux = max(worst_flux, flux)
        if junction is jct111 and evaluate is eval_kink:
            sampled = sample_profile(profile, mesh_coarse)
            c_res, _ = field_vertex_residuals(sampled, z, junction)
            assert c_res == 0.0  # shared vertex unknown
    acceptance_log(
        f"[C04] vertex conditions: continuity exact, worst flux residual {worst_flux:.1e} <= 1e-12 PASS"
    )


def test_c05_kink_morse_sweep(jct111, mesh_desk, acceptance_log):
    for z in np.linspace(-2.9, -0.1, 20):
        prof = solve_kink_shift(z, jct111)
        opr = assemble_linearized(mesh_desk, jct111, z, prof)
        assert inertia(opr, 0.0) == 1, f"Z={z}"
        assert inertia(opr, GAP_FLOOR) - inertia(opr, -GAP_FLOOR) == 0, f"Z={z}"
    jct = YJunction((1.0, 2.0, 3.0))
    mesh = build_mesh(jct, DESK_L, DESK_H)
    for z in np.linspace(-5.7, -0.3, 10):
        prof = solve_kink_shift(z, jct)
        opr = assemble_linearized(mesh, jct, z, prof)
        assert inertia(opr, 0.0) == 1, f"c=(1,2,3) Z={z}"
        assert inertia(opr, GAP_FLOOR) - inertia(opr, -GAP_FLOOR) == 0, f"c=(1,2,3) Z={z}"
    acceptance_log(
        "[C05] kink Morse sweep: n = 1 and no eigenvalue in (-10h^2, 10h^2) at 20+10 points PASS"
    )


def test_c06_antikink_morse_sweep(jct111, mesh_desk, acceptance_log):
    for z in np.linspace(-0.95, -0.05, 10):
        prof = solve_antikink_shift(z)
        opr = assemble_linearized(mesh_desk, jct111, z, prof)
        assert inertia(opr, 0.0) == 1, f"Z={z}"
        assert inertia(opr, GAP_FLOOR) - inertia(opr, -GAP_FLOOR) == 0, f"Z={z}"
    acceptance_log(
        "[C06] anti-kink Morse sweep: n = 1 and trivial kernel at 10 points PASS"
    )


def test_c07_quadratic_form_identity(jct111, mesh_desk, acceptance_log):
    worst = 0.0
    for z in (-0.9, Z_AK_SMOOTH, -0.25):
        prof = solve_antikink_shift(z)
        opr = assemble_linearized(mesh_desk, jct111, z, prof)
        q = quadratic_form(opr, sample_profile_derivative(prof, mesh_desk))
        _, dphi0, d2phi0 = eval_antikink(prof, 0, 0.0)
        exact = z * dphi0**2 - dphi0 * d2phi0
        rel = abs(q - exact) / abs(exact)
        worst = max(worst, rel)
        assert rel <= 1e-3
        if z == Z_AK_SMOOTH:
            assert exact == pytest.approx(-8.0 / math.pi, rel=1e-12)
    acceptance_log(
        f"[C07] quadratic-form boundary identity: worst rel err {worst:.2e} <= 1e-3 PASS"
    )


def test_c08_resolvent_oracle(jct111, acceptance_log):
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        speeds = tuple(rng.uniform(0.5, 2.0, 3))
        jct = YJunction(speeds)
        z = rng.uniform(-3.0, 3.0)
        lam = rng.uniform(0.1, 5.0)
        _, det = matching_system(lam, z, jct)
        formula = (sum(speeds) + z / lam) / (speeds[0] * speeds[1] * speeds[2]) ** 2
        worst = max(worst, abs(det - formula))
    assert worst <= 1e-12

    lam, z = 1.0, -1.3
    residuals = []
    for h in (0.02, 0.01):
        mesh = build_mesh(jct111, DESK_L, h)
        edges = []
        for j in range(3):
            s = (mesh.edge_distance(j) - 6.0) / 3.0
            v = np.zeros_like(s)
            m = np.abs(s) < 1.0
            v[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
            edges.append(v[::-1] if j == 0 else v)
        u = GraphField(mesh, edges, copy=False)
        phi = resolvent_free_apply(u, lam, z, jct111)
        opr = assemble_free(mesh, jct111, z)
        r = (opr.stiffness + lam**2 * opr.mass) @ phi.to_dof() - opr.mass @ u.to_dof()
        w = opr.lumped_mass()
        residuals.append(math.sqrt(float(np.sum(r * r / w))))
    order = math.log2(residuals[0] / residuals[1])
    assert 1.8 <= order <= 2.2
    acceptance_log(
        f"[C08] resolvent: det identity worst {worst:.1e} <= 1e-12, "
        f"apply-then-operate order {order:.3f} in [1.8, 2.2] PASS"
    )


def test_c09_oracle_agreement(jct111, mesh_desk, acceptance_log):
    tol = max(1e-6, 5.0 * DESK_H * DESK_H)
    worst = 0.0
    for family, z in [
        ("kink", -2.5), ("kink", Z_SMOOTH), ("kink", -1.0 / 6.0),
        ("antikink", -0.9), ("antikink", Z_AK_SMOOTH), ("antikink", -0.25),
    ]:
        prof = _solve_profile(family, z, jct111)
        opr = assemble_linearized(mesh_desk, jct111, z, prof)
        mu_fem = lowest_eigenpairs(opr, 1)[0][0]
        mu_shoot = shooting_eigenvalue(z, jct111, prof, mesh_desk)
        diff = abs(mu_fem - mu_shoot)
        worst = max(worst, diff)
        assert diff <= tol, f"{family} Z={z}"
    acceptance_log(
        f"[C09] shooting vs inertia bisection on 6 pairs: worst |diff| {worst:.1e} <= {tol:.1e} PASS"
    )


def test_c10_extension_parameter_map(jct111, acceptance_log):
    value = theta_to_z(math.pi / 2.0, jct111)
    assert abs(value + 3.0 * math.sqrt(2.0)) <= 1e-12
    rng = np.random.default_rng(7)
    worst = 0.0
    count = 0
    while count < 1000:
        th = rng.uniform(0.0, 2.0 * math.pi)
        if abs(th - math.pi) < 0.05:
            continue
        num = cmath.exp(1j * math.pi / 4.0) + cmath.exp(1j * (th - math.pi / 4.0))
        den = 1.0 + cmath.exp(1j * th)
        worst = max(worst, abs((-jct111.speed_sum * num / den).imag))
        theta_to_z(th, jct111)  # raises beyond 1e-12
        count += 1
    assert worst <= 1e-12
    acceptance_log(
        f"[C10] extension map: Z(pi/2) = -3*sqrt(2) to {abs(value + 3.0 * math.sqrt(2.0)):.1e}, "
        f"worst |Im| {worst:.1e} <= 1e-12 on 1000 samples PASS"
    )


def test_c11_energy_conservation_and_reversibility(jct111, mesh_desk, acceptance_log):
    # a kink the discretization can hold at rest for the full window: the
    # slow bump-kink equilibrium, Newton-refined to the rounding floor
    z = -1.0 / 6.0
    opr0 = assemble_free(mesh_desk, jct111, z)
    background = relax_static(sample_profile(solve_kink_shift(z, jct111), mesh_desk), opr0)
    rec = evolve(
        State(u=background, v=GraphField.zeros(mesh_desk)),
        EvolveConfig(dt=DESK_H / 4.0, t_final=30.0, record_every=100),
        opr0,
        background=background,
    )
    drift = float(np.max(np.abs(rec.energy - rec.energy[0])) / abs(rec.energy[0]))
    assert drift <= 1e-6

    state = State(u=0.3 * background, v=GraphField.zeros(mesh_desk))
    u0, v0 = state.u.to_dof(), state.v.to_dof()
    for _ in range(1000):
        state = step_leapfrog(state, DESK_H / 4.0, opr0)
    for _ in range(1000):
        state = step_leapfrog(state, -DESK_H / 4.0, opr0)
    err = max(
        float(np.max(np.abs(state.u.to_dof() - u0))),
        float(np.max(np.abs(state.v.to_dof() - v0))),
    )
    assert err <= 1e-12
    acceptance_log(
        f"[C11] energy drift {drift:.1e} <= 1e-6 over t in [0,30]; "
        f"reversibility {err:.1e} <= 1e-12 over 1000 steps PASS"
    )


def test_c12_growth_rate_match(growth_results, acceptance_log):
    for (family, z), res in growth_results.items():
        rel = abs(res["s_fit"] - res["s_pred"]) / res["s_pred"]
        assert rel <= 0.05, f"{family} Z={z}: rel {rel}"
        assert res["r2"] >= 0.999, f"{family} Z={z}: r2 {res['r2']}"
        assert res["efolds"] >= 3.0, f"{family} Z={z}: efolds {res['efolds']}"
        acceptance_log(
            f"[C12] {family} Z={z:+.4f}: s={res['s_fit']:.5f} vs sqrt(-mu1)={res['s_pred']:.5f} "
            f"(rel {rel:.2%}), r2={res['r2']:.6f}, {res['efolds']:.2f} e-foldings PASS"
        )


def test_c13_stable_mode_control(growth_results, acceptance_log):
    for family, z in (("kink", Z_SMOOTH), ("antikink", Z_AK_SMOOTH)):
        res = growth_results[(family, z)]
        eps = res["eps"]
        if res["formulation"] == Formulation.FULL:
            state0 = State(u=res["background"] + eps * res["psi2"],
                           v=GraphField.zeros(res["mesh"]))
        else:
            state0 = State(u=eps * res["psi2"], v=GraphField.zeros(res["mesh"]))
        record = evolve(
            state0,
            EvolveConfig(dt=DESK_H / 4.0, t_final=res["window"][1], record_every=8,
                         formulation=res["formulation"]),
            res["opr0"],
            background=res["background"],
        )
        s_ctl, _ = growth_rate(record, res["window"])
        cap = 0.02 * res["s_pred"]
        assert abs(s_ctl) <= cap, f"{family}: {s_ctl} vs cap {cap}"
        acceptance_log(
            f"[C13] {family} second-mode control: |s|={abs(s_ctl):.2e} <= 0.02*sqrt(-mu1)={cap:.2e} PASS"
        )


def test_c14_essential_spectrum_edge(jct111, acceptance_log):
    z = Z_AK_SMOOTH
    prof = solve_antikink_shift(z)
    counts = []
    for L in (20.0, 40.0, 80.0):
        mesh = build_mesh(jct111, L, DESK_H)
        opr = assemble_linearized(mesh, jct111, z, prof)
        counts.append(inertia(opr, 0.9))
    assert counts == [1, 1, 1]
    acceptance_log(f"[C14] eigenvalues of the anti-kink operator below 0.9: {counts} == 1 for L in (20,40,80) PASS")


def test_c15_sweep_determinism(tmp_path, acceptance_log):
    args = [
        "sweep-z", "--z-grid", "-2.5:-0.5:5", "--family", "kink",
        "--length", "20", "--spacing", "0.05", "--jobs", "2",
    ]
    outs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert cli.main(args + ["--out", str(out)]) == 0
        outs.append(((out / "sweep.csv").read_bytes(), (out / "sweep_summary.json").read_bytes()))
    assert outs[0] == outs[1]
    rows = outs[0][0].decode().splitlines()[2:]
    assert len(rows) == 5
    summary = json.loads(outs[0][1])
    assert summary["n_pass"] == 5
    acceptance_log("[C15] repeated sweep-z runs are byte-identical (5-point grid, 2 workers) PASS")
