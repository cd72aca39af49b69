"""Command-line front end: profiles, spectra, Z-sweeps, evolution runs,
resolvent checks, and the self-check table.

All commands accept the uniform flag set (speeds, junction type, coupling
strength or grid, mesh, time stepping, output directory) plus a plain
``key=value`` config file via ``--config``; explicit flags override file
values. Outputs are deterministic: CSV with '.' decimals, ',' separators
and 17 significant digits, JSON with sorted keys, and no timestamps.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 check failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import operators as operators_mod
from .dynamics import (
    EvolveConfig,
    Formulation,
    GrowthFitError,
    SeedMode,
    State,
    auto_window,
    evolve,
    growth_rate,
    random_symmetric_field,
    relax_static,
)
from .graph import GraphField, JunctionType, YJunction, build_mesh, l2_norm
from .operators import (
    SingularMatchingError,
    assemble_free,
    assemble_linearized,
    assemble_linearized_from_field,
    matching_system,
    resolvent_free_apply,
)
from .profiles import (
    ProfileRangeError,
    eval_antikink,
    eval_kink,
    sample_profile,
    solve_antikink_shift,
    solve_kink_shift,
)
from .spectra import (
    SpectralError,
    certify_criterion,
    lowest_eigenpairs,
    spectral_report,
)
from . import selfcheck as selfcheck_mod

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CHECK_FAILED = 4


class ConfigError(ValueError):
    pass


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, comment: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, (int, float, np.floating)) else str(v) for v in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _parse_speeds(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"--speeds wants three comma-separated values, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise ConfigError(f"bad --speeds value {text!r}") from exc


def _parse_zgrid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"--z-grid wants lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad --z-grid value {text!r}") from exc
    if n < 2:
        raise ConfigError("--z-grid needs at least 2 points")
    return np.linspace(lo, hi, n)


_CONFIG_KEYS = {
    "speeds", "type", "z", "z_grid", "family", "length", "spacing",
    "dt", "tfinal", "eps", "seed_mode", "out", "jobs", "lam", "oracle",
    "record_every",
}


def _load_config(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--speeds", help="edge speeds c1,c2,c3 (default 1,1,1)")
    parser.add_argument("--type", dest="jtype", choices=["I", "II"], help="junction type")
    parser.add_argument("--z", type=float, help="vertex coupling strength")
    parser.add_argument("--z-grid", dest="z_grid", help="grid lo:hi:n of coupling strengths")
    parser.add_argument("--family", choices=["kink", "antikink", "free"], help="profile family")
    parser.add_argument("--length", type=float, help="edge truncation length L")
    parser.add_argument("--spacing", type=float, help="mesh spacing h")
    parser.add_argument("--dt", type=float, help="time step")
    parser.add_argument("--tfinal", type=float, help="final time")
    parser.add_argument("--eps", type=float, help="perturbation amplitude")
    parser.add_argument("--seed-mode", dest="seed_mode", choices=["ground", "random"],
                        help="perturbation seed")
    parser.add_argument("--out", help="output directory (created if missing)")
    parser.add_argument("--config", help="key=value config file; flags override")
    parser.add_argument("--jobs", type=int, help="worker pool size for sweeps")
    parser.add_argument("--record-every", dest="record_every", type=int, help=argparse.SUPPRESS)


def _merged(args: argparse.Namespace) -> dict:
    cfg = {}
    if args.config:
        cfg = _load_config(args.config)
    merged = {"_defaulted": set()}

    def pick(key, flag_value, parse=lambda s: s, default=None):
        if flag_value is not None:
            merged[key] = flag_value
        elif key in cfg:
            merged[key] = parse(cfg[key])
        else:
            merged[key] = default
            merged["_defaulted"].add(key)

    pick("speeds", args.speeds)
    pick("jtype", args.jtype, default="I")
    if "type" in cfg and args.jtype is None:
        merged["jtype"] = cfg["type"]
    pick("z", args.z, float)
    pick("z_grid", args.z_grid)
    pick("family", args.family, default="kink")
    pick("length", args.length, float, 40.0)
    pick("spacing", args.spacing, float, 0.01)
    pick("dt", args.dt, float)
    pick("tfinal", args.tfinal, float)
    pick("eps", args.eps, float, 1e-6)
    pick("seed_mode", args.seed_mode, default="ground")
    pick("out", args.out, default="out")
    pick("jobs", args.jobs, int)
    pick("lam", getattr(args, "lam", None), float, 1.0)
    pick("record_every", args.record_every, int, 10)
    if "oracle" in cfg and getattr(args, "oracle", None) is None:
        merged["oracle"] = cfg["oracle"].lower() in ("1", "true", "yes")
    else:
        merged["oracle"] = getattr(args, "oracle", None)
    if merged["speeds"] is None:
        merged["speeds"] = "1,1,1"
    merged["speeds"] = _parse_speeds(merged["speeds"]) if isinstance(merged["speeds"], str) else merged["speeds"]
    return merged


def _junction(merged: dict) -> YJunction:
    try:
        return YJunction(merged["speeds"], JunctionType(merged["jtype"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _mesh_for(merged: dict, junction: YJunction):
    try:
        return build_mesh(junction, merged["length"], merged["spacing"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _outdir(merged: dict) -> Path:
    out = Path(merged["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _edge_x_for_output(mesh, junction, edge):
    x = mesh.edge_x(edge)
    if junction.kind == JunctionType.TYPE_II and edge == 0:
        return -x[::-1]
    return x


def _mesh_comment(merged: dict, extra: str = "") -> str:
    c = merged["speeds"]
    base = (
        f"sgjunction v{__version__}, speeds={c[0]},{c[1]},{c[2]}, type={merged['jtype']}, "
        f"L={merged['length']}, h={merged['spacing']}"
    )
    return base + (", " + extra if extra else "")


def _meta(merged: dict) -> dict:
    return {
        "version": __version__,
        "speeds": list(merged["speeds"]),
        "type": merged["jtype"],
        "L": merged["length"],
        "h": merged["spacing"],
        "dt": merged["dt"],
    }


# ---------------------------------------------------------------------------
# commands


def _cmd_profile(merged: dict) -> int:
    junction = _junction(merged)
    mesh = _mesh_for(merged, junction)
    z = merged["z"]
    if z is None:
        raise ConfigError("profile needs --z")
    family = merged["family"]
    if family == "kink":
        profile = solve_kink_shift(z, junction)
        shifts = list(profile.shifts)
        kind = profile.kind.value
        evaluate = lambda j, x: eval_kink(profile, j, x)
    elif family == "antikink":
        if junction.speeds != (1.0, 1.0, 1.0):
            raise ConfigError("the kink/anti-kink family is defined for unit speeds only")
        profile = solve_antikink_shift(z)
        shifts = [profile.shift] * 3
        kind = "antikink"
        evaluate = lambda j, x: eval_antikink(profile, j, x)
    else:
        raise ConfigError("profile works with --family kink or antikink")

    out = _outdir(merged)
    values, derivs = [], []
    for j in range(3):
        x = mesh.edge_x(j)
        phi, dphi, _ = evaluate(j, x)
        values.append(phi)
        derivs.append(dphi)
        x_out = _edge_x_for_output(mesh, junction, j)
        phi_out = phi[::-1] if (junction.kind == JunctionType.TYPE_II and j == 0) else phi
        dphi_out = dphi[::-1] if (junction.kind == JunctionType.TYPE_II and j == 0) else dphi
        _write_csv(
            out / f"profile_edge{j}.csv",
            _mesh_comment(merged, f"Z={_fmt(z)}, family={family}, edge={j}"),
            ["x", "phi", "dphi"],
            zip(x_out, phi_out, dphi_out),
        )
    vals0 = [values[0][-1], values[1][0], values[2][0]]
    dervs = [derivs[0][-1], derivs[1][0], derivs[2][0]]
    from .graph import vertex_residuals

    cont, flux = vertex_residuals(vals0, dervs, z, junction)
    _write_json(
        out / "profile_summary.json",
        {
            "meta": _meta(merged),
            "family": family,
            "z": z,
            "shifts": shifts,
            "kind": kind,
            "vertex_value": vals0[0],
            "continuity_residual": cont,
            "flux_residual": flux,
        },
    )
    print(f"profile: Z={z} kind={kind} a1={shifts[0]:.6g} flux_residual={flux:.3e} -> {out}")
    return EXIT_OK


def _report_row(z, report, cert):
    neg = report.negative_eigenvalues
    mu1 = neg[0][0] if neg else report.lowest_eigenvalue
    return [
        z,
        report.shift if report.shift is not None else math.nan,
        report.profile_kind or report.family,
        mu1,
        report.second_eigenvalue,
        report.morse_index,
        report.kernel_gap,
        cert.predicted_growth_rate if cert.predicted_growth_rate is not None else math.nan,
        report.oracle_mu0 if report.oracle_mu0 is not None else math.nan,
    ]


def _sweep_worker(payload):
    (z, speeds, jtype, length, spacing, family, oracle) = payload
    junction = YJunction(speeds, JunctionType(jtype))
    mesh = build_mesh(junction, length, spacing)
    try:
        report = spectral_report(z, junction, mesh, family, oracle=oracle)
        cert = certify_criterion(report)
        return ("ok", _report_row(z, report, cert), cert.passed, cert.diagnosis)
    except Exception as exc:  # noqa: BLE001 - per-point failures must not kill the sweep
        return ("error", z, False, f"{type(exc).__name__}: {exc}")


_SWEEP_HEADER = [
    "Z", "a1", "kind", "mu1", "mu2", "morse_index", "kernel_gap",
    "predicted_growth_rate", "oracle_mu1",
]


def _cmd_sweep(merged: dict) -> int:
    junction = _junction(merged)
    _mesh_for(merged, junction)  # validates mesh parameters
    if merged["z_grid"] is None:
        raise ConfigError("sweep-z needs --z-grid lo:hi:n")
    grid = _parse_zgrid(merged["z_grid"]) if isinstance(merged["z_grid"], str) else merged["z_grid"]
    family = merged["family"]
    if family == "kink":
        limit = junction.speed_sum
        if not all(-limit < z < 0.0 for z in grid):
            raise ConfigError(f"kink sweep grid must lie strictly inside ({-limit}, 0)")
    elif family == "antikink":
        if not all(-1.0 < z < 0.0 for z in grid):
            raise ConfigError("anti-kink sweep grid must lie strictly inside (-1, 0)")
    oracle = merged["oracle"]
    oracle = True if oracle is None else bool(oracle)
    payloads = [
        (float(z), merged["speeds"], merged["jtype"], merged["length"], merged["spacing"], family, oracle)
        for z in grid
    ]
    jobs = merged["jobs"] or min(len(payloads), os.cpu_count() or 1)
    if jobs <= 1:
        results = [_sweep_worker(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_worker, payloads))

    out = _outdir(merged)
    rows, summary, n_errors = [], [], 0
    for payload, (status, data, passed, diagnosis) in zip(payloads, results):
        if status == "ok":
            rows.append(data)
            summary.append({"z": payload[0], "passed": passed, "diagnosis": diagnosis})
        else:
            n_errors += 1
            summary.append({"z": payload[0], "passed": False, "diagnosis": diagnosis})
    _write_csv(
        out / "sweep.csv",
        _mesh_comment(merged, f"family={family}, points={len(grid)}"),
        _SWEEP_HEADER,
        rows,
    )
    n_pass = sum(1 for s in summary if s["passed"])
    _write_json(
        out / "sweep_summary.json",
        {
            "meta": _meta(merged),
            "family": family,
            "n_points": len(grid),
            "n_pass": n_pass,
            "n_fail": len(grid) - n_pass - n_errors,
            "n_error": n_errors,
            "points": summary,
        },
    )
    print(f"sweep-z: {n_pass}/{len(grid)} certified, {n_errors} errors -> {out}")
    return EXIT_NUMERICAL if n_errors else EXIT_OK


def _cmd_spectrum(merged: dict, dump_operators: bool) -> int:
    junction = _junction(merged)
    mesh = _mesh_for(merged, junction)
    if merged["z"] is None:
        raise ConfigError("spectrum needs --z")
    z = merged["z"]
    family = merged["family"]
    oracle = merged["oracle"]
    oracle = True if oracle is None else bool(oracle)
    report = spectral_report(z, junction, mesh, family, oracle=oracle)
    cert = certify_criterion(report)
    out = _outdir(merged)
    _write_json(
        out / "spectrum.json",
        {
            "meta": _meta(merged),
            "family": family,
            "z": z,
            "morse_index": report.morse_index,
            "negative_eigenvalues": [mu for mu, _ in report.negative_eigenvalues],
            "lowest_eigenvalue": report.lowest_eigenvalue,
            "second_eigenvalue": report.second_eigenvalue,
            "kernel_gap": report.kernel_gap,
            "essential_edge_estimate": report.essential_edge_estimate,
            "oracle_mu1": report.oracle_mu0,
            "shift": report.shift,
            "profile_kind": report.profile_kind,
            "certified": cert.passed,
            "predicted_growth_rate": cert.predicted_growth_rate,
            "diagnosis": cert.diagnosis,
            "mesh": {"L": report.mesh_params[0], "h": report.mesh_params[1]},
        },
    )
    if dump_operators:
        from scipy.io import mmwrite

        if family == "free":
            opr = assemble_free(mesh, junction, z)
        elif family == "kink":
            opr = assemble_linearized(mesh, junction, z, solve_kink_shift(z, junction))
        else:
            opr = assemble_linearized(mesh, junction, z, solve_antikink_shift(z))
        mmwrite(out / "stiffness.mtx", opr.stiffness)
        mmwrite(out / "mass.mtx", opr.mass)
    verdict = "PASS" if cert.passed else "FAIL"
    print(f"spectrum: Z={z} family={family} morse={report.morse_index} {verdict} ({cert.diagnosis}) -> {out}")
    return EXIT_OK


def _cmd_evolve(merged: dict) -> int:
    junction = _junction(merged)
    mesh = _mesh_for(merged, junction)
    if merged["z"] is None:
        raise ConfigError("evolve needs --z")
    z = merged["z"]
    family = merged["family"]
    h = merged["spacing"]
    dt = merged["dt"] if merged["dt"] is not None else h / 4.0
    t_cap = 0.8 * merged["length"] / junction.max_speed
    t_final = merged["tfinal"] if merged["tfinal"] is not None else t_cap
    t_final = min(t_final, t_cap)
    eps = merged["eps"]
    seed_mode = SeedMode.GROUND_EIGENVECTOR if merged["seed_mode"] == "ground" else SeedMode.RANDOM_SYMMETRIC

    opr0 = assemble_free(mesh, junction, z)
    if family == "kink":
        profile = solve_kink_shift(z, junction)
        background = relax_static(sample_profile(profile, mesh), opr0)
        opr_dyn = assemble_linearized_from_field(mesh, junction, z, background)
        formulation = Formulation.FULL
    elif family == "antikink":
        profile = solve_antikink_shift(z)
        background = sample_profile(profile, mesh)
        opr_dyn = assemble_linearized(mesh, junction, z, profile)
        formulation = Formulation.PERTURBATION_ANTIKINK
    else:
        raise ConfigError("evolve works with --family kink or antikink")

    pairs = lowest_eigenpairs(opr_dyn, 1, lumped_mass=True)
    mu1, psi = pairs[0]
    rate_seed = math.sqrt(-mu1) if mu1 < 0 else 0.0
    if seed_mode == SeedMode.RANDOM_SYMMETRIC:
        psi = random_symmetric_field(opr0, seed=0)
        vel = GraphField.zeros(mesh)
    else:
        vel = (eps * rate_seed) * psi
    if formulation == Formulation.FULL:
        state0 = State(u=background + eps * psi, v=vel)
    else:
        state0 = State(u=eps * psi, v=vel)

    # spectral prediction from the consistent-mass path
    report = spectral_report(z, junction, mesh, family, oracle=False)
    cert = certify_criterion(report)
    predicted = cert.predicted_growth_rate

    cfg = EvolveConfig(
        dt=dt,
        t_final=t_final,
        record_every=merged["record_every"],
        formulation=formulation,
        perturbation_eps=eps,
        seed_mode=seed_mode,
    )
    record = evolve(state0, cfg, opr0, background=background)
    out = _outdir(merged)
    _write_csv(
        out / "evolution.csv",
        _mesh_comment(merged, f"Z={_fmt(z)}, family={family}, dt={_fmt(dt)}, eps={_fmt(eps)}"),
        ["t", "deviation_norm", "energy", "vertex_value"],
        zip(record.times, record.deviation_norm, record.energy, record.vertex_value),
    )
    eps_norm = eps * l2_norm(psi) * math.sqrt(1.0 + rate_seed**2)
    fit = {
        "meta": _meta(merged) | {"dt": dt, "eps": eps, "z": z, "family": family},
        "s": None,
        "r_squared": None,
        "window": None,
        "predicted_s": predicted,
        "rel_diff": None,
    }
    try:
        window = auto_window(record, eps_norm)
        s_fit, r2 = growth_rate(record, window)
        fit.update(
            s=s_fit,
            r_squared=r2,
            window=list(window),
            rel_diff=(abs(s_fit - predicted) / predicted if predicted else None),
        )
    except GrowthFitError as exc:
        fit["error"] = str(exc)
    _write_json(out / "evolution_fit.json", fit)
    shown = "n/a" if fit["s"] is None else f"{fit['s']:.6g}"
    print(f"evolve: Z={z} family={family} fitted s={shown} predicted={predicted} -> {out}")
    return EXIT_OK


def _cmd_resolvent_check(merged: dict) -> int:
    junction = _junction(merged)
    z = merged["z"] if merged["z"] is not None else -1.3
    lam = merged["lam"]
    h = merged["spacing"]
    length = merged["length"]

    # the convergence premise is that the resolvent tail at the truncated
    # ends sits below the discretization error, which needs lambda*L large
    length = max(length, 30.0 / lam)

    rng = np.random.default_rng(20240801)
    worst = 0.0
    for _ in range(100):
        speeds = tuple(rng.uniform(0.5, 2.0, 3))
        jr = YJunction(speeds)
        zz = rng.uniform(-3.0, 3.0)
        ll = rng.uniform(0.1, 5.0)
        _, det = matching_system(ll, zz, jr)
        formula = (sum(speeds) + zz / ll) / (speeds[0] * speeds[1] * speeds[2]) ** 2
        worst = max(worst, abs(det - formula))

    def bump(d):
        s = (d - 6.0) / 3.0
        out = np.zeros_like(d)
        m = np.abs(s) < 1.0
        out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
        return out

    residuals = []
    for spacing in (2.0 * h, h):
        mesh = build_mesh(junction, length, spacing)
        edges = [bump(mesh.edge_distance(j)) for j in range(3)]
        edges[0] = edges[0][::-1]
        u = GraphField(mesh, edges, copy=False)
        phi = resolvent_free_apply(u, lam, z, junction)
        opr = assemble_free(mesh, junction, z)
        r = (opr.stiffness + lam**2 * opr.mass) @ phi.to_dof() - opr.mass @ u.to_dof()
        w = opr.lumped_mass()
        residuals.append(math.sqrt(float(np.sum(r * r / w))))
    order = math.log2(residuals[0] / residuals[1])

    out = _outdir(merged)
    result = {
        "meta": _meta(merged),
        "detm_max_abs_diff": worst,
        "apply_residuals": residuals,
        "observed_order": order,
        "z": z,
        "lambda": lam,
    }
    _write_json(out / "resolvent_check.json", result)
    ok = worst <= 1e-12 and 1.7 <= order <= 2.3
    print(
        f"resolvent-check: detM max diff={worst:.2e}, observed order={order:.3f} "
        f"-> {'PASS' if ok else 'FAIL'} ({out})"
    )
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _cmd_selfcheck(merged: dict, corrupt: bool) -> int:
    if corrupt:
        operators_mod._FAULT_FLIP_VERTEX_SIGN = True
    # reduced resolution unless the caller asked for something specific
    length = 30.0 if "length" in merged["_defaulted"] else merged["length"]
    spacing = 0.02 if "spacing" in merged["_defaulted"] else merged["spacing"]
    try:
        rows, all_ok = selfcheck_mod.run_checks(length=length, spacing=spacing)
    finally:
        operators_mod._FAULT_FLIP_VERTEX_SIGN = False
    name_w = max(len(r[0]) for r in rows) + 2
    print(f"selfcheck at L={length}, h={spacing}")
    print(f"{'check'.ljust(name_w)}{'expected'.ljust(28)}{'observed'.ljust(28)}verdict")
    for name, expected, observed, ok in rows:
        verdict = "PASS" if ok else "FAIL"
        print(f"{name.ljust(name_w)}{expected.ljust(28)}{observed.ljust(28)}{verdict}")
    n_bad = sum(1 for r in rows if not r[3])
    print(f"selfcheck: {len(rows) - n_bad}/{len(rows)} checks passed")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


# accept negative-number-like values such as "-2.5:-0.8:20" or "-1,2,2"
_NEGATIVE_VALUE = re.compile(r"^-\d+(\.\d*)?([:,eE+-].*)?$")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sgjunction",
        description="Stationary sine-Gordon kinks on a Y-junction: profiles, spectra, evolution.",
    )
    parser._negative_number_matcher = _NEGATIVE_VALUE
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("profile", "solve a stationary profile and write per-edge CSVs"),
        ("spectrum", "spectral report and certification for one coupling strength"),
        ("sweep-z", "profile + spectrum + certification over a grid of couplings"),
        ("evolve", "seeded nonlinear evolution with growth-rate fit"),
        ("resolvent-check", "determinant identity and apply-then-operate convergence"),
        ("selfcheck", "run the acceptance checks at reduced resolution"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p._negative_number_matcher = _NEGATIVE_VALUE
        _add_common(p)
        if name == "spectrum":
            p.add_argument("--dump-operators", action="store_true",
                           help="write stiffness/mass in matrix-market format")
        if name in ("spectrum", "sweep-z"):
            p.add_argument("--oracle", dest="oracle", action="store_true", default=None,
                           help="include the shooting oracle (default)")
            p.add_argument("--no-oracle", dest="oracle", action="store_false",
                           help="skip the shooting oracle")
        if name == "resolvent-check":
            p.add_argument("--lambda", dest="lam", type=float, help="spectral parameter (default 1.0)")
        if name == "selfcheck":
            p.add_argument("--corrupt-vertex-sign", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        merged = _merged(args)
        if args.command == "profile":
            return _cmd_profile(merged)
        if args.command == "spectrum":
            return _cmd_spectrum(merged, args.dump_operators)
        if args.command == "sweep-z":
            return _cmd_sweep(merged)
        if args.command == "evolve":
            return _cmd_evolve(merged)
        if args.command == "resolvent-check":
            return _cmd_resolvent_check(merged)
        if args.command == "selfcheck":
            return _cmd_selfcheck(merged, args.corrupt_vertex_sign)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ProfileRangeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SpectralError, GrowthFitError, SingularMatchingError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
