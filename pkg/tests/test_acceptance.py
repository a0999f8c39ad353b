"""Acceptance criteria, one test each.  Every test records a PASS/FAIL line
that is printed in the terminal summary (and to stdout when run directly)."""
import json
import os
import time
from pathlib import Path

import numpy as np
import pytest

from gelswell import characteristics as ch
from gelswell import constitutive as cst
from gelswell import hyperbolicity as hyp
from gelswell import solver as sv
from gelswell.cli import main
from gelswell.params import POLYMER, POLYSACCHARIDE

ROOT = Path(__file__).resolve().parents[1]
PARAMS = {"polymer": ROOT / "params" / "polymer.json", "polysaccharide": ROOT / "params" / "polysaccharide.json"}


def report(log, number, ok, title, detail, runtime, limit):
    ok = bool(ok) and runtime < limit
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} ({runtime:.2f} s, limit {limit:g} s)"
    log[number] = line
    print(line)
    return ok


def cli(args, capsys):
    code = main([str(a) for a in args])
    capsys.readouterr()
    return code


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


def bump(eps):
    return {"kind": "cosine", "eps_eta": eps, "eps_u": eps}


def test_criterion_01_polymer_curves(tmp_path, capsys, acceptance_log):
    t0 = time.perf_counter()
    code = cli(["--params", PARAMS["polymer"], "--out", tmp_path, "curves", "--phi-min", 0.01, "--phi-max", 0.99, "--n", 1000], capsys)
    data = read_csv(tmp_path / "curves.csv")
    runtime = time.perf_counter() - t0
    ok = code == 0 and len(data) == 1000 and np.all(data["dG"] < 0)
    detail = f"{np.count_nonzero(data['dG'] < 0)}/{len(data)} rows with dG < 0"
    assert report(acceptance_log, 1, ok, "polymer G' < 0 on [0.01, 0.99]", detail, runtime, 1.0)


def test_criterion_02_polysaccharide_roots(tmp_path, capsys, acceptance_log):
    t0 = time.perf_counter()
    code1 = cli(["--params", PARAMS["polysaccharide"], "--out", tmp_path, "curves", "--n", 1000], capsys)
    code2 = cli(["--params", PARAMS["polysaccharide"], "--out", tmp_path, "roots"], capsys)
    runtime = time.perf_counter() - t0
    dg = read_csv(tmp_path / "curves.csv")["dG"]
    changes = int(np.count_nonzero(np.sign(dg[:-1]) * np.sign(dg[1:]) < 0))
    roots = json.loads((tmp_path / "roots.json").read_text())["phi_critical"]
    residuals = [abs(cst.dG(r, POLYSACCHARIDE)) for r in roots]
    ok = code1 == code2 == 0 and changes >= 2 and len(roots) >= 2 and max(residuals) < 1e-8
    detail = f"{changes} sign changes, phi_c = {[round(r, 10) for r in roots]}, max |dG(phi_c)| = {max(residuals):.1e}"
    assert report(acceptance_log, 2, ok, "polysaccharide critical fractions", detail, runtime, 1.0)


def _random_states(p, n, rng, phi_range):
    phi = rng.uniform(*phi_range, 8 * n)
    g = cst.dG(phi, p)
    phi, g = phi[g < 0][:n], g[g < 0][:n]
    assert len(phi) == n
    return 1 / phi, rng.uniform(-0.95, 0.95, n) * np.sqrt(-g)


def test_criterion_03_eigen_structure(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = {"eig": 0.0, "gram": 0.0, "trace_det": 0.0, "jac": 0.0}
    for p in (POLYMER, POLYSACCHARIDE):
        psi, u = _random_states(p, 1000, rng, (0.05, 0.97))
        a = hyp.jacobian(psi, u, p)
        scale = np.linalg.norm(a, axis=(1, 2))
        lam1, lam2 = hyp.wave_speeds(psi, u, p)
        for k in range(len(psi)):
            e = hyp.eigensystem(psi[k], u[k], p)
            for lam, r in ((e.lambda1, e.R1), (e.lambda2, e.R2)):
                worst["eig"] = max(worst["eig"], np.max(np.abs(a[k] @ r - lam * r)) / (scale[k] * np.linalg.norm(r)))
            gram = np.array([[e.L1 @ e.R1, e.L1 @ e.R2], [e.L2 @ e.R1, e.L2 @ e.R2]])
            worst["gram"] = max(worst["gram"], np.max(np.abs(gram - 2 * np.eye(2))))
        tr = np.abs(np.trace(a, axis1=1, axis2=2) - (lam1 + lam2)) / scale
        det = np.abs(np.linalg.det(a) - lam1 * lam2) / scale**2
        worst["trace_det"] = max(worst["trace_det"], tr.max(), det.max())
        # flux Jacobian by central differences, states inside the F table
        ps = hyp.admissible_psi_star(p)
        table = sv.flux_table(p, ps)
        psi, u = _random_states(p, 1000, rng, (1 / table.hi, 1 / table.lo))
        h = 1e-6
        fd = np.empty((len(psi), 2, 2))
        fd[:, :, 0] = ((sv.flux(psi + h, u, p, ps) - sv.flux(psi - h, u, p, ps)) / (2 * h)).T
        fd[:, :, 1] = ((sv.flux(psi, u + h, p, ps) - sv.flux(psi, u - h, p, ps)) / (2 * h)).T
        a = hyp.jacobian(psi, u, p)
        rel = np.linalg.norm(fd - a, axis=(1, 2)) / np.linalg.norm(a, axis=(1, 2))
        worst["jac"] = max(worst["jac"], rel.max())
    runtime = time.perf_counter() - t0
    ok = worst["eig"] < 1e-10 and worst["gram"] < 1e-10 and worst["trace_det"] < 1e-10 and worst["jac"] < 1e-6
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    assert report(acceptance_log, 3, ok, "eigen-structure identities", detail, runtime, 5.0)


def test_criterion_04_derivative_oracles(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    worst_dg = worst_fp = 0.0
    for p in (POLYMER, POLYSACCHARIDE):
        phi = rng.uniform(0.03, 0.97, 100)
        h = 1e-6 * phi
        fd = (cst.G(phi + h, p) - cst.G(phi - h, p)) / (2 * h)
        exact = cst.dG(phi, p)
        worst_dg = max(worst_dg, np.max(np.abs(fd - exact) / np.abs(exact)))
        ps = hyp.admissible_psi_star(p)
        psi = 1 / rng.uniform(0.05, 0.97, 100)
        h = 1e-5 * psi
        fd = (cst.flux_potential(psi + h, p, ps) - cst.flux_potential(psi - h, p, ps)) / (2 * h)
        exact = cst.flux_potential_derivative(psi, p)
        worst_fp = max(worst_fp, np.max(np.abs(fd - exact) / np.abs(exact)))
    runtime = time.perf_counter() - t0
    ok = worst_dg < 1e-6 and worst_fp < 1e-6
    detail = f"max rel err dG {worst_dg:.1e}, F' {worst_fp:.1e}"
    assert report(acceptance_log, 4, ok, "derivative oracles", detail, runtime, 5.0)


def test_criterion_05_well_balanced(psi_star_polymer, acceptance_log):
    t0 = time.perf_counter()
    rec = sv.run(sv.SimConfig(n=256, t_end=10.0, output_every=1000, profile=bump(0.0)), POLYMER, psi_star_polymer)
    runtime = time.perf_counter() - t0
    se, su = max(rec.diagnostics.sup_eta), max(rec.diagnostics.sup_u)
    ok = rec.termination == "completed" and se < 1e-12 and su < 1e-12
    detail = f"sup|psi - psi*| = {se:.1e}, sup|u| = {su:.1e}, {len(rec.diagnostics.t) - 1} steps"
    assert report(acceptance_log, 5, ok, "equilibrium preserved", detail, runtime, 30.0)


def _interface_ratio(rec):
    dy = 1.0 / rec.config.n
    dt = max(rec.diagnostics.dt)
    return rec.interfaces.residual().max(), dy + dt


def test_criterion_06_conservation_geometry(psi_star_polymer, acceptance_log):
    t0 = time.perf_counter()
    cfg = sv.SimConfig(n=1024, t_end=5.0, output_every=10**6, profile=bump(1e-3))
    fine = sv.run(cfg, POLYMER, psi_star_polymer)
    res, scale = _interface_ratio(fine)
    c = res / scale  # calibrated once, reused below
    rec = sv.run(cfg.with_(n=256), POLYMER, psi_star_polymer)
    runtime = time.perf_counter() - t0
    mass_dev = float(np.abs(np.array(rec.diagnostics.mass) - 1).max())
    res256, scale256 = _interface_ratio(rec)
    ok = mass_dev < 1e-6 and res256 <= c * scale256 and rec.termination == "completed"
    detail = f"max |mass - 1| = {mass_dev:.1e}, interface residual {res256:.2e} <= c(dy+dt) = {c * scale256:.2e} (c = {c:.3e})"
    assert report(acceptance_log, 6, ok, "mass and interface consistency", detail, runtime, 60.0)


def _energy_rate_constant(rec):
    e = np.array(rec.diagnostics.energy)
    dt = np.array(rec.diagnostics.dt[1:])
    return np.max(np.diff(e) / ((1.0 / rec.config.n + dt) * dt))


def test_criterion_07_dissipation(psi_star_polymer, acceptance_log):
    t0 = time.perf_counter()
    cfg = sv.SimConfig(n=256, t_end=5.0, output_every=10**6, profile=bump(1e-3))
    damped = sv.run(cfg, POLYMER.with_(beta_drag=1.0), psi_star_polymer)
    free = sv.run(cfg, POLYMER.with_(beta_drag=0.0), psi_star_polymer)
    fine = sv.run(cfg.with_(n=1024), POLYMER.with_(beta_drag=1.0), psi_star_polymer)
    c = max(_energy_rate_constant(fine), 0.0)
    e = np.array(damped.diagnostics.energy)
    dt = np.array(damped.diagnostics.dt[1:])
    tol = c * (1.0 / cfg.n + dt) * dt + 4 * np.finfo(float).eps * np.abs(e).max()
    runtime = time.perf_counter() - t0
    su_d, su_f = damped.diagnostics.sup_u[-1], free.diagnostics.sup_u[-1]
    ok = su_d < su_f and np.all(np.diff(e) <= tol)
    detail = f"terminal sup|u| {su_d:.2e} (beta=1) vs {su_f:.2e} (beta=0); max energy increment {np.diff(e).max():.1e}, c = {c:.1e}"
    assert report(acceptance_log, 7, ok, "drag dissipates", detail, runtime, 60.0)


def test_criterion_08_lifetime_scaling(tmp_path, capsys, acceptance_log):
    t0 = time.perf_counter()
    cfg = tmp_path / "scaling.json"
    cfg.write_text(json.dumps({"n": 256, "tEnd": 20.0, "outputEvery": 1000, "eps": [1e-2, 1e-3, 1e-4]}))
    code = cli(["--params", PARAMS["polymer"], "--out", tmp_path / "out", "scaling", cfg], capsys)
    runtime = time.perf_counter() - t0
    rows = (tmp_path / "out" / "lifetime.csv").read_text().splitlines()[1:]
    T = np.array([float(r.split(",")[1]) for r in rows])
    fit = json.loads((tmp_path / "out" / "fit.json").read_text())
    corr = fit.get("correlation", float("nan"))
    increasing = bool(np.all(np.diff(T) > 0))
    ok = code == 0 and increasing and corr >= 0.9
    detail = f"T = {[round(float(t), 5) for t in T]}, strictly increasing: {increasing}, correlation {corr:.3f}"
    assert report(acceptance_log, 8, ok, "exit time vs |log eps|", detail, runtime, 600.0)


def test_criterion_09_characteristic_geometry(psi_star_polymer, acceptance_log):
    t0 = time.perf_counter()
    rec = sv.run(sv.SimConfig(n=256, t_end=4.0, output_every=10, profile=bump(1e-2)), POLYMER, psi_star_polymer)
    field = ch.SpeedField(rec)
    n_paths = n_events = 0
    failures = []
    for fam in (1, 2):
        for t in (2.5, 3.9):
            for y in (0.0, 0.25, 0.5, 0.75, 1.0):
                tr = ch.trace_characteristic(rec, fam, (y, t), field, steps_per_unit=1000)
                check = ch.check_reflection_times(tr, field)
                n_paths += 1
                n_events += len(tr.events)
                if not check.ok or len(tr.events) < 2:
                    failures.append((fam, y, t))
    runtime = time.perf_counter() - t0
    ok = not failures
    detail = f"{n_paths} paths, {n_events} reflections, T1 = {1 / field.lambda_max:.4f}, T2 = {1 / field.lambda_min:.4f}, failures {failures}"
    assert report(acceptance_log, 9, ok, "reflection-time inequalities", detail, runtime, 30.0)


def test_criterion_10_determinism(tmp_path, capsys, acceptance_log):
    t0 = time.perf_counter()
    sim = {"n": 64, "tEnd": 1.0, "outputEvery": 10, "profile": bump(1e-3)}
    configs = {
        "sim.json": sim,
        "scaling.json": {"n": 64, "tEnd": 1.0, "eps": [1e-2, 1e-3, 1e-4]},
        "trace.json": dict(sim, tEnd=2.5, anchors=[{"y": 0.5, "t": 2.4, "family": 1}, {"y": 0.1, "t": 2.0, "family": 2}]),
    }
    commands = [
        ["curves"], ["roots"], ["map"], ["simulate", "sim.json"], ["scaling", "scaling.json"], ["trace", "trace.json"],
    ]
    trees = []
    cwd = os.getcwd()
    try:
        for rep in ("a", "b"):
            work = tmp_path / rep
            work.mkdir()
            for name, data in configs.items():
                (work / name).write_text(json.dumps(data))
            os.chdir(work)
            for params in ("polymer", "polysaccharide"):
                for cmd in commands:
                    if params == "polysaccharide" and cmd[0] in ("scaling", "trace"):
                        continue
                    code = cli(["--params", PARAMS[params], "--out", f"out/{params}/{cmd[0]}", *cmd], capsys)
                    assert code == 0, (params, cmd)
            trees.append({str(p.relative_to(work)): p.read_bytes() for p in sorted((work / "out").rglob("*")) if p.is_file()})
    finally:
        os.chdir(cwd)
    runtime = time.perf_counter() - t0
    differing = sorted(k for k in trees[0] if trees[0][k] != trees[1].get(k))
    ok = trees[0].keys() == trees[1].keys() and not differing
    detail = f"{len(trees[0])} files compared, {len(differing)} differ"
    assert report(acceptance_log, 10, ok, "byte-identical reruns", detail, runtime, 600.0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
