"""The eight acceptance criteria, one test each, at their stated tolerances.

Each test prints (and records for the terminal summary) a single PASS/FAIL line.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
from scipy.integrate import quad

from rwlab import profiles as pr
from rwlab.ambient import AmbientSpec, covariant_derivative, covariant_derivative_split
from rwlab.classa import Grid, analyze, class_a_residuals, eta_parallel_residuals, minimality_residual
from rwlab.cli import main
from rwlab.config import build_family, fixture_record
from rwlab.families import cylinder_h, revolution_h, sphere_curve_from_curvature
from rwlab.harness import SuiteSpec, default_fixtures, run_suite
from rwlab.integrators import simpson

from conftest import ACCEPTANCE_LINES, WARPINGS, random_points

N = 32
COEFFS = ("h311", "h312", "h322", "h411", "h412", "h422")


def report(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def build(name, **overrides):
    rec = fixture_record(name)
    rec.update(overrides)
    return build_family(rec)


def grid32(patch):
    return Grid.over(patch.domain, N)


def orders_within_factor_two(errors):
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    return all(8.0 <= r <= 32.0 for r in ratios), ratios


def test_criterion_1_connection():
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst = 0.0
    for kind, (w, t_range) in sorted(WARPINGS.items()):
        for c in (-1, 0, 1):
            spec = AmbientSpec(w, c)
            p = random_points(rng, 1000, t_range, c)
            x, dx, d = rng.normal(size=(3, 1000, 4))
            a = covariant_derivative(spec, p, x, dx, d)
            b = covariant_derivative_split(spec, p, x, dx, d)
            worst = max(worst, float(np.max(np.abs(a - b))))
    elapsed = time.perf_counter() - t0
    report(1, "connection matches warped-product decomposition", worst < 1e-8 and elapsed < 5.0,
           f"max residual {worst:.2e} over 15 x 1000 points, {elapsed:.2f} s")


def test_criterion_2_closed_form_tables():
    t0 = time.perf_counter()
    worst = {}
    for name, closed in [("cylinder-exp", cylinder_h), ("cylinder-const", cylinder_h),
                         ("cylinder-cosh", cylinder_h), ("revolution-exp", revolution_h),
                         ("revolution-const", revolution_h), ("revolution-cosh", revolution_h)]:
        b = build(name)
        g = grid32(b.patch)
        U, V = g.mesh()
        d = analyze(b.patch, g).data
        ref = closed(b.spec, U, V)
        worst[name] = max(float(np.max(np.abs(d.coefficient(k) - ref[k]))) for k in COEFFS)
    elapsed = time.perf_counter() - t0
    m = max(worst.values())
    report(2, "numeric second fundamental form matches cylinder and revolution tables",
           m < 1e-6 and elapsed < 10.0, f"max abs diff {m:.2e} on 6 fixtures at 32x32, {elapsed:.2f} s")


def test_criterion_3_frame_identities():
    rep = run_suite(SuiteSpec(default_fixtures(N), checks=["lemma31"]))
    entries = rep.results["lemma31"]
    worst = max(max(s["max"] for s in e["report"]["summary"].values()) for e in entries)
    ok = rep.passed and len(entries) >= 5 and worst < 1e-5
    report(3, "six frame identities on every family fixture", ok,
           f"{len(entries)} fixtures, max residual {worst:.2e}")


def test_criterion_4_class_a():
    names = ["cylinder-exp", "cylinder-const", "cylinder-cosh", "spherical", "spherical-cosh",
             "minimal-cylinder", "eta-cylinder", "eta-spherical"]
    worst = 0.0
    verdicts = []
    for name in names:
        patch = build(name).patch
        r = class_a_residuals(patch, grid32(patch), tol=1e-5)
        verdicts.append(r.verdict)
        worst = max(worst, max(s["max"] for s in r.summary().values()))
    patch = build("perturbed-cylinder").patch
    pert = class_a_residuals(patch, grid32(patch), tol=1e-5)
    pert_max = max(s["max"] for s in pert.summary().values())
    ok = all(verdicts) and not pert.verdict and pert_max > 1e-3
    report(4, "class A certification with perturbed negative control", ok,
           f"{len(names)} patches max {worst:.2e}, perturbed {pert_max:.2e}")


def test_criterion_5_minimality():
    vals = {}
    for name in ("minimal-cylinder", "minimal-revolution"):
        patch = build(name).patch
        vals[name] = minimality_residual(patch, grid32(patch)).max("H_norm")
    bent = build("minimal-spherical", kappa=1.0).patch
    bent_h = minimality_residual(bent, grid32(bent)).max("H_norm")
    ok = all(v < 1e-5 for v in vals.values()) and bent_h > 1e-3
    report(5, "minimal solutions and the bent spherical control", ok,
           ", ".join(f"{k} {v:.2e}" for k, v in vals.items()) + f", kappa=1 gives {bent_h:.2e}")


def test_criterion_6_parallel_eta():
    parts = []
    ok = True
    for name in ("eta-cylinder", "eta-spherical"):
        patch = build(name).patch
        g = grid32(patch)
        ga = analyze(patch, g)
        eta = eta_parallel_residuals(patch, g, tol=1e-6, analysis=ga)
        theta = ga.data.theta
        spread = float(np.max(np.abs(theta - theta.mean())))
        ca = class_a_residuals(patch, g, analysis=ga)
        eta_max = max(s["max"] for s in eta.summary().values())
        ok &= eta.verdict and spread < 1e-7 and ca.verdict
        parts.append(f"{name} eta {eta_max:.2e} theta spread {spread:.1e} classA {ca.verdict}")
    report(6, "parallel eta families", ok, "; ".join(parts))


def rotation_oracle(kappa, v):
    """Constant-curvature sphere curve: rotation of alpha0 about (kappa alpha0 + n0)."""
    w = math.sqrt(1 + kappa * kappa)
    axis = np.array([kappa, 0.0, 1.0]) / w
    a0 = np.array([1.0, 0.0, 0.0])
    ang = w * v
    return (a0 * math.cos(ang) + np.cross(axis, a0) * math.sin(ang)
            + axis * (axis @ a0) * (1 - math.cos(ang)))


def test_criterion_7_convergence_orders():
    kappa, v_end = 0.8, 2.0
    exact = rotation_oracle(kappa, v_end)
    rk_err = []
    for h in (0.1, 0.05, 0.025, 0.0125):
        curve = sphere_curve_from_curvature(pr.constant(kappa), v1=v_end, step=h)
        rk_err.append(float(np.linalg.norm(curve.trajectory.ys[-1, 0:3] - exact)))
    rk_ok, rk_ratios = orders_within_factor_two(rk_err)

    f = pr.exp(1.0, 1.0, 0.0)
    c1, c3 = 0.5, -math.exp(-5.0)

    def integrand(x):
        fx = f.value(x)
        return 1.0 / (fx * np.sqrt(c3 * fx ** 4 + c1 * c1 + 1.0))

    ref = quad(lambda x: float(integrand(x)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)[0]
    si_err = [abs(simpson(integrand, 0.0, 1.0, n) - ref) for n in (4, 8, 16, 32)]
    si_ok, si_ratios = orders_within_factor_two(si_err)
    si_ok &= si_err[-1] > 1e-13  # still above the reference's own accuracy
    report(7, "fourth-order convergence of RK4 and Simpson", rk_ok and si_ok,
           "RK4 ratios " + "/".join(f"{r:.1f}" for r in rk_ratios)
           + ", Simpson ratios " + "/".join(f"{r:.1f}" for r in si_ratios))


def test_criterion_8_determinism(tmp_path):
    outs, times = [], []
    for i in range(2):
        path = tmp_path / f"verify_{i}.json"
        t0 = time.perf_counter()
        code = main(["verify", "--out", str(path)])
        times.append(time.perf_counter() - t0)
        outs.append((code, path.read_bytes()))
    same = outs[0][1] == outs[1][1]
    passed = json.loads(outs[0][1])["passed"]
    ok = same and passed and outs[0][0] == 0 and max(times) < 60.0
    report(8, "byte-identical verify reports", ok,
           f"identical={same}, suite passed={passed}, wall times {times[0]:.1f} s and {times[1]:.1f} s")
