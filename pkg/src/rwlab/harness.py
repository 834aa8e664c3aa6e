"""Verification suite: named checks run over the shipped family fixtures.

Each check turns one group of identities into a :class:`ResidualReport` on a
fixture grid.  A fixture that cannot be constructed marks its checks as
blocked; a check whose residuals exceed tolerance is failed.
"""

from __future__ import annotations

import copy
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import families as fam
from .classa import (Grid, GridAnalysis, ResidualReport, analyze, class_a_residuals,
                     eigen_residual, eta_parallel_residuals, minimality_residual)
from .config import build_family, fixture_record
from .errors import InvalidInputError, RWLabError
from .surface import (FD_REL_STEP, _richardson, frame_from_jet, frame_gram, jet,
                      second_fundamental, warp_restriction_check)

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240601
DEFAULT_GRID = 32

ANCHORS = {
    "lemma21": "warped connection = product connection + (ln f)' correction terms",
    "lemma22": "f' = -e1(f) / sinh(theta) along the surface",
    "lemma31": "frame identities for nabla e1, nabla-perp e3, e1(theta) and e2(theta)",
    "prop32": "class A <=> h(e1, e2) = 0 <=> e2(theta) = 0 and nabla-perp_{e2} e4 = 0",
    "cor34": "A_eta T = lambda T with a canonical chart g_c(phi~_u, phi~_v) = 0, d_v E~ = 0",
    "lemma41": "canonical adapted frame, theta = -asinh(1/sqrt(-1 + f^2 E~)) and the h412 formula",
    "eq45": "closed-form second fundamental form of the cylinder family",
    "eq412": "closed-form second fundamental form of the rotational family",
    "thm44": "generated cylinders and spherical-curve surfaces are class A in canonical charts",
    "prop45": "minimal cylinders from the 1/(f sqrt(c3 f^4 + c1^2 + 1)) quadrature",
    "lemma47": "spherical family: principal curvature relations; minimal only if kappa = 0",
    "prop48": "minimal rotational surfaces from the zeta1, zeta2 ODE system",
    "thm49": "minimal class A surfaces are the minimal rotational ones",
    "lemma51": "parallel eta implies class A with constant nonzero theta",
    "thm52": "parallel-eta cylinders and spherical surfaces: constant theta, f V or f R constant",
}
CHECKS = tuple(ANCHORS)

DEFAULT_TOLS = {
    "lemma21": 1e-8, "lemma22": 1e-7, "lemma31": 1e-5, "prop32": 1e-5, "cor34": 1e-5,
    "lemma41": 1e-6, "eq45": 1e-6, "eq412": 1e-6, "thm44": 1e-5, "prop45": 1e-5,
    "lemma47": 1e-5, "prop48": 1e-5, "thm49": 1e-5, "lemma51": 1e-5, "thm52": 1e-6,
}

_GENERAL = ("lemma21", "lemma22", "lemma31", "lemma41")
_CLASS_A = _GENERAL + ("prop32", "cor34", "thm44")

DEFAULT_FIXTURE_CHECKS = {
    "cylinder-exp": _CLASS_A + ("eq45",),
    "cylinder-const": _CLASS_A + ("eq45",),
    "cylinder-cosh": _CLASS_A + ("eq45",),
    "revolution-exp": _CLASS_A + ("eq412",),
    "revolution-const": _CLASS_A + ("eq412",),
    "revolution-cosh": _CLASS_A + ("eq412",),
    "spherical": _CLASS_A + ("lemma47",),
    "spherical-cosh": _CLASS_A + ("lemma47",),
    "minimal-cylinder": _CLASS_A + ("eq45", "prop45"),
    "minimal-revolution": _CLASS_A + ("eq412", "prop48", "thm49"),
    "minimal-spherical": _CLASS_A + ("lemma47", "thm49"),
    "eta-cylinder": _CLASS_A + ("eq45", "lemma51", "thm52"),
    "eta-spherical": _CLASS_A + ("lemma47", "lemma51", "thm52"),
    "helicoid": _GENERAL + ("cor34",),
}
PERTURBED_CHECKS = ("lemma21", "lemma22", "lemma31", "prop32")


@dataclass
class Fixture:
    """A family record, its grid resolution and the checks it exercises."""

    name: str
    record: dict
    checks: tuple
    n: int = DEFAULT_GRID

    def to_dict(self) -> dict:
        return {"name": self.name, "record": self.record, "checks": list(self.checks), "n": self.n}


def default_fixtures(n: int = DEFAULT_GRID, perturbed: bool = False) -> list:
    out = [Fixture(name, fixture_record(name), checks, n) for name, checks in DEFAULT_FIXTURE_CHECKS.items()]
    if perturbed:
        out.append(Fixture("perturbed-cylinder", fixture_record("perturbed-cylinder"), PERTURBED_CHECKS, n))
    return out


@dataclass
class SuiteSpec:
    """Fixtures, the checks to run (None means all) and per-check tolerance overrides.

    A tolerance override replaces every residual threshold of that check.
    """

    fixtures: list = field(default_factory=default_fixtures)
    checks: tuple | None = None
    tols: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    threads: int | None = None

    def __post_init__(self):
        sel = CHECKS if self.checks is None else tuple(self.checks)
        unknown = [c for c in sel if c not in ANCHORS]
        unknown += [c for c in self.tols if c not in ANCHORS]
        if unknown:
            raise InvalidInputError(f"unknown check names {unknown}; expected a subset of {list(CHECKS)}")
        for c, t in self.tols.items():
            if not float(t) > 0:
                raise InvalidInputError(f"tolerance for {c} must be positive, got {t}")
        self.checks = sel

    def coverage(self) -> dict:
        """check -> fixtures exercising it (within the selected checks)."""
        return {c: [fx.name for fx in self.fixtures if c in fx.checks] for c in self.checks}

    def to_dict(self) -> dict:
        return {"fixtures": [fx.to_dict() for fx in self.fixtures], "checks": list(self.checks),
                "tols": dict(self.tols), "seed": self.seed}


@dataclass
class SuiteReport:
    """Ordered per-check results; ``passed`` iff nothing failed or was blocked."""

    spec: SuiteSpec
    results: dict
    timing: dict

    def entries(self):
        for c, lst in self.results.items():
            for e in lst:
                yield c, e

    @property
    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "blocked": 0}
        for _, e in self.entries():
            out[e["status"]] += 1
        return out

    @property
    def passed(self) -> bool:
        c = self.counts
        return c["fail"] == 0 and c["blocked"] == 0

    def check_status(self, check: str) -> str:
        st = {e["status"] for e in self.results.get(check, [])}
        if "fail" in st:
            return "fail"
        if "blocked" in st:
            return "blocked"
        return "pass"

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.spec.seed,
            "passed": self.passed,
            "counts": self.counts,
            "checks": {c: {"anchor": ANCHORS[c], "status": self.check_status(c), "results": lst}
                       for c, lst in self.results.items()},
        }
        if include_timing:
            d["timing"] = dict(self.timing)
        return d

    def summary_lines(self) -> list:
        lines = []
        for c, lst in self.results.items():
            for e in lst:
                worst = ""
                if "report" in e:
                    s = e["report"]["summary"]
                    bad = [k for k, ok in e["report"]["verdicts"].items() if not ok] or list(s)
                    if bad and s[bad[0]]["max"] is not None:
                        worst = f" {bad[0]}={s[bad[0]]['max']:.2e}"
                elif "error" in e:
                    worst = f" ({e['error']})"
                lines.append(f"{e['status'].upper():7s} {c:8s} {e['fixture']}{worst}")
        c = self.counts
        lines.append(f"{'PASS' if self.passed else 'FAIL'}: {c['pass']} passed, {c['fail']} failed, "
                     f"{c['blocked']} blocked")
        return lines


# -- per-fixture context -------------------------------------------------------

class Context:
    """Patch, grid and lazily computed grid analysis for one fixture."""

    def __init__(self, fixture: Fixture, seed: int):
        self.fixture = fixture
        self.built = build_family(fixture.record)
        self.patch = self.built.patch
        self.grid = Grid.over(self.patch.domain, fixture.n)
        self.seed = seed
        self._analysis = None

    @property
    def analysis(self) -> GridAnalysis:
        if self._analysis is None:
            self._analysis = analyze(self.patch, self.grid)
        return self._analysis

    def rng(self):
        return np.random.default_rng([self.seed, zlib.crc32(self.fixture.name.encode())])

    def mesh(self):
        return self.analysis.u, self.analysis.v


def _report(ctx: Context, name, residuals, tol, tols=None, flags=()) -> ResidualReport:
    ga = ctx.analysis
    shaped = {k: np.broadcast_to(np.asarray(v, float), ga.u.shape) for k, v in residuals.items()}
    return ResidualReport(name, ga.u, ga.v, shaped, tol, ga.failed.copy(), list(flags), list(ga.errors),
                          dict(tols or {}))


def _merge(name, tol, *reports, tols=None) -> ResidualReport:
    first = reports[0]
    res, flags, all_tols = {}, [], {}
    failed = np.zeros(first.u.shape, dtype=bool)
    for r in reports:
        res.update(r.residuals)
        flags += [f for f in r.flags if f not in flags]
        failed |= r.failed
        all_tols.update(r.tols)
    all_tols.update(tols or {})
    return ResidualReport(name, first.u, first.v, res, tol, failed, flags, list(first.errors), all_tols)


def _canonical_conditions(patch, U, V) -> dict:
    j = jet(patch, U, V)
    pu, pv, puv = j.pu[..., 1:], j.pv[..., 1:], j.puv[..., 1:]
    return {"canonical_uv": np.abs(np.sum(pu * pv, -1)), "canonical_dv_E": np.abs(2 * np.sum(pu * puv, -1))}


# -- checks --------------------------------------------------------------------

def check_lemma21(ctx: Context, tol: float) -> ResidualReport:
    from .ambient import covariant_derivative, covariant_derivative_split

    U, V = ctx.mesh()
    amb = ctx.patch.ambient
    p = ctx.patch.position(U, V)
    rng = ctx.rng()
    x, dx, d = (rng.standard_normal(U.shape + (4,)) for _ in range(3))
    a = covariant_derivative(amb, p, x, dx, d)
    b = covariant_derivative_split(amb, p, x, dx, d)
    g = amb.metric_matrix(p)
    dg = amb.metric_derivative(p)
    gam = amb.christoffel(p)
    # d_mu g_{nu lam} - Gamma^s_{mu nu} g_{s lam} - Gamma^s_{mu lam} g_{nu s}
    compat = (dg - np.einsum("...smn,...sl->...mnl", gam, g) - np.einsum("...sml,...ns->...mnl", gam, g))
    sym = np.abs(gam - np.swapaxes(gam, -1, -2))
    # torsion-free on coordinate fields: nabla_X Y - nabla_Y X for constant-component X, Y
    tors = amb.contract(p, x, d, gam) - amb.contract(p, d, x, gam)
    return _report(ctx, "lemma21", {
        "split_vs_coordinate": np.max(np.abs(a - b), axis=-1),
        "metric_compatibility": np.max(np.abs(compat), axis=(-3, -2, -1)),
        "christoffel_symmetry": np.max(sym, axis=(-3, -2, -1)),
        "torsion": np.max(np.abs(tors), axis=-1),
    }, tol)


def check_lemma22(ctx: Context, tol: float) -> ResidualReport:
    U, V = ctx.mesh()
    return _report(ctx, "lemma22", {"warp_restriction": warp_restriction_check(ctx.patch, U, V)}, tol)


def lemma31_residuals(d) -> dict:
    """The six frame identities as residual fields, from one FundamentalData."""
    th, lf, h = d.theta, d.log_df, d.h
    coth, tanh = 1.0 / np.tanh(th), np.tanh(th)
    return {
        "a_nabla_e1_e1": np.abs(d.omega12[..., 0] - h[..., 0, 0, 1] * coth),
        "b_nabla_e2_e1": np.abs(d.omega12[..., 1] - (lf / np.sinh(th) + h[..., 0, 1, 1] * coth)),
        "c_nabla_perp_e1_e3": np.abs(d.n34[..., 0] + h[..., 1, 0, 0] * tanh),
        "d_nabla_perp_e2_e3": np.abs(d.n34[..., 1] + h[..., 1, 0, 1] * tanh),
        "e_e1_theta": np.abs(d.dtheta[..., 0] - lf * np.cosh(th) - h[..., 0, 0, 0]),
        "f_e2_theta": np.abs(d.dtheta[..., 1] - h[..., 0, 0, 1]),
    }


def lemma31_check(patch, grid: Grid, tol: float = DEFAULT_TOLS["lemma31"], analysis=None) -> ResidualReport:
    """Six residuals: numerically differentiated frame quantities against their closed forms."""
    ga = analysis if analysis is not None else analyze(patch, grid)
    return ResidualReport("lemma31", ga.u, ga.v, lemma31_residuals(ga.data), tol, ga.failed.copy(),
                          [], list(ga.errors))


def check_lemma31(ctx: Context, tol: float) -> ResidualReport:
    return lemma31_check(ctx.patch, ctx.grid, tol, ctx.analysis)


def check_prop32(ctx: Context, tol: float) -> ResidualReport:
    ga = ctx.analysis
    ca = class_a_residuals(ctx.patch, ctx.grid, tol, ga)
    e3 = eigen_residual(ctx.patch, ctx.grid, "e3", tol, ga)
    e4 = eigen_residual(ctx.patch, ctx.grid, "e4", tol, ga)
    d = ga.data
    # g~(nabla_perp e4, e3) = -g~(nabla_perp e3, e4) since g~(e3, e4) = 0
    ident = _report(ctx, "", {"n43_plus_n34": np.max(np.abs(d.n43 + d.n34), axis=-1)}, tol)
    return _merge("prop32", tol, ca, e3, e4, ident)


def check_cor34(ctx: Context, tol: float) -> ResidualReport:
    U, V = ctx.mesh()
    eta = eigen_residual(ctx.patch, ctx.grid, "eta", tol, ctx.analysis)
    canon = _report(ctx, "", _canonical_conditions(ctx.patch, U, V), tol)
    return _merge("cor34", tol, eta, canon)


def check_lemma41(ctx: Context, tol: float) -> ResidualReport:
    patch = ctx.patch
    U, V = ctx.mesh()
    j = jet(patch, U, V)
    fc = frame_from_jet(patch, j, "canonical")
    fp = frame_from_jet(patch, j, "projection")
    amb = patch.ambient
    gram = frame_gram(patch, fc, j.p)
    dev = np.max(np.abs(gram - np.diag([1.0, 1.0, -1.0, 1.0])), axis=(-2, -1))
    dt = np.zeros(4)
    dt[0] = 1.0
    split = np.sinh(fc.theta)[..., None] * fc.e1 + np.cosh(fc.theta)[..., None] * fc.e3
    f = amb.warping.value(j.p[..., 0])
    Et = np.sum(j.pu[..., 1:] ** 2, -1)
    Gt = np.sum(j.pv[..., 1:] ** 2, -1)
    theta_formula = -np.arcsinh(1.0 / np.sqrt(-1.0 + f * f * Et))
    gam = amb.christoffel(j.p)
    hc = second_fundamental(patch, j, fc, gam)
    hp = second_fundamental(patch, j, fp, gam)
    cross = np.cross(j.pu[..., 1:], j.pv[..., 1:])
    N = patch.normal_sign * cross / np.linalg.norm(cross, axis=-1, keepdims=True)
    E, G = -1.0 + f * f * Et, f * f * Gt
    h412 = f / np.sqrt(E * G) * np.sum(j.puv[..., 1:] * N, -1)
    res = {
        "frame_gram": dev,
        "dt_decomposition": np.max(np.abs(split - dt), axis=-1),
        "theta_formula": np.abs(fc.theta - theta_formula),
        "route_theta": np.abs(fc.theta - fp.theta),
        "route_h": np.max(np.abs(hc - hp), axis=(-3, -2, -1)),
        "h412_formula": np.abs(hc[..., 1, 0, 1] - h412),
        "sinh_theta_negative": np.maximum(np.sinh(fc.theta), 0.0),
    }
    tols = {"frame_gram": 1e-9, "dt_decomposition": 1e-8, "theta_formula": 1e-8, "route_theta": 1e-8}
    return _report(ctx, "lemma41", res, tol, {k: min(v, tol) for k, v in tols.items()})


def _closed_form(ctx: Context, name: str, tol: float) -> ResidualReport:
    U, V = ctx.mesh()
    closed = ctx.patch.closed_form_h(U, V)
    h = ctx.analysis.data.h
    res = {}
    for key in ("h311", "h312", "h322", "h411", "h412", "h422"):
        a, i, jj = int(key[1]) - 3, int(key[2]) - 1, int(key[3]) - 1
        res[key] = np.abs(h[..., a, i, jj] - closed[key])
    return _report(ctx, name, res, tol)


def check_eq45(ctx: Context, tol: float) -> ResidualReport:
    if not isinstance(getattr(ctx.patch, "family_spec", None), fam.CylinderFamilySpec):
        raise InvalidInputError("eq45 applies to cylinder fixtures")
    return _closed_form(ctx, "eq45", tol)


def check_eq412(ctx: Context, tol: float) -> ResidualReport:
    if not isinstance(getattr(ctx.patch, "family_spec", None), fam.RevolutionFamilySpec):
        raise InvalidInputError("eq412 applies to rotational fixtures")
    return _closed_form(ctx, "eq412", tol)


def check_thm44(ctx: Context, tol: float) -> ResidualReport:
    U, V = ctx.mesh()
    ca = class_a_residuals(ctx.patch, ctx.grid, tol, ctx.analysis)
    extra = _canonical_conditions(ctx.patch, U, V)
    tols = {}
    spec = ctx.built.spec
    if isinstance(spec, fam.SphericalFamilySpec):
        data = ctx.patch.spherical_data
        f = spec.warping.value(U)
        R = spec.R.value(U)
        extra["sinh_theta_formula"] = np.abs(np.sinh(ctx.analysis.data.theta) + 1.0 / np.sqrt(-1 + f * f * R * R))
        a, t, n, _, _, _ = data.v_state(V)
        M = np.stack([a, t, n], axis=-2)
        extra["sphere_frame"] = np.max(np.abs(M @ np.swapaxes(M, -1, -2) - np.eye(3)), axis=(-2, -1))
        tols = {"sinh_theta_formula": min(1e-7, tol), "sphere_frame": min(1e-8, tol)}
    return _merge("thm44", tol, ca, _report(ctx, "", extra, tol), tols=tols)


def check_prop45(ctx: Context, tol: float) -> ResidualReport:
    spec = ctx.built.spec
    if not (isinstance(spec, fam.CylinderFamilySpec) and "c3" in getattr(spec, "params", {})):
        raise InvalidInputError("prop45 applies to minimal-cylinder fixtures")
    U, _ = ctx.mesh()
    m = minimality_residual(ctx.patch, ctx.grid, tol, ctx.analysis)
    ode = _report(ctx, "", {"ode_residual": fam.minimal_cylinder_ode_residual(spec, U)}, tol,
                  {"ode_residual": min(1e-6, tol)})
    return _merge("prop45", tol, m, ode)


def check_lemma47(ctx: Context, tol: float) -> ResidualReport:
    spec = getattr(ctx.patch, "family_spec", None)
    if not isinstance(spec, fam.SphericalFamilySpec):
        raise InvalidInputError("lemma47 applies to spherical fixtures")
    U, V = ctx.mesh()
    d = ctx.analysis.data
    f = spec.warping.value(U)
    R = spec.R.value(U)
    k1, k2 = fam.base_surface_principals(ctx.patch, U, V)
    rel418 = np.abs(d.h[..., 1, 0, 0] + d.h[..., 1, 1, 1] - (f * R * R * k1 / (-1 + f * f * R * R) + k2 / f))
    h = FD_REL_STEP * np.maximum(1.0, np.abs(U))

    def dk2(s):
        return (fam.base_surface_principals(ctx.patch, U + s, V)[1]
                - fam.base_surface_principals(ctx.patch, U - s, V)[1]) / (2 * s)

    _, phi2, _, tau = ctx.patch.spherical_data.components(U, V)
    w = spec.phi1.d1(V) - phi2
    rel417 = np.abs(_richardson(dk2(h), dk2(h / 2)) / R - np.sin(tau) / w * (k2 - k1))
    res = {"principal_relation": rel417, "h4_trace_relation": rel418}
    tols = {}
    if ctx.built.kind == "spherical-from-revolution":
        rec = copy.deepcopy(ctx.fixture.record)
        if float(rec.get("kappa", 0.0)) == 0.0:
            H0 = minimality_residual(ctx.patch, ctx.grid, tol, ctx.analysis).residuals["H_norm"]
            rec["kappa"] = 1.0
            bent = build_family(rec).patch
            H1 = minimality_residual(bent, ctx.grid, tol).residuals["H_norm"]
            res["H_kappa0"] = H0
            # minimality must break once kappa != 0: shortfall of max|H| below 1e-3
            res["kappa1_H_shortfall"] = np.full(U.shape, max(0.0, 1e-3 - float(np.nanmax(H1))))
            tols["kappa1_H_shortfall"] = 1e-300
    return _report(ctx, "lemma47", res, tol, tols)


def check_prop48(ctx: Context, tol: float) -> ResidualReport:
    spec = ctx.built.spec
    if not (isinstance(spec, fam.RevolutionFamilySpec) and hasattr(spec, "trajectory")):
        raise InvalidInputError("prop48 applies to minimal-revolution fixtures")
    flags = [f"integration stopped early: {spec.exit_reason}"] if spec.exited else []
    rep = minimality_residual(ctx.patch, ctx.grid, tol, ctx.analysis)
    rep.name, rep.flags = "prop48", flags
    return rep


def check_thm49(ctx: Context, tol: float) -> ResidualReport:
    ca = class_a_residuals(ctx.patch, ctx.grid, tol, ctx.analysis)
    m = minimality_residual(ctx.patch, ctx.grid, tol, ctx.analysis)
    return _merge("thm49", tol, ca, m)


def check_lemma51(ctx: Context, tol: float) -> ResidualReport:
    ep = eta_parallel_residuals(ctx.patch, ctx.grid, tol, ctx.analysis)
    ca = class_a_residuals(ctx.patch, ctx.grid, tol, ctx.analysis)
    return _merge("lemma51", tol, ep, ca)


def check_thm52(ctx: Context, tol: float) -> ResidualReport:
    U, _ = ctx.mesh()
    ep = eta_parallel_residuals(ctx.patch, ctx.grid, tol, ctx.analysis)
    d = ctx.analysis.data
    th = d.theta
    extra = {"theta_spread": np.abs(th - np.mean(th)), "h411": np.abs(d.h[..., 1, 0, 0])}
    spec, fs = ctx.built.spec, ctx.patch.family_spec
    if not isinstance(spec, fam.EtaParallelSpec):
        raise InvalidInputError("thm52 applies to parallel-eta fixtures")
    f = ctx.patch.ambient.warping.value(U)
    if spec.variant == "cylinder":
        extra["fV_constant"] = np.abs(f * fs.speed(U) - np.hypot(spec.c1, spec.c2))
    else:
        extra["fR_constant"] = np.abs(f * fs.R.value(U) - spec.c)
    return _merge("thm52", tol, ep, _report(ctx, "", extra, tol), tols={"theta_spread": min(1e-7, tol)})


CHECK_FUNCS = {
    "lemma21": check_lemma21, "lemma22": check_lemma22, "lemma31": check_lemma31,
    "prop32": check_prop32, "cor34": check_cor34, "lemma41": check_lemma41,
    "eq45": check_eq45, "eq412": check_eq412, "thm44": check_thm44, "prop45": check_prop45,
    "lemma47": check_lemma47, "prop48": check_prop48, "thm49": check_thm49,
    "lemma51": check_lemma51, "thm52": check_thm52,
}


def _apply_override(rep: ResidualReport, tol: float) -> ResidualReport:
    rep.tol = tol
    rep.tols = {k: v for k, v in rep.tols.items() if v < 1e-100}
    return rep


def _run_fixture(fixture: Fixture, spec: SuiteSpec):
    todo = [c for c in spec.checks if c in fixture.checks]
    out, timing = {}, {}
    if not todo:
        return out, timing
    t0 = time.perf_counter()
    try:
        ctx = Context(fixture, spec.seed)
    except RWLabError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        for c in todo:
            out[c] = {"fixture": fixture.name, "status": "blocked", "error": msg}
        timing[f"{fixture.name}/build"] = time.perf_counter() - t0
        return out, timing
    timing[f"{fixture.name}/build"] = time.perf_counter() - t0
    for c in todo:
        t1 = time.perf_counter()
        tol = float(spec.tols.get(c, DEFAULT_TOLS[c]))
        try:
            rep = CHECK_FUNCS[c](ctx, tol)
        except RWLabError as exc:
            out[c] = {"fixture": fixture.name, "status": "blocked", "error": f"{type(exc).__name__}: {exc}"}
        else:
            if c in spec.tols:
                rep = _apply_override(rep, tol)
            out[c] = {"fixture": fixture.name, "status": "pass" if rep.verdict else "fail",
                      "report": rep.to_dict()}
        timing[f"{fixture.name}/{c}"] = time.perf_counter() - t1
    return out, timing


def thread_count(requested: int | None = None) -> int:
    env = os.environ.get("RWLAB_THREADS")
    n = requested if requested is not None else (int(env) if env else (os.cpu_count() or 1))
    if env:
        n = min(n, int(env))
    return max(1, n)


def run_suite(spec: SuiteSpec | None = None) -> SuiteReport:
    """Run every selected check on every fixture that lists it; merge in a fixed order."""
    spec = spec or SuiteSpec()
    t0 = time.perf_counter()
    workers = min(thread_count(spec.threads), max(1, len(spec.fixtures)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda fx: _run_fixture(fx, spec), spec.fixtures))
    else:
        parts = [_run_fixture(fx, spec) for fx in spec.fixtures]
    results = {c: [] for c in spec.checks}
    timing = {}
    for out, tm in parts:
        timing.update(tm)
        for c, entry in out.items():
            results[c].append(entry)
    results = {c: lst for c, lst in results.items() if lst}
    timing["total"] = time.perf_counter() - t0
    return SuiteReport(spec, results, timing)
