"""Residual predicates on parameter grids: class A, minimality, parallel eta, eigenvector condition.

Verdicts are statements about the sampled grid only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, RWLabError
from .surface import FundamentalData, ImmersionPatch, fundamental_forms

TOL_VERDICT = 1e-5


@dataclass(frozen=True)
class Grid:
    """n_u x n_v sample points in [u0, u1] x [v0, v1].

    ``centered`` grids use cell midpoints (strictly interior, as stencils need);
    otherwise the inclusive node lattice.
    """

    u0: float
    u1: float
    n_u: int
    v0: float
    v1: float
    n_v: int
    centered: bool = True

    def __post_init__(self):
        if self.n_u < 2 or self.n_v < 2:
            raise InvalidInputError("grid counts must be at least 2")
        if not (self.u1 > self.u0 and self.v1 > self.v0):
            raise InvalidInputError("grid rectangle is empty")

    @classmethod
    def over(cls, domain, n_u: int = 32, n_v: int | None = None, centered: bool = True) -> "Grid":
        return cls(domain.u0, domain.u1, n_u, domain.v0, domain.v1, n_v or n_u, centered)

    def axes(self):
        if self.centered:
            u = self.u0 + (np.arange(self.n_u) + 0.5) * (self.u1 - self.u0) / self.n_u
            v = self.v0 + (np.arange(self.n_v) + 0.5) * (self.v1 - self.v0) / self.n_v
        else:
            u = np.linspace(self.u0, self.u1, self.n_u)
            v = np.linspace(self.v0, self.v1, self.n_v)
        return u, v

    def mesh(self):
        u, v = self.axes()
        return np.meshgrid(u, v, indexing="ij")

    def refined(self) -> "Grid":
        return Grid(self.u0, self.u1, 2 * self.n_u, self.v0, self.v1, 2 * self.n_v, self.centered)

    def to_dict(self) -> dict:
        return {"u0": self.u0, "u1": self.u1, "n_u": self.n_u, "v0": self.v0, "v1": self.v1,
                "n_v": self.n_v, "centered": self.centered}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(float(d["u0"]), float(d["u1"]), int(d["n_u"]), float(d["v0"]), float(d["v1"]),
                   int(d["n_v"]), bool(d.get("centered", True)))


@dataclass
class ResidualReport:
    """Per-point residual fields on a grid plus summaries and verdicts.

    ``tols`` overrides ``tol`` for individual residual names.
    """

    name: str
    u: np.ndarray
    v: np.ndarray
    residuals: dict
    tol: float = TOL_VERDICT
    failed: np.ndarray | None = None
    flags: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    tols: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.failed is None:
            self.failed = np.zeros(self.u.shape, dtype=bool)

    def summary(self) -> dict:
        out = {}
        ok = ~self.failed
        for key, arr in self.residuals.items():
            vals = np.abs(np.asarray(arr, dtype=float))
            good = vals[ok]
            if good.size == 0:
                out[key] = {"max": None, "mean": None, "argmax": None}
                continue
            idx = np.flatnonzero(ok.ravel())[int(np.argmax(good))]
            loc = np.unravel_index(idx, vals.shape)
            out[key] = {
                "max": float(good.max()),
                "mean": math.fsum(good.ravel().tolist()) / good.size,
                "argmax": {"u": float(self.u[loc]), "v": float(self.v[loc])},
            }
        return out

    def verdicts(self) -> dict:
        s = self.summary()
        clean = not bool(np.any(self.failed))
        return {k: bool(clean and s[k]["max"] is not None and s[k]["max"] < self.tol_for(k)) for k in s}

    def tol_for(self, key: str) -> float:
        return float(self.tols.get(key, self.tol))

    @property
    def verdict(self) -> bool:
        return all(self.verdicts().values())

    def max(self, key: str) -> float:
        return self.summary()[key]["max"]

    def to_dict(self, points: bool = False) -> dict:
        d = {
            "name": self.name,
            "tol": self.tol,
            "tols": {k: self.tol_for(k) for k in sorted(self.residuals)},
            "n_points": int(self.u.size),
            "n_failed": int(np.count_nonzero(self.failed)),
            "summary": self.summary(),
            "verdicts": self.verdicts(),
            "verdict": self.verdict,
        }
        if self.flags:
            d["flags"] = list(self.flags)
        if self.errors:
            d["errors"] = list(self.errors)
        if points:
            recs = []
            for idx in np.ndindex(self.u.shape):
                rec = {"u": float(self.u[idx]), "v": float(self.v[idx])}
                if self.failed[idx]:
                    rec["failed"] = True
                else:
                    rec.update({k: float(np.asarray(a)[idx]) for k, a in self.residuals.items()})
                recs.append(rec)
            d["points"] = recs
        return d


@dataclass
class GridAnalysis:
    """FundamentalData on a grid with a mask of points where the frame failed."""

    u: np.ndarray
    v: np.ndarray
    data: FundamentalData
    failed: np.ndarray
    errors: list


def analyze(patch: ImmersionPatch, grid: Grid, route: str = "auto") -> GridAnalysis:
    """Evaluate the fundamental data once for reuse by several predicates."""
    U, V = grid.mesh()
    try:
        data = fundamental_forms(patch, U, V, route)
        return GridAnalysis(U, V, data, np.zeros(U.shape, dtype=bool), [])
    except RWLabError:
        pass
    # slow path: locate the failing points one by one
    failed = np.zeros(U.shape, dtype=bool)
    errors = []
    fields = {}
    for idx in np.ndindex(U.shape):
        try:
            d = fundamental_forms(patch, U[idx], V[idx], route)
        except RWLabError as exc:
            failed[idx] = True
            if len(errors) < 5:
                errors.append(f"({U[idx]:.6g}, {V[idx]:.6g}): {type(exc).__name__}: {exc}")
            continue
        for name in ("h", "theta", "log_df", "omega12", "n34", "n43", "e1e1", "dtheta"):
            val = np.asarray(getattr(d, name))
            if name not in fields:
                fields[name] = np.full(U.shape + val.shape, np.nan)
            fields[name][idx] = val
    if not fields:
        fields = {"h": np.full(U.shape + (2, 2, 2), np.nan), "theta": np.full(U.shape, np.nan),
                  "log_df": np.full(U.shape, np.nan), "omega12": np.full(U.shape + (2,), np.nan),
                  "n34": np.full(U.shape + (2,), np.nan), "n43": np.full(U.shape + (2,), np.nan),
                  "e1e1": np.full(U.shape + (2,), np.nan), "dtheta": np.full(U.shape + (2,), np.nan)}
    return GridAnalysis(U, V, FundamentalData(**fields), failed, errors)


def _report(name, ga: GridAnalysis, residuals, tol, flags=(), tols=None):
    return ResidualReport(name, ga.u, ga.v, residuals, tol, ga.failed.copy(), list(flags),
                          list(ga.errors), dict(tols or {}))


def _ga(patch, grid, analysis):
    return analysis if analysis is not None else analyze(patch, grid)


def class_a_residuals(patch, grid: Grid, tol: float = TOL_VERDICT, analysis=None) -> ResidualReport:
    """|h312|, |h412| (h(e1, e2) = 0) and |e2(theta)|, |g~(nabla_perp_{e2} e4, e3)|."""
    ga = _ga(patch, grid, analysis)
    d = ga.data
    res = {
        "h312": np.abs(d.h[..., 0, 0, 1]),
        "h412": np.abs(d.h[..., 1, 0, 1]),
        "e2_theta": np.abs(d.dtheta[..., 1]),
        "normal_e2_e4": np.abs(d.n43[..., 1]),
    }
    return _report("classA", ga, res, tol)


def minimality_residual(patch, grid: Grid, tol: float = TOL_VERDICT, analysis=None) -> ResidualReport:
    ga = _ga(patch, grid, analysis)
    d = ga.data
    res = {"H_norm": np.hypot(d.H3, d.H4), "H3": np.abs(d.H3), "H4": np.abs(d.H4)}
    return _report("minimality", ga, res, tol)


def _t_zero_flags(theta, failed):
    th = np.asarray(theta)[~failed]
    if th.size and np.any(np.abs(th) < 1e-12):
        return ["excluded case: theta = 0 (T = 0) at some grid points"]
    return []


def eta_parallel_residuals(patch, grid: Grid, tol: float = TOL_VERDICT, analysis=None) -> ResidualReport:
    """theta derivatives, normal connection of e3, and |nabla_perp_X eta| for X = e1, e2."""
    ga = _ga(patch, grid, analysis)
    d = ga.data
    sh, ch = np.sinh(d.theta), np.cosh(d.theta)
    # nabla_perp_X (cosh(theta) e3) = sinh(theta) X(theta) e3 + cosh(theta) n34(X) e4
    eta1 = np.hypot(sh * d.dtheta[..., 0], ch * d.n34[..., 0])
    eta2 = np.hypot(sh * d.dtheta[..., 1], ch * d.n34[..., 1])
    res = {
        "e1_theta": np.abs(d.dtheta[..., 0]),
        "e2_theta": np.abs(d.dtheta[..., 1]),
        "n34_e1": np.abs(d.n34[..., 0]),
        "n34_e2": np.abs(d.n34[..., 1]),
        "nabla_eta_e1": eta1,
        "nabla_eta_e2": eta2,
    }
    return _report("etaParallel", ga, res, tol, _t_zero_flags(d.theta, ga.failed))


def eigen_residual(patch, grid: Grid, normal: str = "e3", tol: float = TOL_VERDICT,
                   analysis=None) -> ResidualReport:
    """|A_xi T - lambda T| with lambda = g(A_xi T, T) / g(T, T), for xi in {e3, e4, eta}."""
    if normal not in ("e3", "e4", "eta"):
        raise InvalidInputError(f"normal must be 'e3', 'e4' or 'eta', got {normal!r}")
    ga = _ga(patch, grid, analysis)
    d = ga.data
    if normal == "e4":
        hx = d.h[..., 1, :, :]
    else:
        hx = d.h[..., 0, :, :]
        if normal == "eta":
            hx = np.cosh(d.theta)[..., None, None] * hx
    # T = sinh(theta) e1, and g(A_xi e_i, e_j) = h^xi_ij
    t = np.stack([np.sinh(d.theta), np.zeros_like(d.theta)], axis=-1)
    at = np.einsum("...ij,...i->...j", hx, t)
    tt = np.sum(t * t, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        lam = np.sum(at * t, axis=-1) / tt
    rem = at - lam[..., None] * t
    res = {f"eigen_{normal}": np.linalg.norm(rem, axis=-1)}
    rep = _report(f"eigen[{normal}]", ga, res, tol, _t_zero_flags(d.theta, ga.failed))
    return rep


PREDICATES = {
    "classA": class_a_residuals,
    "minimality": minimality_residual,
    "etaParallel": eta_parallel_residuals,
    "eigen_e3": lambda p, g, tol=TOL_VERDICT, analysis=None: eigen_residual(p, g, "e3", tol, analysis),
    "eigen_e4": lambda p, g, tol=TOL_VERDICT, analysis=None: eigen_residual(p, g, "e4", tol, analysis),
    "eigen_eta": lambda p, g, tol=TOL_VERDICT, analysis=None: eigen_residual(p, g, "eta", tol, analysis),
}
