"""Space-like surface patches phi(u, v) = (T(u, v), phi~(u, v)) in L^4_1(f, c).

All evaluators accept scalar or array ``u``, ``v`` (broadcast together) and
return arrays whose leading shape is the broadcast shape.  Ambient vectors
carry their four chart components on the trailing axis.

Frame conventions: d/dt restricted to the surface equals
``sinh(theta) e1 + cosh(theta) e3`` with ``sinh(theta) < 0``; ``e3`` is the
unit timelike normal, ``e4`` the unit spacelike normal.  In the canonical chart
``e4 = sign * (0, N~) / f`` where ``N~`` is the normalized Euclidean cross
product ``phi~_u x phi~_v`` and ``sign`` is the patch's ``normal_sign``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ambient import AmbientSpec, metric
from .errors import (CausalDegeneracyError, DegenerateFrameError, InvalidInputError,
                     JetError, SliceSurfaceError)

FD_REL_STEP = 1e-3
EPS_FRAME = 1e-8


@dataclass(frozen=True)
class Domain:
    u0: float
    u1: float
    v0: float
    v1: float

    def __post_init__(self):
        if not (self.u1 > self.u0 and self.v1 > self.v0):
            raise InvalidInputError(f"empty parameter rectangle {self}")

    def to_dict(self) -> dict:
        return {"u0": self.u0, "u1": self.u1, "v0": self.v0, "v1": self.v1}

    def contains(self, u, v, margin=0.0):
        return ((u - margin >= self.u0) & (u + margin <= self.u1)
                & (v - margin >= self.v0) & (v + margin <= self.v1))


class ImmersionPatch:
    """An immersion of a parameter rectangle into the spacetime.

    ``position(u, v)`` returns ambient points ``(..., 4)``.  ``derivatives``, when
    given, returns a dict with keys ``u, v, uu, uv, vv`` of analytic partials;
    otherwise jets come from Richardson-extrapolated central differences.
    ``canonical`` marks charts with T = u and g_c(phi~_u, phi~_v) = 0.
    """

    def __init__(self, ambient: AmbientSpec, domain: Domain, position: Callable,
                 derivatives: Callable | None = None, canonical: bool = False,
                 normal_sign: int = 1, name: str = ""):
        if normal_sign not in (1, -1):
            raise InvalidInputError("normal_sign must be +1 or -1")
        self.ambient = ambient
        self.domain = domain
        self.position = position
        self.derivatives = derivatives
        self.canonical = canonical
        self.normal_sign = normal_sign
        self.name = name
        # closed-form second fundamental form, attached by family constructors
        self.closed_form_h: Callable | None = None

    def __repr__(self):
        return f"ImmersionPatch({self.name or 'unnamed'}, canonical={self.canonical})"

    def with_position(self, position, name="") -> "ImmersionPatch":
        """Same ambient and domain, new map, numeric jets, general chart."""
        return ImmersionPatch(self.ambient, self.domain, position, None, False,
                              self.normal_sign, name or self.name + "+modified")


@dataclass
class SurfaceJet2:
    p: np.ndarray
    pu: np.ndarray
    pv: np.ndarray
    puu: np.ndarray
    puv: np.ndarray
    pvv: np.ndarray

    def __getitem__(self, key):
        return {"": self.p, "u": self.pu, "v": self.pv, "uu": self.puu,
                "uv": self.puv, "vu": self.puv, "vv": self.pvv}[key]


@dataclass
class AdaptedFrame:
    """``e[..., a, :]`` is e_{a+1}; ``coeffs[..., i, k]`` expresses e_{i+1} in (phi_u, phi_v)."""

    e: np.ndarray
    theta: np.ndarray
    coeffs: np.ndarray
    metric: np.ndarray
    route: str

    @property
    def e1(self):
        return self.e[..., 0, :]

    @property
    def e2(self):
        return self.e[..., 1, :]

    @property
    def e3(self):
        return self.e[..., 2, :]

    @property
    def e4(self):
        return self.e[..., 3, :]


@dataclass
class FundamentalData:
    """Frame coefficients at a point (or grid).

    ``h[..., a, i, j] = g~(h(e_i, e_j), e_{3+a})``; ``omega12[..., i] = g(nabla_{e_i} e1, e2)``;
    ``n34[..., i] = g~(nabla~_{e_i} e3, e4)``; ``n43[..., i] = g~(nabla~_{e_i} e4, e3)``;
    ``e1e1[..., i] = g~(nabla~_{e_i} e1, e1)`` (zero for unit e1, kept as a residual).
    """

    h: np.ndarray
    theta: np.ndarray
    log_df: np.ndarray
    omega12: np.ndarray | None = None
    n34: np.ndarray | None = None
    n43: np.ndarray | None = None
    e1e1: np.ndarray | None = None
    dtheta: np.ndarray | None = None

    @property
    def H3(self):
        return -(self.h[..., 0, 0, 0] + self.h[..., 0, 1, 1]) / 2

    @property
    def H4(self):
        return (self.h[..., 1, 0, 0] + self.h[..., 1, 1, 1]) / 2

    def coefficient(self, name: str):
        """Lookup by name such as 'h311' or 'h412'."""
        a, i, j = int(name[1]) - 3, int(name[2]) - 1, int(name[3]) - 1
        return self.h[..., a, i, j]


# -- jets ----------------------------------------------------------------------

def fd_step(u, v):
    return FD_REL_STEP * np.maximum(1.0, np.maximum(np.abs(u), np.abs(v)))


def check_interior(patch: ImmersionPatch, u, v, steps: float = 2.0):
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    h = fd_step(u, v)
    ok = patch.domain.contains(u, v, steps * h)
    if not np.all(ok):
        bad = np.argwhere(~ok)[0] if ok.ndim else ()
        raise JetError(f"point (u, v) = ({u[tuple(bad)]}, {v[tuple(bad)]}) is within "
                       f"{steps} finite-difference steps of the patch boundary")


def _richardson(d_h, d_h2):
    return (4.0 * d_h2 - d_h) / 3.0


def numeric_jet(patch: ImmersionPatch, u, v) -> SurfaceJet2:
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    check_interior(patch, u, v)
    h = fd_step(u, v)
    F = patch.position
    p = F(u, v)

    def parts(s):
        sc = s[..., None]
        fu_p, fu_m = F(u + s, v), F(u - s, v)
        fv_p, fv_m = F(u, v + s), F(u, v - s)
        du = (fu_p - fu_m) / (2 * sc)
        dv = (fv_p - fv_m) / (2 * sc)
        duu = (fu_p - 2 * p + fu_m) / sc ** 2
        dvv = (fv_p - 2 * p + fv_m) / sc ** 2
        duv = (F(u + s, v + s) - F(u + s, v - s) - F(u - s, v + s) + F(u - s, v - s)) / (4 * sc ** 2)
        return du, dv, duu, duv, dvv

    coarse = parts(h)
    fine = parts(h / 2)
    du, dv, duu, duv, dvv = (_richardson(a, b) for a, b in zip(coarse, fine))
    return SurfaceJet2(p, du, dv, duu, duv, dvv)


def jet(patch: ImmersionPatch, u, v, numeric: bool = False) -> SurfaceJet2:
    """Position and partials to second order; analytic when the patch provides them."""
    if numeric or patch.derivatives is None:
        return numeric_jet(patch, u, v)
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    d = patch.derivatives(u, v)
    return SurfaceJet2(patch.position(u, v), d["u"], d["v"], d["uu"], d["uv"], d["vv"])


def induced_metric(ambient: AmbientSpec, j: SurfaceJet2, check: bool = True):
    """(g11, g12, g22) of the pullback metric; raises if not positive definite."""
    g11 = metric(ambient, j.p, j.pu, j.pu)
    g12 = metric(ambient, j.p, j.pu, j.pv)
    g22 = metric(ambient, j.p, j.pv, j.pv)
    if check:
        det = g11 * g22 - g12 * g12
        scale = np.maximum(np.abs(g11) * np.abs(g22), 1e-300)
        bad = ~((g11 > 0) & (det > 1e-14 * scale))
        if np.any(bad):
            raise CausalDegeneracyError("induced metric is not positive definite: the patch is not space-like here")
    return g11, g12, g22


# -- adapted frame -------------------------------------------------------------

def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _tangent_coeffs(ambient, j, g, vecs):
    """Solve vec = a_u phi_u + a_v phi_v for tangent vectors (least squares via g)."""
    g11, g12, g22 = g
    det = g11 * g22 - g12 * g12
    out = []
    for x in vecs:
        bu = metric(ambient, j.p, x, j.pu)
        bv = metric(ambient, j.p, x, j.pv)
        out.append(np.stack([(g22 * bu - g12 * bv) / det, (g11 * bv - g12 * bu) / det], axis=-1))
    return np.stack(out, axis=-2)


def _canonical_frame(patch: ImmersionPatch, j: SurfaceJet2, g):
    amb = patch.ambient
    f = amb.warping.value(j.p[..., 0])
    a = j.pu[..., 1:]
    b = j.pv[..., 1:]
    E = _dot(a, a)
    G = _dot(b, b)
    s2 = -1.0 + f * f * E
    if np.any(s2 <= EPS_FRAME):
        raise DegenerateFrameError("-1 + f^2 E~ is below the frame guard; theta is unbounded")
    s = np.sqrt(s2)
    e1 = j.pu / s[..., None]
    e2 = j.pv / (f * np.sqrt(G))[..., None]
    e3 = np.concatenate([(f * E)[..., None], a / f[..., None]], axis=-1) / (np.sqrt(E) * s)[..., None]
    n = np.cross(a, b)
    n = n / np.linalg.norm(n, axis=-1)[..., None]
    e4 = patch.normal_sign * np.concatenate([np.zeros_like(f)[..., None], n], axis=-1) / f[..., None]
    theta = -np.arcsinh(1.0 / s)
    return np.stack([e1, e2, e3, e4], axis=-2), theta


def _projection_frame(patch: ImmersionPatch, j: SurfaceJet2, g):
    amb = patch.ambient
    shape = j.p.shape[:-1]
    dt = np.zeros(shape + (4,))
    dt[..., 0] = 1.0
    c = _tangent_coeffs(amb, j, g, [dt])[..., 0, :]
    T = c[..., :1] * j.pu + c[..., 1:] * j.pv
    tnorm2 = metric(amb, j.p, T, T)
    if np.any(tnorm2 <= EPS_FRAME ** 2):
        raise SliceSurfaceError("grad T vanishes: the surface lies in a slice {t0} x Q^3")
    tnorm = np.sqrt(tnorm2)
    e1 = -T / tnorm[..., None]
    w = j.pv - metric(amb, j.p, j.pv, e1)[..., None] * e1
    f = amb.warping.value(j.p[..., 0])
    e2 = np.sign(f)[..., None] * w / np.sqrt(metric(amb, j.p, w, w))[..., None]
    eta = dt - T
    cosh_t = np.sqrt(-metric(amb, j.p, eta, eta))
    e3 = eta / cosh_t[..., None]
    # covector annihilating e1, e2, e3 (cofactor expansion), raised with g~
    M = np.stack([e1, e2, e3], axis=-1)  # (..., 4, 3)
    w4 = np.empty(shape + (4,))
    for mu in range(4):
        rows = [r for r in range(4) if r != mu]
        w4[..., mu] = (-1) ** mu * np.linalg.det(M[..., rows, :])
    gm = amb.metric_matrix(j.p)
    e4 = np.einsum("...ij,...j->...i", np.linalg.inv(gm), w4)
    e4 = e4 / np.sqrt(metric(amb, j.p, e4, e4))[..., None]
    orient = np.linalg.det(np.stack([j.pu[..., 1:], j.pv[..., 1:], e4[..., 1:]], axis=-1))
    flip = np.sign(orient) * np.sign(f) * patch.normal_sign
    e4 = np.where((flip < 0)[..., None], -e4, e4)
    theta = -np.arcsinh(tnorm)
    return np.stack([e1, e2, e3, e4], axis=-2), theta


def frame_from_jet(patch: ImmersionPatch, j: SurfaceJet2, route: str = "auto") -> AdaptedFrame:
    if route not in ("auto", "canonical", "projection"):
        raise InvalidInputError(f"unknown frame route {route!r}")
    g = induced_metric(patch.ambient, j)
    if route == "auto":
        route = "canonical" if (patch.canonical and patch.ambient.curvature == 0) else "projection"
    if route == "canonical":
        if patch.ambient.curvature != 0:
            raise InvalidInputError("the closed-form canonical frame is defined for c = 0 only")
        e, theta = _canonical_frame(patch, j, g)
    else:
        e, theta = _projection_frame(patch, j, g)
    coeffs = _tangent_coeffs(patch.ambient, j, g, [e[..., 0, :], e[..., 1, :]])
    return AdaptedFrame(e, theta, coeffs, np.stack(g, axis=-1), route)


def adapted_frame(patch: ImmersionPatch, u, v, route: str = "auto") -> AdaptedFrame:
    return frame_from_jet(patch, jet(patch, u, v), route)


def frame_gram(patch: ImmersionPatch, frame: AdaptedFrame, p) -> np.ndarray:
    """Matrix g~(e_a, e_b); diag(1, 1, -1, 1) for a valid frame."""
    e = frame.e
    gm = patch.ambient.metric_matrix(p)
    return np.einsum("...ai,...ij,...bj->...ab", e, gm, e)


# -- second fundamental form ---------------------------------------------------

def coordinate_connection(patch: ImmersionPatch, j: SurfaceJet2, gamma=None):
    """nabla~_{phi_k} phi_l for (k, l) = (u, u), (u, v), (v, v)."""
    amb = patch.ambient
    if gamma is None:
        gamma = amb.christoffel(j.p)
    nuu = j.puu + amb.contract(j.p, j.pu, j.pu, gamma)
    nuv = j.puv + amb.contract(j.p, j.pu, j.pv, gamma)
    nvv = j.pvv + amb.contract(j.p, j.pv, j.pv, gamma)
    return nuu, nuv, nvv


def second_fundamental(patch: ImmersionPatch, j: SurfaceJet2, frame: AdaptedFrame, gamma=None):
    """h[..., a, i, j] = g~(nabla~_{e_i} e_j, e_{3+a}) via the coordinate basis."""
    amb = patch.ambient
    nuu, nuv, nvv = coordinate_connection(patch, j, gamma)
    hc = np.empty(j.p.shape[:-1] + (2, 2, 2))
    for a in range(2):
        ea = frame.e[..., 2 + a, :]
        huu = metric(amb, j.p, nuu, ea)
        huv = metric(amb, j.p, nuv, ea)
        hvv = metric(amb, j.p, nvv, ea)
        hc[..., a, 0, 0] = huu
        hc[..., a, 0, 1] = huv
        hc[..., a, 1, 0] = huv
        hc[..., a, 1, 1] = hvv
    A = frame.coeffs
    return np.einsum("...ik,...akl,...jl->...aij", A, hc, A)


# -- frame derivatives ---------------------------------------------------------

_OFFSETS = ((1.0, 0.0), (-1.0, 0.0), (0.5, 0.0), (-0.5, 0.0),
            (0.0, 1.0), (0.0, -1.0), (0.0, 0.5), (0.0, -0.5))


def _stencil_frames(patch, u, v, route):
    h = fd_step(u, v)
    du = np.array([o[0] for o in _OFFSETS]).reshape((-1,) + (1,) * u.ndim)
    dv = np.array([o[1] for o in _OFFSETS]).reshape((-1,) + (1,) * u.ndim)
    fr = adapted_frame(patch, u[None] + du * h[None], v[None] + dv * h[None], route)
    return fr, h


def _stencil_derivative(vals, h, axis_block):
    """Richardson derivative from stencil values stacked in _OFFSETS order."""
    b = 4 * axis_block
    p1, m1, p2, m2 = vals[b], vals[b + 1], vals[b + 2], vals[b + 3]
    hs = h.reshape(h.shape + (1,) * (vals.ndim - 1 - h.ndim))
    return _richardson((p1 - m1) / (2 * hs), (p2 - m2) / hs)


@dataclass
class FrameDerivatives:
    """Chart derivatives of the frame and theta, and nabla~_{e_i} e_a."""

    de: np.ndarray       # [..., k, a, :]  d_k e_a
    dtheta: np.ndarray   # [..., k]        d_k theta
    nabla: np.ndarray    # [..., i, a, :]  nabla~_{e_i} e_a
    e_theta: np.ndarray  # [..., i]        e_i(theta)


def frame_derivatives(patch: ImmersionPatch, u, v, route: str = "auto",
                      j: SurfaceJet2 | None = None, frame: AdaptedFrame | None = None,
                      gamma=None) -> FrameDerivatives:
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    check_interior(patch, u, v)
    if j is None:
        j = jet(patch, u, v)
    if frame is None:
        frame = frame_from_jet(patch, j, route)
    st, h = _stencil_frames(patch, u, v, frame.route)
    de = np.stack([_stencil_derivative(st.e, h, 0), _stencil_derivative(st.e, h, 1)], axis=-3)
    dth = np.stack([_stencil_derivative(st.theta, h, 0), _stencil_derivative(st.theta, h, 1)], axis=-1)
    amb = patch.ambient
    if gamma is None:
        gamma = amb.christoffel(j.p)
    # nabla~_{phi_k} e_a = d_k e_a + Gamma(phi_k, e_a)
    tang = np.stack([j.pu, j.pv], axis=-2)  # [..., k, :]
    corr = np.einsum("...lmn,...km,...an->...kal", gamma, tang, frame.e)
    ncoord = de + corr
    A = frame.coeffs  # [..., i, k]
    nabla = np.einsum("...ik,...kal->...ial", A, ncoord)
    e_theta = np.einsum("...ik,...k->...i", A, dth)
    return FrameDerivatives(de, dth, nabla, e_theta)


def fundamental_forms(patch: ImmersionPatch, u, v, route: str = "auto",
                      connection: bool = True) -> FundamentalData:
    """Second fundamental form, mean curvature and connection coefficients in the adapted frame."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    j = jet(patch, u, v)
    frame = frame_from_jet(patch, j, route)
    amb = patch.ambient
    gamma = amb.christoffel(j.p)
    h = second_fundamental(patch, j, frame, gamma)
    log_df = amb.warping.log_derivative(j.p[..., 0])
    data = FundamentalData(h, frame.theta, log_df)
    if connection:
        fd = frame_derivatives(patch, u, v, route, j, frame, gamma)
        e = frame.e
        gm = amb.metric_matrix(j.p)

        def pair(x, y):
            return np.einsum("...i,...ij,...j->...", x, gm[..., None, :, :], y)

        nab = fd.nabla
        data.omega12 = pair(nab[..., :, 0, :], e[..., None, 1, :])
        data.e1e1 = pair(nab[..., :, 0, :], e[..., None, 0, :])
        data.n34 = pair(nab[..., :, 2, :], e[..., None, 3, :])
        data.n43 = pair(nab[..., :, 3, :], e[..., None, 2, :])
        data.dtheta = fd.e_theta
    return data


def theta_derivatives(patch: ImmersionPatch, u, v, route: str = "auto"):
    """(e1(theta), e2(theta)) by finite differences of theta over the chart."""
    fd = frame_derivatives(patch, u, v, route)
    return fd.e_theta[..., 0], fd.e_theta[..., 1]


def warp_restriction_check(patch: ImmersionPatch, u, v, route: str = "auto"):
    """|f'(t) + e1(f o T) / sinh(theta)| with e1(f o T) from chart differences."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    check_interior(patch, u, v)
    frame = adapted_frame(patch, u, v, route)
    w = patch.ambient.warping
    h = fd_step(u, v)

    def fT(uu, vv):
        return w.value(patch.position(uu, vv)[..., 0])

    def d(hs, axis):
        if axis == 0:
            return (fT(u + hs, v) - fT(u - hs, v)) / (2 * hs)
        return (fT(u, v + hs) - fT(u, v - hs)) / (2 * hs)

    grad = np.stack([_richardson(d(h, 0), d(h / 2, 0)), _richardson(d(h, 1), d(h / 2, 1))], axis=-1)
    e1f = np.einsum("...k,...k->...", frame.coeffs[..., 0, :], grad)
    t = patch.position(u, v)[..., 0]
    return np.abs(w.derivative(t) + e1f / np.sinh(frame.theta))
