"""Constructors for the class-A surface families in L^4_1(f, 0).

Every constructor returns an :class:`ImmersionPatch` in the canonical chart
``phi(u, v) = (u, phi~(u, v))`` with analytic jets.  Cylinder and revolution
patches also carry closed-form second fundamental form evaluators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import profiles as pr
from .ambient import AmbientSpec, WarpingFunction
from .errors import InvalidInputError, ParameterDomainError
from .integrators import (DEFAULT_RK4_STEP, DEFAULT_SIMPSON_PANELS, CumulativeSimpson,
                          Trajectory, rk4_solve)
from .profiles import Profile
from .surface import EPS_FRAME, Domain, ImmersionPatch

N_ADMISSIBILITY_SAMPLES = 512


def _samples(lo: float, hi: float, n: int = N_ADMISSIBILITY_SAMPLES) -> np.ndarray:
    """Cell-centred samples: the parameter rectangle is treated as open."""
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def _first_violation(u, ok):
    bad = np.flatnonzero(~ok)
    return float(u[bad[0]]) if bad.size else None


def _lift(u, base, du, dv, duu, duv, dvv):
    """Canonical chart: phi = (u, phi~), phi_u = (1, phi~_u), remaining t-parts vanish."""
    z = np.zeros(np.shape(u) + (1,))
    one = np.ones(np.shape(u) + (1,))
    pos = np.concatenate([np.asarray(u, float)[..., None], base], axis=-1)
    d = {"u": np.concatenate([one, du], axis=-1),
         "v": np.concatenate([z, dv], axis=-1),
         "uu": np.concatenate([z, duu], axis=-1),
         "uv": np.concatenate([z, duv], axis=-1),
         "vv": np.concatenate([z, dvv], axis=-1)}
    return pos, d


def _canonical_patch(ambient, domain, evaluate, normal_sign, name) -> ImmersionPatch:
    def position(u, v):
        return evaluate(*np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float)))[0]

    def derivatives(u, v):
        return evaluate(*np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float)))[1]

    return ImmersionPatch(ambient, domain, position, derivatives, canonical=True,
                          normal_sign=normal_sign, name=name)


# -- cylinders -----------------------------------------------------------------

@dataclass
class CylinderFamilySpec:
    """phi(u, v) = (u, x1(u), x2(u), v)."""

    x1: Profile
    x2: Profile
    warping: WarpingFunction
    domain: Domain
    label: str = "cylinder"

    def speed(self, u):
        return np.hypot(self.x1.d1(u), self.x2.d1(u))


def _check_spacelike_profile(warping, speed, domain, constraint):
    u = _samples(domain.u0, domain.u1)
    warping.check(u)
    f = warping.value(u)
    q = -1.0 + f * f * speed(u) ** 2
    ok = np.isfinite(q) & (q > EPS_FRAME)
    if not np.all(ok):
        where = _first_violation(u, ok)
        raise ParameterDomainError(f"space-likeness {constraint} fails at u = {where}", constraint, where)


def build_cylinder(spec: CylinderFamilySpec) -> ImmersionPatch:
    _check_spacelike_profile(spec.warping, spec.speed, spec.domain, "-1 + f^2 (x1'^2 + x2'^2) > 0")
    x1, x2 = spec.x1, spec.x2

    def evaluate(u, v):
        a, a1, a2 = x1.jet(u)
        b, b1, b2 = x2.jet(u)
        z = np.zeros_like(u)
        base = np.stack([a, b, v], axis=-1)
        return _lift(u, base, np.stack([a1, b1, z], -1), np.stack([z, z, z + 1.0], -1),
                     np.stack([a2, b2, z], -1), np.zeros(u.shape + (3,)), np.zeros(u.shape + (3,)))

    # family frame convention: e4 = (0, -x2', x1', 0)/(fV) = -(phi~_u x phi~_v)/|.|
    patch = _canonical_patch(AmbientSpec(spec.warping, 0), spec.domain, evaluate, -1, spec.label)
    patch.closed_form_h = lambda u, v: cylinder_h(spec, u, v)
    patch.family_spec = spec
    return patch


def cylinder_h(spec: CylinderFamilySpec, u, v=None) -> dict:
    """Closed-form frame coefficients of the cylinder; h312 = h412 = h422 = 0."""
    u = np.asarray(u, float)
    if v is not None:
        u = np.broadcast_arrays(u, np.asarray(v, float))[0]
    f = spec.warping.value(u)
    fp = spec.warping.derivative(u)
    a1, a2 = spec.x1.d1(u), spec.x1.d2(u)
    b1, b2 = spec.x2.d1(u), spec.x2.d2(u)
    V = np.hypot(a1, b1)
    dV = (a1 * a2 + b1 * b2) / V
    q = f * f * V * V - 1.0
    z = np.zeros_like(u)
    return {
        "h311": (f * dV - V * (f * f * V * V - 2.0) * fp) / q ** 1.5,
        "h312": z,
        "h322": -V * fp / np.sqrt(q),
        "h411": f * (b1 * a2 - a1 * b2) / (V - f * f * V ** 3),
        "h412": z,
        "h422": z,
    }


# -- surfaces of revolution ----------------------------------------------------

@dataclass
class RevolutionFamilySpec:
    """phi(u, v) = (u, zeta1 cos v, zeta1 sin v, zeta2), zeta1 > 0."""

    zeta1: Profile
    zeta2: Profile
    warping: WarpingFunction
    domain: Domain
    label: str = "revolution"
    exited: bool = False
    exit_reason: str = ""

    def speed(self, u):
        return np.hypot(self.zeta1.d1(u), self.zeta2.d1(u))


def build_revolution(spec: RevolutionFamilySpec) -> ImmersionPatch:
    u = _samples(spec.domain.u0, spec.domain.u1)
    r = spec.zeta1.value(u)
    ok = r > 0
    if not np.all(ok):
        where = _first_violation(u, ok)
        raise ParameterDomainError(f"profile radius zeta1 must stay positive; fails at u = {where}",
                                   "zeta1 > 0", where)
    _check_spacelike_profile(spec.warping, spec.speed, spec.domain, "-1 + f^2 (zeta1'^2 + zeta2'^2) > 0")
    z1, z2 = spec.zeta1, spec.zeta2

    def evaluate(u, v):
        a, a1, a2 = z1.jet(u)
        b, b1, b2 = z2.jet(u)
        c, s = np.cos(v), np.sin(v)
        z = np.zeros_like(u)
        base = np.stack([a * c, a * s, b], -1)
        du = np.stack([a1 * c, a1 * s, b1], -1)
        dv = np.stack([-a * s, a * c, z], -1)
        duu = np.stack([a2 * c, a2 * s, b2], -1)
        duv = np.stack([-a1 * s, a1 * c, z], -1)
        dvv = np.stack([-a * c, -a * s, z], -1)
        return _lift(u, base, du, dv, duu, duv, dvv)

    # family frame convention: e4 = (0, zeta2' cos v, zeta2' sin v, -zeta1')/(fV) = -(phi~_u x phi~_v)/|.|
    patch = _canonical_patch(AmbientSpec(spec.warping, 0), spec.domain, evaluate, -1, spec.label)
    patch.closed_form_h = lambda u, v: revolution_h(spec, u, v)
    patch.family_spec = spec
    return patch


def revolution_h(spec: RevolutionFamilySpec, u, v=None) -> dict:
    """Frame coefficients of the surface of revolution.

    The h22 entries carry the radius: with s = sqrt(f^2 V^2 - 1),
    h322 = -(f f' V^2 zeta1 + zeta1') / (f zeta1 V s) and h422 = -zeta2' / (f zeta1 V).
    """
    u = np.asarray(u, float)
    if v is not None:
        u = np.broadcast_arrays(u, np.asarray(v, float))[0]
    f = spec.warping.value(u)
    fp = spec.warping.derivative(u)
    r, a1, a2 = spec.zeta1.jet(u)
    b1, b2 = spec.zeta2.d1(u), spec.zeta2.d2(u)
    V = np.hypot(a1, b1)
    dV = (a1 * a2 + b1 * b2) / V
    q = f * f * V * V - 1.0
    s = np.sqrt(q)
    z = np.zeros_like(u)
    return {
        "h311": (V * (2.0 - f * f * V * V) * fp + f * dV) / q ** 1.5,
        "h312": z,
        "h322": -(f * fp * V * V * r + a1) / (f * r * V * s),
        "h411": f * (b1 * a2 - a1 * b2) / (V * q),
        "h412": z,
        "h422": -b1 / (f * r * V),
    }


def revolution_h_radius_free(spec: RevolutionFamilySpec, u, v=None) -> dict:
    """The coefficient table with the h22 entries written without the radius.

    Kept to document that those two entries disagree with the computed
    geometry; they coincide with :func:`revolution_h` only where f zeta1 = s.
    """
    out = revolution_h(spec, u, v)
    u = np.asarray(u, float)
    if v is not None:
        u = np.broadcast_arrays(u, np.asarray(v, float))[0]
    f = spec.warping.value(u)
    fp = spec.warping.derivative(u)
    a1, b1 = spec.zeta1.d1(u), spec.zeta2.d1(u)
    V = np.hypot(a1, b1)
    s = np.sqrt(f * f * V * V - 1.0)
    out["h322"] = (V * V * s * fp + a1) / (V - f * f * V ** 3)
    out["h422"] = -b1 / (V * s)
    return out


# -- curves on the unit sphere -------------------------------------------------

def _orthonormalize_triple(y):
    """Gram-Schmidt on (alpha, T); n = alpha x T keeps the triple right-handed."""
    y = np.array(y, dtype=float, copy=True)
    a = y[..., 0:3]
    a = a / np.linalg.norm(a, axis=-1, keepdims=True)
    t = y[..., 3:6]
    t = t - np.sum(t * a, axis=-1, keepdims=True) * a
    t = t / np.linalg.norm(t, axis=-1, keepdims=True)
    y[..., 0:3] = a
    y[..., 3:6] = t
    y[..., 6:9] = np.cross(a, t)
    return y


def _check_initial_frame(alpha0, t0, n0, tol=1e-10):
    M = np.array([alpha0, t0, n0], dtype=float)
    if M.shape != (3, 3):
        raise InvalidInputError("initial sphere frame needs three 3-vectors")
    if np.max(np.abs(M @ M.T - np.eye(3))) > tol:
        raise InvalidInputError("initial sphere frame (alpha, alpha', n) is not orthonormal")
    if np.linalg.det(M) <= 0:
        raise InvalidInputError("initial sphere frame (alpha, alpha', n) is not right-handed")


class SphereCurve:
    """Arc-length curve alpha on S^2 with frame (alpha, T = alpha', n), from its curvature."""

    def __init__(self, kappa: Profile, trajectory: Trajectory):
        self.kappa = kappa
        self.trajectory = trajectory

    def frame(self, v):
        y = self.trajectory(v)
        return y[..., 0:3], y[..., 3:6], y[..., 6:9]

    def jet(self, v):
        """alpha, alpha', alpha'', n, n'."""
        a, t, n = self.frame(v)
        k = self.kappa.value(v)[..., None]
        return a, t, k * n - a, n, -k * t


def _sphere_rhs(kappa, forcing=None):
    def rhs(v, y):
        k = kappa.value(v)
        kk = k[..., None] if np.ndim(k) else k
        a, t, n = y[..., 0:3], y[..., 3:6], y[..., 6:9]
        parts = [t, kk * n - a, -kk * t]
        if forcing is not None:
            parts.append(forcing(v, y, k))
        return np.concatenate(parts, axis=-1)
    return rhs


def sphere_curve_from_curvature(kappa: Profile, alpha0=(1.0, 0.0, 0.0), dalpha0=(0.0, 1.0, 0.0),
                                n0=(0.0, 0.0, 1.0), v0: float = 0.0, v1: float = 1.0,
                                step: float = DEFAULT_RK4_STEP) -> SphereCurve:
    """RK4 for alpha' = T, T' = kappa n - alpha, n' = -kappa T, renormalized every step."""
    _check_initial_frame(alpha0, dalpha0, n0)
    y0 = np.concatenate([alpha0, dalpha0, n0]).astype(float)
    traj = rk4_solve(_sphere_rhs(kappa), y0, v0, v1, step, normalize=_orthonormalize_triple)
    return SphereCurve(kappa, traj)


# -- the spherical family ------------------------------------------------------

@dataclass
class SphericalFamilySpec:
    """phi(u, v) = (u, phi1 alpha + phi2 alpha' + phi3 n), tau = tau0(u) + K(v), K' = kappa.

    ``psi1_0``, ``psi2_0`` are psi1(v0), psi2(v0) at ``v0 = domain.v0``; ``u_anchor``
    is the lower limit of the u-quadratures (defaults to ``domain.u0``).
    """

    kappa: Profile
    phi1: Profile
    R: Profile
    tau0: Profile
    warping: WarpingFunction
    domain: Domain
    psi1_0: float = 0.0
    psi2_0: float = 0.0
    alpha0: tuple = (1.0, 0.0, 0.0)
    dalpha0: tuple = (0.0, 1.0, 0.0)
    n0: tuple = (0.0, 0.0, 1.0)
    u_anchor: float | None = None
    rk4_step: float = DEFAULT_RK4_STEP
    simpson_panels: int = DEFAULT_SIMPSON_PANELS
    label: str = "spherical"


class SphericalData:
    """Precomputed v-trajectory (frame, psi1, psi2, K) and u-quadratures for a spherical spec."""

    def __init__(self, spec: SphericalFamilySpec):
        _check_initial_frame(spec.alpha0, spec.dalpha0, spec.n0)
        self.spec = spec
        d = spec.domain
        phi1 = spec.phi1

        def forcing(v, y, k):
            # psi1' = kappa psi2 - phi1, psi2' = -kappa psi1, K' = kappa
            p1, p2 = y[..., 9], y[..., 10]
            return np.stack([k * p2 - phi1.value(v), -k * p1, np.broadcast_to(k, p1.shape)], axis=-1)

        y0 = np.concatenate([spec.alpha0, spec.dalpha0, spec.n0,
                             [spec.psi1_0, spec.psi2_0, 0.0]]).astype(float)
        self.trajectory = rk4_solve(_sphere_rhs(spec.kappa, forcing), y0, d.v0, d.v1,
                                    spec.rk4_step, normalize=_orthonormalize_triple)
        anchor = d.u0 if spec.u_anchor is None else spec.u_anchor
        lo, hi = min(d.u0, anchor), max(d.u1, anchor)
        R, tau0 = spec.R, spec.tau0
        self.S = CumulativeSimpson(lambda x: R.value(x) * np.sin(tau0.value(x)), lo, hi, anchor,
                                   spec.simpson_panels)
        self.C = CumulativeSimpson(lambda x: R.value(x) * np.cos(tau0.value(x)), lo, hi, anchor,
                                   spec.simpson_panels)

    def v_state(self, v):
        y = self.trajectory(v)
        return y[..., 0:3], y[..., 3:6], y[..., 6:9], y[..., 9], y[..., 10], y[..., 11]

    def tau(self, u, v):
        return self.spec.tau0.value(u) + self.v_state(v)[5]

    def components(self, u, v):
        """phi1, phi2, phi3 and tau on the grid."""
        _, _, _, p1, p2, K = self.v_state(v)
        S, C = self.S(u), self.C(u)
        cK, sK = np.cos(K), np.sin(K)
        phi2 = cK * S + sK * C + p1
        phi3 = cK * C - sK * S + p2
        return self.spec.phi1.value(v), phi2, phi3, self.spec.tau0.value(u) + K

    def evaluate(self, u, v):
        spec = self.spec
        a, t, n, p1, p2, K = self.v_state(v)
        S, C = self.S(u), self.C(u)
        cK, sK = np.cos(K), np.sin(K)
        phi2 = cK * S + sK * C + p1
        phi3 = cK * C - sK * S + p2
        f1, df1, ddf1 = spec.phi1.jet(v)
        k = spec.kappa.value(v)
        R, dR = spec.R.value(u), spec.R.d1(u)
        tau = spec.tau0.value(u) + K
        dtau = spec.tau0.d1(u)
        st, ct = np.sin(tau), np.cos(tau)

        def comb(ca, ct_, cn):
            return ca[..., None] * a + ct_[..., None] * t + cn[..., None] * n

        z = np.zeros_like(u)
        w = df1 - phi2
        base = comb(f1 + z, phi2, phi3)
        du = comb(z, R * st, R * ct)
        duu = comb(z, dR * st + R * dtau * ct, dR * ct - R * dtau * st)
        dv = comb(w, z, z)
        duv = comb(-R * st, z, z)
        dvv = comb(ddf1 - k * phi3 + f1, w, z)
        return _lift(u, base, du, dv, duu, duv, dvv)


def build_spherical(spec: SphericalFamilySpec) -> ImmersionPatch:
    data = SphericalData(spec)
    d = spec.domain
    R_mid = float(spec.R.value(0.5 * (d.u0 + d.u1)))
    if R_mid == 0.0:
        raise ParameterDomainError("R must not vanish", "R != 0")
    _check_spacelike_profile(spec.warping, lambda u: np.abs(spec.R.value(u)), d, "-1 + f^2 R^2 > 0")
    uu, vv = np.meshgrid(_samples(d.u0, d.u1, 96), _samples(d.v0, d.v1, 96), indexing="ij")
    _, phi2, _, _ = data.components(uu, vv)
    w = spec.phi1.d1(vv) - phi2
    if np.any(np.abs(w) < 1e-9):
        raise ParameterDomainError("phi1' - phi2 vanishes on the domain: e2 is undefined",
                                   "phi1' - phi2 != 0")
    if np.any(w <= 0):
        raise ParameterDomainError("(-1 + f^2 R^2)(phi1' - phi2) > 0 fails on the domain",
                                   "(-1 + f^2 R^2)(phi1' - phi2) > 0")
    if np.any(np.sign(spec.R.value(uu[:, 0])) != math.copysign(1.0, R_mid)):
        raise ParameterDomainError("R changes sign on the domain", "R != 0")
    # family frame convention: e4 = (0, cos(tau) alpha' - sin(tau) n)/f = sign(R) (phi~_u x phi~_v)/|.|
    sign = 1 if R_mid > 0 else -1
    patch = _canonical_patch(AmbientSpec(spec.warping, 0), d, data.evaluate, sign, spec.label)
    patch.family_spec = spec
    patch.spherical_data = data
    return patch


def base_surface_principals(patch_or_data, u, v):
    """Principal curvatures (k1, k2) = (tau_u / R, cos(tau) / (phi1' - phi2)) of the base surface."""
    data = getattr(patch_or_data, "spherical_data", patch_or_data)
    spec = data.spec
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    _, phi2, _, tau = data.components(u, v)
    w = spec.phi1.d1(v) - phi2
    if np.any(w == 0):
        raise ParameterDomainError("phi1' - phi2 vanishes", "phi1' - phi2 != 0")
    return spec.tau0.d1(u) / spec.R.value(u), np.cos(tau) / w


# -- minimal cylinders ---------------------------------------------------------

class _WarpIntegrandProfile(Profile):
    """g(u) = scale / (f sqrt(c3 f^4 + k)) with exact derivative, plus its integral."""

    def __init__(self, warping, c3, k, scale, integral, shift):
        self.w, self.c3, self.k, self.scale = warping, c3, k, scale
        self.integral, self.shift = integral, shift

    def _parts(self, u):
        u = np.asarray(u, float)
        f, fp = self.w.value(u), self.w.derivative(u)
        return f, fp, self.c3 * f ** 4 + self.k

    def value(self, u):
        return self.scale * self.integral(u) + self.shift

    def d1(self, u):
        f, _, q = self._parts(u)
        return self.scale / (f * np.sqrt(q))

    def d2(self, u):
        f, fp, q = self._parts(u)
        return self.scale * (-fp / (f * f * np.sqrt(q)) - 2.0 * self.c3 * f * f * fp * q ** -1.5)


def solve_minimal_cylinder(warping: WarpingFunction, c1: float, c2: float, c3: float, u0: float,
                           domain: Domain, panels: int = DEFAULT_SIMPSON_PANELS) -> CylinderFamilySpec:
    """x1 = int_{u0}^u dxi / (f sqrt(c3 f^4 + c1^2 + 1)), x2 = c1 x1 + c2.

    Space-likeness forces c3 < 0: f^2 V^2 - 1 = -c3 f^4 / (c3 f^4 + 1 + c1^2).
    """
    if not c3 < 0:
        raise ParameterDomainError(
            f"minimal cylinder needs c3 < 0 for space-likeness (f^2 V^2 - 1 = -c3 f^4/(c3 f^4 + 1 + c1^2)); got c3 = {c3}",
            "c3 < 0")
    k = c1 * c1 + 1.0
    lo, hi = min(domain.u0, u0), max(domain.u1, u0)
    us = _samples(lo, hi)
    warping.check(us)
    q = c3 * warping.value(us) ** 4 + k
    ok = q > 0
    if not np.all(ok):
        where = _first_violation(us, ok)
        raise ParameterDomainError(f"c3 f^4 + c1^2 + 1 > 0 fails at u = {where}", "c3 f^4 + c1^2 + 1 > 0", where)

    def integrand(x):
        f = warping.value(x)
        return 1.0 / (f * np.sqrt(c3 * f ** 4 + k))

    quad = CumulativeSimpson(integrand, lo, hi, u0, panels)
    x1 = _WarpIntegrandProfile(warping, c3, k, 1.0, quad, 0.0)
    x2 = _WarpIntegrandProfile(warping, c3, k, c1, quad, c2)
    spec = CylinderFamilySpec(x1, x2, warping, domain, label="minimal-cylinder")
    spec.params = {"c1": c1, "c2": c2, "c3": c3, "u0": u0}
    return spec


def minimal_cylinder_ode_residual(spec: CylinderFamilySpec, u) -> np.ndarray:
    """|f x1'' - 2 f^2 (1 + c1^2) f' x1'^3 + 3 f' x1'| with x1', x1'' from differences of the quadrature."""
    from .surface import FD_REL_STEP

    c1 = spec.params["c1"]
    u = np.asarray(u, float)
    h = FD_REL_STEP * np.maximum(1.0, np.abs(u))
    x = spec.x1.value

    def d1(s):
        return (x(u + s) - x(u - s)) / (2 * s)

    def d2(s):
        return (x(u + s) - 2 * x(u) + x(u - s)) / s ** 2

    a1 = (4 * d1(h / 2) - d1(h)) / 3
    a2 = (4 * d2(h / 2) - d2(h)) / 3
    f, fp = spec.warping.value(u), spec.warping.derivative(u)
    return np.abs(f * a2 - 2 * f * f * (1 + c1 * c1) * fp * a1 ** 3 + 3 * fp * a1)


# -- minimal surfaces of revolution --------------------------------------------

def minimal_revolution_rhs(warping: WarpingFunction, form: str = "geometric"):
    """Right-hand side for the state (zeta1, zeta2, zeta1', zeta2').

    f zeta1'' = f' zeta1' (2 f^2 V^2 - 3) + (f^2 V^2 - 1) / (f zeta1)
    f zeta2'' = f' zeta2' (2 f^2 V^2 - 3)

    ``form="radicand"`` replaces the last term of the first equation by
    sqrt(f^2 V^2 - 1); that variant is not scale invariant and does not
    produce minimal surfaces (kept for comparison only).
    """
    if form not in ("geometric", "radicand"):
        raise InvalidInputError(f"unknown minimal-revolution form {form!r}")

    def rhs(u, y):
        f = warping.value(u)
        fp = warping.derivative(u)
        r, a, b = y[..., 0], y[..., 2], y[..., 3]
        q = f * f * (a * a + b * b)
        lift = (q - 1.0) / (f * r) if form == "geometric" else np.sqrt(q - 1.0)
        dda = (fp * a * (2 * q - 3) + lift) / f
        ddb = fp * b * (2 * q - 3) / f
        return np.stack([a, b, dda, ddb], axis=-1)

    return rhs


def solve_minimal_revolution(warping: WarpingFunction, initial, domain: Domain,
                             step: float = DEFAULT_RK4_STEP, form: str = "geometric") -> RevolutionFamilySpec:
    """Integrate the minimal-revolution system from ``domain.u0`` with RK4.

    ``initial`` is (zeta1, zeta2, zeta1', zeta2') at ``domain.u0``.  If the
    radicand f^2 V^2 - 1 or zeta1 approaches zero the integration stops and the
    returned spec has its domain cut at the exit point with ``exited`` set.
    """
    y0 = np.asarray(initial, dtype=float)
    if y0.shape != (4,):
        raise InvalidInputError("initial data is (zeta1, zeta2, zeta1', zeta2')")
    u0 = domain.u0
    warping.check(u0)
    f0 = float(warping.value(u0))
    if f0 * f0 * (y0[2] ** 2 + y0[3] ** 2) - 1.0 <= EPS_FRAME:
        raise ParameterDomainError("f^2 (zeta1'^2 + zeta2'^2) - 1 must be positive at the initial point",
                                   "f^2 V^2 - 1 > 0", u0)
    if y0[0] <= 0:
        raise ParameterDomainError("zeta1 must be positive at the initial point", "zeta1 > 0", u0)
    rhs = minimal_revolution_rhs(warping, form)

    def stop(u, y):
        if not warping.contains(u):
            return "left warping interval"
        f = float(warping.value(u))
        if f * f * (y[2] ** 2 + y[3] ** 2) - 1.0 <= 1e-6:
            return "radicand f^2 V^2 - 1 reached zero"
        if y[0] <= 1e-6:
            return "zeta1 reached zero"
        return ""

    # integrate past the domain end so stencil evaluations stay on computed nodes
    pad = 0.02 * (domain.u1 - domain.u0)
    traj = rk4_solve(rhs, y0, u0, domain.u1 + pad, step, stop=stop)
    u_end = domain.u1
    if traj.exited:
        u_end = min(domain.u1, traj.t_end - pad)
        if u_end <= u0:
            raise ParameterDomainError(f"minimal-revolution flow leaves the admissible region at once ({traj.exit_reason})",
                                       "f^2 V^2 - 1 > 0 and zeta1 > 0", u0)

    def second(ch):
        return lambda u, y: rhs(u, y)[..., 2 + ch]

    z1 = pr.TrajectoryProfile(traj, 0, 2, second(0))
    z2 = pr.TrajectoryProfile(traj, 1, 3, second(1))
    dom = Domain(domain.u0, u_end, domain.v0, domain.v1)
    spec = RevolutionFamilySpec(z1, z2, warping, dom, label="minimal-revolution",
                                exited=traj.exited, exit_reason=traj.exit_reason)
    spec.trajectory = traj
    return spec


# -- eta-parallel families -----------------------------------------------------

class _ReciprocalWarp(Profile):
    """R(u) = c / f(u)."""

    def __init__(self, warping, c):
        self.w, self.c = warping, c

    def value(self, u):
        return self.c / self.w.value(u)

    def d1(self, u):
        f = self.w.value(u)
        return -self.c * self.w.derivative(u) / (f * f)

    def d2(self, u):
        raise NotImplementedError("second derivative of c/f is not needed by the jets")


@dataclass
class EtaParallelSpec:
    """Parallel-eta families.

    cylinder:  x1 = c1 int dxi/f, x2 = c2 int dxi/f + c3 (lower limit u0).
    spherical: spherical family with R = c/f, tau = tau0 + K(v) independent of u,
               phi1 = A1(v), psi1(v0) = A4(v0), psi2(v0) = A5(v0).
    """

    variant: str
    warping: WarpingFunction
    domain: Domain
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c: float = 0.0
    u0: float | None = None
    kappa: Profile = field(default_factory=lambda: pr.constant(0.0))
    phi1: Profile = field(default_factory=lambda: pr.constant(0.0))
    tau0: float = 0.0
    A4_0: float = 0.0
    A5_0: float = 0.0
    rk4_step: float = DEFAULT_RK4_STEP
    simpson_panels: int = DEFAULT_SIMPSON_PANELS


def eta_cylinder_spec(spec: EtaParallelSpec) -> CylinderFamilySpec:
    if spec.c1 ** 2 + spec.c2 ** 2 <= 1.0:
        raise ParameterDomainError("parallel-eta cylinder needs c1^2 + c2^2 > 1 (f V is that constant)",
                                   "c1^2 + c2^2 > 1")
    d = spec.domain
    u0 = d.u0 if spec.u0 is None else spec.u0
    w = spec.warping
    lo, hi = min(d.u0, u0), max(d.u1, u0)
    w.check(_samples(lo, hi))
    quad = CumulativeSimpson(lambda x: 1.0 / w.value(x), lo, hi, u0, spec.simpson_panels)

    class _Inv(Profile):
        def __init__(self, scale, shift):
            self.scale, self.shift = scale, shift

        def value(self, u):
            return self.scale * quad(u) + self.shift

        def d1(self, u):
            return self.scale / w.value(u)

        def d2(self, u):
            f = w.value(u)
            return -self.scale * w.derivative(u) / (f * f)

    out = CylinderFamilySpec(_Inv(spec.c1, 0.0), _Inv(spec.c2, spec.c3), w, d, label="eta-parallel-cylinder")
    out.params = {"c1": spec.c1, "c2": spec.c2, "c3": spec.c3, "u0": u0}
    return out


def eta_spherical_spec(spec: EtaParallelSpec) -> SphericalFamilySpec:
    if spec.c ** 2 <= 1.0:
        raise ParameterDomainError("parallel-eta spherical surface needs c^2 > 1 so that -1 + f^2 R^2 = c^2 - 1 > 0",
                                   "c^2 > 1")
    return SphericalFamilySpec(
        kappa=spec.kappa, phi1=spec.phi1, R=_ReciprocalWarp(spec.warping, spec.c),
        tau0=pr.constant(spec.tau0), warping=spec.warping, domain=spec.domain,
        psi1_0=spec.A4_0, psi2_0=spec.A5_0, u_anchor=spec.u0,
        rk4_step=spec.rk4_step, simpson_panels=spec.simpson_panels, label="eta-parallel-spherical")


def build_eta_parallel(spec: EtaParallelSpec) -> ImmersionPatch:
    if spec.variant == "cylinder":
        patch = build_cylinder(eta_cylinder_spec(spec))
    elif spec.variant == "spherical":
        patch = build_spherical(eta_spherical_spec(spec))
    else:
        raise InvalidInputError(f"unknown parallel-eta variant {spec.variant!r}")
    patch.name = f"eta-parallel-{spec.variant}"
    return patch


# -- the spherical family as a surface of revolution ---------------------------

class _DerivedProfile(Profile):
    def __init__(self, value, d1):
        self._v, self._d1 = value, d1

    def value(self, u):
        return self._v(np.asarray(u, float))

    def d1(self, u):
        return self._d1(np.asarray(u, float))

    def d2(self, u):
        raise NotImplementedError


def spherical_from_revolution(rev: RevolutionFamilySpec, kappa: Profile | None = None,
                              rk4_step: float = DEFAULT_RK4_STEP,
                              panels: int = DEFAULT_SIMPSON_PANELS) -> SphericalFamilySpec:
    """Spherical-family data reproducing a surface of revolution when kappa = 0.

    phi~ = -zeta1(u) alpha'(v) + zeta2(u) n along the great circle alpha, i.e.
    R = V, tau0 = atan2(-zeta1', zeta2'), phi1 = 0.  Passing a nonzero ``kappa``
    keeps the same u-data on a bent curve.
    """
    z1, z2 = rev.zeta1, rev.zeta2

    def R(u):
        return np.hypot(z1.d1(u), z2.d1(u))

    def dR(u):
        a1, b1 = z1.d1(u), z2.d1(u)
        return (a1 * z1.d2(u) + b1 * z2.d2(u)) / np.hypot(a1, b1)

    def tau(u):
        return np.arctan2(-z1.d1(u), z2.d1(u))

    def dtau(u):
        a1, b1 = z1.d1(u), z2.d1(u)
        return (a1 * z2.d2(u) - b1 * z1.d2(u)) / (a1 * a1 + b1 * b1)

    u0 = rev.domain.u0
    return SphericalFamilySpec(
        kappa=kappa if kappa is not None else pr.constant(0.0), phi1=pr.constant(0.0),
        R=_DerivedProfile(R, dR), tau0=_DerivedProfile(tau, dtau), warping=rev.warping,
        domain=rev.domain, psi1_0=-float(z1.value(u0)), psi2_0=float(z2.value(u0)),
        u_anchor=u0, rk4_step=rk4_step, simpson_panels=panels, label="spherical-from-revolution")


# -- auxiliary fixtures --------------------------------------------------------

def build_helicoid(warping: WarpingFunction, pitch: float, domain: Domain) -> ImmersionPatch:
    """phi = (u, u cos v, u sin v, pitch v): canonical chart (E~ = 1) but h412 != 0 when pitch != 0."""
    u = _samples(domain.u0, domain.u1)
    warping.check(u)
    f = warping.value(u)
    if np.any(f * f - 1.0 <= EPS_FRAME):
        raise ParameterDomainError("helicoid needs f^2 > 1 on the domain", "-1 + f^2 > 0")
    if np.any(u <= 0):
        raise ParameterDomainError("helicoid needs u > 0", "u > 0")

    def evaluate(u, v):
        c, s = np.cos(v), np.sin(v)
        z = np.zeros_like(u)
        base = np.stack([u * c, u * s, pitch * v], -1)
        du = np.stack([c, s, z], -1)
        dv = np.stack([-u * s, u * c, z + pitch], -1)
        duu = np.zeros(u.shape + (3,))
        duv = np.stack([-s, c, z], -1)
        dvv = np.stack([-u * c, -u * s, z], -1)
        return _lift(u, base, du, dv, duu, duv, dvv)

    return _canonical_patch(AmbientSpec(warping, 0), domain, evaluate, 1, "helicoid")


def perturb(patch: ImmersionPatch, amplitude: float = 0.1) -> ImmersionPatch:
    """Add (0, amplitude sin(u + v), 0, 0); the result uses numeric jets and the projection frame."""
    base = patch.position

    def position(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        p = np.array(base(u, v), copy=True)
        p[..., 1] += amplitude * np.sin(u + v)
        return p

    return patch.with_position(position, name=f"{patch.name}+perturbed")
