from __future__ import annotations

import math

import numpy as np
import pytest

from rwlab import profiles as pr
from rwlab.ambient import WarpingFunction
from rwlab.classa import Grid, class_a_residuals, eta_parallel_residuals, minimality_residual
from rwlab.errors import InvalidInputError, ParameterDomainError
from rwlab.families import (CylinderFamilySpec, EtaParallelSpec, RevolutionFamilySpec, SphericalData,
                            SphericalFamilySpec, base_surface_principals, build_cylinder, build_eta_parallel,
                            build_helicoid, build_revolution, build_spherical, cylinder_h,
                            minimal_cylinder_ode_residual, minimal_revolution_rhs, revolution_h,
                            revolution_h_radius_free, solve_minimal_cylinder, solve_minimal_revolution,
                            sphere_curve_from_curvature, spherical_from_revolution)
from rwlab.surface import Domain, fundamental_forms, jet

from conftest import SQRT2, built

UNIT = Domain(0.0, 1.0, 0.0, 1.0)
ONE = WarpingFunction.constant(1.0)
EXP = WarpingFunction.exponential(1.0)
COEFFS = ("h311", "h312", "h322", "h411", "h412", "h422")


def sample(domain, n=4):
    u = np.linspace(domain.u0, domain.u1, n + 2)[1:-1]
    v = np.linspace(domain.v0, domain.v1, n + 2)[1:-1]
    return np.meshgrid(u, v, indexing="ij")


def closed_vs_numeric(patch, closed, n=4):
    U, V = sample(patch.domain, n)
    d = fundamental_forms(patch, U, V, connection=False)
    ref = closed(U, V)
    return max(float(np.max(np.abs(d.coefficient(k) - ref[k]))) for k in COEFFS)


# -- cylinders -------------------------------------------------------------------

def test_straight_cylinder_is_plane():
    spec = CylinderFamilySpec(pr.polynomial(0.0, SQRT2), pr.constant(0.0), ONE, UNIT)
    patch = build_cylinder(spec)
    h = cylinder_h(spec, np.linspace(0.1, 0.9, 5))
    assert all(np.max(np.abs(h[k])) == 0.0 for k in COEFFS)
    U, V = sample(UNIT)
    assert np.max(np.abs(fundamental_forms(patch, U, V, connection=False).h)) < 1e-12


def test_cylinder_constant_speed_product():
    # x1' = 2 e^{-u} with f = e^t, so f V = 2 and h322 = -2/sqrt(3)
    spec = CylinderFamilySpec(pr.exp(-2.0, -1.0, 0.0), pr.constant(0.0), EXP, UNIT)
    u = np.linspace(0.1, 0.9, 5)
    assert np.allclose(EXP.value(u) * spec.speed(u), 2.0, atol=1e-14)
    assert np.allclose(cylinder_h(spec, u)["h322"], -2 / math.sqrt(3), atol=1e-14)
    patch = build_cylinder(spec)
    d = fundamental_forms(patch, u, 0.5 + 0 * u, connection=False)
    assert np.max(np.abs(d.coefficient("h322") + 2 / math.sqrt(3))) < 1e-10


@pytest.mark.parametrize("seed", range(5))
def test_cylinder_closed_form_matches_numeric(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-0.3, 0.3, 3)
    x1 = pr.polynomial(0.0, 2.0 + a[0], a[1], a[2])
    x2 = pr.sin(rng.uniform(0.2, 0.6), rng.uniform(1, 2), rng.uniform(0, 1), 0.0)
    w = WarpingFunction.cosh(rng.uniform(0.5, 1.5), rng.uniform(0.0, 1.0))
    spec = CylinderFamilySpec(x1, x2, w, UNIT)
    patch = build_cylinder(spec)
    assert closed_vs_numeric(patch, lambda U, V: cylinder_h(spec, U, V)) < 1e-6


def test_cylinder_rejects_timelike_profile():
    spec = CylinderFamilySpec(pr.polynomial(0.0, 0.5), pr.constant(0.0), ONE, UNIT)
    with pytest.raises(ParameterDomainError) as err:
        build_cylinder(spec)
    assert err.value.where == pytest.approx(UNIT.u0, abs=0.01)


# -- surfaces of revolution ---------------------------------------------------------

def linear_revolution():
    dom = Domain(0.2, 1.2, 0.0, 1.0)
    return RevolutionFamilySpec(pr.polynomial(0.0, 2.0), pr.constant(0.0), ONE, dom)


def test_revolution_radius_free_entry_value():
    spec = linear_revolution()
    h = revolution_h_radius_free(spec, np.array([0.5, 1.0]))
    assert np.allclose(h["h322"], -1 / 3, atol=1e-15)
    assert np.allclose(h["h411"], 0.0) and np.allclose(h["h422"], 0.0)


def test_revolution_closed_form_matches_numeric_on_linear_profile():
    spec = linear_revolution()
    patch = build_revolution(spec)
    assert closed_vs_numeric(patch, lambda U, V: revolution_h(spec, U, V)) < 1e-6


def test_revolution_radius_free_h22_disagrees_off_the_special_radius():
    spec = linear_revolution()
    patch = build_revolution(spec)
    u = np.array([0.4, 0.6, 1.0])
    num = fundamental_forms(patch, u, 0.5 + 0 * u, connection=False).coefficient("h322")
    radius_free = revolution_h_radius_free(spec, u)["h322"]
    assert np.all(np.abs(num - radius_free) > 1e-2)
    # the two agree where f zeta1 = sqrt(f^2 V^2 - 1), here 2u = sqrt(3)
    u_star = np.array([math.sqrt(3) / 2])
    num_star = fundamental_forms(patch, u_star, np.array([0.5]), connection=False).coefficient("h322")
    assert abs(float(num_star[0]) - float(revolution_h_radius_free(spec, u_star)["h322"][0])) < 1e-9


@pytest.mark.parametrize("name", ["revolution-exp", "revolution-const", "revolution-cosh"])
def test_revolution_fixtures_closed_form(name):
    b = built(name)
    assert closed_vs_numeric(b.patch, lambda U, V: revolution_h(b.spec, U, V)) < 1e-6


def test_revolution_is_class_a():
    b = built("revolution-exp")
    rep = class_a_residuals(b.patch, Grid.over(b.patch.domain, 6))
    assert rep.max("h312") < 1e-7 and rep.max("h412") < 1e-7


def test_revolution_rejects_nonpositive_radius():
    spec = RevolutionFamilySpec(pr.polynomial(-0.5, 2.0), pr.constant(0.0), ONE, UNIT)
    with pytest.raises(ParameterDomainError):
        build_revolution(spec)


# -- sphere curves ---------------------------------------------------------------------

def test_sphere_curve_great_circle():
    curve = sphere_curve_from_curvature(pr.constant(0.0), v1=math.pi)
    a, _, _ = curve.frame(np.array(math.pi))
    assert np.max(np.abs(a - [-1.0, 0.0, 0.0])) < 1e-8
    vs = np.linspace(0, math.pi, 7)
    a, _, _ = curve.frame(vs)
    assert np.max(np.abs(a - np.stack([np.cos(vs), np.sin(vs), 0 * vs], -1))) < 1e-8


def test_sphere_curve_unit_curvature_circle():
    curve = sphere_curve_from_curvature(pr.constant(1.0), v1=2 * math.pi)
    axis = np.array([1.0, 0.0, 1.0]) / SQRT2  # kappa alpha + n is conserved
    a, _, _ = curve.frame(np.linspace(0, 2 * math.pi, 50))
    radial = a - np.outer(a @ axis, axis)
    assert np.max(np.abs(np.linalg.norm(radial, axis=1) - 1 / SQRT2)) < 1e-6


def test_sphere_curve_frame_stays_orthonormal():
    curve = sphere_curve_from_curvature(pr.sin(2.0, 3.0, 0.0, 0.5), v1=3.0)
    a, t, n = curve.frame(np.linspace(0, 3.0, 200))
    M = np.stack([a, t, n], axis=1)
    gram = np.einsum("kia,kja->kij", M, M)
    assert np.max(np.abs(gram - np.eye(3))) < 1e-8


def test_sphere_curve_rejects_bad_frame():
    with pytest.raises(InvalidInputError):
        sphere_curve_from_curvature(pr.constant(0.0), dalpha0=(0.0, 1.0, 0.1))
    with pytest.raises(InvalidInputError):
        sphere_curve_from_curvature(pr.constant(0.0), n0=(0.0, 0.0, -1.0))


# -- spherical family --------------------------------------------------------------------

def test_spherical_revolution_type_reduction_is_class_a():
    spec = SphericalFamilySpec(kappa=pr.constant(0.0), phi1=pr.constant(0.5), R=pr.constant(2.0),
                               tau0=pr.constant(0.0), warping=ONE, domain=UNIT, psi1_0=-1.0, psi2_0=0.3)
    patch = build_spherical(spec)
    assert class_a_residuals(patch, Grid.over(UNIT, 6)).verdict


def test_spherical_theta_formula():
    patch = built("spherical").patch
    spec = patch.family_spec
    U, V = sample(UNIT)
    d = fundamental_forms(patch, U, V, connection=False)
    R = spec.R.value(U)
    assert np.max(np.abs(np.sinh(d.theta) + 1 / np.sqrt(R * R - 1))) < 1e-7


def test_spherical_psi_system_without_curvature():
    spec = SphericalFamilySpec(kappa=pr.constant(0.0), phi1=pr.polynomial(0.5, 1.0), R=pr.constant(2.0),
                               tau0=pr.constant(0.0), warping=ONE, domain=UNIT, psi1_0=-2.0, psi2_0=0.7)
    data = SphericalData(spec)
    v = np.linspace(0, 1, 9)
    *_, p1, p2, K = data.v_state(v)
    assert np.max(np.abs(p2 - 0.7)) < 1e-12
    assert np.max(np.abs(p1 - (-2.0 - 0.5 * v - 0.5 * v * v))) < 1e-10
    assert np.max(np.abs(K)) == 0.0


def test_spherical_canonical_chart():
    patch = built("spherical-cosh").patch
    U, V = sample(UNIT)
    j = jet(patch, U, V)
    assert np.max(np.abs(np.sum(j.pu[..., 1:] * j.pv[..., 1:], -1))) < 1e-6
    assert np.max(np.abs(j.p[..., 0] - U)) == 0.0


def test_spherical_degenerate_e2_rejected():
    spec = SphericalFamilySpec(kappa=pr.constant(0.0), phi1=pr.constant(0.0), R=pr.constant(2.0),
                               tau0=pr.constant(0.0), warping=ONE, domain=UNIT)
    with pytest.raises(ParameterDomainError) as err:
        build_spherical(spec)
    assert "phi1' - phi2" in err.value.constraint


def test_base_surface_principals_against_shape_operator():
    patch = built("spherical").patch
    U, V = sample(UNIT, 3)
    j = jet(patch, U, V, numeric=True)
    a, b = j.pu[..., 1:], j.pv[..., 1:]
    n = np.cross(a, b)
    n /= np.linalg.norm(n, axis=-1)[..., None]
    k1_ref = np.sum(j.puu[..., 1:] * n, -1) / np.sum(a * a, -1)
    k2_ref = np.sum(j.pvv[..., 1:] * n, -1) / np.sum(b * b, -1)
    k1, k2 = base_surface_principals(patch, U, V)
    assert np.max(np.abs(k1 - k1_ref)) < 1e-7
    assert np.max(np.abs(k2 - k2_ref)) < 1e-7


def test_spherical_from_revolution_reproduces_surface():
    rev = built("revolution-exp").spec
    rev = RevolutionFamilySpec(rev.zeta1, rev.zeta2, rev.warping, UNIT)
    sph = build_spherical(spherical_from_revolution(rev))
    a = build_revolution(rev)
    U, V = sample(UNIT)
    d1 = fundamental_forms(a, U, V, connection=False)
    d2 = fundamental_forms(sph, U, V, connection=False)
    assert np.max(np.abs(d1.h[..., 0, :, :] - d2.h[..., 0, :, :])) < 1e-8
    # the two constructions pick opposite unit normals e4
    assert np.max(np.abs(d1.h[..., 1, :, :] + d2.h[..., 1, :, :])) < 1e-8


# -- minimal cylinders ----------------------------------------------------------------------

def test_minimal_cylinder_flat_case_is_plane():
    spec = solve_minimal_cylinder(ONE, 0.0, 0.3, -0.75, 0.0, UNIT)
    u = np.linspace(0.1, 0.9, 5)
    assert np.allclose(spec.x1.d1(u), 2.0, atol=1e-14)
    assert np.allclose(spec.x1.value(u), 2.0 * u, atol=1e-12)
    assert np.allclose(spec.x2.value(u), 0.3, atol=1e-14)
    patch = build_cylinder(spec)
    U, V = sample(UNIT)
    assert np.max(np.abs(fundamental_forms(patch, U, V, connection=False).h)) < 1e-10


def test_minimal_cylinder_exponential_warping():
    spec = solve_minimal_cylinder(EXP, 0.0, 0.0, -math.exp(-4.0), 0.0, UNIT)
    patch = build_cylinder(spec)
    # the quadrature integrand blows up at u = 1, where c3 f^4 + 1 = 0
    rep = minimality_residual(patch, Grid(0.0, 0.9, 8, 0.0, 1.0, 4))
    assert rep.verdict and rep.max("H_norm") < 1e-5
    u = np.linspace(0.05, 0.9, 18)
    assert np.max(minimal_cylinder_ode_residual(spec, u)) < 1e-6


def test_minimal_cylinder_requires_negative_c3():
    with pytest.raises(ParameterDomainError) as err:
        solve_minimal_cylinder(EXP, 0.0, 0.0, 0.5, 0.0, UNIT)
    assert err.value.constraint == "c3 < 0"


def test_minimal_cylinder_radicand_violation():
    with pytest.raises(ParameterDomainError) as err:
        solve_minimal_cylinder(EXP, 0.0, 0.0, -1.0, 0.0, UNIT)
    assert "c3 f^4" in err.value.constraint


# -- minimal surfaces of revolution -------------------------------------------------------

def test_minimal_revolution_initial_second_derivatives():
    y = np.array([SQRT2, 0.0, SQRT2, 1.0])
    radicand = minimal_revolution_rhs(ONE, "radicand")(0.0, y)
    geometric = minimal_revolution_rhs(ONE)(0.0, y)
    assert radicand[2] == pytest.approx(SQRT2, abs=1e-14)
    assert radicand[3] == 0.0 and geometric[3] == 0.0
    # the geometric form has (f^2 V^2 - 1)/(f zeta1) = 2/zeta1, equal to sqrt(2) here
    assert geometric[2] == pytest.approx(SQRT2, abs=1e-14)
    y[0] = 1.0
    assert minimal_revolution_rhs(ONE)(0.0, y)[2] == pytest.approx(2.0, abs=1e-14)


def test_minimal_revolution_catenary_type_is_minimal():
    spec = solve_minimal_revolution(ONE, [1.0, 0.0, 1.5, 0.0], UNIT)
    assert not spec.exited
    rep = minimality_residual(build_revolution(spec), Grid.over(spec.domain, 8))
    assert rep.max("H_norm") < 1e-5


def test_minimal_revolution_radicand_form_is_not_minimal():
    spec = solve_minimal_revolution(ONE, [1.0, 0.0, 1.5, 0.0], UNIT, form="radicand")
    rep = minimality_residual(build_revolution(spec), Grid.over(spec.domain, 8))
    assert rep.max("H_norm") > 1e-3


def test_minimal_revolution_zeta2_slope_constant_for_constant_warping():
    spec = solve_minimal_revolution(ONE, [1.0, 0.0, 1.5, 0.4], UNIT)
    assert np.max(np.abs(spec.trajectory.ys[:, 3] - 0.4)) < 1e-14


def test_minimal_revolution_warped():
    b = built("minimal-revolution")
    rep = minimality_residual(b.patch, Grid.over(b.patch.domain, 8))
    assert rep.max("H_norm") < 1e-5


def test_minimal_revolution_rejects_bad_initial_data():
    with pytest.raises(ParameterDomainError):
        solve_minimal_revolution(ONE, [1.0, 0.0, 0.5, 0.5], UNIT)
    with pytest.raises(ParameterDomainError):
        solve_minimal_revolution(ONE, [-1.0, 0.0, 1.5, 0.0], UNIT)
    with pytest.raises(InvalidInputError):
        solve_minimal_revolution(ONE, [1.0, 0.0, 1.5], UNIT)


def test_minimal_revolution_exit_cuts_domain():
    # zeta1' < 0 drives the radius to zero before u = 1
    spec = solve_minimal_revolution(ONE, [0.3, 0.0, -1.5, 0.0], UNIT)
    assert spec.exited and spec.domain.u1 < 1.0
    assert spec.exit_reason


# -- parallel eta ---------------------------------------------------------------------------

def test_eta_cylinder_exponential():
    spec = EtaParallelSpec("cylinder", EXP, UNIT, c1=2.0, c2=0.0, u0=0.0)
    patch = build_eta_parallel(spec)
    cyl = patch.family_spec
    u = np.linspace(0.05, 0.95, 10)
    assert np.max(np.abs(cyl.x1.value(u) - 2 * (1 - np.exp(-u)))) < 1e-10
    U, V = sample(UNIT)
    d = fundamental_forms(patch, U, V)
    assert np.max(np.abs(d.theta + math.asinh(1 / math.sqrt(3)))) < 1e-12
    assert np.max(np.abs(d.dtheta[..., 0])) < 1e-6


def test_eta_cylinder_constant_warping_is_plane():
    patch = build_eta_parallel(EtaParallelSpec("cylinder", ONE, UNIT, c1=2.0))
    U, V = sample(UNIT)
    assert np.max(np.abs(fundamental_forms(patch, U, V, connection=False).h)) < 1e-10


def test_eta_spherical_cosh():
    spec = EtaParallelSpec("spherical", WarpingFunction.cosh(1.0, 0.0), UNIT, c=2.0, kappa=pr.constant(1.0),
                           phi1=pr.polynomial(0.0, 3.0), A4_0=-1.0, A5_0=0.5)
    patch = build_eta_parallel(spec)
    rep = eta_parallel_residuals(patch, Grid.over(UNIT, 6), tol=1e-6)
    assert rep.verdict


@pytest.mark.parametrize("spec", [
    EtaParallelSpec("cylinder", EXP, UNIT, c1=0.6, c2=0.8),
    EtaParallelSpec("spherical", EXP, UNIT, c=1.0),
])
def test_eta_parallel_rejects_non_spacelike_constants(spec):
    with pytest.raises(ParameterDomainError):
        build_eta_parallel(spec)


def test_eta_parallel_unknown_variant():
    with pytest.raises(InvalidInputError):
        build_eta_parallel(EtaParallelSpec("torus", EXP, UNIT))


# -- auxiliary surfaces -----------------------------------------------------------------------

def test_helicoid_is_not_class_a():
    patch = build_helicoid(WarpingFunction.cosh(1.0, 1.0), 0.5, Domain(0.5, 1.5, 0.0, 1.0))
    rep = class_a_residuals(patch, Grid.over(patch.domain, 4))
    assert rep.max("h412") > 1e-2
    assert not rep.verdict


def test_helicoid_without_pitch_is_class_a():
    patch = build_helicoid(WarpingFunction.cosh(1.0, 1.0), 0.0, Domain(0.5, 1.5, 0.0, 1.0))
    assert class_a_residuals(patch, Grid.over(patch.domain, 4)).verdict
