from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rwlab.ambient import (AmbientSpec, WarpingFunction, causal_character, christoffel,
                           covariant_derivative, covariant_derivative_split, metric)
from rwlab.errors import DomainError, InvalidInputError

from conftest import WARPINGS, random_points

DT = np.array([1.0, 0, 0, 0])
DX = np.array([0, 1.0, 0, 0])


def koszul_christoffel(spec, p, h=1e-5):
    """Gamma from central differences of the metric matrix and the Koszul formula."""
    dg = np.empty((4, 4, 4))
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = h
        dg[mu] = (spec.metric_matrix(p + e) - spec.metric_matrix(p - e)) / (2 * h)
    ginv = np.linalg.inv(spec.metric_matrix(p))
    low = 0.5 * (np.einsum("mnl->lmn", dg) + np.einsum("nml->lmn", dg) - dg)
    # low[l, m, n] = 1/2 (d_m g_ln + d_n g_lm - d_l g_mn)
    return np.einsum("sl,lmn->smn", ginv, low)


# -- metric ------------------------------------------------------------------

def test_metric_unit_time_axis():
    spec = AmbientSpec(WarpingFunction.exponential(0.4))
    assert metric(spec, [0.3, 0.1, 0.2, 0.3], DT, DT) == pytest.approx(-1.0)


def test_metric_constant_warping_two():
    spec = AmbientSpec(WarpingFunction.constant(2.0))
    assert metric(spec, [0.0, 0, 0, 0], DX, DX) == pytest.approx(4.0)


def test_metric_exponential_mixed_vectors():
    spec = AmbientSpec(WarpingFunction.exponential(1.0))
    val = metric(spec, [1.0, 0, 0, 0], DT + DX, DT - DX)
    assert val == pytest.approx(-1.0 - math.e ** 2, rel=1e-14)


def test_metric_outside_interval_raises():
    spec = AmbientSpec(WarpingFunction.linear(1.0, 1.0, interval=(0.0, 2.0)))
    with pytest.raises(DomainError):
        metric(spec, [3.0, 0, 0, 0], DT, DT)


def test_hyperbolic_chart_boundary_raises():
    spec = AmbientSpec(WarpingFunction.constant(1.0), -1)
    with pytest.raises(DomainError):
        metric(spec, [0.0, 0.99999999, 0, 0], DX, DX)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=12, max_size=12), st.floats(-2, 2), st.sampled_from([-1, 0, 1]))
def test_metric_symmetric_bilinear(vals, a, c):
    spec = AmbientSpec(WarpingFunction.cosh(1.0, 0.5), c)
    p = np.array([0.2, 0.1, -0.2, 0.3])
    x, y, z = np.array(vals).reshape(3, 4)
    assert metric(spec, p, x, y) == pytest.approx(metric(spec, p, y, x), abs=1e-12)
    lhs = metric(spec, p, a * x + z, y)
    rhs = a * metric(spec, p, x, y) + metric(spec, p, z, y)
    assert lhs == pytest.approx(rhs, abs=1e-10 * (1 + abs(lhs)))


# -- warping functions --------------------------------------------------------

@pytest.mark.parametrize("kind", sorted(WARPINGS))
def test_warping_derivative_matches_difference(kind):
    w, (lo, hi) = WARPINGS[kind]
    t = np.linspace(lo, hi, 101)
    h = 1e-6
    fd = (w.value(t + h) - w.value(t - h)) / (2 * h)
    assert np.max(np.abs(fd - w.derivative(t))) < 1e-7 * (1 + np.max(np.abs(fd)))


@pytest.mark.parametrize("kind", sorted(WARPINGS))
def test_warping_record_roundtrip(kind):
    w, _ = WARPINGS[kind]
    assert WarpingFunction.from_dict(w.to_dict()) == w


def test_warping_rejects_vanishing():
    with pytest.raises(DomainError):
        WarpingFunction.linear(1.0, 0.0)
    with pytest.raises(DomainError):
        WarpingFunction.cosh(1.0, -2.0)
    with pytest.raises(DomainError):
        WarpingFunction.constant(0.0)


def test_warping_rejects_unknown_kind():
    with pytest.raises(InvalidInputError):
        WarpingFunction("gaussian", (1.0,))


# -- Christoffel symbols --------------------------------------------------------

def test_christoffel_flat_product_vanishes():
    spec = AmbientSpec(WarpingFunction.constant(1.0))
    assert np.all(christoffel(spec, [0.4, 1.0, -2.0, 0.5]) == 0.0)


def test_christoffel_exponential_at_origin():
    spec = AmbientSpec(WarpingFunction.exponential(1.0))
    g = christoffel(spec, [0.0, 0, 0, 0])
    assert g[0, 1, 1] == pytest.approx(1.0)
    assert g[1, 0, 1] == pytest.approx(1.0)
    assert g[1, 1, 0] == pytest.approx(1.0)
    assert g[0, 0, 0] == 0.0
    assert g[1, 2, 2] == 0.0


def test_christoffel_cosh_at_origin():
    spec = AmbientSpec(WarpingFunction.cosh(1.0, 0.0))
    g = christoffel(spec, [0.0, 0.3, 0.1, 0.2])
    assert g[1, 0, 1] == pytest.approx(0.0, abs=1e-15)
    assert g[0, 1, 1] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("c", [-1, 0, 1])
@pytest.mark.parametrize("kind", sorted(WARPINGS))
def test_christoffel_matches_koszul_oracle(kind, c, rng):
    w, t_range = WARPINGS[kind]
    spec = AmbientSpec(w, c)
    for p in random_points(rng, 20, t_range, c):
        ref = koszul_christoffel(spec, p)
        got = christoffel(spec, p)
        assert np.max(np.abs(ref - got)) < 1e-7 * (1 + np.max(np.abs(ref)))


@pytest.mark.parametrize("c", [-1, 0, 1])
def test_metric_derivative_matches_difference(c, rng):
    spec = AmbientSpec(WarpingFunction.cosh(1.0, 0.5), c)
    for p in random_points(rng, 10, (-1, 1), c):
        dg = spec.metric_derivative(p)
        for mu in range(4):
            e = np.zeros(4)
            e[mu] = 1e-6
            fd = (spec.metric_matrix(p + e) - spec.metric_matrix(p - e)) / 2e-6
            assert np.max(np.abs(fd - dg[mu])) < 1e-6 * (1 + np.max(np.abs(fd)))


@pytest.mark.parametrize("c", [-1, 0, 1])
def test_connection_torsion_free_and_metric(c, rng):
    spec = AmbientSpec(WarpingFunction.exponential(0.6), c)
    for p in random_points(rng, 20, (-1, 1), c):
        g = christoffel(spec, p)
        assert np.max(np.abs(g - np.swapaxes(g, 1, 2))) == 0.0
        # d_mu g_{nu lam} = Gamma_{lam, mu nu} + Gamma_{nu, mu lam}
        gm = spec.metric_matrix(p)
        low = np.einsum("ls,smn->lmn", gm, g)
        rhs = np.einsum("lmn->mnl", low) + np.einsum("nml->mnl", low)
        assert np.max(np.abs(spec.metric_derivative(p) - rhs)) < 1e-12


# -- covariant derivative ----------------------------------------------------------

def test_covariant_derivative_of_time_axis():
    spec = AmbientSpec(WarpingFunction.exponential(1.0))
    p = np.zeros(4)
    out = covariant_derivative(spec, p, DT, np.zeros(4), DX)
    assert np.allclose(out, DX, atol=1e-15)


def test_covariant_derivative_of_space_axis():
    spec = AmbientSpec(WarpingFunction.exponential(1.0))
    p = np.zeros(4)
    out = covariant_derivative(spec, p, DX, np.zeros(4), DX)
    assert np.allclose(out, DT, atol=1e-15)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=12, max_size=12),
       st.sampled_from([-1, 0, 1]), st.sampled_from(sorted(WARPINGS)))
def test_split_connection_agrees(vals, c, kind):
    w, _ = WARPINGS[kind]
    spec = AmbientSpec(w, c)
    p = np.array([0.3, 0.2, -0.1, 0.4])
    x, dx, d = np.array(vals).reshape(3, 4)
    a = covariant_derivative(spec, p, x, dx, d)
    b = covariant_derivative_split(spec, p, x, dx, d)
    assert np.max(np.abs(a - b)) < 1e-12 * (1 + np.max(np.abs(a)))


def test_split_connection_vectorized(rng):
    spec = AmbientSpec(WarpingFunction.cosh(1.0, 0.5), 1)
    p = random_points(rng, 50, (-1, 1), 1)
    x, dx, d = rng.normal(size=(3, 50, 4))
    a = covariant_derivative(spec, p, x, dx, d)
    b = covariant_derivative_split(spec, p, x, dx, d)
    assert a.shape == (50, 4)
    assert np.max(np.abs(a - b)) < 1e-12


# -- causal character --------------------------------------------------------------

def test_causal_character_examples():
    flat = AmbientSpec(WarpingFunction.constant(1.0))
    p = np.zeros(4)
    assert causal_character(flat, p, DT) == "timelike"
    assert causal_character(flat, p, DX) == "spacelike"
    assert causal_character(flat, p, DT + DX) == "null"


def test_causal_character_zero_vector():
    flat = AmbientSpec(WarpingFunction.constant(1.0))
    with pytest.raises(InvalidInputError):
        causal_character(flat, np.zeros(4), np.zeros(4))


def test_curvature_must_be_unit_or_zero():
    with pytest.raises(InvalidInputError):
        AmbientSpec(WarpingFunction.constant(1.0), 2)


def test_spec_record_roundtrip():
    spec = AmbientSpec(WarpingFunction.cosh(1.0, 0.5), -1)
    assert AmbientSpec.from_dict(spec.to_dict()) == spec
