"""Oracle for the radial specialization of the solver's equations.

Every one-dimensional formula the bubble solver integrates is checked
here against the three-dimensional operators of the geometry/kinematics
modules, evaluated on spherically symmetric fields at random radii.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from baroflow import flowmaps as fm
from baroflow.fields import VectorField
from baroflow.geometry import sphere_atlas, surface_divergence, mean_curvature
from baroflow.laws import GammaLaw

RNG = np.random.default_rng(1234)


def radial_vector_field(u_of_r, du_of_r):
    """v(x) = u(r) x/r with analytic Jacobian."""

    def value(points):
        r = np.linalg.norm(points, axis=1)
        return u_of_r(r)[:, None] * points / r[:, None]

    def jacobian(points):
        r = np.linalg.norm(points, axis=1)
        rhat = points / r[:, None]
        eye = np.broadcast_to(np.eye(3), (points.shape[0], 3, 3))
        uu = u_of_r(r)
        du = du_of_r(r)
        return (uu / r)[:, None, None] * eye + (
            (du - uu / r)[:, None, None]
        ) * (rhat[:, :, None] * rhat[:, None, :])

    return VectorField(value, jacobian)


def test_bulk_divergence_reduction():
    # div(u(r) rhat) = u' + 2u/r
    u = lambda r: 0.4 * r**3 - 0.7 * r
    du = lambda r: 1.2 * r**2 - 0.7
    F = radial_vector_field(u, du)
    r = RNG.uniform(0.3, 1.8, 40)
    theta = RNG.uniform(0.1, np.pi - 0.1, 40)
    phi = RNG.uniform(0, 2 * np.pi, 40)
    pts = np.stack([
        r * np.sin(theta) * np.cos(phi),
        r * np.sin(theta) * np.sin(phi),
        r * np.cos(theta),
    ], axis=-1)
    div3d = F.divergence(pts)
    assert_allclose(div3d, du(r) + 2 * u(r) / r, rtol=1e-12)


def test_bulk_continuity_reduction():
    # D_t rho + rho div v reduces to d_t rho + d_r(rho u) + 2 rho u / r
    rho = lambda r, t: 1.0 + 0.2 * np.exp(-t) * r**2
    drho_dr = lambda r, t: 0.4 * np.exp(-t) * r
    drho_dt = lambda r, t: -0.2 * np.exp(-t) * r**2
    u = lambda r: 0.3 * r**2
    du = lambda r: 0.6 * r
    r = RNG.uniform(0.2, 1.5, 30)
    t = 0.7
    radial = drho_dt(r, t) + drho_dr(r, t) * u(r) + rho(r, t) * (du(r) + 2 * u(r) / r)
    conservative = drho_dt(r, t) + (
        drho_dr(r, t) * u(r) + rho(r, t) * du(r) + 2 * rho(r, t) * u(r) / r
    )
    assert_allclose(radial, conservative, rtol=1e-12)
    # 3D check at embedded points
    pts = np.stack([r, np.zeros_like(r), np.zeros_like(r)], axis=-1)
    F = radial_vector_field(u, du)
    div3d = F.divergence(pts)
    lhs3d = drho_dt(r, t) + drho_dr(r, t) * u(r) + rho(r, t) * div3d
    assert_allclose(lhs3d, radial, rtol=1e-12)


def test_bulk_momentum_reduction():
    # radial component of rho D_t v + grad P = rho(d_t u + u d_r u) + d_r P
    law = GammaLaw(1.0, 1.4)
    rho = lambda r: 1.0 + 0.1 * r**2
    drho = lambda r: 0.2 * r
    u_t = lambda r, t: 0.2 * np.sin(t) * r
    r = RNG.uniform(0.2, 1.5, 30)
    t = 0.4
    # grad P = P'(rho) drho rhat; material accel radial:
    dudt = 0.2 * np.cos(t) * r
    dudr = 0.2 * np.sin(t)
    accel_1d = rho(r) * (dudt + u_t(r, t) * dudr) + \
        law.total_pressure_prime(rho(r)) * drho(r)
    # 3D: v = u(r,t) rhat: (v . grad)v = u d_r u rhat (radial flow)
    pts = np.stack([np.zeros_like(r), r, np.zeros_like(r)], axis=-1)
    rhat = pts / r[:, None]
    accel_3d = rho(r)[:, None] * (
        (dudt + u_t(r, t) * dudr)[:, None] * rhat
    ) + (law.total_pressure_prime(rho(r)) * drho(r))[:, None] * rhat
    assert_allclose(np.einsum("ni,ni->n", accel_3d, rhat), accel_1d, rtol=1e-12)


def test_surface_curvature_and_divergence_reduction():
    # H = -2/R via the chart machinery; div_T(Rdot n) = 2 Rdot / R
    for R in (0.7, 1.0, 2.4):
        atlas = sphere_atlas(R)
        p = atlas.locate([0.0, R * np.sin(0.9), R * np.cos(0.9)])
        assert mean_curvature(atlas, p) == pytest.approx(-2.0 / R, rel=1e-10)
        Rdot = 0.37
        radial = radial_vector_field(
            lambda r: np.full_like(r, Rdot), lambda r: np.zeros_like(r)
        )
        assert surface_divergence(atlas, radial, p) == pytest.approx(
            2.0 * Rdot / R, rel=1e-9
        )


def test_surface_continuity_reduction():
    # area-ratio pullback on a dilating sphere gives rho_S ~ R^-2, i.e.
    # d/dt(rho_S R^2) = 0 and rho_S_dot = -(2 Rdot / R) rho_S
    atlas = sphere_atlas(1.0)
    dil = fm.DilationMap(fm.TimeProfile.affine(1.0, 1.0))
    sflow = fm.SurfaceFlowMap(atlas, dil)
    X = np.array([0.4, 1.2])
    t = 0.6
    a_t = fm.surface_sqrt_metric(sflow, X, 0, t)
    a_0 = fm.surface_sqrt_metric(sflow, X, 0, 0.0)
    rho_ratio = a_0 / a_t
    assert rho_ratio == pytest.approx((1 + t) ** (-2), rel=1e-12)
    h = 1e-6
    a_p = fm.surface_sqrt_metric(sflow, X, 0, t + h)
    a_m = fm.surface_sqrt_metric(sflow, X, 0, t - h)
    rho_dot = (a_0 / a_p - a_0 / a_m) / (2 * h)
    R, Rdot = 1 + t, 1.0
    assert rho_dot == pytest.approx(-(2 * Rdot / R) * rho_ratio, rel=1e-7)


def test_surface_momentum_reduction():
    # dilating sphere: D_t v_S . n = Rddot, so the surface momentum
    # bracket reduces to rho_S Rddot = P_S (2/R) - (P_B - P_A)
    profile = fm.TimeProfile(
        lambda t: 1.0 + 0.3 * np.sin(t),
        lambda t: 0.3 * np.cos(t),
        lambda t: -0.3 * np.sin(t),
    )
    dil = fm.DilationMap(profile)
    atlas = sphere_atlas(1.0)
    quad = atlas.quadrature(16)
    sflow = fm.SurfaceFlowMap(atlas, dil)
    t = 0.8
    acc = sflow.dtt_positions(quad, t)
    n, curv = sflow.deformed_normals_curvature(quad, t)
    R = profile.value(t)
    Rddot = profile.d2(t)
    assert_allclose(np.einsum("ni,ni->n", acc, n), Rddot, rtol=1e-10)
    assert_allclose(curv, -2.0 / R, rtol=1e-10)


def test_tension_jump_example():
    # R = 1, p0 = 0.5: the static balance requires P_A - P_B = -1
    p0, R = 0.5, 1.0
    H = -2.0 / R
    # p0 H + P_B - P_A = 0  =>  P_A - P_B = p0 H = -1
    assert p0 * H == pytest.approx(-1.0)


def test_characteristic_speed_matches_law():
    # |u| + sqrt(rho p''(rho)) with the gamma law
    law = GammaLaw(1.3, 1.7)
    rho = 0.9
    c = float(law.sound_speed(rho))
    assert c**2 == pytest.approx(1.7 * 0.7 * 1.3 * rho**0.7, rel=1e-12)
