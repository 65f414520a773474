import numpy as np
from numpy.testing import assert_allclose

from baroflow.fields import (
    ScalarField,
    VectorField,
    bump_profile,
    constant_field,
    fd_gradient,
    fd_jacobian,
    linear_scalar,
    poly_smooth_step,
    poly_smooth_step_derivative,
    polynomial_scalar,
    smooth_step,
)


def test_fd_gradient_matches_analytic():
    f = polynomial_scalar([(1.0, (2, 1, 0)), (-0.5, (0, 0, 3))])
    pts = np.random.default_rng(0).uniform(-1, 1, (40, 3))
    assert_allclose(fd_gradient(f, pts), f.gradient(pts), atol=1e-9)


def test_scalar_field_fd_fallback():
    f = ScalarField(lambda p: np.sin(p[:, 0]) * p[:, 1])
    pts = np.random.default_rng(1).uniform(-1, 1, (10, 3))
    expect = np.stack(
        [np.cos(pts[:, 0]) * pts[:, 1], np.sin(pts[:, 0]),
         np.zeros(pts.shape[0])], axis=-1
    )
    assert_allclose(f.gradient(pts), expect, atol=1e-9)


def test_vector_field_divergence():
    F = VectorField(lambda p: np.stack(
        [p[:, 0] ** 2, p[:, 1] * p[:, 2], -p[:, 2]], axis=-1))
    pts = np.random.default_rng(2).uniform(-1, 1, (10, 3))
    assert_allclose(F.divergence(pts), 2 * pts[:, 0] + pts[:, 2] - 1, atol=1e-8)


def test_constant_and_linear():
    c = constant_field([1.0, -2.0, 3.0])
    pts = np.zeros((5, 3))
    assert_allclose(c(pts)[2], [1.0, -2.0, 3.0])
    assert_allclose(c.jacobian(pts), 0.0)
    f = linear_scalar([1.0, 0.0, 2.0], offset=-1.0)
    assert_allclose(f(np.array([[1.0, 5.0, 2.0]])), [4.0])


def test_bump_profile_support_and_gradient():
    val, grad = bump_profile((0.5, 0.0, 0.0), 0.4)
    outside = np.array([[1.2, 0.0, 0.0], [0.5, 0.5, 0.0]])
    assert np.all(val(outside) == 0.0)
    assert np.all(grad(outside) == 0.0)
    inside = np.array([[0.6, 0.1, -0.05]])
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (val(inside + e) - val(inside - e)) / (2 * h)
        assert abs(fd[0] - grad(inside)[0, j]) < 1e-8


def test_smooth_step_partition():
    t = np.linspace(-0.5, 1.5, 201)
    s = smooth_step(t)
    assert np.all(s[t <= 0] == 0.0)
    assert np.all(s[t >= 1] == 1.0)
    assert np.max(np.abs(smooth_step(t) + smooth_step(1 - t) - 1.0)) < 1e-14


def test_poly_step_smoothness():
    t = np.linspace(-0.2, 1.2, 401)
    h = 1e-5
    fd = (poly_smooth_step(t + h) - poly_smooth_step(t - h)) / (2 * h)
    assert np.max(np.abs(fd - poly_smooth_step_derivative(t))) < 1e-6
    assert poly_smooth_step(0.0) == 0.0
    assert poly_smooth_step(1.0) == 1.0
    # C^5: fifth derivative of t^6(...) vanishes at 0; check flatness
    assert poly_smooth_step(1e-3) < 1e-15


def test_fd_jacobian():
    F = VectorField(lambda p: np.stack(
        [p[:, 1], p[:, 2] ** 2, p[:, 0] * p[:, 1]], axis=-1))
    pts = np.random.default_rng(3).uniform(-1, 1, (5, 3))
    jac = fd_jacobian(F, pts)
    assert_allclose(jac[:, 0, 1], 1.0, atol=1e-9)
    assert_allclose(jac[:, 1, 2], 2 * pts[:, 2], atol=1e-8)
    assert_allclose(jac[:, 2, 0], pts[:, 1], atol=1e-8)
