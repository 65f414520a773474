import numpy as np
import pytest

from baroflow.quadrature import (
    ball_quadrature,
    gauss_legendre,
    periodic_uniform,
    shell_quadrature,
)


def test_gauss_exactness():
    x, w = gauss_legendre(6, 0.0, 2.0)
    # exact for degree <= 11
    for k in range(12):
        exact = 2.0 ** (k + 1) / (k + 1)
        assert abs(np.dot(w, x**k) - exact) < 1e-12 * exact


def test_periodic_rule():
    x, w = periodic_uniform(16)
    assert abs(np.dot(w, np.cos(3 * x))) < 1e-14
    assert abs(np.dot(w, np.ones_like(x)) - 2 * np.pi) < 1e-14


def test_ball_volume_and_moments():
    q = ball_quadrature(1.0, n_r=16, n_mu=12, n_phi=20)
    vol = q.integrate(lambda p: np.ones(p.shape[0]))
    assert abs(vol - 4 * np.pi / 3) < 1e-12
    # int z^2 over unit ball = 4 pi / 15
    assert abs(q.integrate(lambda p: p[:, 2] ** 2) - 4 * np.pi / 15) < 1e-12


def test_shell_volume():
    q = shell_quadrature(1.0, 2.0, center=(0.5, 0.0, -1.0))
    vol = q.integrate(lambda p: np.ones(p.shape[0]))
    assert abs(vol - 4 * np.pi / 3 * 7) < 1e-10


def test_shell_validation():
    with pytest.raises(ValueError):
        shell_quadrature(2.0, 1.0)
