"""Deterministic quadrature rules for intervals, balls, shells and time axes.

All rules are tensor products of Gauss-Legendre nodes (plus a uniform
periodic rule in the azimuthal angle, which is spectrally accurate for
periodic integrands).  Node ordering is fixed at construction so that
every reduction is a plain ``np.dot`` in a reproducible order.
"""

import numpy as np

__all__ = [
    "gauss_legendre",
    "periodic_uniform",
    "BulkQuadrature",
    "ball_quadrature",
    "shell_quadrature",
]


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre nodes/weights mapped to the interval [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def periodic_uniform(n, period=2.0 * np.pi):
    """Uniform nodes on [0, period); exact for trigonometric polynomials."""
    x = np.arange(n) * (period / n)
    w = np.full(n, period / n)
    return x, w


class BulkQuadrature:
    """Fixed nodes/weights for a volume integral over a radial annulus.

    ``points`` is (n, 3), ``weights`` is (n,) and already contains the
    r^2 sin(theta) volume element, so ``integrate(f) = sum_i w_i f(x_i)``.
    """

    def __init__(self, points, weights, center):
        self.points = np.asarray(points, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        self.center = np.asarray(center, dtype=float)

    @property
    def n_nodes(self):
        return self.points.shape[0]

    def integrate(self, values_or_func):
        if callable(values_or_func):
            values = np.asarray(values_or_func(self.points), dtype=float)
        else:
            values = np.asarray(values_or_func, dtype=float)
        return float(np.dot(self.weights, values))


def shell_quadrature(r_inner, r_outer, center=(0.0, 0.0, 0.0),
                     n_r=20, n_mu=16, n_phi=32):
    """Product Gauss rule on the spherical shell r_inner < |x-c| < r_outer."""
    if not 0.0 <= r_inner < r_outer:
        raise ValueError("need 0 <= r_inner < r_outer")
    r, wr = gauss_legendre(n_r, r_inner, r_outer)
    mu, wmu = gauss_legendre(n_mu, -1.0, 1.0)
    phi, wphi = periodic_uniform(n_phi)

    R, MU, PHI = np.meshgrid(r, mu, phi, indexing="ij")
    WR, WMU, WPHI = np.meshgrid(wr, wmu, wphi, indexing="ij")
    s = np.sqrt(1.0 - MU**2)
    pts = np.stack(
        [R * s * np.cos(PHI), R * s * np.sin(PHI), R * MU], axis=-1
    ).reshape(-1, 3)
    w = (WR * WMU * WPHI * R**2).reshape(-1)
    center = np.asarray(center, dtype=float)
    return BulkQuadrature(pts + center, w, center)


def ball_quadrature(radius, center=(0.0, 0.0, 0.0), n_r=20, n_mu=16, n_phi=32):
    """Product Gauss rule on the solid ball |x-c| < radius."""
    return shell_quadrature(0.0, radius, center, n_r, n_mu, n_phi)
