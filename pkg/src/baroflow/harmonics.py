"""Real spherical harmonics and their tangential gradients on spheres.

Harmonics are evaluated through pole-free Cartesian recurrences: with
u the unit position, ``Y ~ T_l^m(u3) * Re/Im[(u1 + i u2)^m]`` where
``T_l^m = P_l^m / sin^m(theta)`` is a polynomial in u3 satisfying the
usual three-term recurrence.  No spherical angles appear, so values and
gradients are uniformly accurate including at the poles.

Basis ordering: index(l, m) = l^2 + l + m with m < 0 the sine branch
and m > 0 the cosine branch; normalization is orthonormal on the unit
sphere (L2 norm R on a radius-R sphere).
"""

import math

import numpy as np

__all__ = [
    "sh_index",
    "sh_degree_order",
    "SphericalHarmonicBasis",
    "rotational_field",
]


def sh_index(l, m):
    return l * l + l + m


def sh_degree_order(idx):
    l = int(math.isqrt(idx))
    return l, idx - l * l - l


class SphericalHarmonicBasis:
    """All real harmonics of degree <= L on a sphere (radius, center)."""

    def __init__(self, max_degree, radius=1.0, center=(0.0, 0.0, 0.0)):
        self.max_degree = int(max_degree)
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.size = (self.max_degree + 1) ** 2
        self._norms = self._normalizations(self.max_degree)

    @staticmethod
    def _normalizations(L):
        norms = np.zeros((L + 1, L + 1))
        for l in range(L + 1):
            for m in range(l + 1):
                n = math.sqrt(
                    (2 * l + 1)
                    / (4.0 * math.pi)
                    * math.factorial(l - m)
                    / math.factorial(l + m)
                )
                if m > 0:
                    n *= math.sqrt(2.0)
                norms[l, m] = n
        return norms

    def _unit(self, points):
        u = (np.atleast_2d(points) - self.center) / self.radius
        return u

    def values_gradients(self, points):
        """Harmonic values (n, K) and ambient gradients (n, K, 3).

        Gradients are of the degree-homogeneous-free extension Y(u(x))
        with u = (x - c)/R; project with (I - n n^T) for the tangential
        gradient on the sphere.
        """
        u = self._unit(points)
        n_pts = u.shape[0]
        L = self.max_degree
        K = self.size
        Y = np.zeros((n_pts, K))
        dY = np.zeros((n_pts, K, 3))

        u1, u2, u3 = u[:, 0], u[:, 1], u[:, 2]
        # C_m + i S_m = (u1 + i u2)^m, plus m-1 values for derivatives
        C = [np.ones(n_pts)]
        S = [np.zeros(n_pts)]
        for m in range(1, L + 1):
            C.append(C[-1] * u1 - S[-1] * u2)
            S.append(S[-1] * u1 + C[-2] * u2)

        inv_R = 1.0 / self.radius
        for m in range(L + 1):
            # T_l^m(u3) and dT/du3 by upward recurrence in l
            Tmm = float((-1) ** m * math.prod(range(1, 2 * m, 2)))
            T_prev = np.full(n_pts, Tmm)
            dT_prev = np.zeros(n_pts)
            T_curr = None
            for l in range(m, L + 1):
                if l == m:
                    T, dT = T_prev, dT_prev
                elif l == m + 1:
                    T = (2 * m + 1) * u3 * T_prev
                    dT = (2 * m + 1) * T_prev
                    T_curr, dT_curr = T, dT
                else:
                    T = ((2 * l - 1) * u3 * T_curr - (l + m - 1) * T_prev) / (l - m)
                    dT = (
                        (2 * l - 1) * (T_curr + u3 * dT_curr)
                        - (l + m - 1) * dT_prev
                    ) / (l - m)
                    T_prev, dT_prev = T_curr, dT_curr
                    T_curr, dT_curr = T, dT
                norm = self._norms[l, m]
                if m == 0:
                    k = sh_index(l, 0)
                    Y[:, k] = norm * T
                    dY[:, k, 2] = norm * dT * inv_R
                else:
                    kc = sh_index(l, m)
                    ks = sh_index(l, -m)
                    Y[:, kc] = norm * T * C[m]
                    Y[:, ks] = norm * T * S[m]
                    dY[:, kc, 0] = norm * T * m * C[m - 1] * inv_R
                    dY[:, kc, 1] = norm * T * (-m) * S[m - 1] * inv_R
                    dY[:, kc, 2] = norm * dT * C[m] * inv_R
                    dY[:, ks, 0] = norm * T * m * S[m - 1] * inv_R
                    dY[:, ks, 1] = norm * T * m * C[m - 1] * inv_R
                    dY[:, ks, 2] = norm * dT * S[m] * inv_R
        return Y, dY

    def tangential_gradients(self, points):
        """Y values plus surface gradients (I - n n^T) grad Y."""
        u = self._unit(points)
        Y, dY = self.values_gradients(points)
        ndot = np.einsum("nkj,nj->nk", dY, u)
        grad_t = dY - ndot[:, :, None] * u[:, None, :]
        return Y, grad_t

    def evaluate(self, points, coeffs):
        Y, _ = self.values_gradients(points)
        return Y @ np.asarray(coeffs, dtype=float)

    def evaluate_gradient(self, points, coeffs):
        _, grad_t = self.tangential_gradients(points)
        return np.einsum("nkj,k->nj", grad_t, np.asarray(coeffs, dtype=float))


def rotational_field(basis, l, m):
    """Surface-divergence-free field n x grad_T Y_lm (unnormalized)."""
    k = sh_index(l, m)

    def field(points):
        u = basis._unit(points)
        _, grad_t = basis.tangential_gradients(points)
        return np.cross(u, grad_t[:, k, :])

    return field
