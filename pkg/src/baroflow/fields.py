"""Ambient scalar and vector fields with analytic or fallback derivatives.

Fields are vectorized callables over (n, 3) point arrays.  Analytic
derivatives are used whenever the constructor supplies them; otherwise
4th-order central differences with step 1e-5 in ambient coordinates are
substituted, which keeps every surface operator faithful to the projected
derivative definition while allowing arbitrary user fields.
"""

import numpy as np

__all__ = [
    "FD_STEP",
    "fd_gradient",
    "fd_jacobian",
    "ScalarField",
    "VectorField",
    "SpaceTimeVectorField",
    "constant_field",
    "linear_scalar",
    "polynomial_scalar",
    "smooth_step",
    "bump_profile",
]

FD_STEP = 1e-5
_FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FD4_COEFFS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def fd_gradient(func, points, step=FD_STEP):
    """4th-order central-difference gradient of a scalar function."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    grad = np.zeros_like(points)
    for j in range(3):
        acc = np.zeros(points.shape[0])
        for off, coef in zip(_FD4_OFFSETS, _FD4_COEFFS):
            shifted = points.copy()
            shifted[:, j] += off * step
            acc += coef * np.asarray(func(shifted), dtype=float)
        grad[:, j] = acc / step
    return grad


def fd_jacobian(func, points, step=FD_STEP):
    """4th-order central-difference Jacobian d(func_i)/dx_j, shape (n, 3, 3)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    jac = np.zeros((points.shape[0], 3, 3))
    for j in range(3):
        acc = np.zeros((points.shape[0], 3))
        for off, coef in zip(_FD4_OFFSETS, _FD4_COEFFS):
            shifted = points.copy()
            shifted[:, j] += off * step
            acc += coef * np.asarray(func(shifted), dtype=float)
        jac[:, :, j] = acc / step
    return jac


class ScalarField:
    """Scalar field f : R^3 -> R with a gradient (analytic when supplied)."""

    def __init__(self, value, gradient=None, name=""):
        self._value = value
        self._gradient = gradient
        self.name = name

    def __call__(self, points):
        return np.asarray(self._value(np.atleast_2d(points)), dtype=float)

    def gradient(self, points):
        points = np.atleast_2d(points)
        if self._gradient is not None:
            return np.asarray(self._gradient(points), dtype=float)
        return fd_gradient(self._value, points)


class VectorField:
    """Vector field F : R^3 -> R^3 with a Jacobian (analytic when supplied)."""

    def __init__(self, value, jacobian=None, name=""):
        self._value = value
        self._jacobian = jacobian
        self.name = name

    def __call__(self, points):
        return np.asarray(self._value(np.atleast_2d(points)), dtype=float)

    def jacobian(self, points):
        points = np.atleast_2d(points)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(points), dtype=float)
        return fd_jacobian(self._value, points)

    def divergence(self, points):
        jac = self.jacobian(points)
        return np.einsum("nii->n", jac)


class SpaceTimeVectorField:
    """Time-dependent vector field z(x, t) with spatial Jacobian and d/dt.

    The three callables receive ((n,3) points, t) and return (n,3),
    (n,3,3) and (n,3) arrays.  Missing derivatives fall back to central
    differences.
    """

    def __init__(self, value, jacobian=None, dt=None, name=""):
        self._value = value
        self._jacobian = jacobian
        self._dt = dt
        self.name = name

    def __call__(self, points, t):
        return np.asarray(self._value(np.atleast_2d(points), t), dtype=float)

    def jacobian(self, points, t):
        points = np.atleast_2d(points)
        if self._jacobian is not None:
            return np.asarray(self._jacobian(points, t), dtype=float)
        return fd_jacobian(lambda p: self._value(p, t), points)

    def dt(self, points, t):
        points = np.atleast_2d(points)
        if self._dt is not None:
            return np.asarray(self._dt(points, t), dtype=float)
        acc = np.zeros((points.shape[0], 3))
        for off, coef in zip(_FD4_OFFSETS, _FD4_COEFFS):
            acc += coef * np.asarray(self._value(points, t + off * FD_STEP))
        return acc / FD_STEP

    def divergence(self, points, t):
        jac = self.jacobian(points, t)
        return np.einsum("nii->n", jac)


def constant_field(vec):
    vec = np.asarray(vec, dtype=float)

    def value(points):
        return np.broadcast_to(vec, (points.shape[0], 3)).copy()

    def jac(points):
        return np.zeros((points.shape[0], 3, 3))

    return VectorField(value, jac, name="constant")


def linear_scalar(coeffs, offset=0.0):
    """f(x) = coeffs . x + offset."""
    coeffs = np.asarray(coeffs, dtype=float)
    return ScalarField(
        lambda p: p @ coeffs + offset,
        lambda p: np.broadcast_to(coeffs, (p.shape[0], 3)).copy(),
    )


def polynomial_scalar(terms):
    """Scalar field sum_k c_k x^i y^j z^k from [(c, (i, j, k)), ...]."""
    terms = [(float(c), tuple(int(e) for e in exps)) for c, exps in terms]

    def value(points):
        out = np.zeros(points.shape[0])
        for c, (i, j, k) in terms:
            out += c * points[:, 0] ** i * points[:, 1] ** j * points[:, 2] ** k
        return out

    def gradient(points):
        out = np.zeros_like(points)
        for c, (i, j, k) in terms:
            x, y, z = points[:, 0], points[:, 1], points[:, 2]
            if i:
                out[:, 0] += c * i * x ** (i - 1) * y**j * z**k
            if j:
                out[:, 1] += c * j * x**i * y ** (j - 1) * z**k
            if k:
                out[:, 2] += c * k * x**i * y**j * z ** (k - 1)
        return out

    return ScalarField(value, gradient, name="polynomial")


def smooth_step(t):
    """C-infinity step: 0 for t<=0, 1 for t>=1, exp-based in between.

    Computed as a/(a+b) with a=exp(-1/t), b=exp(-1/(1-t)); the shared
    denominator makes complementary steps sum to 1 to roundoff.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lo = t <= 0.0
    hi = t >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    out[mid] = a / (a + b)
    return out


def smooth_step_derivative(t):
    """Derivative of :func:`smooth_step` (analytic)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tm = t[mid]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    da = a / tm**2
    db = -b / (1.0 - tm) ** 2
    out[mid] = (da * b - a * db) / (a + b) ** 2
    return out


# C^5 polynomial smoothstep: S(0)=0, S(1)=1, first five derivatives vanish
# at both ends.  Piecewise-polynomial, so Gauss panels split at the
# junctions integrate products with it exactly.
_POLY_STEP = np.array([462.0, -1980.0, 3465.0, -3080.0, 1386.0, -252.0])
_POLY_STEP_D = np.array([6.0 * 462.0, 7.0 * -1980.0, 8.0 * 3465.0,
                         9.0 * -3080.0, 10.0 * 1386.0, 11.0 * -252.0])


def poly_smooth_step(t):
    """C^5 polynomial step: 0 for t<=0, 1 for t>=1, degree 11 between."""
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, 0.0, 1.0)
    t6 = tc**6
    return t6 * (
        _POLY_STEP[0]
        + tc * (_POLY_STEP[1] + tc * (_POLY_STEP[2] + tc * (
            _POLY_STEP[3] + tc * (_POLY_STEP[4] + tc * _POLY_STEP[5]))))
    )


def poly_smooth_step_derivative(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    tc = t[mid]
    t5 = tc**5
    out[mid] = t5 * (
        _POLY_STEP_D[0]
        + tc * (_POLY_STEP_D[1] + tc * (_POLY_STEP_D[2] + tc * (
            _POLY_STEP_D[3] + tc * (_POLY_STEP_D[4] + tc * _POLY_STEP_D[5]))))
    )
    return out


def bump_profile(center, radius):
    """Compactly supported C-infinity bump eta(x) with analytic gradient.

    eta = exp(1 - 1/(1 - s)) for s = |x-c|^2/r^2 < 1, zero outside.
    Returns (value, gradient) callables.
    """
    center = np.asarray(center, dtype=float)
    r2 = float(radius) ** 2

    def value(points):
        d = points - center
        s = np.einsum("ni,ni->n", d, d) / r2
        out = np.zeros(points.shape[0])
        inside = s < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        return out

    def gradient(points):
        d = points - center
        s = np.einsum("ni,ni->n", d, d) / r2
        out = np.zeros_like(points)
        inside = s < 1.0
        si = s[inside]
        val = np.exp(1.0 - 1.0 / (1.0 - si))
        deta_ds = -val / (1.0 - si) ** 2
        out[inside] = (2.0 / r2) * deta_ds[:, None] * d[inside]
        return out

    return value, gradient
