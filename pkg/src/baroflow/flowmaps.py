"""Flow maps, their Riemannian metrics and transport identities.

Bulk flow maps are analytic diffeomorphism families x(xi, t) with
x(xi, 0) = xi; the catalog (identity, dilation, rotation, shear, radial
profiles, composition) supplies maps, Jacobians, Hessians, time
derivatives and inverses in closed form, so the verification suites probe
exact kinematics rather than ODE-integrated approximations.  Densities
are realized by pullback (rho = rho0 / sqrtG in the bulk, area-element
ratio on surfaces), which satisfies the continuity equation by
construction.

Metric time derivatives use 4th-order central differences by default
(step 1e-4 * max(1, T)); the difference order is an argument so the
empirical convergence checks can run at order 2 where truncation
dominates roundoff.
"""

import numpy as np

from .geometry import frame_normal_curvature
from .laws import SingularMetricError

__all__ = [
    "TimeProfile",
    "BulkFlowMap",
    "IdentityMap",
    "DilationMap",
    "RotationMap",
    "ShearMap",
    "RadialPolynomialMap",
    "ComposedMap",
    "flow_from_config",
    "SurfaceFlowMap",
    "bulk_sqrt_metric",
    "surface_sqrt_metric",
    "transport_identity_residual",
    "continuity_residual",
    "pushforward_integral",
    "internal_energy_rate_residual",
    "kinetic_energy_rate_residual",
]

_FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_FD4_COEFFS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_FD2_OFFSETS = np.array([-1.0, 1.0])
_FD2_COEFFS = np.array([-0.5, 0.5])


def _fd_weights(order):
    if order == 2:
        return _FD2_OFFSETS, _FD2_COEFFS
    if order == 4:
        return _FD4_OFFSETS, _FD4_COEFFS
    raise ValueError("difference order must be 2 or 4")


class TimeProfile:
    """Scalar time profile with analytic first and second derivatives."""

    def __init__(self, value, d1, d2, name=""):
        self.value = value
        self.d1 = d1
        self.d2 = d2
        self.name = name

    @classmethod
    def affine(cls, intercept, slope):
        return cls(
            lambda t: intercept + slope * t,
            lambda t: slope,
            lambda t: 0.0,
            name=f"affine({intercept},{slope})",
        )

    @classmethod
    def exponential(cls, rate):
        return cls(
            lambda t: np.exp(rate * t),
            lambda t: rate * np.exp(rate * t),
            lambda t: rate * rate * np.exp(rate * t),
            name=f"exp({rate})",
        )

    @classmethod
    def sine(cls, amplitude, omega):
        return cls(
            lambda t: amplitude * np.sin(omega * t),
            lambda t: amplitude * omega * np.cos(omega * t),
            lambda t: -amplitude * omega * omega * np.sin(omega * t),
            name=f"sine({amplitude},{omega})",
        )


class BulkFlowMap:
    """Base class: analytic flow map of a bulk region.

    Subclasses implement ``map``, ``jacobian``, ``hessian``, ``dt_map``,
    ``dtt_map``, ``dt_jacobian`` and ``inverse``, all vectorized over
    (n, 3) reference points.
    """

    name = "flow"

    def velocity(self, x, t):
        """Eulerian velocity v(x, t) = dt_map(inverse(x, t), t)."""
        return self.dt_map(self.inverse(x, t), t)

    def velocity_jacobian_ref(self, xi, t):
        """grad_x v evaluated at x(xi, t), from reference data."""
        J = self.jacobian(xi, t)
        dtJ = self.dt_jacobian(xi, t)
        return np.einsum("nij,njk->nik", dtJ, np.linalg.inv(J))

    def velocity_divergence_ref(self, xi, t):
        """div v at x(xi, t)."""
        return np.einsum("nii->n", self.velocity_jacobian_ref(xi, t))

    def sqrt_metric(self, xi, t):
        """det grad_xi x; positive for orientation-preserving maps."""
        det = np.linalg.det(self.jacobian(xi, t))
        if np.any(det <= 1e-14):
            raise SingularMetricError("flow-map Jacobian is not invertible")
        return det

    def sqrt_metric_gradient(self, xi, t):
        """grad_xi of det grad_xi x via the Jacobi formula."""
        J = self.jacobian(xi, t)
        H = self.hessian(xi, t)
        det = self.sqrt_metric(xi, t)
        Jinv = np.linalg.inv(J)
        # d_k det = det * tr(J^-1 d_k J); (d_k J)_{ia} = H[i, a, k]
        return det[:, None] * np.einsum("nai,niak->nk", Jinv, H)


class IdentityMap(BulkFlowMap):
    name = "identity"

    def map(self, xi, t):
        return np.array(np.atleast_2d(xi), dtype=float, copy=True)

    def jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        return np.broadcast_to(np.eye(3), (n, 3, 3)).copy()

    def hessian(self, xi, t):
        return np.zeros((np.atleast_2d(xi).shape[0], 3, 3, 3))

    def dt_map(self, xi, t):
        return np.zeros_like(np.atleast_2d(xi), dtype=float)

    dtt_map = dt_map

    def dt_jacobian(self, xi, t):
        return np.zeros((np.atleast_2d(xi).shape[0], 3, 3))

    def inverse(self, x, t):
        return np.array(np.atleast_2d(x), dtype=float, copy=True)


class DilationMap(BulkFlowMap):
    """x = c + a(t) (xi - c) with a(0) = 1."""

    name = "dilation"

    def __init__(self, profile=None, center=(0.0, 0.0, 0.0)):
        self.profile = profile or TimeProfile.affine(1.0, 1.0)
        self.center = np.asarray(center, dtype=float)

    def map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        return self.center + self.profile.value(t) * q

    def jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        return self.profile.value(t) * np.broadcast_to(np.eye(3), (n, 3, 3)).copy()

    def hessian(self, xi, t):
        return np.zeros((np.atleast_2d(xi).shape[0], 3, 3, 3))

    def dt_map(self, xi, t):
        return self.profile.d1(t) * (np.atleast_2d(xi) - self.center)

    def dtt_map(self, xi, t):
        return self.profile.d2(t) * (np.atleast_2d(xi) - self.center)

    def dt_jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        return self.profile.d1(t) * np.broadcast_to(np.eye(3), (n, 3, 3)).copy()

    def inverse(self, x, t):
        return self.center + (np.atleast_2d(x) - self.center) / self.profile.value(t)


def _skew(axis):
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)
    return np.array(
        [[0.0, -ax[2], ax[1]], [ax[2], 0.0, -ax[0]], [-ax[1], ax[0], 0.0]]
    )


class RotationMap(BulkFlowMap):
    """Rigid rotation about an axis through ``center``, angle theta(t)."""

    name = "rotation"

    def __init__(self, axis=(0.0, 0.0, 1.0), profile=None, center=(0.0, 0.0, 0.0)):
        self.axis = np.asarray(axis, dtype=float) / np.linalg.norm(axis)
        self.profile = profile or TimeProfile.affine(0.0, 1.0)
        self.center = np.asarray(center, dtype=float)
        self._K = _skew(self.axis)

    def _rot(self, t):
        K = self._K
        th = self.profile.value(t)
        return np.eye(3) + np.sin(th) * K + (1.0 - np.cos(th)) * (K @ K)

    def map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        return self.center + q @ self._rot(t).T

    def jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        return np.broadcast_to(self._rot(t), (n, 3, 3)).copy()

    def hessian(self, xi, t):
        return np.zeros((np.atleast_2d(xi).shape[0], 3, 3, 3))

    def dt_map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        M = self.profile.d1(t) * (self._K @ self._rot(t))
        return q @ M.T

    def dtt_map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        K, R = self._K, self._rot(t)
        d1, d2 = self.profile.d1(t), self.profile.d2(t)
        M = d2 * (K @ R) + d1 * d1 * (K @ K @ R)
        return q @ M.T

    def dt_jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        M = self.profile.d1(t) * (self._K @ self._rot(t))
        return np.broadcast_to(M, (n, 3, 3)).copy()

    def inverse(self, x, t):
        q = np.atleast_2d(x) - self.center
        return self.center + q @ self._rot(t)

    def velocity(self, x, t):
        q = np.atleast_2d(x) - self.center
        return self.profile.d1(t) * np.cross(self.axis, q)


class ShearMap(BulkFlowMap):
    """x = xi + s(t) (xi . b) d with d . b = 0 (unit-determinant shear)."""

    name = "shear"

    def __init__(self, direction=(1.0, 0.0, 0.0), gradient=(0.0, 1.0, 0.0),
                 profile=None):
        self.d = np.asarray(direction, dtype=float)
        self.b = np.asarray(gradient, dtype=float)
        if abs(np.dot(self.d, self.b)) > 1e-14:
            raise ValueError("shear direction must be orthogonal to its gradient")
        self.profile = profile or TimeProfile.affine(0.0, 1.0)

    def map(self, xi, t):
        xi = np.atleast_2d(xi)
        return xi + self.profile.value(t) * np.outer(xi @ self.b, self.d)

    def jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        M = np.eye(3) + self.profile.value(t) * np.outer(self.d, self.b)
        return np.broadcast_to(M, (n, 3, 3)).copy()

    def hessian(self, xi, t):
        return np.zeros((np.atleast_2d(xi).shape[0], 3, 3, 3))

    def dt_map(self, xi, t):
        xi = np.atleast_2d(xi)
        return self.profile.d1(t) * np.outer(xi @ self.b, self.d)

    def dtt_map(self, xi, t):
        xi = np.atleast_2d(xi)
        return self.profile.d2(t) * np.outer(xi @ self.b, self.d)

    def dt_jacobian(self, xi, t):
        n = np.atleast_2d(xi).shape[0]
        M = self.profile.d1(t) * np.outer(self.d, self.b)
        return np.broadcast_to(M, (n, 3, 3)).copy()

    def inverse(self, x, t):
        x = np.atleast_2d(x)
        return x - self.profile.value(t) * np.outer(x @ self.b, self.d)


class RadialPolynomialMap(BulkFlowMap):
    """Radial breathing: x = c + q (1 + a(t) psi(|q|^2)), q = xi - c.

    ``psi`` is a polynomial in r^2 (coefficients low to high); choosing
    psi(R_out^2) = 0 freezes an outer sphere so the enclosing-domain
    boundary condition v . n = 0 holds exactly.  The amplitude profile
    must satisfy a(0) = 0 so that the map is the identity at t = 0.
    """

    name = "radial"

    def __init__(self, psi_coeffs, profile, center=(0.0, 0.0, 0.0)):
        self.psi_coeffs = np.asarray(psi_coeffs, dtype=float)
        self.profile = profile
        self.center = np.asarray(center, dtype=float)
        if abs(self.profile.value(0.0)) > 1e-15:
            raise ValueError("radial amplitude must vanish at t = 0")

    def _psi(self, s, deriv=0):
        c = np.polynomial.polynomial.polyder(self.psi_coeffs, deriv) \
            if deriv else self.psi_coeffs
        return np.polynomial.polynomial.polyval(s, c)

    def map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        s = np.einsum("ni,ni->n", q, q)
        return self.center + q * (1.0 + self.profile.value(t) * self._psi(s))[:, None]

    def jacobian(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        s = np.einsum("ni,ni->n", q, q)
        a = self.profile.value(t)
        f = 1.0 + a * self._psi(s)
        fp = a * self._psi(s, 1)
        eye = np.broadcast_to(np.eye(3), (q.shape[0], 3, 3))
        return f[:, None, None] * eye + 2.0 * fp[:, None, None] * (
            q[:, :, None] * q[:, None, :]
        )

    def hessian(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        s = np.einsum("ni,ni->n", q, q)
        a = self.profile.value(t)
        fp = a * self._psi(s, 1)
        fpp = a * self._psi(s, 2)
        n = q.shape[0]
        eye = np.eye(3)
        H = np.zeros((n, 3, 3, 3))
        H += 2.0 * fp[:, None, None, None] * (
            eye[None, :, :, None] * q[:, None, None, :]
            + eye[None, :, None, :] * q[:, None, :, None]
            + eye[None, None, :, :] * q[:, :, None, None]
        )
        H += 4.0 * fpp[:, None, None, None] * (
            q[:, :, None, None] * q[:, None, :, None] * q[:, None, None, :]
        )
        return H

    def dt_map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        s = np.einsum("ni,ni->n", q, q)
        return self.profile.d1(t) * self._psi(s)[:, None] * q

    def dtt_map(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        s = np.einsum("ni,ni->n", q, q)
        return self.profile.d2(t) * self._psi(s)[:, None] * q

    def dt_jacobian(self, xi, t):
        q = np.atleast_2d(xi) - self.center
        s = np.einsum("ni,ni->n", q, q)
        d1 = self.profile.d1(t)
        f = d1 * self._psi(s)
        fp = d1 * self._psi(s, 1)
        eye = np.broadcast_to(np.eye(3), (q.shape[0], 3, 3))
        return f[:, None, None] * eye + 2.0 * fp[:, None, None] * (
            q[:, :, None] * q[:, None, :]
        )

    def inverse(self, x, t):
        q = np.atleast_2d(x) - self.center
        r_x = np.linalg.norm(q, axis=1)
        a = self.profile.value(t)
        rho = r_x.copy()
        for _ in range(60):
            f = rho * (1.0 + a * self._psi(rho**2)) - r_x
            fp = 1.0 + a * self._psi(rho**2) + 2.0 * a * rho**2 * self._psi(rho**2, 1)
            delta = f / fp
            rho = rho - delta
            if np.all(np.abs(delta) <= 1e-15 * np.maximum(rho, 1.0)):
                break
        scale = np.divide(rho, r_x, out=np.ones_like(rho), where=r_x > 0.0)
        return self.center + q * scale[:, None]


class ComposedMap(BulkFlowMap):
    """Composition h(xi, t) = outer(inner(xi, t), t)."""

    name = "composed"

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner

    def map(self, xi, t):
        return self.outer.map(self.inner.map(xi, t), t)

    def jacobian(self, xi, t):
        g = self.inner.map(xi, t)
        return np.einsum(
            "nij,njk->nik", self.outer.jacobian(g, t), self.inner.jacobian(xi, t)
        )

    def hessian(self, xi, t):
        g = self.inner.map(xi, t)
        Jg = self.inner.jacobian(xi, t)
        Hf = self.outer.hessian(g, t)
        Hg = self.inner.hessian(xi, t)
        Jf = self.outer.jacobian(g, t)
        term1 = np.einsum("niab,naj,nbk->nijk", Hf, Jg, Jg)
        term2 = np.einsum("nia,najk->nijk", Jf, Hg)
        return term1 + term2

    def dt_map(self, xi, t):
        g = self.inner.map(xi, t)
        return self.outer.dt_map(g, t) + np.einsum(
            "nij,nj->ni", self.outer.jacobian(g, t), self.inner.dt_map(xi, t)
        )

    def dtt_map(self, xi, t):
        g = self.inner.map(xi, t)
        gt = self.inner.dt_map(xi, t)
        gtt = self.inner.dtt_map(xi, t)
        Jf = self.outer.jacobian(g, t)
        dtJf = self.outer.dt_jacobian(g, t)
        Hf = self.outer.hessian(g, t)
        return (
            self.outer.dtt_map(g, t)
            + 2.0 * np.einsum("nij,nj->ni", dtJf, gt)
            + np.einsum("niab,na,nb->ni", Hf, gt, gt)
            + np.einsum("nij,nj->ni", Jf, gtt)
        )

    def dt_jacobian(self, xi, t):
        g = self.inner.map(xi, t)
        gt = self.inner.dt_map(xi, t)
        Jg = self.inner.jacobian(xi, t)
        term = self.outer.dt_jacobian(g, t) + np.einsum(
            "niab,nb->nia", self.outer.hessian(g, t), gt
        )
        return np.einsum("nia,naj->nij", term, Jg) + np.einsum(
            "nia,naj->nij", self.outer.jacobian(g, t), self.inner.dt_jacobian(xi, t)
        )

    def inverse(self, x, t):
        return self.inner.inverse(self.outer.inverse(x, t), t)


def flow_from_config(cfg):
    """Flow map from a config mapping {kind: ..., parameters...}."""
    kind = cfg.get("kind", "identity")
    center = cfg.get("center", (0.0, 0.0, 0.0))
    if kind == "identity":
        return IdentityMap()
    if kind == "dilation":
        return DilationMap(TimeProfile.affine(1.0, cfg.get("rate", 1.0)), center)
    if kind == "rotation":
        return RotationMap(
            cfg.get("axis", (0.0, 0.0, 1.0)),
            TimeProfile.affine(0.0, cfg.get("rate", 1.0)),
            center,
        )
    if kind == "shear":
        return ShearMap(
            cfg.get("direction", (1.0, 0.0, 0.0)),
            cfg.get("gradient", (0.0, 1.0, 0.0)),
            TimeProfile.affine(0.0, cfg.get("rate", 1.0)),
        )
    if kind == "radial":
        return RadialPolynomialMap(
            cfg["psi_coeffs"],
            TimeProfile.sine(cfg.get("amplitude", 0.05), cfg.get("omega", 1.0)),
            center,
        )
    if kind == "composed":
        return ComposedMap(flow_from_config(cfg["outer"]), flow_from_config(cfg["inner"]))
    raise ValueError(f"unknown flow kind {kind!r}")


# ---------------------------------------------------------------------------
# Surface flow maps


class SurfaceFlowMap:
    """Surface carried by a bulk motion: x_hat(X, t) = motion(Phi(X), t).

    Works on a reference SurfaceQuadrature (nodes of the t = 0 surface);
    the deformed tangent frame is J_motion applied to the chart frame, so
    area elements, normals and curvature of the transported surface are
    analytic in the catalog data.
    """

    def __init__(self, atlas, motion):
        self.atlas = atlas
        self.motion = motion

    def positions(self, quad, t):
        return self.motion.map(quad.points, t)

    def dt_positions(self, quad, t):
        return self.motion.dt_map(quad.points, t)

    def dtt_positions(self, quad, t):
        return self.motion.dtt_map(quad.points, t)

    def deformed_frame(self, quad, t):
        J = self.motion.jacobian(quad.points, t)
        t1 = np.einsum("nij,nj->ni", J, quad.tangent1)
        t2 = np.einsum("nij,nj->ni", J, quad.tangent2)
        return t1, t2

    def area_elements(self, quad, t):
        t1, t2 = self.deformed_frame(quad, t)
        return np.linalg.norm(np.cross(t1, t2), axis=1)

    def area_ratio(self, quad, t):
        area0 = np.linalg.norm(np.cross(quad.tangent1, quad.tangent2), axis=1)
        return self.area_elements(quad, t) / area0

    def deformed_chart_hessian(self, quad, t):
        """Second X-derivatives of the deformed chart map."""
        xi = quad.points
        J = self.motion.jacobian(xi, t)
        H = self.motion.hessian(xi, t)
        phi_j = np.stack([quad.tangent1, quad.tangent2], axis=-1)
        term1 = np.einsum("niab,nax,nby->nixy", H, phi_j, phi_j)
        term2 = np.einsum("nia,naxy->nixy", J, quad.chart_hessian)
        return term1 + term2

    def deformed_normals_curvature(self, quad, t):
        t1, t2 = self.deformed_frame(quad, t)
        jac = np.stack([t1, t2], axis=-1)
        hess = self.deformed_chart_hessian(quad, t)
        interior = self.motion.map(quad.interior_point[None, :], t)[0]
        return frame_normal_curvature(jac, hess, self.positions(quad, t), interior)

    def velocity_divergence(self, quad, t):
        """div_T v at the transported nodes (projected ambient Jacobian)."""
        grad_v = self.motion.velocity_jacobian_ref(quad.points, t)
        n, _ = self.deformed_normals_curvature(quad, t)
        proj = np.eye(3)[None, :, :] - n[:, :, None] * n[:, None, :]
        return np.einsum("nij,nij->n", proj, grad_v)

    def sqrt_metric(self, X, chart_index, t):
        """Area element of the deformed chart map at parameters X."""
        chart = self.atlas.charts[chart_index]
        X = np.atleast_2d(X)
        xi = chart.embed(X)
        J = self.motion.jacobian(xi, t)
        pj = chart.jacobian(X)
        t1 = np.einsum("nij,nj->ni", J, pj[:, :, 0])
        t2 = np.einsum("nij,nj->ni", J, pj[:, :, 1])
        g11 = np.einsum("ni,ni->n", t1, t1)
        g12 = np.einsum("ni,ni->n", t1, t2)
        g22 = np.einsum("ni,ni->n", t2, t2)
        G = g11 * g22 - g12 * g12
        if np.any(G <= 0.0):
            raise SingularMetricError("surface metric determinant not positive")
        return np.sqrt(G)


# ---------------------------------------------------------------------------
# Module operations


def bulk_sqrt_metric(flow, xi, t):
    """|det grad_xi x| at a single reference point (1 at t = 0)."""
    return float(flow.sqrt_metric(np.atleast_2d(xi), t)[0])


def surface_sqrt_metric(surface_flow, X, chart_index, t):
    """sqrt(G) of the deformed chart map at one parameter point."""
    return float(surface_flow.sqrt_metric(np.atleast_2d(X), chart_index, t)[0])


def _fd_time(sample, t, step, order):
    offs, coefs = _fd_weights(order)
    acc = None
    for off, coef in zip(offs, coefs):
        v = coef * np.asarray(sample(t + off * step), dtype=float)
        acc = v if acc is None else acc + v
    return acc / step


def transport_identity_residual(flow, f, t, quad, kind="bulk",
                                step=1e-4, order=4, surface_flow=None):
    """Residual of the metric-derivative transport identity.

    Bulk: | int f div(v) dx  -  int f(x(xi,t),t) d/dt sqrtG dxi |, both
    sides evaluated on the reference quadrature.  ``kind='surface'`` uses
    the surface divergence and the area-element time derivative.
    ``f`` is a callable (points, t) -> values.
    """
    if kind == "bulk":
        x_t = flow.map(quad.points, t)
        fv = np.asarray(f(x_t, t), dtype=float)
        div = flow.velocity_divergence_ref(quad.points, t)
        sqrtG = flow.sqrt_metric(quad.points, t)
        lhs = float(np.dot(quad.weights, fv * div * sqrtG))
        dG = _fd_time(lambda s: flow.sqrt_metric(quad.points, s), t, step, order)
        rhs = float(np.dot(quad.weights, fv * dG))
        return abs(lhs - rhs)
    if kind != "surface":
        raise ValueError("kind must be 'bulk' or 'surface'")
    sflow = surface_flow if surface_flow is not None else flow
    x_t = sflow.positions(quad, t)
    fv = np.asarray(f(x_t, t), dtype=float)
    div = sflow.velocity_divergence(quad, t)
    area = sflow.area_elements(quad, t)
    lhs = float(np.dot(quad.base_weights, fv * div * area))
    dA = _fd_time(lambda s: sflow.area_elements(quad, s), t, step, order)
    rhs = float(np.dot(quad.base_weights, fv * dA))
    return abs(lhs - rhs)


def continuity_residual(flow, rho0, point, t, kind="bulk", step=1e-4,
                        order=4, chart_index=0):
    """|D_t rho + (div v) rho| for the pullback density at one point.

    Bulk: rho(x(xi,t),t) = rho0(xi)/sqrtG(xi,t); the material derivative
    is the fixed-xi time derivative of the pullback, differenced with the
    given order/step.  Surface: pullback by the area-element ratio.
    """
    if kind == "bulk":
        xi = np.atleast_2d(point)
        r0 = float(np.asarray(rho0(xi), dtype=float)[0]) if callable(rho0) else float(rho0)

        def rho_of_t(s):
            return r0 / flow.sqrt_metric(xi, s)

        d_rho = float(_fd_time(rho_of_t, t, step, order)[0])
        rho = float(rho_of_t(t)[0])
        div = float(flow.velocity_divergence_ref(xi, t)[0])
        return abs(d_rho + div * rho)
    if kind != "surface":
        raise ValueError("kind must be 'bulk' or 'surface'")
    sflow = flow
    X = np.atleast_2d(point)
    chart = sflow.atlas.charts[chart_index]
    xi = chart.embed(X)
    r0 = float(np.asarray(rho0(xi), dtype=float)[0]) if callable(rho0) else float(rho0)
    a0 = sflow.sqrt_metric(X, chart_index, 0.0)

    def rho_of_t(s):
        return r0 * a0 / sflow.sqrt_metric(X, chart_index, s)

    d_rho = float(_fd_time(rho_of_t, t, step, order)[0])
    rho = float(rho_of_t(t)[0])
    grad_v = sflow.motion.velocity_jacobian_ref(xi, t)[0]
    pj = chart.jacobian(X)
    J = sflow.motion.jacobian(xi, t)[0]
    t1 = J @ pj[0, :, 0]
    t2 = J @ pj[0, :, 1]
    nvec = np.cross(t1, t2)
    nvec = nvec / np.linalg.norm(nvec)
    proj = np.eye(3) - np.outer(nvec, nvec)
    div = float(np.sum(proj * grad_v))
    return abs(d_rho + div * rho)


def pushforward_integral(flow, quad, f, t, indicator=None, kind="bulk"):
    """Integral of f over the transported set, in reference coordinates.

    ``indicator`` (optional) selects a reference subset; it receives the
    reference nodes.  ``f`` is a callable (points, t) -> values.
    """
    if kind == "bulk":
        x_t = flow.map(quad.points, t)
        fv = np.asarray(f(x_t, t), dtype=float)
        w = quad.weights * flow.sqrt_metric(quad.points, t)
    elif kind == "surface":
        x_t = flow.positions(quad, t)
        fv = np.asarray(f(x_t, t), dtype=float)
        w = quad.base_weights * flow.area_elements(quad, t)
    else:
        raise ValueError("kind must be 'bulk' or 'surface'")
    if indicator is not None:
        fv = fv * np.asarray(indicator(quad.points), dtype=float)
    return float(np.dot(w, fv))


def internal_energy_rate_residual(flow, quad, law, rho0, t, kind="bulk",
                                  step=1e-4, order=4):
    """| d/dt int p(rho) + int P(rho) div v |, the internal-energy audit.

    ``rho0`` is a callable on reference nodes.  The pullback density makes
    the identity hold at discretization-error level for any smooth flow.
    """
    if kind == "bulk":
        r0 = np.asarray(rho0(quad.points), dtype=float)

        def energy(s):
            G = flow.sqrt_metric(quad.points, s)
            return np.dot(quad.weights, law.p(r0 / G) * G)

        dE = float(_fd_time(lambda s: np.array([energy(s)]), t, step, order)[0])
        G = flow.sqrt_metric(quad.points, t)
        tp = law.total_pressure(r0 / G)
        div = flow.velocity_divergence_ref(quad.points, t)
        rate = float(np.dot(quad.weights, tp * div * G))
        return abs(dE + rate)
    if kind != "surface":
        raise ValueError("kind must be 'bulk' or 'surface'")
    sflow = flow
    r0 = np.asarray(rho0(quad.points), dtype=float)
    area0 = np.linalg.norm(np.cross(quad.tangent1, quad.tangent2), axis=1)

    def energy(s):
        area = sflow.area_elements(quad, s)
        return np.dot(quad.base_weights, law.p(r0 * area0 / area) * area)

    dE = float(_fd_time(lambda s: np.array([energy(s)]), t, step, order)[0])
    area = sflow.area_elements(quad, t)
    tp = law.total_pressure(r0 * area0 / area)
    div = sflow.velocity_divergence(quad, t)
    rate = float(np.dot(quad.base_weights, tp * div * area))
    return abs(dE + rate)


def kinetic_energy_rate_residual(flow, quad, rho0, t, kind="bulk",
                                 step=1e-4, order=4):
    """| d/dt int rho |v|^2/2 - int rho D_t v . v | via reference data."""
    r0 = np.asarray(rho0(quad.points), dtype=float)
    w = quad.weights if kind == "bulk" else quad.base_weights * np.linalg.norm(
        np.cross(quad.tangent1, quad.tangent2), axis=1
    )
    if kind == "bulk":
        dt_map = lambda s: flow.dt_map(quad.points, s)
        dtt = flow.dtt_map(quad.points, t)
        vel = flow.dt_map(quad.points, t)
    else:
        dt_map = lambda s: flow.dt_positions(quad, s)
        dtt = flow.dtt_positions(quad, t)
        vel = flow.dt_positions(quad, t)

    def kinetic(s):
        v = dt_map(s)
        return np.array([np.dot(w, 0.5 * r0 * np.einsum("ni,ni->n", v, v))])

    dK = float(_fd_time(kinetic, t, step, order)[0])
    rate = float(np.dot(w, r0 * np.einsum("ni,ni->n", dtt, vel)))
    return abs(dK - rate)
