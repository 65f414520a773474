"""Helmholtz-Weyl decomposition of vector fields on closed spheres.

A field orthogonal (in L2) to every surface-divergence-free field equals
``grad_T Pi + Pi H n`` for a scalar potential Pi.  On spheres the mean
curvature H = -2/R is constant and nonzero, so Pi is pinned with no free
additive constant and the construction is an exact spectral projection:
in the orthonormal harmonic basis the normal and tangential parts couple
through the diagonal Gram factor l(l+1) + (H R)^2.

Restricted to spheres (any radius/center): general closed surfaces admit
no comparable constructive recipe, and the solver only needs spheres.
Projections run on the Gauss x uniform product rule, which integrates
harmonic products exactly; hypothesis checks integrate against the
L2-normalized rotational harmonics n x grad_T Y / sqrt(l(l+1)).
"""

import numpy as np

from .geometry import latlong_sphere_quadrature
from .harmonics import SphericalHarmonicBasis, sh_degree_order

__all__ = [
    "HypothesisViolatedError",
    "CurvatureDegenerateError",
    "SurfaceField",
    "SurfacePotential",
    "SphereContext",
    "orthogonality_defect",
    "decompose",
    "incompressible_surface_pressure",
]

DEFAULT_DEGREE = 16
SPECTRAL_TOL = 1e-8


class HypothesisViolatedError(RuntimeError):
    """Field pairs nonzero with a divergence-free test field."""

    def __init__(self, defect, tol):
        super().__init__(
            f"orthogonality defect {defect:.3e} exceeds tolerance {tol:.3e}; "
            "the field is not of gradient type"
        )
        self.defect = defect
        self.tol = tol


class CurvatureDegenerateError(RuntimeError):
    """Mean curvature vanished somewhere; Pi is not pointwise recoverable."""


class SurfaceField:
    """Evaluable vector field on a sphere."""

    def __init__(self, values, sphere):
        self._values = values
        self.sphere = sphere

    def __call__(self, points):
        return np.asarray(self._values(np.atleast_2d(points)), dtype=float)


class SphereContext:
    """Sphere + harmonic basis + projection quadrature, built once."""

    def __init__(self, radius, center=(0.0, 0.0, 0.0), degree=DEFAULT_DEGREE,
                 n_quad=None):
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)
        self.degree = int(degree)
        if abs(2.0 / self.radius) < 1e-12:
            raise CurvatureDegenerateError("mean curvature below 1e-12")
        n_mu = n_quad or max(2 * self.degree + 8, 24)
        n_phi = n_quad or max(4 * self.degree + 8, 24)
        self.quad = latlong_sphere_quadrature(self.radius, self.center,
                                              n_mu=n_mu, n_phi=n_phi)
        self.basis = SphericalHarmonicBasis(self.degree, self.radius, self.center)
        self.mean_curvature = -2.0 / self.radius
        self._Y, self._grad = self.basis.tangential_gradients(self.quad.points)

    @classmethod
    def from_atlas(cls, atlas, degree=DEFAULT_DEGREE, n_quad=None):
        axes = np.asarray(atlas.axes, dtype=float)
        if not np.allclose(axes, axes[0]):
            raise ValueError("decomposition is restricted to spheres")
        return cls(axes[0], atlas.center, degree, n_quad)

    def field_samples(self, F):
        if isinstance(F, SurfaceField):
            return F(self.quad.points)
        if callable(F):
            return np.asarray(F(self.quad.points), dtype=float)
        return np.asarray(F, dtype=float)


class SurfacePotential:
    """Truncated harmonic expansion of the scalar potential Pi."""

    def __init__(self, coefficients, context):
        self.coefficients = np.asarray(coefficients, dtype=float)
        self.context = context

    def __call__(self, points):
        return self.context.basis.evaluate(points, self.coefficients)

    def surface_gradient(self, points):
        return self.context.basis.evaluate_gradient(points, self.coefficients)

    def reconstruction(self, points):
        """grad_T Pi + Pi H n at the given sphere points."""
        ctx = self.context
        u = (np.atleast_2d(points) - ctx.center) / ctx.radius
        vals = self(points)
        return self.surface_gradient(points) + ctx.mean_curvature * vals[:, None] * u

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("degree,order,real_coeff\n")
            for k, c in enumerate(self.coefficients):
                l, m = sh_degree_order(k)
                fh.write("%d,%d,%.17g\n" % (l, m, c))


def orthogonality_defect(F, context, test_basis_size=None):
    """max |int F . phi| over L2-normalized rotational harmonics phi.

    Certifies the decomposition hypothesis numerically: the defect is the
    largest pairing against the divergence-free test basis up to the
    requested degree (default: the context degree).
    """
    L = test_basis_size or context.degree
    Fv = context.field_samples(F)
    quad = context.quad
    u = (quad.points - context.center) / context.radius
    k_max = (L + 1) ** 2
    phi = np.cross(u[:, None, :], context._grad[:, 1:k_max, :], axis=-1)
    norms = np.array(
        [np.sqrt(l * (l + 1.0)) for l in range(1, L + 1) for _ in range(2 * l + 1)]
    )
    pairings = np.einsum("ni,n,nki->k", Fv, quad.weights, phi) / norms
    return float(np.max(np.abs(pairings)))


def decompose(F, context, defect_tol=SPECTRAL_TOL, residual_tol=None):
    """Recover Pi with F = grad_T Pi + Pi H n (sphere, H nonzero).

    Raises HypothesisViolatedError when the divergence-free pairing
    exceeds ``defect_tol``.  Returns (potential, residual_l2) where the
    residual is the quadrature L2 norm of F minus the reconstruction.
    """
    defect = orthogonality_defect(F, context)
    if defect > defect_tol:
        raise HypothesisViolatedError(defect, defect_tol)
    Fv = context.field_samples(F)
    quad = context.quad
    u = (quad.points - context.center) / context.radius
    H = context.mean_curvature
    fn = np.einsum("ni,ni->n", Fv, u)
    b = np.einsum("ni,n,nki->k", Fv, quad.weights, context._grad) + H * (
        (quad.weights * fn) @ context._Y
    )
    diag = np.array(
        [
            sh_degree_order(k)[0] * (sh_degree_order(k)[0] + 1.0)
            + (H * context.radius) ** 2
            for k in range(context.basis.size)
        ]
    )
    coeffs = b / diag
    pot = SurfacePotential(coeffs, context)
    diff = Fv - pot.reconstruction(quad.points)
    residual = float(
        np.sqrt(np.dot(quad.weights, np.einsum("ni,ni->n", diff, diff)))
    )
    if residual_tol is not None and residual > residual_tol:
        raise HypothesisViolatedError(residual, residual_tol)
    return pot, residual


def incompressible_surface_pressure(context, material_accel, pressure_jump,
                                    defect_tol=SPECTRAL_TOL):
    """Surface pressure of the divergence-free-surface-momentum balance.

    Solves ``-grad_T Pi - Pi H n = rho_S D_t v_S + (P_B - P_A) n`` in the
    quadrature-L2 sense.  ``material_accel`` samples rho_S D_t v_S (a
    vector field); ``pressure_jump`` samples the scalar P_B - P_A on the
    sphere.  Returns (potential, residual_l2).
    """
    quad = context.quad
    accel = np.asarray(material_accel(quad.points), dtype=float)
    jump = np.asarray(pressure_jump(quad.points), dtype=float)
    u = (quad.points - context.center) / context.radius
    rhs = -accel - jump[:, None] * u

    def F(points):
        if points is quad.points:
            return rhs
        a = np.asarray(material_accel(points), dtype=float)
        j = np.asarray(pressure_jump(points), dtype=float)
        uu = (np.atleast_2d(points) - context.center) / context.radius
        return -a - j[:, None] * uu

    return decompose(F, context, defect_tol=defect_tol)
