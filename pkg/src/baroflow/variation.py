"""Action integrals over two bulk phases and the interface, and their
first variation with respect to flow-map perturbations.

The action is kinetic minus internal energy, integrated over space-time.
Everything is evaluated in reference coordinates: kinetic densities use
the reference mass density times |d/dt map|^2, internal densities the
pullback rho = rho0/sqrtG (bulk) and the area-element ratio (surface), so
the continuity equations hold by construction and variational tests are
isolated from transport-solver error.

Three action kinds mirror the three momentum systems:

- "compressible":   surface carries kinetic and internal energy;
- "incompressible": surface carries kinetic energy only (the matching
  variations must be surface-divergence-free);
- "tension-only":   surface carries the half-constant-tension area term
  and no mass.

``action_derivative_fd`` differentiates the action through a symmetric
epsilon ladder with Richardson extrapolation; ``first_variation_rhs``
evaluates the same derivative from the momentum-residual quadrature
(bulk Euler brackets, surface bracket per kind, two one-sided interface
pressure terms and the outer-boundary term).  Their agreement, within the
Richardson truncation estimate plus a quadrature-refinement delta, is the
central acceptance identity of the variational engine.
"""

import numpy as np

from .fields import bump_profile, poly_smooth_step, poly_smooth_step_derivative
from .flowmaps import SurfaceFlowMap
from .geometry import frame_normal_curvature, sphere_atlas
from .quadrature import ball_quadrature, gauss_legendre, shell_quadrature

__all__ = [
    "ConstraintError",
    "ConfigurationError",
    "ActionValue",
    "BulkPhase",
    "SurfacePhase",
    "MultiphaseConfiguration",
    "VariationField",
    "TimeWindow",
    "perturbed_config",
    "action",
    "action_derivative_fd",
    "first_variation_rhs",
    "euler_lagrange_residuals",
    "kinetic_variation_residual",
    "internal_variation_residual",
    "tension_variation_residual",
    "make_spherical_configuration",
    "refined_configuration",
    "annular_bump_variation",
    "interior_bump_variation",
    "rotational_variation",
    "radial_variation",
    "combined_variation",
]

ACTION_KINDS = ("compressible", "incompressible", "tension-only")

#: fraction of the horizon occupied by each smooth time-window cutoff
WINDOW_DELTA_FRACTION = 0.05


def _window_time_rule(n_time, horizon, delta_fraction=WINDOW_DELTA_FRACTION):
    """Composite Gauss rule on [0, T] split at the window cutoff edges.

    Variations carry steep (though smooth) cutoff transitions on
    [0, dT] and [T - dT, T]; giving each transition its own Gauss panel
    keeps the time quadrature accurate for integrands containing the
    window's time derivative.
    """
    delta = delta_fraction * horizon
    m_edge = max(6, int(round(0.3 * n_time)))
    m_mid = max(6, n_time - 2 * m_edge)
    nodes, weights = [], []
    for (lo, hi, m) in (
        (0.0, delta, m_edge),
        (delta, horizon - delta, m_mid),
        (horizon - delta, horizon, m_edge),
    ):
        x, w = gauss_legendre(m, lo, hi)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


class ConstraintError(ValueError):
    """A variation violates an admissibility constraint (named in args)."""


class ConfigurationError(ValueError):
    """A configuration violates a compatibility requirement."""


# ---------------------------------------------------------------------------
# Configuration


class BulkPhase:
    def __init__(self, flow, law, rho0, quad):
        self.flow = flow
        self.law = law
        self.rho0 = rho0
        self.quad = quad
        self._rho0_nodes = rho0(quad.points)
        self._rho0_grad_nodes = rho0.gradient(quad.points)


class SurfacePhase:
    """Interface phase: compressible law + density, or constant tension."""

    def __init__(self, flow, quad, law=None, rho0=None, tension=None):
        self.flow = flow
        self.quad = quad
        self.law = law
        self.rho0 = rho0
        self.tension = tension
        self._area0 = np.linalg.norm(
            np.cross(quad.tangent1, quad.tangent2), axis=1
        )
        self._rho0_nodes = rho0(quad.points) if rho0 is not None else None
        self._rho0_grad_nodes = (
            rho0.gradient(quad.points) if rho0 is not None else None
        )

    @property
    def mode(self):
        if self.tension is not None:
            return "tension"
        return "compressible"


class MultiphaseConfiguration:
    """Two bulk phases coupled through an interface inside a fixed ball.

    ``outer_quad`` is a static quadrature of the enclosing boundary
    sphere.  ``horizon`` is the time horizon T; time integrals use
    ``n_time`` Gauss nodes on [0, T].
    """

    def __init__(self, bulk_a, bulk_b, surface, outer_quad, horizon,
                 n_time=20, label=""):
        self.bulk_a = bulk_a
        self.bulk_b = bulk_b
        self.surface = surface
        self.outer_quad = outer_quad
        self.horizon = float(horizon)
        self.n_time = int(n_time)
        self.label = label
        self.t_nodes, self.t_weights = _window_time_rule(self.n_time, self.horizon)

    def validate(self, rng, n_probes=200, tol=1e-10):
        """Probe interface compatibility and the velocity constraints."""
        squad = self.surface.quad
        idx = rng.integers(0, squad.n_nodes, size=n_probes)
        xi = squad.points[idx]
        times = rng.uniform(0.0, self.horizon, size=n_probes)
        worst_map = 0.0
        worst_vel = 0.0
        for k in range(n_probes):
            t = times[k]
            p = xi[k][None, :]
            xa = self.bulk_a.flow.map(p, t)
            xb = self.bulk_b.flow.map(p, t)
            xs = self.surface.flow.motion.map(p, t)
            worst_map = max(
                worst_map,
                float(np.max(np.abs(xa - xs))),
                float(np.max(np.abs(xb - xs))),
            )
            n, _ = self._interface_normal(idx[k], t)
            va = self.bulk_a.flow.dt_map(p, t)[0]
            vb = self.bulk_b.flow.dt_map(p, t)[0]
            vs = self.surface.flow.motion.dt_map(p, t)[0]
            worst_vel = max(
                worst_vel,
                abs(np.dot(va - vs, n)),
                abs(np.dot(vb - vs, n)),
            )
        if worst_map > tol:
            raise ConfigurationError(
                f"interface flow maps disagree by {worst_map:.3e}"
            )
        # outer boundary: v_B . n = 0
        oq = self.outer_quad
        worst_outer = 0.0
        for t in np.linspace(0.0, self.horizon, 7):
            vb = self.bulk_b.flow.velocity(oq.points, t)
            worst_outer = max(
                worst_outer,
                float(np.max(np.abs(np.einsum("ni,ni->n", vb, oq.normals)))),
            )
        if worst_outer > tol:
            raise ConfigurationError(
                f"outer-boundary normal velocity {worst_outer:.3e} nonzero"
            )
        if worst_vel > tol:
            raise ConfigurationError(
                f"interface normal velocities disagree by {worst_vel:.3e}"
            )
        return {"interface_map": worst_map, "interface_velocity": worst_vel,
                "outer_normal_velocity": worst_outer}

    def _interface_normal(self, node_index, t):
        squad = self.surface.quad
        sl = slice(node_index, node_index + 1)
        sub = _QuadView(squad, sl)
        n, H = self.surface.flow.deformed_normals_curvature(sub, t)
        return n[0], H[0]


class _QuadView:
    """Slice view of a SurfaceQuadrature (frames and weights only)."""

    def __init__(self, quad, sl):
        self.points = quad.points[sl]
        self.tangent1 = quad.tangent1[sl]
        self.tangent2 = quad.tangent2[sl]
        self.chart_hessian = quad.chart_hessian[sl]
        self.base_weights = quad.base_weights[sl]
        self.weights = quad.weights[sl]
        self.interior_point = quad.interior_point


# ---------------------------------------------------------------------------
# Variations


class TimeWindow:
    """Smooth window vanishing identically near t = 0 and t = T.

    The terminal cutoff realizes the end-of-horizon condition on the
    variation; the initial cutoff keeps the perturbed maps equal to the
    identity at t = 0 (flow-map families fix the initial configuration).
    The profile is the C^5 polynomial step, whose pieces align with the
    composite time-quadrature panels, so action integrands containing
    the window (and its steep derivative) are integrated exactly.
    """

    def __init__(self, horizon, delta_fraction=WINDOW_DELTA_FRACTION):
        self.T = float(horizon)
        self.delta = delta_fraction * self.T

    def value(self, t):
        return float(
            poly_smooth_step(np.array(t) / self.delta)
            * poly_smooth_step((self.T - np.array(t)) / self.delta)
        )

    def d1(self, t):
        a = poly_smooth_step(np.array(t) / self.delta)
        b = poly_smooth_step((self.T - np.array(t)) / self.delta)
        da = poly_smooth_step_derivative(np.array(t) / self.delta) / self.delta
        db = -poly_smooth_step_derivative(
            (self.T - np.array(t)) / self.delta
        ) / self.delta
        return float(da * b + a * db)


class _WindowedField:
    """Static vector field times the smooth time window."""

    def __init__(self, base, window):
        self.base = base
        self.window = window

    def __call__(self, points, t):
        return self.window.value(t) * self.base(points)

    def jacobian(self, points, t):
        return self.window.value(t) * self.base.jacobian(points)

    def dt(self, points, t):
        return self.window.d1(t) * self.base(points)

    def divergence(self, points, t):
        return self.window.value(t) * self.base.divergence(points)


class _ZeroField:
    def __call__(self, points, t):
        return np.zeros_like(np.atleast_2d(points), dtype=float)

    def jacobian(self, points, t):
        return np.zeros((np.atleast_2d(points).shape[0], 3, 3))

    dt = __call__

    def divergence(self, points, t):
        return np.zeros(np.atleast_2d(points).shape[0])


class VariationField:
    """Admissible perturbation triple (z_A, z_B, z_S).

    Raw fields are static VectorFields; the constructor applies the
    smooth time window.  ``validate`` probes the admissibility
    constraints and raises ConstraintError naming the violated one.
    """

    def __init__(self, z_a, z_b, z_s, horizon,
                 surface_divergence_free=False, delta_fraction=0.05,
                 label=""):
        self.window = TimeWindow(horizon, delta_fraction)
        self.z_a = _WindowedField(z_a, self.window) if z_a is not None else _ZeroField()
        self.z_b = _WindowedField(z_b, self.window) if z_b is not None else _ZeroField()
        self.z_s = _WindowedField(z_s, self.window) if z_s is not None else _ZeroField()
        self.surface_divergence_free = bool(surface_divergence_free)
        self.horizon = float(horizon)
        self.label = label

    def validate(self, config, rng, n_probes=100, tol=1e-10):
        T = self.horizon
        # terminal and initial conditions are structural (window is
        # identically zero there); probe anyway
        squad = config.surface.quad
        idx = rng.integers(0, squad.n_nodes, size=n_probes)
        for t_end in (0.0, T):
            x = config.surface.flow.positions(_QuadView(squad, idx), t_end)
            for z in (self.z_a, self.z_b, self.z_s):
                if np.max(np.abs(z(x, t_end))) > 1e-14:
                    raise ConstraintError(
                        "variation does not vanish at the time endpoints"
                    )
        times = rng.uniform(0.05 * T, 0.95 * T, size=n_probes)
        worst_outer = 0.0
        oq = config.outer_quad
        for t in times[:20]:
            zb = self.z_b(oq.points, t)
            worst_outer = max(
                worst_outer,
                float(np.max(np.abs(np.einsum("ni,ni->n", zb, oq.normals)))),
            )
        if worst_outer > tol:
            raise ConstraintError(
                f"outer-boundary constraint violated: |z_B . n| = {worst_outer:.3e}"
            )
        worst_trace = 0.0
        worst_div = 0.0
        for k in range(n_probes):
            t = times[k]
            view = _QuadView(squad, slice(idx[k], idx[k] + 1))
            x = config.surface.flow.positions(view, t)
            n, _ = config.surface.flow.deformed_normals_curvature(view, t)
            za = self.z_a(x, t)[0]
            zb = self.z_b(x, t)[0]
            zs = self.z_s(x, t)[0]
            worst_trace = max(
                worst_trace,
                abs(np.dot(za - zs, n[0])),
                abs(np.dot(zb - zs, n[0])),
            )
            if self.surface_divergence_free:
                proj = np.eye(3) - np.outer(n[0], n[0])
                jz = self.z_s.jacobian(x, t)[0]
                worst_div = max(worst_div, abs(float(np.sum(proj * jz))))
        if worst_trace > tol:
            raise ConstraintError(
                f"interface-trace constraint violated: "
                f"normal traces differ by {worst_trace:.3e}"
            )
        if self.surface_divergence_free and worst_div > 1e-10:
            raise ConstraintError(
                f"surface-divergence-free constraint violated: "
                f"div_T z_S = {worst_div:.3e}"
            )
        return {"outer": worst_outer, "trace": worst_trace, "div": worst_div}


# ---------------------------------------------------------------------------
# Perturbed configurations


class _PerturbedBulkFlow:
    """x_eps = x + eps * z(x, t); enough interface for action evaluation."""

    def __init__(self, base, z, eps):
        self.base = base
        self.z = z
        self.eps = eps

    def map(self, xi, t):
        x = self.base.map(xi, t)
        return x + self.eps * self.z(x, t)

    def dt_map(self, xi, t):
        x = self.base.map(xi, t)
        v = self.base.dt_map(xi, t)
        return v + self.eps * (
            self.z.dt(x, t) + np.einsum("nij,nj->ni", self.z.jacobian(x, t), v)
        )

    def jacobian(self, xi, t):
        x = self.base.map(xi, t)
        J = self.base.jacobian(xi, t)
        eye = np.broadcast_to(np.eye(3), J.shape)
        return np.einsum(
            "nij,njk->nik", eye + self.eps * self.z.jacobian(x, t), J
        )

    def sqrt_metric(self, xi, t):
        from .laws import SingularMetricError

        det = np.linalg.det(self.jacobian(xi, t))
        if np.any(det <= 1e-14):
            raise SingularMetricError(
                "perturbed metric degenerate at requested epsilon"
            )
        return det


class _PerturbedSurfaceFlow:
    """Perturbed transported surface (positions, frames, areas)."""

    def __init__(self, base, z, eps):
        self.base = base
        self.z = z
        self.eps = eps
        self.atlas = base.atlas

    def positions(self, quad, t):
        x = self.base.positions(quad, t)
        return x + self.eps * self.z(x, t)

    def dt_positions(self, quad, t):
        x = self.base.positions(quad, t)
        v = self.base.dt_positions(quad, t)
        return v + self.eps * (
            self.z.dt(x, t) + np.einsum("nij,nj->ni", self.z.jacobian(x, t), v)
        )

    def deformed_frame(self, quad, t):
        t1, t2 = self.base.deformed_frame(quad, t)
        x = self.base.positions(quad, t)
        Jz = self.z.jacobian(x, t)
        t1p = t1 + self.eps * np.einsum("nij,nj->ni", Jz, t1)
        t2p = t2 + self.eps * np.einsum("nij,nj->ni", Jz, t2)
        return t1p, t2p

    def area_elements(self, quad, t):
        t1, t2 = self.deformed_frame(quad, t)
        a = np.linalg.norm(np.cross(t1, t2), axis=1)
        from .laws import SingularMetricError

        if np.any(a <= 0.0):
            raise SingularMetricError(
                "perturbed surface metric degenerate at requested epsilon"
            )
        return a


def perturbed_config(config, variation, eps):
    """Configuration with flow maps x + eps * z and pullback densities."""
    bulk_a = BulkPhase.__new__(BulkPhase)
    bulk_a.__dict__ = dict(config.bulk_a.__dict__)
    bulk_a.flow = _PerturbedBulkFlow(config.bulk_a.flow, variation.z_a, eps)
    bulk_b = BulkPhase.__new__(BulkPhase)
    bulk_b.__dict__ = dict(config.bulk_b.__dict__)
    bulk_b.flow = _PerturbedBulkFlow(config.bulk_b.flow, variation.z_b, eps)
    surface = SurfacePhase.__new__(SurfacePhase)
    surface.__dict__ = dict(config.surface.__dict__)
    surface.flow = _PerturbedSurfaceFlow(config.surface.flow, variation.z_s, eps)
    out = MultiphaseConfiguration.__new__(MultiphaseConfiguration)
    out.__dict__ = dict(config.__dict__)
    out.bulk_a = bulk_a
    out.bulk_b = bulk_b
    out.surface = surface
    return out


# ---------------------------------------------------------------------------
# Action

class ActionValue:
    """Space-time action value with its six energy parts.

    ``value = sum(kinetic parts) - sum(internal parts)``.  For the
    tension-only kind the surface "internal" slot stores minus the
    half-tension area term so the identity keeps holding.
    """

    def __init__(self, kinetic_a, internal_a, kinetic_b, internal_b,
                 kinetic_s, internal_s):
        self.kinetic_a = kinetic_a
        self.internal_a = internal_a
        self.kinetic_b = kinetic_b
        self.internal_b = internal_b
        self.kinetic_s = kinetic_s
        self.internal_s = internal_s

    @property
    def value(self):
        return (
            self.kinetic_a
            + self.kinetic_b
            + self.kinetic_s
            - self.internal_a
            - self.internal_b
            - self.internal_s
        )

    def parts(self):
        return {
            "kinetic_a": self.kinetic_a,
            "internal_a": self.internal_a,
            "kinetic_b": self.kinetic_b,
            "internal_b": self.internal_b,
            "kinetic_s": self.kinetic_s,
            "internal_s": self.internal_s,
        }


def _bulk_energies_at(phase, t):
    quad = phase.quad
    v = phase.flow.dt_map(quad.points, t)
    kinetic = float(
        np.dot(quad.weights, 0.5 * phase._rho0_nodes * np.einsum("ni,ni->n", v, v))
    )
    G = phase.flow.sqrt_metric(quad.points, t)
    internal = float(np.dot(quad.weights, phase.law.p(phase._rho0_nodes / G) * G))
    return kinetic, internal


def _surface_energies_at(surface, t, kind):
    quad = surface.quad
    area = surface.flow.area_elements(quad, t)
    if kind == "tension-only":
        half_tension = float(
            np.dot(quad.base_weights, 0.5 * surface.tension.p0 * area)
        )
        return 0.0, -half_tension
    v = surface.flow.dt_positions(quad, t)
    kinetic = float(
        np.dot(
            quad.base_weights,
            0.5 * surface._rho0_nodes * surface._area0 * np.einsum("ni,ni->n", v, v),
        )
    )
    if kind == "incompressible":
        return kinetic, 0.0
    rho = surface._rho0_nodes * surface._area0 / area
    internal = float(np.dot(quad.base_weights, surface.law.p(rho) * area))
    return kinetic, internal


def action(config, kind="compressible"):
    """Space-time Gauss quadrature of the requested action kind."""
    if kind not in ACTION_KINDS:
        raise ValueError(f"unknown action kind {kind!r}")
    parts = np.zeros(6)
    for t, wt in zip(config.t_nodes, config.t_weights):
        ka, ia = _bulk_energies_at(config.bulk_a, t)
        kb, ib = _bulk_energies_at(config.bulk_b, t)
        ks, is_ = _surface_energies_at(config.surface, t, kind)
        parts += wt * np.array([ka, ia, kb, ib, ks, is_])
    return ActionValue(*parts)


def action_derivative_fd(config, variation, kind="compressible",
                         eps_list=(1e-2, 5e-3, 2.5e-3)):
    """Central-difference d(action)/d(eps) at eps = 0 with Richardson.

    ``eps_list`` must halve from one entry to the next.  Returns
    (derivative, truncation_estimate); the estimate is the difference of
    the last two extrapolation stages, which also captures roundoff noise
    in the quadrature sums.
    """
    eps_list = list(eps_list)
    for a, b in zip(eps_list[:-1], eps_list[1:]):
        if abs(a / b - 2.0) > 1e-12:
            raise ValueError("epsilon ladder must halve between entries")
    column = []
    for h in eps_list:
        plus = action(perturbed_config(config, variation, +h), kind).value
        minus = action(perturbed_config(config, variation, -h), kind).value
        column.append((plus - minus) / (2.0 * h))
    table = [column]
    order = 2
    while len(table[-1]) > 1:
        prev = table[-1]
        factor = 4.0 ** (len(table))
        table.append(
            [
                (factor * prev[i + 1] - prev[i]) / (factor - 1.0)
                for i in range(len(prev) - 1)
            ]
        )
    derivative = table[-1][0]
    if len(table) > 1:
        previous_best = table[-2][-1]
        estimate = abs(derivative - previous_best)
    else:
        estimate = abs(derivative) * 1e-8
    return derivative, estimate


# ---------------------------------------------------------------------------
# First-variation quadrature (right-hand side of the variational identity)


def _bulk_pressure_gradient(phase, t):
    """grad_x of the total pressure for the pullback density, at nodes."""
    quad = phase.quad
    flow = phase.flow
    G = flow.sqrt_metric(quad.points, t)
    rho = phase._rho0_nodes / G
    dG = flow.sqrt_metric_gradient(quad.points, t)
    grad_rho_ref = (
        phase._rho0_grad_nodes / G[:, None]
        - (phase._rho0_nodes / G**2)[:, None] * dG
    )
    J = flow.jacobian(quad.points, t)
    grad_rho = np.einsum("nji,nj->ni", np.linalg.inv(J), grad_rho_ref)
    tp_prime = phase.law.total_pressure_prime(rho)
    return rho, tp_prime[:, None] * grad_rho


def _surface_geometry_at(surface, t):
    quad = surface.quad
    sflow = surface.flow
    t1, t2 = sflow.deformed_frame(quad, t)
    hess = sflow.deformed_chart_hessian(quad, t)
    jac = np.stack([t1, t2], axis=-1)
    interior = sflow.motion.map(quad.interior_point[None, :], t)[0]
    x = sflow.positions(quad, t)
    normals, curv = frame_normal_curvature(jac, hess, x, interior)
    area = np.linalg.norm(np.cross(t1, t2), axis=1)
    return x, t1, t2, hess, normals, curv, area


def _area_param_gradient(t1, t2, hess):
    """d(area element)/dX_alpha from a frame and its chart Hessian."""
    m = np.cross(t1, t2)
    a = np.linalg.norm(m, axis=1)
    out = np.empty((t1.shape[0], 2))
    for al in range(2):
        dm = np.cross(hess[:, :, 0, al], t2) + np.cross(t1, hess[:, :, 1, al])
        out[:, al] = np.einsum("ni,ni->n", m, dm) / a
    return out


def _surface_pressure_terms(surface, t, geometry):
    """(rho_S, total pressure, surface pressure gradient) at nodes."""
    x, t1, t2, hess, normals, curv, area = geometry
    quad = surface.quad
    rho = surface._rho0_nodes * surface._area0 / area
    tp = surface.law.total_pressure(rho)

    # parameter derivatives of the pullback density
    frame0_h = quad.chart_hessian
    darea0 = _area_param_gradient(quad.tangent1, quad.tangent2, frame0_h)
    darea_t = _area_param_gradient(t1, t2, hess)
    dr0 = np.stack(
        [
            np.einsum("ni,ni->n", surface._rho0_grad_nodes, quad.tangent1),
            np.einsum("ni,ni->n", surface._rho0_grad_nodes, quad.tangent2),
        ],
        axis=-1,
    )
    r0 = surface._rho0_nodes
    drho = (
        dr0 * (surface._area0 / area)[:, None]
        + darea0 * (r0 / area)[:, None]
        - darea_t * (r0 * surface._area0 / area**2)[:, None]
    )
    dtp = surface.law.total_pressure_prime(rho)[:, None] * drho

    # tangential gradient: sum_ab g^{ab} dP/dX_a  t_b
    g11 = np.einsum("ni,ni->n", t1, t1)
    g12 = np.einsum("ni,ni->n", t1, t2)
    g22 = np.einsum("ni,ni->n", t2, t2)
    det = g11 * g22 - g12 * g12
    c1 = (g22 * dtp[:, 0] - g12 * dtp[:, 1]) / det
    c2 = (g11 * dtp[:, 1] - g12 * dtp[:, 0]) / det
    grad_tp = c1[:, None] * t1 + c2[:, None] * t2
    return rho, tp, grad_tp


def first_variation_rhs(config, variation, kind="compressible"):
    """Quadrature of the first-variation identity's right-hand side.

    Returns (total, terms) where ``terms`` holds the six space-time
    integrals: the three momentum brackets paired with z (bulk A, bulk B,
    surface) and the three pressure boundary terms (interface against
    z_A, interface against z_B, outer boundary against z_B).  The surface
    bracket depends on the action kind.
    """
    if kind not in ACTION_KINDS:
        raise ValueError(f"unknown action kind {kind!r}")
    terms = {
        "bulk_a": 0.0,
        "bulk_b": 0.0,
        "surface": 0.0,
        "interface_a": 0.0,
        "interface_b": 0.0,
        "outer": 0.0,
    }
    sq = config.surface.quad
    oq = config.outer_quad
    for t, wt in zip(config.t_nodes, config.t_weights):
        # bulk brackets: -(rho0 * dtt x . z + grad P . z sqrtG)
        for key, phase, z in (
            ("bulk_a", config.bulk_a, variation.z_a),
            ("bulk_b", config.bulk_b, variation.z_b),
        ):
            quad = phase.quad
            x = phase.flow.map(quad.points, t)
            zv = z(x, t)
            acc = phase.flow.dtt_map(quad.points, t)
            rho, grad_p = _bulk_pressure_gradient(phase, t)
            G = phase.flow.sqrt_metric(quad.points, t)
            integrand = phase._rho0_nodes * np.einsum("ni,ni->n", acc, zv) + G * (
                np.einsum("ni,ni->n", grad_p, zv)
            )
            terms[key] += -wt * float(np.dot(quad.weights, integrand))

        # surface bracket (kind-dependent) and the interface pressure terms
        geometry = _surface_geometry_at(config.surface, t)
        x, t1, t2, hess, normals, curv, area = geometry
        zs = variation.z_s(x, t)
        if kind == "tension-only":
            # first variation of the half-tension area term: the area
            # element varies by div_T z, so the bracket carries p0/2
            bracket = (
                0.5
                * config.surface.tension.p0
                * curv[:, None]
                * normals
            )
            surface_integrand = np.einsum("ni,ni->n", bracket, zs) * area
        else:
            acc = config.surface.flow.dtt_positions(sq, t)
            rho_term = (
                config.surface._rho0_nodes
                * config.surface._area0
                * np.einsum("ni,ni->n", acc, zs)
            )
            surface_integrand = rho_term
            if kind == "compressible":
                rho_s, tp, grad_tp = _surface_pressure_terms(
                    config.surface, t, geometry
                )
                extra = grad_tp + (tp * curv)[:, None] * normals
                surface_integrand = rho_term + np.einsum(
                    "ni,ni->n", extra, zs
                ) * area
        terms["surface"] += -wt * float(np.dot(sq.base_weights, surface_integrand))

        # one-sided interface pressures (phase pullbacks evaluated on the
        # reference interface nodes)
        for key, phase, z, sign in (
            ("interface_a", config.bulk_a, variation.z_a, +1.0),
            ("interface_b", config.bulk_b, variation.z_b, -1.0),
        ):
            G = phase.flow.sqrt_metric(sq.points, t)
            tp = phase.law.total_pressure(phase.rho0(sq.points) / G)
            zv = z(x, t)
            zn = np.einsum("ni,ni->n", zv, normals)
            terms[key] += sign * wt * float(
                np.dot(sq.base_weights, tp * zn * area)
            )

        # outer boundary term (static sphere)
        xi_outer = config.bulk_b.flow.inverse(oq.points, t)
        G = config.bulk_b.flow.sqrt_metric(xi_outer, t)
        tp = config.bulk_b.law.total_pressure(
            config.bulk_b.rho0(xi_outer) / G
        )
        zb = variation.z_b(oq.points, t)
        zn = np.einsum("ni,ni->n", zb, oq.normals)
        terms["outer"] += wt * float(np.dot(oq.weights, tp * zn))

    total = sum(terms.values())
    return total, terms


# ---------------------------------------------------------------------------
# Momentum / continuity residual report


def euler_lagrange_residuals(config, system, t, surface_pressure=None):
    """Sup-norm momentum and continuity residuals at quadrature nodes.

    ``system``: "compressible" (surface carries its own barotropic
    pressure), "incompressible" (supply ``surface_pressure`` as a
    callable pair (value, tangential gradient) or a SurfacePotential;
    also reports sup |div_T v_S|), "tension-only" (constant-tension
    normal balance).
    """
    report = {}
    for key, phase in (("a", config.bulk_a), ("b", config.bulk_b)):
        quad = phase.quad
        acc = phase.flow.dtt_map(quad.points, t)
        G = phase.flow.sqrt_metric(quad.points, t)
        rho, grad_p = _bulk_pressure_gradient(phase, t)
        resid = rho[:, None] * acc + grad_p
        report[f"momentum_{key}"] = float(np.max(np.linalg.norm(resid, axis=1)))
        from .flowmaps import continuity_residual

        cont = max(
            continuity_residual(
                phase.flow,
                lambda p, k=key: phase.rho0(p),
                quad.points[j],
                t,
            )
            for j in range(0, quad.n_nodes, max(1, quad.n_nodes // 16))
        )
        report[f"continuity_{key}"] = float(cont)

    geometry = _surface_geometry_at(config.surface, t)
    x, t1, t2, hess, normals, curv, area = geometry
    sq = config.surface.quad

    jump = np.zeros(sq.n_nodes)
    for phase, sign in ((config.bulk_a, -1.0), (config.bulk_b, +1.0)):
        G = phase.flow.sqrt_metric(sq.points, t)
        jump += sign * phase.law.total_pressure(phase.rho0(sq.points) / G)

    if system == "tension-only":
        resid = (
            config.surface.tension.p0 * curv[:, None] * normals
            + jump[:, None] * normals
        )
        report["momentum_s"] = float(np.max(np.linalg.norm(resid, axis=1)))
        return report

    acc = config.surface.flow.dtt_positions(sq, t)
    rho_s = config.surface._rho0_nodes * config.surface._area0 / area
    inertia = rho_s[:, None] * acc
    if system == "compressible":
        _, tp, grad_tp = _surface_pressure_terms(config.surface, t, geometry)
        resid = inertia + grad_tp + (tp * curv)[:, None] * normals + jump[:, None] * normals
    elif system == "incompressible":
        if surface_pressure is None:
            raise ValueError("incompressible system needs a surface pressure")
        vals = surface_pressure(x)
        grads = surface_pressure.surface_gradient(x)
        resid = inertia + grads + (vals * curv)[:, None] * normals + jump[:, None] * normals
        div = config.surface.flow.velocity_divergence(sq, t)
        report["div_surface"] = float(np.max(np.abs(div)))
    else:
        raise ValueError(f"unknown system {system!r}")
    report["momentum_s"] = float(np.max(np.linalg.norm(resid, axis=1)))

    # surface continuity at a node subset
    from .flowmaps import continuity_residual

    idx = range(0, sq.n_nodes, max(1, sq.n_nodes // 16))
    cont = max(
        continuity_residual(
            config.surface.flow,
            lambda p: config.surface.rho0(p),
            sq.params[j],
            t,
            kind="surface",
            chart_index=int(sq.chart_index[j]),
        )
        for j in idx
    )
    report["continuity_s"] = float(cont)
    return report


# ---------------------------------------------------------------------------
# Individual energy-variation identities (frozen time where applicable)


def _richardson(fd_samples, eps_list):
    table = [list(fd_samples)]
    while len(table[-1]) > 1:
        prev = table[-1]
        factor = 4.0 ** len(table)
        table.append(
            [
                (factor * prev[i + 1] - prev[i]) / (factor - 1.0)
                for i in range(len(prev) - 1)
            ]
        )
    best = table[-1][0]
    est = abs(best - table[-2][-1]) if len(table) > 1 else abs(best) * 1e-8
    return best, est


def kinetic_variation_residual(config, variation, phase_key,
                               eps_list=(1e-2, 5e-3, 2.5e-3)):
    """FD derivative of a kinetic part vs -int int rho D_t v . z."""
    part = {"a": "kinetic_a", "b": "kinetic_b", "s": "kinetic_s"}[phase_key]
    fd = []
    for h in eps_list:
        plus = action(perturbed_config(config, variation, +h)).parts()[part]
        minus = action(perturbed_config(config, variation, -h)).parts()[part]
        fd.append((plus - minus) / (2.0 * h))
    deriv, est = _richardson(fd, eps_list)

    rhs = 0.0
    for t, wt in zip(config.t_nodes, config.t_weights):
        if phase_key in ("a", "b"):
            phase = config.bulk_a if phase_key == "a" else config.bulk_b
            z = variation.z_a if phase_key == "a" else variation.z_b
            x = phase.flow.map(phase.quad.points, t)
            acc = phase.flow.dtt_map(phase.quad.points, t)
            zv = z(x, t)
            rhs += -wt * float(
                np.dot(
                    phase.quad.weights,
                    phase._rho0_nodes * np.einsum("ni,ni->n", acc, zv),
                )
            )
        else:
            sq = config.surface.quad
            x = config.surface.flow.positions(sq, t)
            acc = config.surface.flow.dtt_positions(sq, t)
            zv = variation.z_s(x, t)
            rhs += -wt * float(
                np.dot(
                    sq.base_weights,
                    config.surface._rho0_nodes
                    * config.surface._area0
                    * np.einsum("ni,ni->n", acc, zv),
                )
            )
    return deriv, rhs, est


def internal_variation_residual(config, variation, phase_key, t,
                                eps_list=(1e-2, 5e-3, 2.5e-3)):
    """FD derivative of an internal energy at frozen t vs
    int (p - rho p') div z (bulk) / surface divergence analog."""
    fd = []
    for h in eps_list:
        cp = perturbed_config(config, variation, +h)
        cm = perturbed_config(config, variation, -h)
        if phase_key in ("a", "b"):
            ep = _bulk_energies_at(getattr(cp, f"bulk_{phase_key}"), t)[1]
            em = _bulk_energies_at(getattr(cm, f"bulk_{phase_key}"), t)[1]
        else:
            ep = _surface_energies_at(cp.surface, t, "compressible")[1]
            em = _surface_energies_at(cm.surface, t, "compressible")[1]
        fd.append((ep - em) / (2.0 * h))
    deriv, est = _richardson(fd, eps_list)

    if phase_key in ("a", "b"):
        phase = getattr(config, f"bulk_{phase_key}")
        z = variation.z_a if phase_key == "a" else variation.z_b
        quad = phase.quad
        x = phase.flow.map(quad.points, t)
        G = phase.flow.sqrt_metric(quad.points, t)
        rho = phase._rho0_nodes / G
        div_z = z.divergence(x, t)
        rhs = float(
            np.dot(quad.weights, (phase.law.p(rho) - rho * phase.law.p_prime(rho)) * div_z * G)
        )
    else:
        sq = config.surface.quad
        geometry = _surface_geometry_at(config.surface, t)
        x, t1, t2, hess, normals, curv, area = geometry
        rho = config.surface._rho0_nodes * config.surface._area0 / area
        jz = variation.z_s.jacobian(x, t)
        proj = np.eye(3)[None, :, :] - normals[:, :, None] * normals[:, None, :]
        div_z = np.einsum("nij,nij->n", proj, jz)
        law = config.surface.law
        rhs = float(
            np.dot(
                sq.base_weights,
                (law.p(rho) - rho * law.p_prime(rho)) * div_z * area,
            )
        )
    return deriv, rhs, est


def tension_variation_residual(config, variation, t,
                               eps_list=(1e-2, 5e-3, 2.5e-3)):
    """FD derivative of int (p0/2) dArea vs int (p0/2) div_T z dArea.

    The quadrature side uses the first variation of the area element,
    d(dArea)/d(eps) = div_T z dArea.
    """
    fd = []
    for h in eps_list:
        cp = perturbed_config(config, variation, +h)
        cm = perturbed_config(config, variation, -h)
        ep = -_surface_energies_at(cp.surface, t, "tension-only")[1]
        em = -_surface_energies_at(cm.surface, t, "tension-only")[1]
        fd.append((ep - em) / (2.0 * h))
    deriv, est = _richardson(fd, eps_list)

    sq = config.surface.quad
    geometry = _surface_geometry_at(config.surface, t)
    x, t1, t2, hess, normals, curv, area = geometry
    jz = variation.z_s.jacobian(x, t)
    proj = np.eye(3)[None, :, :] - normals[:, :, None] * normals[:, None, :]
    div_z = np.einsum("nij,nij->n", proj, jz)
    rhs = float(
        np.dot(sq.base_weights, 0.5 * config.surface.tension.p0 * div_z * area)
    )
    return deriv, rhs, est


# ---------------------------------------------------------------------------
# Catalog constructors for configurations and variations


def make_spherical_configuration(
    motion,
    law_a,
    law_b,
    rho0_a,
    rho0_b,
    surface_law=None,
    rho0_s=None,
    tension=None,
    interface_radius=1.0,
    outer_radius=2.0,
    center=(0.0, 0.0, 0.0),
    horizon=0.4,
    n_r=16,
    n_mu=12,
    n_phi=24,
    n_surf=32,
    n_time=16,
    label="",
):
    """Two concentric phases driven by one shared motion map.

    The shared map keeps the interface compatibility and the velocity
    constraints exact for the catalog motions (rotations and radial
    profiles fixing the outer sphere).
    """
    center = np.asarray(center, dtype=float)
    atlas = sphere_atlas(interface_radius, center)
    squad = atlas.quadrature(n_surf)
    ball = ball_quadrature(interface_radius, center, n_r, n_mu, n_phi)
    shell = shell_quadrature(interface_radius, outer_radius, center, n_r, n_mu, n_phi)
    outer = sphere_atlas(outer_radius, center).quadrature(n_surf)

    bulk_a = BulkPhase(motion, law_a, rho0_a, ball)
    bulk_b = BulkPhase(motion, law_b, rho0_b, shell)
    surface = SurfacePhase(
        SurfaceFlowMap(atlas, motion),
        squad,
        law=surface_law,
        rho0=rho0_s,
        tension=tension,
    )
    cfg = MultiphaseConfiguration(
        bulk_a, bulk_b, surface, outer, horizon, n_time=n_time, label=label
    )
    cfg._factory_args = dict(
        motion=motion, law_a=law_a, law_b=law_b, rho0_a=rho0_a, rho0_b=rho0_b,
        surface_law=surface_law, rho0_s=rho0_s, tension=tension,
        interface_radius=interface_radius, outer_radius=outer_radius,
        center=tuple(center), horizon=horizon, n_r=n_r, n_mu=n_mu,
        n_phi=n_phi, n_surf=n_surf, n_time=n_time, label=label,
    )
    return cfg


def refined_configuration(config, factor=1.5):
    """Same physics, all quadrature resolutions scaled by ``factor``."""
    args = dict(config._factory_args)
    for key in ("n_r", "n_mu", "n_phi", "n_surf", "n_time"):
        args[key] = int(round(args[key] * factor))
    return make_spherical_configuration(**args)


def interior_bump_variation(center, radius, direction, horizon, which="a",
                            label=""):
    """Compactly supported bump in one bulk phase; other components zero."""
    from .fields import VectorField

    val, grad = bump_profile(center, radius)
    direction = np.asarray(direction, dtype=float)

    def value(points):
        return val(points)[:, None] * direction

    def jac(points):
        return direction[None, :, None] * grad(points)[:, None, :]

    field = VectorField(value, jac, name=f"bump@{which}")
    return VariationField(
        z_a=field if which == "a" else None,
        z_b=field if which == "b" else None,
        z_s=None,
        horizon=horizon,
        label=label or f"interior-bump-{which}",
    )


def annular_bump_variation(r_lo, r_hi, direction, horizon, which="a",
                           center=(0.0, 0.0, 0.0), label=""):
    """Constant-direction bump with a radial C-infinity profile.

    The profile lives in s = |x - c|^2, supported on [r_lo^2, r_hi^2], so
    it is aligned with the spherical product quadratures and integrates
    to near machine accuracy (unlike a generic off-center bump).
    """
    from .fields import VectorField

    center = np.asarray(center, dtype=float)
    direction = np.asarray(direction, dtype=float)
    s0, s1 = float(r_lo) ** 2, float(r_hi) ** 2

    def _eta(s):
        t = (np.asarray(s, dtype=float) - s0) / (s1 - s0)
        out = np.zeros_like(t)
        mid = (t > 0.0) & (t < 1.0)
        w = 2.0 * t[mid] - 1.0
        out[mid] = np.exp(1.0 - 1.0 / (1.0 - w**2))
        return out

    def _deta(s):
        t = (np.asarray(s, dtype=float) - s0) / (s1 - s0)
        out = np.zeros_like(t)
        mid = (t > 0.0) & (t < 1.0)
        w = 2.0 * t[mid] - 1.0
        v = np.exp(1.0 - 1.0 / (1.0 - w**2))
        out[mid] = v * (-2.0 * w / (1.0 - w**2) ** 2) * (2.0 / (s1 - s0))
        return out

    def value(points):
        d = np.atleast_2d(points) - center
        s = np.einsum("ni,ni->n", d, d)
        return _eta(s)[:, None] * direction

    def jac(points):
        d = np.atleast_2d(points) - center
        s = np.einsum("ni,ni->n", d, d)
        grad_eta = 2.0 * _deta(s)[:, None] * d
        return direction[None, :, None] * grad_eta[:, None, :]

    field = VectorField(value, jac, name=f"annular-bump-{which}")
    return VariationField(
        z_a=field if which == "a" else None,
        z_b=field if which == "b" else None,
        z_s=None,
        horizon=horizon,
        label=label or f"annular-bump-{which}",
    )


def rotational_variation(horizon, axis=(0.0, 0.0, 1.0), q_coeffs=(1.0,),
                         center=(0.0, 0.0, 0.0), divergence_free=True,
                         label="rotational"):
    """z = q(|x - c|^2) axis x (x - c): tangential to centered spheres."""
    from .fields import VectorField

    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    center = np.asarray(center, dtype=float)
    K = np.array(
        [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
    )
    q_coeffs = np.asarray(q_coeffs, dtype=float)
    dq_coeffs = np.polynomial.polynomial.polyder(q_coeffs)

    def value(points):
        d = np.atleast_2d(points) - center
        s = np.einsum("ni,ni->n", d, d)
        q = np.polynomial.polynomial.polyval(s, q_coeffs)
        return q[:, None] * (d @ K.T)

    def jac(points):
        d = np.atleast_2d(points) - center
        s = np.einsum("ni,ni->n", d, d)
        q = np.polynomial.polynomial.polyval(s, q_coeffs)
        dq = np.polynomial.polynomial.polyval(s, dq_coeffs)
        Kd = d @ K.T
        return q[:, None, None] * K[None, :, :] + 2.0 * dq[:, None, None] * (
            Kd[:, :, None] * d[:, None, :]
        )

    field = VectorField(value, jac, name="rotational")
    return VariationField(
        z_a=field, z_b=field, z_s=field, horizon=horizon,
        surface_divergence_free=divergence_free, label=label,
    )


def radial_variation(horizon, eta_coeffs, center=(0.0, 0.0, 0.0),
                     label="radial"):
    """z = eta(|x - c|^2)(x - c); choose eta(R_out^2) = 0 for admissibility."""
    from .fields import VectorField

    center = np.asarray(center, dtype=float)
    eta = np.asarray(eta_coeffs, dtype=float)
    deta = np.polynomial.polynomial.polyder(eta)

    def value(points):
        d = np.atleast_2d(points) - center
        s = np.einsum("ni,ni->n", d, d)
        return np.polynomial.polynomial.polyval(s, eta)[:, None] * d

    def jac(points):
        d = np.atleast_2d(points) - center
        s = np.einsum("ni,ni->n", d, d)
        e = np.polynomial.polynomial.polyval(s, eta)
        de = np.polynomial.polynomial.polyval(s, deta)
        eye = np.broadcast_to(np.eye(3), (d.shape[0], 3, 3))
        return e[:, None, None] * eye + 2.0 * de[:, None, None] * (
            d[:, :, None] * d[:, None, :]
        )

    field = VectorField(value, jac, name="radial")
    return VariationField(
        z_a=field, z_b=field, z_s=field, horizon=horizon, label=label
    )


def combined_variation(horizon, variations, label="combined"):
    """Pointwise sum of the component fields of several variations."""
    from .fields import VectorField

    def pick(attr):
        bases = [getattr(v, attr).base for v in variations
                 if not isinstance(getattr(v, attr), _ZeroField)]
        if not bases:
            return None

        def value(points):
            return sum(b(points) for b in bases)

        def jac(points):
            return sum(b.jacobian(points) for b in bases)

        return VectorField(value, jac, name=label)

    div_free = all(v.surface_divergence_free for v in variations)
    return VariationField(
        z_a=pick("z_a"), z_b=pick("z_b"), z_s=pick("z_s"),
        horizon=horizon, surface_divergence_free=div_free, label=label,
    )
