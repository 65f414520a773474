"""Verification suites driven by the CLI and the acceptance tests.

Each suite takes a Reporter, a config mapping and a seeded Generator and
records one pass/fail line per verified identity.  Tolerances are the
package's fixed bars (scalable through ``tol_scale`` for exploratory
runs; the acceptance tests use scale 1).
"""

import numpy as np

from . import flowmaps as fm
from . import variation as va
from .fields import VectorField, polynomial_scalar
from .geometry import (
    bulk_divergence_theorem_residual,
    bulk_integration_by_parts_residual,
    check_surface_divergence_theorem,
    dump_quadrature_csv,
    ellipsoid_atlas,
    sphere_atlas,
    surface_divergence,
    surface_gradient,
    surface_integration_by_parts_residual,
    unit_normal,
)
from .harmonics import rotational_field
from .helmholtz import SphereContext, SurfacePotential, decompose, orthogonality_defect
from .laws import ConstantTension, GammaLaw, LinearLaw, QuadraticLaw, law_from_config
from .quadrature import ball_quadrature, shell_quadrature

__all__ = [
    "run_verify",
    "run_vary",
    "run_decompose",
    "run_simulate",
    "build_default_corpus",
    "SUITES",
]

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi

# frozen oracle values (50-digit arithmetic, rounded to double)
GAMMA_LAW_TOTAL_PRESSURE_RHO2 = 1.0556063286183155  # 0.4 * 2^1.4
REPRESENTED_ENERGY_SQRTG8 = 0.43527528164806206  # 8^(-0.4)

# polynomial vector-field corpus for the divergence-theorem identities
_FIELD_CORPUS = [
    ("constant-e1", [[(1.0, (0, 0, 0))], [], []]),
    ("constant-e3", [[], [], [(1.0, (0, 0, 0))]]),
    ("position", [[(1.0, (1, 0, 0))], [(1.0, (0, 1, 0))], [(1.0, (0, 0, 1))]]),
    ("z2-e1", [[(1.0, (0, 0, 2))], [], []]),
    ("xy-yz-zx", [[(1.0, (1, 1, 0))], [(1.0, (0, 1, 1))], [(1.0, (1, 0, 1))]]),
    ("cubic-x3", [[(1.0, (3, 0, 0))], [], []]),
    ("mixed-quadratic", [[(0.5, (0, 2, 0))], [(1.0, (2, 0, 0))], [(-1.0, (1, 1, 0))]]),
    ("radial-cubic", [[(1.0, (1, 0, 2))], [(1.0, (0, 1, 2))], [(1.0, (0, 0, 3))]]),
    ("swirl", [[(-1.0, (0, 1, 0))], [(1.0, (1, 0, 0))], []]),
    ("quartic", [[(1.0, (2, 0, 2))], [(-0.5, (0, 4, 0))], [(0.25, (1, 1, 2))]]),
]


def _poly_vector(spec):
    comps = [polynomial_scalar(term) if term else None for term in spec]

    def value(points):
        out = np.zeros_like(np.atleast_2d(points), dtype=float)
        for j, f in enumerate(comps):
            if f is not None:
                out[:, j] = f(points)
        return out

    def jacobian(points):
        out = np.zeros((np.atleast_2d(points).shape[0], 3, 3))
        for j, f in enumerate(comps):
            if f is not None:
                out[:, j, :] = f.gradient(points)
        return out

    return VectorField(value, jacobian)


# ---------------------------------------------------------------------------
# verify


def run_verify(reporter, cfg, rng, tol_scale=1.0, output_dir=None):
    geo = cfg.get("geometry", {})
    n_quad = int(geo.get("n_quad", 48))
    n_random = int(geo.get("n_random_points", 10000))

    atlas = sphere_atlas(1.0)
    quad = atlas.quadrature(n_quad)
    if output_dir is not None:
        import os

        dump_quadrature_csv(quad, os.path.join(output_dir, "quadrature_nodes.csv"))

    # partition of unity
    pts = np.concatenate(
        [p.position[None, :] for p in atlas.random_points(rng, n_random)], axis=0
    )
    reporter.check(
        "partition-of-unity", "unit-sphere-random-points",
        atlas.partition_defect(pts), 1e-12 * tol_scale,
    )

    # sphere area and moments
    area = quad.integrate(lambda p: np.ones(p.shape[0]))
    reporter.check(
        "sphere-area", "unit-sphere",
        abs(area - FOUR_PI) / FOUR_PI, 1e-8 * tol_scale,
    )
    reporter.check(
        "sphere-moment-odd", "z-moment",
        abs(quad.integrate(lambda p: p[:, 2])), 1e-10 * tol_scale,
    )
    reporter.check(
        "sphere-moment-even", "z^2-moment",
        abs(quad.integrate(lambda p: p[:, 2] ** 2) - FOUR_PI / 3.0),
        1e-8 * tol_scale,
    )

    # mean curvature on four radii, all quadrature nodes
    for R in (0.5, 1.0, 2.0, 5.0):
        q = sphere_atlas(R).quadrature(n_quad)
        reporter.check(
            "mean-curvature-sphere", f"radius-{R}",
            float(np.max(np.abs(q.mean_curv + 2.0 / R))), 1e-8 * tol_scale,
        )

    # unit normal catalog examples
    p = atlas.locate([0.0, 0.0, 1.0])
    reporter.check(
        "unit-normal", "unit-sphere-pole",
        float(np.max(np.abs(unit_normal(atlas, p) - [0.0, 0.0, 1.0]))),
        1e-12 * tol_scale,
    )
    at2 = sphere_atlas(2.0)
    p = at2.locate([2.0, 0.0, 0.0])
    reporter.check(
        "unit-normal", "radius-2-equator",
        float(np.max(np.abs(unit_normal(at2, p) - [1.0, 0.0, 0.0]))),
        1e-12 * tol_scale,
    )
    ell = ellipsoid_atlas(2.0, 1.0, 1.0)
    p = ell.locate([2.0, 0.0, 0.0])
    reporter.check(
        "unit-normal", "ellipsoid-axis-point",
        float(np.max(np.abs(unit_normal(ell, p) - [1.0, 0.0, 0.0]))),
        1e-12 * tol_scale,
    )

    # tangentiality and projector idempotence at random points/fields
    worst_tan = 0.0
    worst_proj = 0.0
    for _ in range(100):
        exps = tuple(int(rng.integers(0, 3)) for _ in range(3))
        coef = float(rng.uniform(-2.0, 2.0))
        f = polynomial_scalar([(coef, exps)])
        point = atlas.random_points(rng, 1)[0]
        g = surface_gradient(atlas, f, point)
        n = unit_normal(atlas, point)
        worst_tan = max(worst_tan, abs(float(np.dot(g, n))))
        proj = g - np.dot(n, g) * n
        worst_proj = max(worst_proj, float(np.max(np.abs(proj - g))))
    reporter.check("surface-gradient-tangential", "random-fields",
                   worst_tan, 1e-10 * tol_scale)
    reporter.check("tangential-projector-idempotent", "random-fields",
                   worst_proj, 1e-12 * tol_scale)

    # frozen operator examples
    f = polynomial_scalar([(1.0, (0, 0, 1))])
    p = atlas.locate([1.0, 0.0, 0.0])
    reporter.check(
        "surface-gradient", "height-at-equator",
        float(np.max(np.abs(surface_gradient(atlas, f, p) - [0.0, 0.0, 1.0]))),
        1e-12 * tol_scale,
    )
    F_pos = _poly_vector([[(1.0, (1, 0, 0))], [(1.0, (0, 1, 0))], [(1.0, (0, 0, 1))]])
    reporter.check(
        "surface-divergence", "position-field",
        abs(surface_divergence(atlas, F_pos, p) - 2.0), 1e-12 * tol_scale,
    )

    # surface divergence theorem + integration by parts on the corpus
    for name, spec in _FIELD_CORPUS:
        F = _poly_vector(spec)
        reporter.check(
            "surface-divergence-theorem", name,
            check_surface_divergence_theorem(atlas, quad, F), 1e-6 * tol_scale,
        )
    fpol = polynomial_scalar([(1.0, (0, 0, 1)), (0.5, (2, 0, 0))])
    gpol = polynomial_scalar([(1.0, (1, 1, 0)), (-0.25, (0, 0, 2))])
    for j in range(3):
        reporter.check(
            "surface-integration-by-parts", f"component-{j}",
            surface_integration_by_parts_residual(atlas, quad, fpol, gpol, j),
            1e-6 * tol_scale,
        )

    # bulk divergence theorems (inner phase, outer phase with two boundaries)
    ball = ball_quadrature(1.0, n_r=24, n_mu=16, n_phi=32)
    shell = shell_quadrature(1.0, 2.0, n_r=24, n_mu=16, n_phi=32)
    outer_quad = sphere_atlas(2.0).quadrature(n_quad)
    for name, spec in _FIELD_CORPUS[:5]:
        F = _poly_vector(spec)
        reporter.check(
            "bulk-divergence-theorem-inner", name,
            bulk_divergence_theorem_residual(ball, F, [(quad, +1.0)]),
            1e-6 * tol_scale,
        )
        reporter.check(
            "bulk-divergence-theorem-outer", name,
            bulk_divergence_theorem_residual(
                shell, F, [(outer_quad, +1.0), (quad, -1.0)]
            ),
            1e-6 * tol_scale,
        )
    for j in range(3):
        reporter.check(
            "bulk-integration-by-parts", f"inner-component-{j}",
            bulk_integration_by_parts_residual(ball, fpol, gpol, j, [(quad, +1.0)]),
            1e-6 * tol_scale,
        )

    # ----- kinematics -----
    one = lambda p, t: np.ones(p.shape[0])
    dil = fm.DilationMap(fm.TimeProfile.affine(1.0, 1.0))
    rot = fm.RotationMap(profile=fm.TimeProfile.affine(0.0, 0.7))
    shear = fm.ShearMap()
    sflow_dil = fm.SurfaceFlowMap(atlas, dil)
    sflow_rot = fm.SurfaceFlowMap(atlas, rot)

    for name, flow, t in (
        ("dilation", dil, 0.0),
        ("rotation", rot, 0.3),
        ("shear", shear, 0.2),
    ):
        reporter.check(
            "transport-identity-bulk", name,
            fm.transport_identity_residual(flow, one, t, ball), 1e-7 * tol_scale,
        )
    for name, sflow, t in (
        ("dilating-sphere", sflow_dil, 0.0),
        ("rotating-sphere", sflow_rot, 0.3),
    ):
        reporter.check(
            "transport-identity-surface", name,
            fm.transport_identity_residual(
                sflow, one, t, quad, kind="surface"
            ),
            1e-7 * tol_scale,
        )

    # sqrtG initial conditions and divergence-free constancy
    xi = rng.uniform(-0.5, 0.5, (50, 3))
    reporter.check(
        "metric-initial-bulk", "dilation-t0",
        float(np.max(np.abs(dil.sqrt_metric(xi, 0.0) - 1.0))), 1e-12 * tol_scale,
    )
    a0 = sflow_dil.area_elements(quad, 0.0)
    area0 = np.linalg.norm(np.cross(quad.tangent1, quad.tangent2), axis=1)
    reporter.check(
        "metric-initial-surface", "static-area-element",
        float(np.max(np.abs(a0 - area0))), 1e-12 * tol_scale,
    )
    worst = 0.0
    for t in (0.2, 0.5, 0.9):
        worst = max(
            worst,
            float(np.max(np.abs(rot.sqrt_metric(xi, t) - 1.0))),
            float(np.max(np.abs(shear.sqrt_metric(xi, t) - 1.0))),
        )
    reporter.check("metric-constant-divergence-free", "rotation-shear",
                   worst, 1e-9 * tol_scale)

    # continuity residuals and empirical order
    uniform = lambda p: np.ones(p.shape[0])
    reporter.check(
        "continuity-pullback", "identity-flow",
        fm.continuity_residual(fm.IdentityMap(), uniform, [0.3, 0.2, 0.1], 0.5),
        1e-10 * tol_scale,
    )
    reporter.check(
        "continuity-pullback", "dilation",
        fm.continuity_residual(dil, uniform, [0.3, 0.2, 0.1], 0.5),
        1e-7 * tol_scale,
    )
    reporter.check(
        "continuity-pullback", "dilating-sphere-surface",
        fm.continuity_residual(sflow_dil, uniform, [0.2, 1.0], 0.4,
                               kind="surface"),
        1e-7 * tol_scale,
    )
    exp_dil = fm.DilationMap(fm.TimeProfile.exponential(1.0))
    res_h = [
        fm.continuity_residual(exp_dil, uniform, [0.3, 0.2, 0.1], 0.5,
                               step=h, order=2)
        for h in (1e-3, 5e-4, 2.5e-4)
    ]
    orders = [np.log2(res_h[i] / res_h[i + 1]) for i in range(2)]
    reporter.add(
        "continuity-order", "exponential-dilation",
        float(min(orders)), 2.0,
        bool(min(orders) >= 2.0 - 0.1),
        residuals=", ".join("%.3e" % r for r in res_h),
    )

    # pushforward closed forms
    reporter.check(
        "pushforward-ball", "dilating-unit-ball-t1",
        abs(fm.pushforward_integral(dil, ball, one, 1.0) - 32.0 * np.pi / 3.0)
        / (32.0 * np.pi / 3.0),
        1e-6 * tol_scale,
    )
    reporter.check(
        "pushforward-sphere", "dilating-unit-sphere-t1",
        abs(
            fm.pushforward_integral(sflow_dil, quad, one, 1.0, kind="surface")
            - 16.0 * np.pi
        )
        / (16.0 * np.pi),
        1e-6 * tol_scale,
    )
    quad_split = atlas.quadrature(n_quad, radial_breaks=(1.0,))
    hemi = fm.pushforward_integral(
        fm.SurfaceFlowMap(atlas, fm.IdentityMap()), quad_split, one, 0.5,
        kind="surface", indicator=lambda p: (p[:, 2] > 0.0).astype(float),
    )
    reporter.check(
        "pushforward-subset", "upper-hemisphere",
        abs(hemi - TWO_PI), 1e-6 * tol_scale,
    )

    # mass representation: reference quadrature of rho0 is reproduced
    rho0 = polynomial_scalar([(1.0, (0, 0, 0)), (0.2, (2, 0, 0))])
    mass_ref = float(np.dot(ball.weights, rho0(ball.points)))
    G = dil.sqrt_metric(ball.points, 0.7)
    mass_push = float(np.dot(ball.weights, (rho0(ball.points) / G) * G))
    reporter.check(
        "mass-representation", "dilation-t0.7",
        abs(mass_push - mass_ref) / abs(mass_ref), 1e-12 * tol_scale,
    )

    # energy-rate audits
    law = GammaLaw(1.0, 1.4)
    reporter.check(
        "internal-energy-rate", "bulk-dilation",
        fm.internal_energy_rate_residual(dil, ball, law, uniform, 0.2),
        1e-9 * tol_scale,
    )
    reporter.check(
        "internal-energy-rate", "surface-dilation",
        fm.internal_energy_rate_residual(
            sflow_dil, quad, law, uniform, 0.2, kind="surface"
        ),
        1e-9 * tol_scale,
    )
    reporter.check(
        "kinetic-energy-rate", "bulk-dilation",
        fm.kinetic_energy_rate_residual(dil, ball, uniform, 0.2),
        1e-9 * tol_scale,
    )

    # ----- constitutive -----
    for name, law in (
        ("gamma-1.4", GammaLaw(1.0, 1.4)),
        ("gamma-2.0-kappa-0.5", GammaLaw(0.5, 2.0)),
        ("quadratic", QuadraticLaw()),
        ("linear", LinearLaw(0.7)),
    ):
        rho = rng.uniform(0.1, 10.0, 1000)
        h = 1e-6
        fd = (law.p(rho + h) - law.p(rho - h)) / (2.0 * h)
        rel = float(np.max(np.abs(fd - law.p_prime(rho)) / np.maximum(np.abs(fd), 1e-12)))
        reporter.check("law-derivative-consistency", name, rel, 1e-6 * tol_scale)
        identity = float(
            np.max(
                np.abs(law.total_pressure(rho) + law.p(rho) - rho * law.p_prime(rho))
                / np.maximum(np.abs(rho * law.p_prime(rho)), 1e-12)
            )
        )
        reporter.check("total-pressure-identity", name, identity, 1e-15 * tol_scale)
    law = GammaLaw(1.0, 1.4)
    rho = rng.uniform(0.1, 10.0, 1000)
    closed = 0.4 * rho**1.4
    reporter.check(
        "gamma-law-closed-form", "kappa-1-gamma-1.4",
        float(np.max(np.abs(law.total_pressure(rho) - closed) / closed)),
        1e-12 * tol_scale,
    )
    reporter.check(
        "total-pressure-example", "rho-squared-at-3",
        abs(QuadraticLaw().total_pressure(3.0) - 9.0), 1e-14 * tol_scale,
    )
    reporter.check(
        "total-pressure-example", "linear-law-zero",
        abs(LinearLaw(2.5).total_pressure(4.0)), 0.0 + 1e-300,
    )
    reporter.check(
        "total-pressure-example", "gamma-1.4-at-2",
        abs(law.total_pressure(2.0) - GAMMA_LAW_TOTAL_PRESSURE_RHO2),
        1e-15 * tol_scale,
    )
    from .laws import represented_internal_energy

    reporter.check(
        "represented-internal-energy", "mass-like-invariance",
        abs(represented_internal_energy(LinearLaw(1.0), 0.8, 3.7) - 0.8),
        1e-15 * tol_scale,
    )
    reporter.check(
        "represented-internal-energy", "quadratic",
        abs(represented_internal_energy(QuadraticLaw(), 1.0, 2.0) - 0.5),
        1e-15 * tol_scale,
    )
    reporter.check(
        "represented-internal-energy", "gamma-1.4-sqrtG-8",
        abs(
            represented_internal_energy(law, 1.0, 8.0)
            - REPRESENTED_ENERGY_SQRTG8
        ),
        1e-15 * tol_scale,
    )
    reporter.check(
        "represented-internal-energy", "identity-metric-exact",
        abs(represented_internal_energy(law, 1.3, 1.0) - float(law.p(1.3))),
        0.0 + 1e-300,
    )
    return reporter


# ---------------------------------------------------------------------------
# vary


def build_default_corpus(scale=1.0):
    """The default (configuration, variation, action kind) corpus.

    Fourteen pairs covering static/rotating/breathing/composed motions
    against interior bumps, rotational (divergence-free) fields and
    normal radial fields, exercising all three action kinds.
    """
    base = dict(n_r=int(16 * scale), n_mu=int(12 * scale),
                n_phi=int(24 * scale), n_surf=int(32 * scale),
                n_time=int(16 * scale))
    T = 0.4
    ones = polynomial_scalar([(1.0, (0, 0, 0))])
    rho_b0 = polynomial_scalar([(1.1, (0, 0, 0)), (0.05, (2, 0, 0))])
    rho_s0 = polynomial_scalar([(0.8, (0, 0, 0)), (0.1, (0, 0, 1))])
    law_a = GammaLaw(1.0, 1.4, "A")
    law_b = GammaLaw(1.2, 1.5, "B")
    law_s = GammaLaw(0.5, 2.0, "S")

    def cfg(motion, label, mode="compressible"):
        kw = dict(base)
        if mode == "tension":
            return va.make_spherical_configuration(
                motion, law_a, law_b, ones, rho_b0,
                tension=ConstantTension(0.5), horizon=T, label=label, **kw
            )
        return va.make_spherical_configuration(
            motion, law_a, law_b, ones, rho_b0,
            surface_law=law_s, rho0_s=rho_s0, horizon=T, label=label, **kw
        )

    static = fm.IdentityMap()
    rot = fm.RotationMap(axis=(0.0, 0.0, 1.0), profile=fm.TimeProfile.affine(0.0, 0.7))
    breathing = fm.RadialPolynomialMap(
        [1.0, -0.25], fm.TimeProfile.sine(0.08, 2.0)
    )
    swirl = fm.ComposedMap(rot, breathing)

    v_bump_a = va.interior_bump_variation(
        (0.2, 0.1, -0.1), 0.45, (0.3, -0.2, 0.5), T, which="a"
    )
    v_ann_a = va.annular_bump_variation(0.15, 0.8, (0.3, -0.2, 0.5), T, which="a")
    v_ann_b = va.annular_bump_variation(1.15, 1.85, (0.4, 0.1, -0.3), T, which="b")
    v_rot = va.rotational_variation(T, q_coeffs=(1.0, -0.2))
    v_rad = va.radial_variation(T, eta_coeffs=(0.3, -0.075))
    v_mix = va.combined_variation(T, [
        va.rotational_variation(T, q_coeffs=(0.5,)),
        va.radial_variation(T, eta_coeffs=(0.2, -0.05)),
    ])

    pairs = [
        ("rotating/bump-a", cfg(rot, "rotating"), v_bump_a, "compressible"),
        ("static/annular-b", cfg(static, "static"), v_ann_b, "compressible"),
        ("static/radial", cfg(static, "static"), v_rad, "compressible"),
        ("rotating/annular-a", cfg(rot, "rotating"), v_ann_a, "compressible"),
        ("rotating/rotational", cfg(rot, "rotating"), v_rot, "compressible"),
        ("rotating/radial", cfg(rot, "rotating"), v_rad, "compressible"),
        ("breathing/annular-b", cfg(breathing, "breathing"), v_ann_b, "compressible"),
        ("breathing/rotational", cfg(breathing, "breathing"), v_rot, "compressible"),
        ("breathing/mixed", cfg(breathing, "breathing"), v_mix, "compressible"),
        ("composed/bump-a", cfg(swirl, "composed"), v_bump_a, "compressible"),
        ("composed/rotational-incompressible", cfg(swirl, "composed"), v_rot,
         "incompressible"),
        ("rotating/rotational-incompressible", cfg(rot, "rotating"), v_rot,
         "incompressible"),
        ("static-tension/radial", cfg(static, "static-tension", "tension"),
         v_rad, "tension-only"),
        ("breathing-tension/mixed", cfg(breathing, "breathing-tension", "tension"),
         v_mix, "tension-only"),
    ]
    return pairs


def _variation_from_config(spec, horizon):
    kind = spec.get("kind")
    if kind == "radial":
        return va.radial_variation(horizon, tuple(spec.get("eta_coeffs", (0.3,))))
    if kind == "rotational":
        return va.rotational_variation(
            horizon, q_coeffs=tuple(spec.get("q_coeffs", (1.0,)))
        )
    if kind == "bump":
        return va.interior_bump_variation(
            tuple(spec.get("center", (0.0, 0.0, 0.0))),
            float(spec.get("radius", 0.4)),
            tuple(spec.get("direction", (1.0, 0.0, 0.0))),
            horizon,
            which=spec.get("which", "a"),
        )
    raise ValueError(f"unknown variation kind {kind!r}")


def run_vary(reporter, cfg, rng, tol_scale=1.0):
    scale = float(cfg.get("resolution_scale", 1.0))
    refine = float(cfg.get("refine_factor", 1.5))
    eps0 = tuple(cfg.get("eps_ladder", (1e-2, 5e-3, 2.5e-3)))
    pairs = build_default_corpus(scale)

    # caller-declared extra variation: constraint validation happens first,
    # so inadmissible fields are rejected before any identity runs
    extra = cfg.get("extra_variation")
    if extra:
        config = pairs[0][1]
        variation = _variation_from_config(extra, config.horizon)
        variation.validate(config, rng)
        pairs = pairs + [
            (f"extra/{extra.get('kind')}", config, variation, "compressible")
        ]

    for label, config, variation, kind in pairs:
        config.validate(rng)
        variation.validate(config, rng)
        fine = va.refined_configuration(config, refine)
        eps1 = tuple(e / 2.0 for e in eps0)

        dA0, rich0 = va.action_derivative_fd(config, variation, kind, eps0)
        rhs0, terms0 = va.first_variation_rhs(config, variation, kind)
        dA1, rich1 = va.action_derivative_fd(fine, variation, kind, eps1)
        rhs1, _ = va.first_variation_rhs(fine, variation, kind)

        # refinement delta with the first-order-convergence safety factor
        # 1/(1 - 1/2) = 2, plus a roundoff floor for the O(10) space-time
        # quadrature sums
        delta = 2.0 * (abs(dA1 - dA0) + abs(rhs1 - rhs0))
        mismatch0 = abs(dA0 - rhs0)
        mismatch1 = abs(dA1 - rhs1)
        tol = rich0 + delta + 1e-12
        reporter.add(
            "first-variation-identity", label, mismatch0, tol,
            bool(mismatch0 <= tol),
            dA_fd=float(dA0), rhs=float(rhs0),
            richardson_error=float(rich0), quadrature_delta=float(delta),
            kind=kind,
            terms={k: float(v) for k, v in terms0.items()},
        )
        decreased = bool(mismatch1 <= mismatch0 or mismatch1 <= 1e-10)
        reporter.add(
            "first-variation-refinement", label, mismatch1, max(mismatch0, 1e-10),
            decreased, coarse_mismatch=float(mismatch0),
        )

    # per-term energy-variation identities on one rotating configuration
    pairs_by_label = {lbl: (c, v, k) for lbl, c, v, k in pairs}
    config, v_rot, _ = pairs_by_label["rotating/rotational"]
    _, v_rad, _ = pairs_by_label["rotating/radial"]
    v_bump_a = pairs_by_label["rotating/annular-a"][1]
    tension_cfg, v_rad_t, _ = pairs_by_label["static-tension/radial"]

    for phase, variation in (("a", v_bump_a), ("b", v_rad), ("s", v_rad)):
        fd, rhs, est = va.kinetic_variation_residual(config, variation, phase)
        tol = est + 1e-9 * max(1.0, abs(fd))
        reporter.add(
            f"kinetic-variation-{phase}", variation.label, abs(fd - rhs), tol,
            bool(abs(fd - rhs) <= tol), fd=float(fd), rhs=float(rhs),
        )
    for phase, variation in (("a", v_bump_a), ("b", v_rad), ("s", v_rad)):
        for t in (0.18, 0.3):
            fd, rhs, est = va.internal_variation_residual(config, variation, phase, t)
            tol = est + 1e-9 * max(1.0, abs(fd))
            reporter.add(
                f"internal-variation-{phase}", f"{variation.label}-t{t}",
                abs(fd - rhs), tol, bool(abs(fd - rhs) <= tol),
                fd=float(fd), rhs=float(rhs),
            )
    for t in (0.18, 0.3):
        fd, rhs, est = va.tension_variation_residual(tension_cfg, v_rad_t, t)
        tol = est + 1e-9 * max(1.0, abs(fd))
        reporter.add(
            "tension-variation", f"radial-t{t}", abs(fd - rhs), tol,
            bool(abs(fd - rhs) <= tol), fd=float(fd), rhs=float(rhs),
        )

    # reference-coordinate variation vanishes at both time endpoints
    worst = 0.0
    squad = config.surface.quad
    for lbl, c, v, k in pairs[:4]:
        for t in (0.0, c.horizon):
            x = c.surface.flow.positions(squad, t)
            for z in (v.z_a, v.z_b, v.z_s):
                worst = max(worst, float(np.max(np.abs(z(x, t)))))
    reporter.check("variation-endpoints-vanish", "corpus", worst, 1e-12 * tol_scale)

    # interface-pressure pairing: separate A/B terms match the combined
    # (P_B - P_A) z_S . n form under the admissibility constraints
    cfgc, vv, kindc = pairs_by_label["rotating/radial"]
    _, terms = va.first_variation_rhs(cfgc, vv, kindc)
    combined = 0.0
    for t, wt in zip(cfgc.t_nodes, cfgc.t_weights):
        geometry = va._surface_geometry_at(cfgc.surface, t)
        x, t1, t2, hess, normals, curv, area = geometry
        zs = vv.z_s(x, t)
        jump = np.zeros(squad.n_nodes)
        for phase, sign in ((cfgc.bulk_a, +1.0), (cfgc.bulk_b, -1.0)):
            G = phase.flow.sqrt_metric(squad.points, t)
            jump += sign * phase.law.total_pressure(phase.rho0(squad.points) / G)
        zn = np.einsum("ni,ni->n", zs, normals)
        combined += wt * float(np.dot(squad.base_weights, jump * zn * area))
    sep = terms["interface_a"] + terms["interface_b"]
    reporter.check(
        "interface-terms-equivalence", "rotating/radial",
        abs(sep - combined) / max(abs(sep), 1e-12), 1e-10 * tol_scale,
    )
    return reporter


# ---------------------------------------------------------------------------
# decompose


def run_decompose(reporter, cfg, rng, tol_scale=1.0, output_dir=None):
    degree = int(cfg.get("degree", 16))
    rounds = int(cfg.get("rounds", 20))
    source_degree = int(cfg.get("source_degree", 8))
    radius = float(cfg.get("radius", 1.0))
    center = tuple(cfg.get("center", (0.0, 0.0, 0.0)))
    ctx = SphereContext(radius, center, degree=degree)

    worst_coeff = 0.0
    worst_resid = 0.0
    last_pot = None
    k_src = (source_degree + 1) ** 2
    for round_idx in range(rounds):
        coeffs = np.zeros(ctx.basis.size)
        coeffs[:k_src] = rng.normal(size=k_src)
        truth = SurfacePotential(coeffs, ctx)
        pot, resid = decompose(lambda pts: truth.reconstruction(pts), ctx)
        worst_coeff = max(worst_coeff, float(np.max(np.abs(pot.coefficients - coeffs))))
        worst_resid = max(worst_resid, resid)
        last_pot = pot
    reporter.check("decomposition-round-trip", f"{rounds}-random-potentials",
                   worst_coeff, 1e-8 * tol_scale)
    reporter.check("decomposition-residual", f"{rounds}-random-potentials",
                   worst_resid, 1e-8 * tol_scale)
    if output_dir is not None and last_pot is not None:
        import os

        last_pot.to_csv(os.path.join(output_dir, "potential_coefficients.csv"))

    # defect detector: linear response to rotational contamination
    base_coeffs = np.zeros(ctx.basis.size)
    base_coeffs[:k_src] = rng.normal(size=k_src)
    base_pot = SurfacePotential(base_coeffs, ctx)
    rot = rotational_field(ctx.basis, 2, 1)
    eps_values = (1e-4, 1e-3, 1e-2)
    defects = []
    for eps in eps_values:
        defects.append(
            orthogonality_defect(
                lambda pts, e=eps: base_pot.reconstruction(pts) + e * rot(pts),
                ctx,
            )
        )
    logs_x = np.log(np.asarray(eps_values))
    logs_y = np.log(np.asarray(defects))
    slope, intercept = np.polyfit(logs_x, logs_y, 1)
    fit = slope * logs_x + intercept
    ss_res = float(np.sum((logs_y - fit) ** 2))
    ss_tot = float(np.sum((logs_y - np.mean(logs_y)) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    reporter.add(
        "defect-linearity", "rotational-contamination", r2, 0.999,
        bool(r2 >= 0.999), slope=float(slope),
        defects=", ".join("%.6e" % d for d in defects),
    )

    # zero field and self-pairing reference points
    pot, resid = decompose(lambda pts: np.zeros_like(pts), ctx)
    reporter.check("decomposition-zero-field", "zero",
                   float(np.max(np.abs(pot.coefficients))) + resid, 1e-14)
    Fv = rot(ctx.quad.points)
    norm = float(np.sqrt(np.dot(ctx.quad.weights, np.einsum("ni,ni->n", Fv, Fv))))
    defect = orthogonality_defect(rot, ctx)
    reporter.check("defect-self-pairing", "rotational-harmonic",
                   abs(defect - norm) / norm, 1e-10 * tol_scale)

    # constant-pressure surface potential
    from .helmholtz import incompressible_surface_pressure

    pa, pb = 1.3, 0.9
    pot, resid = incompressible_surface_pressure(
        ctx, lambda p: np.zeros((p.shape[0], 3)),
        lambda p: np.full(p.shape[0], pb - pa),
    )
    probe = ctx.quad.points[:64]
    expected = radius * (pb - pa) / 2.0
    reporter.check(
        "static-surface-pressure", "constant-jump",
        float(np.max(np.abs(pot(probe) - expected))), 1e-9 * tol_scale,
    )
    return reporter


# ---------------------------------------------------------------------------
# simulate


def _build_solver(cfg):
    from .bubble import SolverConfig, balanced_tension

    laws = cfg.get("laws", {})
    law_a = law_from_config(laws.get("a", {"kind": "gamma"}), "A")
    law_b = law_from_config(laws.get("b", {"kind": "gamma"}), "B")
    system = str(cfg.get("system", "1.3"))
    geometry = cfg.get("geometry", {})
    R0 = float(geometry.get("R0", 1.0))
    init = cfg.get("init", {})
    rho_a0 = float(init.get("rho_A0", 1.0))
    rho_b0 = float(init.get("rho_B0", 1.2))
    numerics = cfg.get("numerics", {})
    kwargs = dict(
        law_a=law_a,
        law_b=law_b,
        n_a=int(numerics.get("nr_A", 64)),
        n_b=int(numerics.get("nr_B", 64)),
        cfl=float(numerics.get("cfl", 0.4)),
        system=system,
        reconstruction=str(numerics.get("reconstruction", "minmod")),
    )
    if system in ("1.6", "tension-only"):
        tension_cfg = laws.get("tension", {})
        if tension_cfg.get("balance", tension_cfg.get("p0") is None):
            kwargs["tension"] = balanced_tension(law_a, law_b, rho_a0, rho_b0, R0)
        else:
            kwargs["tension"] = ConstantTension(float(tension_cfg["p0"]))
    else:
        kwargs["law_s"] = law_from_config(laws.get("s", {"kind": "gamma"}), "S")
    return SolverConfig(**kwargs)


def _initial_state(cfg, solver):
    from .bubble import RadialTwoPhaseState, equilibrium_state

    geometry = cfg.get("geometry", {})
    R0 = float(geometry.get("R0", 1.0))
    R_out = float(geometry.get("Rout", 2.0))
    init = cfg.get("init", {})
    rho_a0 = float(init.get("rho_A0", 1.0))
    rho_b0 = float(init.get("rho_B0", 1.2))
    state = equilibrium_state(solver, R=R0, R_out=R_out, rho_a=rho_a0, rho_b=rho_b0)
    rho_s_cfg = init.get("rho_S0", "balance")
    if rho_s_cfg != "balance" and solver.system == "compressible-surface":
        state = RadialTwoPhaseState.from_fields(
            0.0, R0, 0.0, float(rho_s_cfg),
            state.rho_a, state.u_a, state.rho_b, state.u_b, R_out,
        )
    pert = init.get("perturbation")
    if pert:
        amp = float(pert.get("amplitude", 0.0))
        width = float(pert.get("width", 0.1))
        location = float(pert.get("location", 0.5 * (R0 + R_out)))
        centers = R0 + (R_out - R0) * (np.arange(solver.n_b) + 0.5) / solver.n_b
        rho_b = state.rho_b * (
            1.0 + amp * np.exp(-((centers - location) ** 2) / width**2)
        )
        state = RadialTwoPhaseState.from_fields(
            0.0, R0, 0.0, state.rho_S,
            state.rho_a, state.u_a, rho_b, state.u_b, R_out,
        )
    return state


def run_simulate(reporter, cfg, rng, tol_scale=1.0, output_dir=None):
    import os

    from .bubble import conservation_report, simulate
    from .reporting import write_profile_csv, write_timeseries_csv

    solver = _build_solver(cfg)
    state = _initial_state(cfg, solver)
    numerics = cfg.get("numerics", {})
    t_end = float(numerics.get("t_end", 1.0))
    output_dt = float(numerics.get("output_dt", max(t_end / 50.0, 1e-6)))

    records, states = simulate(solver, state, t_end, output_dt)
    report = conservation_report(records)
    reporter.check("mass-conservation", "run",
                   report["mass_total_rel_drift"], 1e-8 * tol_scale)
    reporter.check("surface-mass-invariant", "run",
                   report["surface_mass_rel_drift"], 1e-12 * tol_scale)
    reporter.check("momentum-zero", "run", report["momentum_max"], 1e-12 * tol_scale)
    reporter.add("energy-drift", "run", report["energy_total_rel_drift"],
                 float(cfg.get("energy_drift_tolerance", 1e-6)) * tol_scale,
                 report["energy_total_rel_drift"]
                 <= float(cfg.get("energy_drift_tolerance", 1e-6)) * tol_scale)
    if solver.system == "tension-only":
        pa = float(solver.law_a.total_pressure(state.rho_a[-1]))
        pb = float(solver.law_b.total_pressure(state.rho_b[0]))
        jump = solver.tension.p0 * (-2.0 / state.R) + pb - pa
        reporter.check("tension-jump-balance", "initial", abs(jump),
                       1e-13 * tol_scale)
        reporter.check(
            "tension-stationarity", "final-radius",
            abs(records[-1]["R"] - records[0]["R"]), 1e-12 * tol_scale,
        )

    if output_dir is not None:
        columns = [
            "t", "R", "Rdot", "rho_S", "mass_total", "mass_A", "mass_B",
            "energy_kinetic", "energy_internal", "energy_total",
        ]
        write_timeseries_csv(
            os.path.join(output_dir, "timeseries.csv"), records, columns
        )
        if cfg.get("output", {}).get("profiles", False):
            final = states[-1]
            for tag, faces, rho, u, law in (
                ("a", final.faces_a(), final.rho_a, final.u_a, solver.law_a),
                ("b", final.faces_b(), final.rho_b, final.u_b, solver.law_b),
            ):
                centers = 0.5 * (faces[:-1] + faces[1:])
                write_profile_csv(
                    os.path.join(output_dir, f"profile_{tag}.csv"),
                    centers, rho, u, law.total_pressure(rho),
                )
    return reporter


SUITES = {
    "verify": run_verify,
    "vary": run_vary,
    "decompose": run_decompose,
    "simulate": run_simulate,
}
