"""Acceptance criteria, one test per criterion, at the pinned tolerances.

Run with ``pytest -s tests/test_acceptance.py`` to see one pass/fail line
per criterion; each test also enforces its runtime budget.
"""

import os
import time

import numpy as np
import pytest

from baroflow import flowmaps as fm
from baroflow.fields import polynomial_scalar
from baroflow.geometry import (
    check_surface_divergence_theorem,
    sphere_atlas,
    surface_integration_by_parts_residual,
)
from baroflow.laws import GammaLaw
from baroflow.quadrature import ball_quadrature
from baroflow.reporting import Reporter
from baroflow.suites import _FIELD_CORPUS, _poly_vector, run_decompose, run_vary

FOUR_PI = 4.0 * np.pi


def _announce(name, passed, detail=""):
    tag = "PASS" if passed else "FAIL"
    print(f"[{tag}] {name}: {detail}")
    assert passed, f"{name}: {detail}"


# ---------------------------------------------------------------------------


def test_criterion_1_surface_calculus():
    """Partition <=1e-12, area 4pi rel <=1e-8, curvature -2/R <=1e-8 on
    four radii, divergence theorem + integration by parts <=1e-6 on the
    ten-field polynomial corpus; runtime <= 30 s."""
    t0 = time.monotonic()
    atlas = sphere_atlas(1.0)
    quad = atlas.quadrature(48)

    rng = np.random.default_rng(0)
    pts = np.array([p.position for p in atlas.random_points(rng, 10000)])
    partition = atlas.partition_defect(pts)
    assert partition <= 1e-12

    area_err = abs(quad.integrate(lambda p: np.ones(p.shape[0])) - FOUR_PI) / FOUR_PI
    assert area_err <= 1e-8

    curv_worst = 0.0
    for R in (0.5, 1.0, 2.0, 5.0):
        q = sphere_atlas(R).quadrature(48)
        curv_worst = max(curv_worst, float(np.max(np.abs(q.mean_curv + 2.0 / R))))
    assert curv_worst <= 1e-8

    div_worst = 0.0
    for name, spec in _FIELD_CORPUS:
        div_worst = max(
            div_worst,
            check_surface_divergence_theorem(atlas, quad, _poly_vector(spec)),
        )
    assert div_worst <= 1e-6

    f = polynomial_scalar([(1.0, (0, 0, 1)), (0.5, (2, 0, 0))])
    g = polynomial_scalar([(1.0, (1, 1, 0)), (-0.25, (0, 0, 2))])
    ibp_worst = max(
        surface_integration_by_parts_residual(atlas, quad, f, g, j)
        for j in range(3)
    )
    assert ibp_worst <= 1e-6

    elapsed = time.monotonic() - t0
    _announce(
        "criterion-1 surface-calculus",
        elapsed <= 30.0,
        f"partition={partition:.2e} area={area_err:.2e} curv={curv_worst:.2e} "
        f"divthm={div_worst:.2e} ibp={ibp_worst:.2e} ({elapsed:.1f}s <= 30s)",
    )


def test_criterion_2_kinematics():
    """Transport identities <=1e-7 on dilation/rotation/shear (bulk and
    surface), pullback continuity converging at order >= 2, pushforward
    closed forms rel <= 1e-6; runtime <= 60 s."""
    t0 = time.monotonic()
    one = lambda p, t: np.ones(p.shape[0])
    atlas = sphere_atlas(1.0)
    ball = ball_quadrature(1.0, n_r=18, n_mu=14, n_phi=24)
    squad = atlas.quadrature(40)
    dil = fm.DilationMap(fm.TimeProfile.affine(1.0, 1.0))
    rot = fm.RotationMap(profile=fm.TimeProfile.affine(0.0, 0.7))
    shear = fm.ShearMap()

    worst_bulk = max(
        fm.transport_identity_residual(dil, one, 0.0, ball),
        fm.transport_identity_residual(rot, one, 0.3, ball),
        fm.transport_identity_residual(shear, one, 0.2, ball),
    )
    assert worst_bulk <= 1e-7
    sdil = fm.SurfaceFlowMap(atlas, dil)
    srot = fm.SurfaceFlowMap(atlas, rot)
    worst_surf = max(
        fm.transport_identity_residual(sdil, one, 0.0, squad, kind="surface"),
        fm.transport_identity_residual(srot, one, 0.3, squad, kind="surface"),
    )
    assert worst_surf <= 1e-7

    exp_dil = fm.DilationMap(fm.TimeProfile.exponential(1.0))
    uniform = lambda p: np.ones(p.shape[0])
    res = [
        fm.continuity_residual(exp_dil, uniform, [0.3, 0.2, 0.1], 0.5,
                               step=h, order=2)
        for h in (1e-3, 5e-4, 2.5e-4)
    ]
    order = min(np.log2(res[i] / res[i + 1]) for i in range(2))
    assert order >= 2.0 - 0.1

    vol = fm.pushforward_integral(dil, ball, one, 1.0)
    vol_err = abs(vol - 32 * np.pi / 3) / (32 * np.pi / 3)
    area = fm.pushforward_integral(sdil, squad, one, 1.0, kind="surface")
    area_err = abs(area - 16 * np.pi) / (16 * np.pi)
    assert vol_err <= 1e-6 and area_err <= 1e-6

    elapsed = time.monotonic() - t0
    _announce(
        "criterion-2 kinematics",
        elapsed <= 60.0,
        f"bulk={worst_bulk:.2e} surface={worst_surf:.2e} order={order:.2f} "
        f"ball={vol_err:.2e} sphere={area_err:.2e} ({elapsed:.1f}s <= 60s)",
    )


def test_criterion_3_first_variation(tmp_path):
    """>= 12 (configuration, variation) pairs: |fd derivative - quadrature|
    within Richardson estimate + refinement delta, decreasing under
    simultaneous refinement; each energy-variation formula individually
    verified; runtime <= 10 min."""
    t0 = time.monotonic()
    reporter = Reporter(str(tmp_path))
    rng = np.random.default_rng(0)
    run_vary(reporter, {}, rng)
    identity_records = [
        r for r in reporter.records if r["identity"] == "first-variation-identity"
    ]
    assert len(identity_records) >= 12
    per_term = [
        r for r in reporter.records
        if r["identity"].startswith(("kinetic-variation", "internal-variation",
                                     "tension-variation"))
    ]
    # the seven energy-variation formulas: three kinetic, three internal,
    # one tension term
    assert len({r["identity"] for r in per_term}) == 7
    failures = reporter.failures
    elapsed = time.monotonic() - t0
    _announce(
        "criterion-3 first-variation",
        not failures and elapsed <= 600.0,
        f"{len(identity_records)} pairs + {len(per_term)} formula checks, "
        f"{len(failures)} failures ({elapsed:.0f}s <= 600s)"
        + (f"; first failure: {failures[0]}" if failures else ""),
    )


def test_criterion_4_helmholtz(tmp_path):
    """20 round trips with coefficient error <= 1e-8, defect detector
    linear (R^2 >= 0.999), constant-pressure potential R(P_B-P_A)/2 to
    1e-9; runtime <= 60 s."""
    t0 = time.monotonic()
    reporter = Reporter(str(tmp_path))
    rng = np.random.default_rng(0)
    run_decompose(reporter, {}, rng, output_dir=str(tmp_path))
    failures = reporter.failures
    elapsed = time.monotonic() - t0
    by_id = {r["identity"]: r for r in reporter.records}
    _announce(
        "criterion-4 helmholtz",
        not failures and elapsed <= 60.0,
        f"round-trip={by_id['decomposition-round-trip']['residual']:.2e} "
        f"R2={by_id['defect-linearity']['residual']:.6f} "
        f"static={by_id['static-surface-pressure']['residual']:.2e} "
        f"({elapsed:.0f}s <= 60s)",
    )


@pytest.fixture(scope="module")
def bubble_setup():
    from baroflow.bubble import RadialTwoPhaseState, SolverConfig, equilibrium_state

    def build(n, amp=0.0, cfl=0.4):
        config = SolverConfig(
            law_a=GammaLaw(1.0, 1.4, "A"), law_b=GammaLaw(1.0, 1.4, "B"),
            law_s=GammaLaw(0.1, 2.0, "S"), n_a=n, n_b=n, cfl=cfl, system="1.3",
        )
        state = equilibrium_state(config)
        if amp:
            centers = 1.0 + (np.arange(n) + 0.5) / n
            rho_b = 1.2 * (1 + amp * np.exp(-((centers - 1.5) ** 2) / 0.02))
            state = RadialTwoPhaseState.from_fields(
                0.0, 1.0, 0.0, state.rho_S,
                np.full(n, 1.0), np.zeros(n), rho_b, np.zeros(n), 2.0,
            )
        return config, state

    return build


def test_criterion_5_bubble_solver(bubble_setup):
    """(a) equilibrium drift <= 1e-12/step over 1e4 steps; (b) mass drift
    rel <= 1e-8 to t=5; (c) surface mass constant to 1e-12; (d) energy
    drift converging at order >= 1.7 over three refinements; (e) momentum
    <= 1e-12; runtime <= 5 min."""
    from baroflow.bubble import cfl_dt, conservation_report, simulate, step

    t0 = time.monotonic()

    # (a) equilibrium preservation
    config, state = bubble_setup(64)
    ref = state.copy()
    dt = cfl_dt(state, config)
    n_steps = 10000
    for _ in range(n_steps):
        state = step(state, config, dt)
    drift = max(
        abs(state.R - ref.R),
        abs(state.Rdot - ref.Rdot),
        float(np.max(np.abs(state.rho_a - ref.rho_a))),
        float(np.max(np.abs(state.rho_b - ref.rho_b))),
        float(np.max(np.abs(state.u_a))),
        float(np.max(np.abs(state.u_b))),
    ) / n_steps
    assert drift <= 1e-12

    # (b, c, e) perturbed run to t = 5
    config, state = bubble_setup(64, amp=1e-3)
    records, _ = simulate(config, state, t_end=5.0, output_dt=0.25)
    report = conservation_report(records)
    assert report["mass_total_rel_drift"] <= 1e-8
    assert report["surface_mass_rel_drift"] <= 1e-12
    assert report["momentum_max"] <= 1e-12

    # (d) three grid/time refinements (dt tied to dr through the CFL line)
    drifts = []
    for n in (32, 64, 128):
        cfg_n, st_n = bubble_setup(n, amp=1e-3)
        recs, _ = simulate(cfg_n, st_n, t_end=0.5, output_dt=0.5)
        e0, e1 = recs[0]["energy_total"], recs[-1]["energy_total"]
        drifts.append(abs(e1 - e0) / abs(e0))
    orders = [np.log2(drifts[i] / drifts[i + 1]) for i in range(2)]
    assert min(orders) >= 1.7

    elapsed = time.monotonic() - t0
    _announce(
        "criterion-5 bubble-solver",
        elapsed <= 300.0,
        f"eq-drift/step={drift:.2e} mass={report['mass_total_rel_drift']:.2e} "
        f"surface-mass={report['surface_mass_rel_drift']:.2e} "
        f"orders={['%.2f' % o for o in orders]} momentum={report['momentum_max']:.1e} "
        f"({elapsed:.0f}s <= 300s)",
    )


def test_criterion_6_tension_static():
    """Configured jump p0 H + P_B - P_A = 0 at machine precision, held
    stationary over 1e3 steps."""
    from baroflow.bubble import (SolverConfig, balanced_tension, cfl_dt,
                                 equilibrium_state, step)

    law_a = GammaLaw(1.0, 1.4, "A")
    law_b = GammaLaw(1.0, 1.4, "B")
    tension = balanced_tension(law_a, law_b, 1.0, 1.2, 1.0)
    config = SolverConfig(law_a=law_a, law_b=law_b, tension=tension,
                          n_a=64, n_b=64, cfl=0.4, system="1.6")
    state = equilibrium_state(config, rho_a=1.0, rho_b=1.2)
    jump = tension.p0 * (-2.0 / state.R) + float(
        law_b.total_pressure(1.2)
    ) - float(law_a.total_pressure(1.0))
    assert abs(jump) <= 5e-16
    dt = cfl_dt(state, config)
    for _ in range(1000):
        state = step(state, config, dt)
    drift = max(
        abs(state.R - 1.0),
        float(np.max(np.abs(state.u_a))),
        float(np.max(np.abs(state.u_b))),
        float(np.max(np.abs(state.rho_a - 1.0))),
        float(np.max(np.abs(state.rho_b - 1.2))),
    )
    _announce(
        "criterion-6 tension-static",
        drift <= 1e-12,
        f"jump={jump:.1e} drift-over-1000-steps={drift:.2e}",
    )


def test_criterion_7_determinism(tmp_path):
    """Identical manifest + seed produce byte-identical report files."""
    import yaml

    from baroflow.cli import main

    payload = {
        "verify": {"geometry": {"n_quad": 48, "n_random_points": 2000}},
        "decompose": {"rounds": 5, "degree": 12, "source_degree": 6},
        "simulate": {
            "system": "1.3",
            "geometry": {"R0": 1.0, "Rout": 2.0},
            "laws": {
                "a": {"kind": "gamma", "kappa": 1.0, "gamma": 1.4},
                "b": {"kind": "gamma", "kappa": 1.0, "gamma": 1.4},
                "s": {"kind": "gamma", "kappa": 0.1, "gamma": 2.0},
            },
            "init": {"rho_A0": 1.0, "rho_B0": 1.2, "rho_S0": "balance",
                     "perturbation": {"amplitude": 1e-3, "width": 0.1,
                                      "location": 1.5}},
            "numerics": {"nr_A": 48, "nr_B": 48, "cfl": 0.4, "t_end": 0.5,
                         "output_dt": 0.1},
            "output": {"profiles": True},
        },
    }
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text(yaml.safe_dump(payload))
    for tag in ("run1", "run2"):
        for sub in ("verify", "decompose", "simulate"):
            status = main([sub, "--config", str(cfg), "--out",
                           str(tmp_path / tag / sub), "--seed", "11"])
            assert status == 0
    mismatches = []
    for sub in ("verify", "decompose", "simulate"):
        d1 = tmp_path / "run1" / sub
        d2 = tmp_path / "run2" / sub
        for name in sorted(os.listdir(d1)):
            if (d1 / name).read_bytes() != (d2 / name).read_bytes():
                mismatches.append(f"{sub}/{name}")
    _announce(
        "criterion-7 determinism",
        not mismatches,
        "byte-identical reports" if not mismatches else f"differs: {mismatches}",
    )
