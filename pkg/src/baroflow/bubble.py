"""Spherically symmetric two-phase bubble solver with surface tension.

Two barotropic Euler phases occupy the shells (0, R(t)) and (R(t), R_out)
on interface-scaled moving grids; the interface carries a surface density
and a barotropic surface pressure driving the radial momentum balance

    rho_S d(Rdot)/dt = P_S * (2/R) - (P_B(R+) - P_A(R-)),

with the one-sided pressures taken from limited reconstruction at the
interface.  Surface mass 4 pi R^2 rho_S is an exact invariant and is
carried analytically alongside R; bulk phases are integrated in
conservative ALE form (r^2-weighted masses/momenta), so each phase's mass
telescopes to roundoff.  Time integration is classic RK4 over the whole
coupled system.

In the massless-interface mode (constant tension p0, rho_S = 0) the
interface moves with the acoustic-impedance velocity that enforces the
algebraic jump P_A - P_B = -2 p0 / R as a constraint; the configured
static balance is then a fixed point to roundoff.

Shocks are limited but not an acceptance target: all audited runs use
smooth near-equilibrium data.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .laws import BarotropicLaw, ConstantTension, GammaLaw

__all__ = [
    "SolverError",
    "VacuumError",
    "CFLError",
    "SolverConfig",
    "RadialTwoPhaseState",
    "equilibrium_state",
    "radial_rhs",
    "cfl_dt",
    "step",
    "simulate",
    "conservation_report",
    "frozen_time_incompressible_residual",
]

FOUR_PI = 4.0 * math.pi

SYSTEM_ALIASES = {
    "1.3": "compressible-surface",
    "compressible-surface": "compressible-surface",
    "1.6": "tension-only",
    "tension-only": "tension-only",
}


class SolverError(RuntimeError):
    pass


class VacuumError(SolverError):
    pass


class CFLError(SolverError):
    pass


def _gamma_params(law):
    if not isinstance(law, GammaLaw):
        raise SolverError(
            "the radial solver requires power-type laws (kappa rho^gamma)"
        )
    return law.kappa, law.gamma


@dataclass
class SolverConfig:
    law_a: BarotropicLaw
    law_b: BarotropicLaw
    law_s: BarotropicLaw | None = None
    tension: ConstantTension | None = None
    n_a: int = 64
    n_b: int = 64
    cfl: float = 0.4
    system: str = "compressible-surface"
    time_order: int = 4
    reconstruction: str = "minmod"

    def __post_init__(self):
        self.system = SYSTEM_ALIASES[self.system]
        if not 0.0 < self.cfl < 1.0:
            raise ValueError("CFL number must lie in (0, 1)")
        if min(self.n_a, self.n_b) < 16:
            raise ValueError("grid resolution must be >= 16 per phase")
        if self.time_order != 4:
            raise ValueError("only the 4th-order integrator is provided")
        if self.reconstruction not in ("minmod", "central", "smooth"):
            raise ValueError(
                "reconstruction must be 'minmod', 'central' or 'smooth'"
            )
        if self.system == "compressible-surface" and self.law_s is None:
            raise ValueError("compressible-surface system needs a surface law")
        if self.system == "tension-only" and self.tension is None:
            raise ValueError("tension-only system needs a ConstantTension")

    @property
    def limiter_code(self):
        return {"minmod": 0, "central": 1, "smooth": 2}[self.reconstruction]


class RadialTwoPhaseState:
    """Cell averages of both phases plus the interface state.

    Internally the bulk unknowns are the r^2-weighted conserved cell
    integrals (M, P) on unit-fraction grids scaled by R(t); the exposed
    ``rho``/``u`` arrays are derived.  ``surface_mass`` stores R^2 rho_S
    (4 pi dropped), which the dynamics keep exactly constant.
    """

    def __init__(self, t, R, Rdot, surface_mass, M_a, P_a, M_b, P_b, R_out):
        self.t = float(t)
        self.R = float(R)
        self.Rdot = float(Rdot)
        self.surface_mass = float(surface_mass)
        self.M_a = np.asarray(M_a, dtype=float)
        self.P_a = np.asarray(P_a, dtype=float)
        self.M_b = np.asarray(M_b, dtype=float)
        self.P_b = np.asarray(P_b, dtype=float)
        self.R_out = float(R_out)

    # -- grid geometry -----------------------------------------------------

    def faces_a(self):
        return self.R * np.linspace(0.0, 1.0, self.M_a.shape[0] + 1)

    def faces_b(self):
        return self.R + (self.R_out - self.R) * np.linspace(
            0.0, 1.0, self.M_b.shape[0] + 1
        )

    @staticmethod
    def _volumes(faces):
        return (faces[1:] ** 3 - faces[:-1] ** 3) / 3.0

    # -- derived fields ----------------------------------------------------

    @property
    def rho_S(self):
        return self.surface_mass / self.R**2

    @property
    def rho_a(self):
        return self.M_a / self._volumes(self.faces_a())

    @property
    def rho_b(self):
        return self.M_b / self._volumes(self.faces_b())

    @property
    def u_a(self):
        return self.P_a / self.M_a

    @property
    def u_b(self):
        return self.P_b / self.M_b

    def copy(self):
        return RadialTwoPhaseState(
            self.t, self.R, self.Rdot, self.surface_mass,
            self.M_a.copy(), self.P_a.copy(), self.M_b.copy(), self.P_b.copy(),
            self.R_out,
        )

    def check_invariants(self):
        if not 0.0 < self.R < self.R_out:
            raise SolverError(f"interface radius {self.R} left (0, {self.R_out})")
        if np.any(self.rho_a <= 0.0) or np.any(self.rho_b <= 0.0):
            raise VacuumError("nonpositive density cell")
        if self.surface_mass < 0.0:
            raise SolverError("negative surface mass")

    @classmethod
    def from_fields(cls, t, R, Rdot, rho_S, rho_a, u_a, rho_b, u_b, R_out):
        rho_a = np.asarray(rho_a, dtype=float)
        rho_b = np.asarray(rho_b, dtype=float)
        faces_a = R * np.linspace(0.0, 1.0, rho_a.shape[0] + 1)
        faces_b = R + (R_out - R) * np.linspace(0.0, 1.0, rho_b.shape[0] + 1)
        V_a = cls._volumes(faces_a)
        V_b = cls._volumes(faces_b)
        M_a = rho_a * V_a
        M_b = rho_b * V_b
        state = cls(
            t, R, Rdot, rho_S * R**2,
            M_a, M_a * np.asarray(u_a, dtype=float),
            M_b, M_b * np.asarray(u_b, dtype=float),
            R_out,
        )
        state.check_invariants()
        return state


def equilibrium_state(config, R=1.0, R_out=2.0, rho_a=1.0, rho_b=1.2):
    """Uniform static state whose interface pressure balance is exact.

    For the compressible-surface system rho_S solves
    P_S(rho_S) = (R/2)(P_B - P_A); in the tension-only mode the caller's
    ConstantTension is expected to satisfy the jump (use
    ``balanced_tension`` to construct it).
    """
    pa = float(config.law_a.total_pressure(rho_a))
    pb = float(config.law_b.total_pressure(rho_b))
    if config.system == "compressible-surface":
        target = 0.5 * R * (pb - pa)
        if target < 0.0:
            raise ValueError("need P_B >= P_A for a nonnegative surface pressure")
        kappa, gamma = _gamma_params(config.law_s)
        rho_s = (target / ((gamma - 1.0) * kappa)) ** (1.0 / gamma)
    else:
        rho_s = 0.0
    return RadialTwoPhaseState.from_fields(
        0.0, R, 0.0, rho_s,
        np.full(config.n_a, rho_a), np.zeros(config.n_a),
        np.full(config.n_b, rho_b), np.zeros(config.n_b),
        R_out,
    )


def balanced_tension(law_a, law_b, rho_a, rho_b, R):
    """ConstantTension p0 with p0 * (-2/R) + (P_B - P_A) = 0 in floats."""
    pa = float(law_a.total_pressure(rho_a))
    pb = float(law_b.total_pressure(rho_b))
    return ConstantTension(0.5 * R * (pb - pa))


# ---------------------------------------------------------------------------
# Right-hand side


class _StateDerivative:
    def __init__(self, dM_a, dP_a, dM_b, dP_b, dR, dRdot, diagnostics):
        self.dM_a = dM_a
        self.dP_a = dP_a
        self.dM_b = dM_b
        self.dP_b = dP_b
        self.dR = dR
        self.dRdot = dRdot
        self.diagnostics = diagnostics

    @property
    def rho_S_rate_factor(self):
        """d(rho_S)/dt / rho_S = -2 Rdot / R (from the exact invariant)."""
        return -2.0 * self.dR / self.diagnostics["R"]


def _interface_speed_tension(state, config):
    """Acoustic-impedance interface velocity for the massless interface.

    Built from the cells adjacent to the interface; enforces the jump
    P_A - P_B = -2 p0 / R through the linearized two-sided relation.
    """
    ka, ga = _gamma_params(config.law_a)
    kb, gb = _gamma_params(config.law_b)
    rho_a = state.rho_a[-1]
    u_a = state.u_a[-1]
    rho_b = state.rho_b[0]
    u_b = state.u_b[0]
    pa = (ga - 1.0) * ka * rho_a**ga
    pb = (gb - 1.0) * kb * rho_b**gb
    ca = math.sqrt(ga * (ga - 1.0) * ka * rho_a ** (ga - 1.0))
    cb = math.sqrt(gb * (gb - 1.0) * kb * rho_b ** (gb - 1.0))
    za = rho_a * ca
    zb = rho_b * cb
    return (pa - pb + 2.0 * config.tension.p0 / state.R + za * u_a + zb * u_b) / (
        za + zb
    )


def radial_rhs(state, config):
    """Method-of-lines time derivative of the packed state.

    Bulk: conservative ALE divergence of the Rusanov/MUSCL fluxes with
    the r^2 pressure source (the radial conservative form of the
    continuity and momentum equations).  Interface: surface continuity is
    carried by the exact invariant R^2 rho_S; the surface momentum ODE
    uses the one-sided reconstructed pressures.
    """
    ka, ga = _gamma_params(config.law_a)
    kb, gb = _gamma_params(config.law_b)
    if config.system == "tension-only":
        w = _interface_speed_tension(state, config)
    else:
        w = state.Rdot
    dM_a, dP_a, smax_a, _, hi_a = kernels.phase_rhs(
        state.rho_a, state.u_a, 0.0, state.R, 0.0, w, ka, ga,
        config.limiter_code,
    )
    dM_b, dP_b, smax_b, lo_b, _ = kernels.phase_rhs(
        state.rho_b, state.u_b, state.R, state.R_out, w, 0.0, kb, gb,
        config.limiter_code,
    )
    p_a_face = hi_a[3]
    p_b_face = lo_b[3]
    diagnostics = {
        "R": state.R,
        "smax": max(smax_a, smax_b),
        "min_width": min(state.R / state.M_a.shape[0],
                         (state.R_out - state.R) / state.M_b.shape[0]),
        "p_a_face": p_a_face,
        "p_b_face": p_b_face,
        "u_a_face": hi_a[1],
        "u_b_face": lo_b[1],
        "interface_speed": w,
    }
    if config.system == "tension-only":
        dR = w
        dRdot = 0.0
    else:
        rho_s = state.rho_S
        p_s = float(config.law_s.total_pressure(rho_s))
        if rho_s <= 0.0:
            raise SolverError("compressible-surface system needs rho_S > 0")
        dR = state.Rdot
        dRdot = (p_s * (2.0 / state.R) - (p_b_face - p_a_face)) / rho_s
        diagnostics["p_s"] = p_s
    return _StateDerivative(dM_a, dP_a, dM_b, dP_b, dR, dRdot, diagnostics)


def cfl_dt(state, config):
    """Largest admissible step CFL * min cell width / max wave speed."""
    d = radial_rhs(state, config).diagnostics
    return config.cfl * d["min_width"] / max(d["smax"], 1e-300)


def _axpy(state, deriv, coef):
    out = state.copy()
    out.t = state.t + coef
    out.R = state.R + coef * deriv.dR
    out.Rdot = state.Rdot + coef * deriv.dRdot
    out.M_a = state.M_a + coef * deriv.dM_a
    out.P_a = state.P_a + coef * deriv.dP_a
    out.M_b = state.M_b + coef * deriv.dM_b
    out.P_b = state.P_b + coef * deriv.dP_b
    return out


def step(state, config, dt):
    """One RK4 step of the coupled bulk + interface system."""
    if dt < 0.0:
        raise ValueError("negative step")
    if dt > 0.0:
        limit = cfl_dt(state, config)
        if dt > limit * (1.0 + 1e-9):
            raise CFLError(f"dt={dt:.3e} exceeds the CFL limit {limit:.3e}")
    k1 = radial_rhs(state, config)
    k2 = radial_rhs(_axpy(state, k1, 0.5 * dt), config)
    k3 = radial_rhs(_axpy(state, k2, 0.5 * dt), config)
    k4 = radial_rhs(_axpy(state, k3, dt), config)
    out = state.copy()
    out.t = state.t + dt
    sixth = dt / 6.0
    out.R = state.R + sixth * (k1.dR + 2.0 * k2.dR + 2.0 * k3.dR + k4.dR)
    out.Rdot = state.Rdot + sixth * (
        k1.dRdot + 2.0 * k2.dRdot + 2.0 * k3.dRdot + k4.dRdot
    )
    out.M_a = state.M_a + sixth * (k1.dM_a + 2.0 * k2.dM_a + 2.0 * k3.dM_a + k4.dM_a)
    out.P_a = state.P_a + sixth * (k1.dP_a + 2.0 * k2.dP_a + 2.0 * k3.dP_a + k4.dP_a)
    out.M_b = state.M_b + sixth * (k1.dM_b + 2.0 * k2.dM_b + 2.0 * k3.dM_b + k4.dM_b)
    out.P_b = state.P_b + sixth * (k1.dP_b + 2.0 * k2.dP_b + 2.0 * k3.dP_b + k4.dP_b)
    if config.system == "tension-only":
        out.Rdot = _interface_speed_tension(out, config)
    try:
        out.check_invariants()
    except SolverError as exc:
        raise SolverError(
            f"invariants broken after step to t={out.t:.6g}: {exc}"
        ) from exc
    return out


# ---------------------------------------------------------------------------
# Runs and audits


def observables(state, config):
    """Conserved-quantity snapshot (masses, momenta, energies)."""
    V_a = state._volumes(state.faces_a())
    V_b = state._volumes(state.faces_b())
    rho_a, rho_b = state.rho_a, state.rho_b
    u_a, u_b = state.u_a, state.u_b
    mass_a = FOUR_PI * float(np.sum(state.M_a))
    mass_b = FOUR_PI * float(np.sum(state.M_b))
    mass_s = FOUR_PI * state.surface_mass
    kinetic = FOUR_PI * (
        float(np.sum(0.5 * state.P_a**2 / state.M_a))
        + float(np.sum(0.5 * state.P_b**2 / state.M_b))
        + 0.5 * state.surface_mass * state.Rdot**2
    )
    internal = FOUR_PI * (
        float(np.sum(config.law_a.p(rho_a) * V_a))
        + float(np.sum(config.law_b.p(rho_b) * V_b))
    )
    p_s = 0.0
    if config.system == "compressible-surface":
        internal += FOUR_PI * float(config.law_s.p(state.rho_S)) * state.R**2
        p_s = float(config.law_s.total_pressure(state.rho_S))
    # radial symmetry: the vector total of rho v integrates to zero
    # (the angular average of the unit normal vanishes identically)
    momentum = 0.0
    return {
        "t": state.t,
        "R": state.R,
        "Rdot": state.Rdot,
        "rho_S": state.rho_S,
        "mass_A": mass_a,
        "mass_B": mass_b,
        "mass_s": mass_s,
        "mass_total": mass_a + mass_b + mass_s,
        "momentum": momentum,
        "energy_kinetic": kinetic,
        "energy_internal": internal,
        "energy_total": kinetic + internal,
        "surface_pressure": p_s,
        "u_a_wall": float(u_a[-1]),
        "u_b_wall": float(u_b[-1]),
    }


def simulate(config, initial_state, t_end, output_dt=None, max_steps=10**7):
    """March to t_end with CFL-limited RK4 steps; record at the cadence.

    Returns (records, states): ``records`` are observables rows sampled
    at the output cadence (always including the initial and final
    states), ``states`` the matching state snapshots.
    """
    state = initial_state.copy()
    records = [observables(state, config)]
    states = [state.copy()]
    next_output = output_dt if output_dt else np.inf
    sign_changes = 0
    last_sign = math.copysign(
        1.0, records[0]["surface_pressure"] or 1.0
    )
    for _ in range(max_steps):
        if state.t >= t_end - 1e-14:
            break
        dt = min(cfl_dt(state, config), t_end - state.t, next_output - state.t)
        state = step(state, config, dt)
        if config.system == "compressible-surface":
            s = math.copysign(1.0, config.law_s.total_pressure(state.rho_S) or 1.0)
            if s != last_sign:
                sign_changes += 1
                last_sign = s
        if output_dt and state.t >= next_output - 1e-12:
            records.append(observables(state, config))
            states.append(state.copy())
            next_output += output_dt
    else:
        raise SolverError("step budget exhausted before t_end")
    if not records or records[-1]["t"] < state.t - 1e-14:
        records.append(observables(state, config))
        states.append(state.copy())
    records[-1]["surface_pressure_sign_changes"] = sign_changes
    return records, states


def conservation_report(records):
    """Drift summary of the conserved quantities along a trajectory."""
    m0 = records[0]["mass_total"]
    e0 = records[0]["energy_total"]
    ms0 = records[0]["mass_s"]
    mass_drift = max(abs(r["mass_total"] - m0) for r in records) / abs(m0)
    mass_a_drift = max(
        abs(r["mass_A"] - records[0]["mass_A"]) for r in records
    ) / abs(records[0]["mass_A"])
    mass_b_drift = max(
        abs(r["mass_B"] - records[0]["mass_B"]) for r in records
    ) / abs(records[0]["mass_B"])
    surface_drift = max(abs(r["mass_s"] - ms0) for r in records) / max(abs(ms0), 1e-300)
    energy_drift = max(abs(r["energy_total"] - e0) for r in records) / abs(e0)
    momentum_max = max(abs(r["momentum"]) for r in records)
    return {
        "mass_total_rel_drift": mass_drift,
        "mass_a_rel_drift": mass_a_drift,
        "mass_b_rel_drift": mass_b_drift,
        "surface_mass_rel_drift": surface_drift,
        "energy_total_rel_drift": energy_drift,
        "momentum_max": momentum_max,
        "boundary_momentum_flux_note": (
            "outer-boundary pressure impulse integrates to the zero vector "
            "by spherical symmetry"
        ),
    }


def frozen_time_incompressible_residual(state, config, degree_l=1, order_m=0,
                                        amplitude=0.3, harmonic_degree=12):
    """Structure check of the divergence-free-surface system at one instant.

    The caller prescribes a tangential rotational-harmonic velocity on
    the frozen interface sphere (surface-divergence-free by
    construction); the surface pressure is recovered with the
    decomposition module and the momentum residual of the incompressible
    surface balance is reported.
    """
    from .harmonics import SphericalHarmonicBasis, rotational_field
    from .helmholtz import SphereContext, incompressible_surface_pressure

    R = state.R
    ctx = SphereContext(R, degree=harmonic_degree)
    basis = SphericalHarmonicBasis(max(degree_l, 1), R)
    v_field = rotational_field(basis, degree_l, order_m)

    def v_s(points):
        return amplitude * v_field(points)

    # certified surface-divergence-free: project the ambient Jacobian
    quadpts = ctx.quad.points
    h = 1e-6
    div = np.zeros(quadpts.shape[0])
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        div += (v_s(quadpts + e)[:, j] - v_s(quadpts - e)[:, j]) / (2.0 * h)
    u = quadpts / R
    ndotgrad = np.zeros(quadpts.shape[0])
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        ndotgrad += u[:, j] * np.einsum(
            "ni,ni->n", (v_s(quadpts + e) - v_s(quadpts - e)) / (2.0 * h), u
        )
    div_surface = float(np.max(np.abs(div - ndotgrad)))

    # material derivative of the steady tangential field: (v . grad) v
    def accel(points):
        out = np.zeros_like(points)
        vv = v_s(points)
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            out += vv[:, j][:, None] * (v_s(points + e) - v_s(points - e)) / (2.0 * h)
        return state.rho_S * out

    pa = float(config.law_a.total_pressure(state.rho_a[-1]))
    pb = float(config.law_b.total_pressure(state.rho_b[0]))
    jump = lambda points: np.full(points.shape[0], pb - pa)
    potential, residual = incompressible_surface_pressure(
        ctx, accel, jump, defect_tol=1e-6
    )
    # transported uniform surface density stays uniform: D_t rho_S = (v.grad)rho_S = 0
    d_rho = 0.0
    return {
        "div_surface_max": div_surface,
        "pressure_potential": potential,
        "momentum_residual_l2": residual,
        "density_material_derivative": d_rho,
        "static_potential_value": float(potential(np.array([[0.0, 0.0, R]]))[0]),
    }
