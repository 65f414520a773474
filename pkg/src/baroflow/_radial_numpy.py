"""Pure-numpy radial finite-volume kernel (fallback backend).

One phase of the spherically symmetric two-phase solver: MUSCL/minmod
reconstruction, Rusanov flux in the moving-mesh frame, r^2 area weighting
and the well-balanced pressure source.  The compiled kernel mirrors this
arithmetic operation for operation; keep the two in sync.
"""

import numpy as np

BACKEND = "numpy"


def _minmod(a, b):
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def phase_rhs(rho, u, r_in, r_out, w_in, w_out, kappa, gamma, limiter=0):
    """Time derivatives of the r^2-weighted cell masses and momenta.

    The grid is uniform on [r_in, r_out] with face velocities linear
    between ``w_in`` and ``w_out`` (mesh slaved to the moving interface).
    Walls are mirror ghosts moving at the face velocity, which makes the
    wall mass flux exactly zero.  ``limiter``: 0 = minmod (production),
    1 = central slopes (smooth in the data; used by the time-integrator
    order diagnostic).

    Returns (dM, dP, smax, lo_state, hi_state); the states are the
    one-sided interior reconstructions (rho, u, c, P) at the two walls.
    """
    n = rho.shape[0]
    dr = (r_out - r_in) / n
    j = np.arange(n + 1)
    r_face = r_in + j * dr
    w_face = w_in + (w_out - w_in) * (j / n)

    # mirror ghosts (two per side) in the wall frame
    rho_e = np.empty(n + 4)
    u_e = np.empty(n + 4)
    rho_e[2:-2] = rho
    u_e[2:-2] = u
    rho_e[1] = rho[0]
    rho_e[0] = rho[1]
    u_e[1] = 2.0 * w_in - u[0]
    u_e[0] = 2.0 * w_in - u[1]
    rho_e[-2] = rho[-1]
    rho_e[-1] = rho[-2]
    u_e[-2] = 2.0 * w_out - u[-1]
    u_e[-1] = 2.0 * w_out - u[-2]

    drho = rho_e[1:] - rho_e[:-1]
    du = u_e[1:] - u_e[:-1]
    if limiter == 0:
        srho = _minmod(drho[:-1], drho[1:])
        su = _minmod(du[:-1], du[1:])
    else:
        srho = 0.5 * (drho[:-1] + drho[1:])
        su = 0.5 * (du[:-1] + du[1:])

    # face states: L from cell j+1, R from cell j+2 (extended indexing)
    rho_L = rho_e[1:n + 2] + 0.5 * srho[: n + 1]
    rho_R = rho_e[2:n + 3] - 0.5 * srho[1: n + 2]
    u_L = u_e[1:n + 2] + 0.5 * su[: n + 1]
    u_R = u_e[2:n + 3] - 0.5 * su[1: n + 2]

    gm1 = gamma - 1.0
    p_L = gm1 * kappa * rho_L**gamma
    p_R = gm1 * kappa * rho_R**gamma
    c_L = np.sqrt(gamma * gm1 * kappa * rho_L**gm1)
    c_R = np.sqrt(gamma * gm1 * kappa * rho_R**gm1)

    if limiter == 2:
        # smooth upper bound 2 sqrt(mean(a^2) + mean(c^2)) >= |a| + c:
        # keeps the semi-discrete operator differentiable for
        # integrator-order tests (more dissipative than Rusanov)
        lam = 2.0 * np.sqrt(
            0.5 * ((u_L - w_face) ** 2 + (u_R - w_face) ** 2)
            + 0.5 * (c_L**2 + c_R**2)
        )
    else:
        lam = np.maximum(
            np.abs(u_L - w_face) + c_L, np.abs(u_R - w_face) + c_R
        )
    f_mass = 0.5 * (rho_L * (u_L - w_face) + rho_R * (u_R - w_face)) \
        - 0.5 * lam * (rho_R - rho_L)
    f_mom = 0.5 * (
        rho_L * u_L * (u_L - w_face) + p_L
        + rho_R * u_R * (u_R - w_face) + p_R
    ) - 0.5 * lam * (rho_R * u_R - rho_L * u_L)

    area = r_face**2
    dM = area[:-1] * f_mass[:-1] - area[1:] * f_mass[1:]
    p_cell = gm1 * kappa * rho**gamma
    dP = area[:-1] * f_mom[:-1] - area[1:] * f_mom[1:] \
        + p_cell * (area[1:] - area[:-1])

    w_cell = 0.5 * (w_face[:-1] + w_face[1:])
    c_cell = np.sqrt(gamma * gm1 * kappa * rho**gm1)
    smax = float(np.max(np.abs(u - w_cell) + c_cell))

    lo_state = (float(rho_R[0]), float(u_R[0]), float(c_R[0]), float(p_R[0]))
    hi_state = (float(rho_L[n]), float(u_L[n]), float(c_L[n]), float(p_L[n]))
    return dM, dP, smax, lo_state, hi_state
