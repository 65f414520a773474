# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled radial finite-volume kernel (hot loop of the bubble solver).

Mirrors ``_radial_numpy.phase_rhs`` operation for operation so the two
backends agree to the last ulp; the parity test enforces it.  Keep any
change synchronized with the numpy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, pow, sqrt

cnp.import_array()

BACKEND = "cython"


cdef inline double _minmod(double a, double b) noexcept nogil:
    if a > 0.0 and b > 0.0:
        return a if a < b else b
    if a < 0.0 and b < 0.0:
        return a if a > b else b
    return 0.0


def phase_rhs(cnp.ndarray[cnp.float64_t, ndim=1] rho,
              cnp.ndarray[cnp.float64_t, ndim=1] u,
              double r_in, double r_out, double w_in, double w_out,
              double kappa, double gamma, int limiter=0):
    """See _radial_numpy.phase_rhs; identical contract and arithmetic."""
    cdef Py_ssize_t n = rho.shape[0]
    cdef double dr = (r_out - r_in) / n
    cdef double gm1 = gamma - 1.0

    cdef cnp.ndarray[cnp.float64_t, ndim=1] dM = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dP = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rho_e = np.empty(n + 4)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u_e = np.empty(n + 4)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] srho = np.empty(n + 2)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] su = np.empty(n + 2)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f_mass = np.empty(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f_mom = np.empty(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] area = np.empty(n + 1)

    cdef Py_ssize_t i, j
    cdef double r_face, w_face
    cdef double rho_L, rho_R, u_L, u_R, p_L, p_R, c_L, c_R, lam
    cdef double a_L, a_R, p_cell, w_cell, c_cell, s, smax
    cdef double lo_rho = 0.0, lo_u = 0.0, lo_c = 0.0, lo_p = 0.0
    cdef double hi_rho = 0.0, hi_u = 0.0, hi_c = 0.0, hi_p = 0.0

    for i in range(n):
        rho_e[i + 2] = rho[i]
        u_e[i + 2] = u[i]
    rho_e[1] = rho[0]
    rho_e[0] = rho[1]
    u_e[1] = 2.0 * w_in - u[0]
    u_e[0] = 2.0 * w_in - u[1]
    rho_e[n + 2] = rho[n - 1]
    rho_e[n + 3] = rho[n - 2]
    u_e[n + 2] = 2.0 * w_out - u[n - 1]
    u_e[n + 3] = 2.0 * w_out - u[n - 2]

    if limiter == 0:
        for i in range(n + 2):
            srho[i] = _minmod(rho_e[i + 1] - rho_e[i], rho_e[i + 2] - rho_e[i + 1])
            su[i] = _minmod(u_e[i + 1] - u_e[i], u_e[i + 2] - u_e[i + 1])
    else:
        for i in range(n + 2):
            srho[i] = 0.5 * ((rho_e[i + 1] - rho_e[i]) + (rho_e[i + 2] - rho_e[i + 1]))
            su[i] = 0.5 * ((u_e[i + 1] - u_e[i]) + (u_e[i + 2] - u_e[i + 1]))

    for j in range(n + 1):
        r_face = r_in + j * dr
        area[j] = r_face * r_face
        w_face = w_in + (w_out - w_in) * ((<double> j) / (<double> n))
        rho_L = rho_e[j + 1] + 0.5 * srho[j]
        rho_R = rho_e[j + 2] - 0.5 * srho[j + 1]
        u_L = u_e[j + 1] + 0.5 * su[j]
        u_R = u_e[j + 2] - 0.5 * su[j + 1]
        p_L = gm1 * kappa * pow(rho_L, gamma)
        p_R = gm1 * kappa * pow(rho_R, gamma)
        c_L = sqrt(gamma * gm1 * kappa * pow(rho_L, gm1))
        c_R = sqrt(gamma * gm1 * kappa * pow(rho_R, gm1))
        if limiter == 2:
            lam = 2.0 * sqrt(
                0.5 * ((u_L - w_face) * (u_L - w_face)
                       + (u_R - w_face) * (u_R - w_face))
                + 0.5 * (c_L * c_L + c_R * c_R)
            )
        else:
            a_L = fabs(u_L - w_face) + c_L
            a_R = fabs(u_R - w_face) + c_R
            lam = a_L if a_L > a_R else a_R
        f_mass[j] = 0.5 * (rho_L * (u_L - w_face) + rho_R * (u_R - w_face)) \
            - 0.5 * lam * (rho_R - rho_L)
        f_mom[j] = 0.5 * (
            rho_L * u_L * (u_L - w_face) + p_L
            + rho_R * u_R * (u_R - w_face) + p_R
        ) - 0.5 * lam * (rho_R * u_R - rho_L * u_L)
        if j == 0:
            lo_rho, lo_u, lo_c, lo_p = rho_R, u_R, c_R, p_R
        if j == n:
            hi_rho, hi_u, hi_c, hi_p = rho_L, u_L, c_L, p_L

    smax = 0.0
    for i in range(n):
        p_cell = gm1 * kappa * pow(rho[i], gamma)
        dM[i] = area[i] * f_mass[i] - area[i + 1] * f_mass[i + 1]
        dP[i] = area[i] * f_mom[i] - area[i + 1] * f_mom[i + 1] \
            + p_cell * (area[i + 1] - area[i])
        w_cell = 0.5 * (
            (w_in + (w_out - w_in) * ((<double> i) / (<double> n)))
            + (w_in + (w_out - w_in) * ((<double> (i + 1)) / (<double> n)))
        )
        c_cell = sqrt(gamma * gm1 * kappa * pow(rho[i], gm1))
        s = fabs(u[i] - w_cell) + c_cell
        if s > smax:
            smax = s

    return (
        dM, dP, smax,
        (lo_rho, lo_u, lo_c, lo_p),
        (hi_rho, hi_u, hi_c, hi_p),
    )
