"""Barotropic constitutive laws and the induced total pressure.

A law is an energy density p(rho); the total (thermodynamic) pressure it
induces is ``P(rho) = rho p'(rho) - p(rho)``.  The catalog holds the
power law kappa*rho^gamma, the quadratic and linear degenerate cases and
a monotone-spline law fitted to tabulated (rho, p) samples.  Laws fail
loudly outside their declared validity interval; vacuum handling is the
caller's problem.
"""

import numpy as np

__all__ = [
    "LawDomainError",
    "BarotropicLaw",
    "GammaLaw",
    "QuadraticLaw",
    "LinearLaw",
    "SplineLaw",
    "ConstantTension",
    "law_from_config",
    "total_pressure",
    "energy_density",
    "represented_internal_energy",
]


class LawDomainError(ValueError):
    """Density outside a law's validity interval."""


class SingularMetricError(RuntimeError):
    """Nonpositive metric determinant where a positive one is required."""


class BarotropicLaw:
    """Energy density p(rho) with analytic first/second derivatives.

    Parameters
    ----------
    p, p_prime : callables on float arrays
        The energy density and its analytic derivative.
    p_second : callable, optional
        Second derivative; needed for sound speeds in the bubble solver.
    rho_min, rho_max : floats
        Validity interval; rho_min = 0 admits vacuum only when p(0) = 0.
    label : str
        One of "A", "B", "S" (bookkeeping only).
    """

    def __init__(self, p, p_prime, p_second=None, rho_min=0.0,
                 rho_max=np.inf, label="", name=""):
        self._p = p
        self._p_prime = p_prime
        self._p_second = p_second
        self.rho_min = float(rho_min)
        self.rho_max = float(rho_max)
        self.label = label
        self.name = name

    def _check(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < self.rho_min) or np.any(rho > self.rho_max):
            raise LawDomainError(
                f"density outside validity interval "
                f"[{self.rho_min}, {self.rho_max}] for law {self.name!r}"
            )
        return rho

    def p(self, rho):
        return np.asarray(self._p(self._check(rho)), dtype=float)

    def p_prime(self, rho):
        return np.asarray(self._p_prime(self._check(rho)), dtype=float)

    def p_second(self, rho):
        if self._p_second is None:
            raise NotImplementedError(f"law {self.name!r} has no second derivative")
        return np.asarray(self._p_second(self._check(rho)), dtype=float)

    def total_pressure(self, rho):
        """rho p'(rho) - p(rho)."""
        rho = self._check(rho)
        return rho * self._p_prime(rho) - self._p(rho)

    def total_pressure_prime(self, rho):
        """d/drho of the total pressure, = rho p''(rho)."""
        rho = self._check(rho)
        return rho * self.p_second(rho)

    def sound_speed(self, rho):
        """sqrt(rho p''(rho)), the characteristic speed of the law."""
        return np.sqrt(np.maximum(self.total_pressure_prime(rho), 0.0))


class GammaLaw(BarotropicLaw):
    """p(rho) = kappa * rho^gamma with kappa > 0, gamma >= 1."""

    def __init__(self, kappa=1.0, gamma=1.4, label=""):
        if kappa <= 0.0 or gamma < 1.0:
            raise ValueError("need kappa > 0 and gamma >= 1")
        self.kappa = float(kappa)
        self.gamma = float(gamma)
        k, g = self.kappa, self.gamma
        super().__init__(
            p=lambda r: k * r**g,
            p_prime=lambda r: k * g * r ** (g - 1.0),
            p_second=lambda r: k * g * (g - 1.0) * r ** (g - 2.0),
            rho_min=0.0,
            label=label,
            name=f"gamma(kappa={kappa}, gamma={gamma})",
        )


def QuadraticLaw(kappa=1.0, label=""):
    """p(rho) = kappa * rho^2 (total pressure kappa * rho^2)."""
    return GammaLaw(kappa, 2.0, label=label)


class LinearLaw(BarotropicLaw):
    """p(rho) = c * rho; degenerate, induces zero total pressure."""

    def __init__(self, c=1.0, label=""):
        c = float(c)
        super().__init__(
            p=lambda r: c * r,
            p_prime=lambda r: np.full_like(np.asarray(r, dtype=float), c),
            p_second=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
            rho_min=0.0,
            label=label,
            name=f"linear(c={c})",
        )


class SplineLaw(BarotropicLaw):
    """Monotone C^1 interpolant of tabulated (rho, p) samples."""

    def __init__(self, rho_table, p_table, label=""):
        from scipy.interpolate import PchipInterpolator

        rho_table = np.asarray(rho_table, dtype=float)
        p_table = np.asarray(p_table, dtype=float)
        spline = PchipInterpolator(rho_table, p_table)
        d1 = spline.derivative(1)
        d2 = spline.derivative(2)
        super().__init__(
            p=spline,
            p_prime=d1,
            p_second=d2,
            rho_min=float(rho_table[0]),
            rho_max=float(rho_table[-1]),
            label=label,
            name="spline",
        )

    @classmethod
    def from_csv(cls, path, label=""):
        data = np.loadtxt(path, delimiter=",", comments="#")
        return cls(data[:, 0], data[:, 1], label=label)


class ConstantTension:
    """Constant surface total pressure (no surface density)."""

    def __init__(self, p0):
        self.p0 = float(p0)


def law_from_config(cfg, label=""):
    """Law from a config mapping {kind: gamma|quadratic|linear|spline, ...}."""
    kind = cfg.get("kind", "gamma")
    if kind == "gamma":
        return GammaLaw(cfg.get("kappa", 1.0), cfg.get("gamma", 1.4), label=label)
    if kind == "quadratic":
        return QuadraticLaw(cfg.get("kappa", 1.0), label=label)
    if kind == "linear":
        return LinearLaw(cfg.get("c", 1.0), label=label)
    if kind == "spline":
        return SplineLaw.from_csv(cfg["path"], label=label)
    raise ValueError(f"unknown law kind {kind!r}")


def total_pressure(law, rho):
    """rho p'(rho) - p(rho) for a law object."""
    return law.total_pressure(rho)


def energy_density(law, rho, v):
    """(kinetic, internal) = (rho |v|^2 / 2, p(rho))."""
    v = np.asarray(v, dtype=float)
    rho = np.asarray(rho, dtype=float)
    kinetic = 0.5 * rho * np.sum(np.atleast_2d(v) ** 2, axis=-1)
    internal = law.p(rho)
    if kinetic.shape == ():
        return float(kinetic), float(internal)
    return kinetic, internal


def represented_internal_energy(law, rho0, sqrtG):
    """Reference-coordinate internal-energy integrand p(rho0/sqrtG)*sqrtG."""
    sqrtG = np.asarray(sqrtG, dtype=float)
    if np.any(sqrtG <= 0.0):
        raise SingularMetricError("metric determinant must be positive")
    return law.p(np.asarray(rho0, dtype=float) / sqrtG) * sqrtG
