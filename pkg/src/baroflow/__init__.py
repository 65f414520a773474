"""baroflow: geometric-variational toolkit for inviscid two-phase flow.

The package numerically realizes and verifies the building blocks of
inviscid multiphase flow with surface flow and tension:

- ``geometry``: closed surfaces as chart atlases with smooth partitions
  of unity, surface differential operators, curvature and quadrature;
- ``flowmaps``: analytic flow-map catalog, Riemannian metric factors and
  transport/continuity identities with pullback densities;
- ``laws``: barotropic energy densities and the induced total pressure;
- ``variation``: action integrals over two bulk phases plus the
  interface, flow-map perturbations, and the first-variation identity
  matching finite differences against momentum-residual quadrature;
- ``helmholtz``: Helmholtz-Weyl decomposition of surface fields on
  spheres (spectral, used for the incompressible surface pressure);
- ``bubble``: spherically symmetric two-phase solver with a tension
  -carrying interface and conservation audits (compiled kernel with a
  numpy fallback, see ``baroflow.kernels``);
- ``cli``: config-driven verification suites with deterministic reports.
"""

from .geometry import (
    ChartAtlas,
    SurfacePoint,
    SurfaceQuadrature,
    atlas_from_config,
    ellipsoid_atlas,
    sphere_atlas,
)
from .kernels import BACKEND as kernel_backend
from .laws import BarotropicLaw, ConstantTension, GammaLaw, law_from_config

__version__ = "0.1.0"

__all__ = [
    "ChartAtlas",
    "SurfacePoint",
    "SurfaceQuadrature",
    "atlas_from_config",
    "ellipsoid_atlas",
    "sphere_atlas",
    "BarotropicLaw",
    "ConstantTension",
    "GammaLaw",
    "law_from_config",
    "kernel_backend",
    "__version__",
]
