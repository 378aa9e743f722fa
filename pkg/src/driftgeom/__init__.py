"""Chart-level Riemannian geometry with a drift field, comparison and gradient-estimate checks.

Subpackages and modules:

- :mod:`driftgeom.geometry` charts, metrics, curvature and ``Ric_X``
- :mod:`driftgeom.operators` drifted Laplacian and the Bochner residual
- :mod:`driftgeom.geodesics` geodesic shooting and the comparison check
- :mod:`driftgeom.solver` finite-difference and one-dimensional solvers
- :mod:`driftgeom.estimates` bound bracket, cubic, Harnack factor and experiments
- :mod:`driftgeom.worked_examples` the paraboloid and one-dimensional fixtures
- :mod:`driftgeom.cli` command-line entry point
"""
from importlib.metadata import PackageNotFoundError, version as _version

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .errors import (ComparisonUnavailable, ConfigError, DomainError, DriftGeomError, GeometryError,
                     NonConvergenceError, NumericError, PositivityError, TruncatedPathError, UsageError)

__all__ = [
    "__version__",
    "DriftGeomError",
    "UsageError",
    "DomainError",
    "GeometryError",
    "NumericError",
    "NonConvergenceError",
    "PositivityError",
    "ComparisonUnavailable",
    "TruncatedPathError",
    "ConfigError",
]
