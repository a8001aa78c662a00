"""Charge control of planar polygonal linkages.

Quadrilaterals: the moduli circle as an oval in squared diagonals, critical
points of the diagonal Coulomb potential, the inverse map from convex
configurations to controlling charges, and two-stage navigation.
Equilateral pentagons: the unique positive charge pair making a strictly
convex configuration critical.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryConfiguration,
    ChartBoundary,
    Degenerate,
    EmptyModuliSpace,
    InvalidLinkage,
    LinkforgeError,
    NotAligned,
    NotConvex,
    NotStrictlyConvex,
    NumericalFailure,
)
from .geometry import (  # noqa: E402
    Linkage,
    PentagonConfig,
    QuadConfig,
    classify_quad,
    reconstruct_pentagon,
    reconstruct_quad,
)
from .quad_moduli import build_oval, cayley_menger, corrected_cubic  # noqa: E402
from .potential import COULOMB, LOG, ChargeSystem, PotentialKind, power  # noqa: E402
from .quad_control import (  # noqa: E402
    census,
    charge_to_minimum,
    critical_points,
    navigate,
    stabilize_quad,
)
from .pentagon_control import (  # noqa: E402
    global_min_probe,
    stabilize_pentagon,
    verify_critical,
)
